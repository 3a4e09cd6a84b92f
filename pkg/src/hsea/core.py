"""Linear fitness functions over relevant bits, with exact integer arithmetic.

Fitness of a bit vector x is sum(w_i * x_i) over the n relevant positions;
the global optimum is the all-zeros vector with fitness 0.  Weights are exact
positive integers so that the elitist acceptance rule f(y) <= f(x) has
unambiguous tie semantics (ties are real events for unit or duplicated
weights).  Positions are 0-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .seeding import make_rng

# Total weight must fit a 128-bit unsigned accumulator.
MAX_WEIGHT_SUM = 2**128 - 1

# int64 fast paths are only used when every partial sum stays far from 2^63.
_INT64_SAFE = 2**62


class AccumulatorOverflowError(ValueError):
    """Raised when the weight sum would exceed the 128-bit accumulator bound."""


@dataclass(frozen=True)
class LinearFunction:
    """Immutable linear fitness function with positive integer weights."""

    n: int
    weights: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if len(self.weights) != self.n:
            raise ValueError(f"expected {self.n} weights, got {len(self.weights)}")
        if any(w < 1 for w in self.weights):
            raise ValueError("all weights must be >= 1")
        if sum(self.weights) > MAX_WEIGHT_SUM:
            raise AccumulatorOverflowError(
                "sum of weights exceeds the 128-bit accumulator bound"
            )

    @property
    def weight_sum(self) -> int:
        return sum(self.weights)

    def weights_int64(self) -> np.ndarray | None:
        """int64 view of the weights, or None when sums could overflow int64."""
        if self.weight_sum < _INT64_SAFE:
            return np.asarray(self.weights, dtype=np.int64)
        return None

    def spec_string(self) -> str:
        return f"linear:{self.n}"


@dataclass
class SearchPoint:
    """Mutable bit vector plus cached fitness; one owner per running trial."""

    bits: list[int]
    fitness: int

    def is_optimum(self) -> bool:
        return self.fitness == 0

    def check(self, f: LinearFunction) -> None:
        """Debug assertion: cached fitness matches a full re-evaluation."""
        assert len(self.bits) == f.n
        assert self.fitness == evaluate(f, self.bits), "fitness cache out of sync"


def one_max(n: int) -> LinearFunction:
    """Unit-weight linear function: fitness counts the 1-bits."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return LinearFunction(n, (1,) * n)


def bin_val(n: int) -> LinearFunction:
    """Weights 2^(i-1); capped at n = 63 so weights stay exactly representable."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > 63:
        raise ValueError(f"bin_val supports n <= 63, got {n} (weight overflow)")
    return LinearFunction(n, tuple(1 << i for i in range(n)))


def random_linear(n: int, seed: int, w_max: int) -> LinearFunction:
    """Weights drawn i.i.d. uniform from {1, ..., w_max}; deterministic in seed."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if w_max < 1:
        raise ValueError(f"w_max must be >= 1, got {w_max}")
    if n * w_max > MAX_WEIGHT_SUM:
        raise AccumulatorOverflowError(
            f"n * w_max = {n * w_max} may exceed the 128-bit accumulator bound"
        )
    rng = make_rng(seed)
    if w_max == 1:
        return LinearFunction(n, (1,) * n)
    ws = rng.integers(1, w_max + 1, size=n, dtype=np.uint64)
    return LinearFunction(n, tuple(int(w) for w in ws))


def evaluate(f: LinearFunction, bits: Sequence[int]) -> int:
    """Exact weighted sum of set bits."""
    if len(bits) != f.n:
        raise ValueError(f"bit vector length {len(bits)} != n = {f.n}")
    return sum(w for w, b in zip(f.weights, bits) if b)


def delta_evaluate(f: LinearFunction, x: SearchPoint, flips: Iterable[int]) -> int:
    """Fitness change from flipping the given positions, in O(|flips|).

    Returns evaluate(x with flips applied) - evaluate(x) without touching x.
    """
    w = f.weights
    bits = x.bits
    n = f.n
    delta = 0
    seen = set()
    for pos in flips:
        if not 0 <= pos < n:
            raise ValueError(f"flip position {pos} out of range [0, {n})")
        if pos in seen:
            raise ValueError(f"duplicate flip position {pos}")
        seen.add(pos)
        delta += -w[pos] if bits[pos] else w[pos]
    return delta


def parse_function_spec(spec: str, n: int | None = None) -> LinearFunction:
    """Parse a function spec string.

    Full grammar: ``onemax:<n>``, ``binval:<n>``, ``random:<n>:<w_max>:<seed>``.
    Family grammar (for benchmark grids, with ``n`` supplied by the caller):
    ``onemax``, ``binval``, ``random:<w_max>:<seed>``.
    """
    parts = spec.split(":")
    kind = parts[0]

    def _int(s: str, what: str) -> int:
        try:
            return int(s)
        except ValueError:
            raise ValueError(f"bad {what} {s!r} in function spec {spec!r}") from None

    if kind == "onemax":
        if len(parts) == 2:
            return one_max(_int(parts[1], "n"))
        if len(parts) == 1 and n is not None:
            return one_max(n)
    elif kind == "binval":
        if len(parts) == 2:
            return bin_val(_int(parts[1], "n"))
        if len(parts) == 1 and n is not None:
            return bin_val(n)
    elif kind == "random":
        if len(parts) == 4:
            return random_linear(
                _int(parts[1], "n"), _int(parts[3], "seed"), _int(parts[2], "w_max")
            )
        if len(parts) == 3 and n is not None:
            return random_linear(n, _int(parts[2], "seed"), _int(parts[1], "w_max"))
    raise ValueError(f"unrecognized function spec {spec!r}")
