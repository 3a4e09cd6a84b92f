"""Elitist (1+1) EA inner loop for uniform per-step mutation rates.

One fitness evaluation is charged for the initial random point and one per
loop step; a run stops the moment an evaluated point has fitness 0 (found)
or when the evaluation budget is exhausted (censored).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import LinearFunction, SearchPoint, evaluate
from .seeding import make_rng

_BLOCK = 1024


@dataclass(frozen=True)
class EngineOptions:
    """max_evals = None selects the default budget ceil(100 n ln^2 n)."""

    max_evals: int | None = None
    acceptance: str = "weak"  # "weak": f(y) <= f(x); "strict": f(y) < f(x)
    trajectory_stride: int | None = None

    def __post_init__(self):
        if self.max_evals is not None and self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if self.acceptance not in ("weak", "strict"):
            raise ValueError(f"unknown acceptance mode {self.acceptance!r}")
        if self.trajectory_stride is not None and self.trajectory_stride < 1:
            raise ValueError("trajectory_stride must be >= 1")


@dataclass
class RunResult:
    evaluations: int
    found: bool
    seed: int
    trajectory: list[tuple[int, int]] | None = None


def default_max_evals(n: int) -> int:
    """ceil(100 n ln^2 n), floored at 100 so tiny instances keep a sane budget."""
    return max(100, math.ceil(100.0 * n * math.log(n) ** 2)) if n > 1 else 100


def init_search_point(f: LinearFunction, rng: np.random.Generator) -> SearchPoint:
    """Uniform random point over the relevant bits, fitness cache populated."""
    bits = rng.integers(0, 2, size=f.n, dtype=np.int8).tolist()
    return SearchPoint(bits=bits, fitness=evaluate(f, bits))


def sample_positions(n: int, k: int, rng: np.random.Generator):
    """Uniform k-subset of range(n).

    Batched rejection is only safe below the birthday bound (k^2 <= n);
    above it Floyd's algorithm gives O(k) draws for any k.
    """
    if k == 1:
        return (int(rng.integers(0, n)),)
    if k >= n:
        return range(n)
    if k * k <= n:
        while True:
            cand = rng.integers(0, n, size=k).tolist()
            if len(set(cand)) == k:
                return cand
    draws = rng.integers(0, np.arange(n - k + 1, n + 1))
    chosen: set[int] = set()
    for i, j in zip(range(n - k, n), draws.tolist()):
        chosen.add(i if j in chosen else j)
    return chosen


def sample_flip_set(
    n: int, p: float, rng: np.random.Generator, method: str = "binomial"
) -> frozenset[int]:
    """Flip set distributed as n independent Bernoulli(p) indicators.

    "binomial": K ~ Binomial(n, p) then a uniform K-subset (production path,
    expected cost O(1 + n p)).  "perbit": naive per-bit oracle sampler.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if method == "binomial":
        k = int(rng.binomial(n, p))
        if k == 0:
            return frozenset()
        return frozenset(sample_positions(n, k, rng))
    if method == "perbit":
        return frozenset(np.nonzero(rng.random(n) < p)[0].tolist())
    raise ValueError(f"unknown sampling method {method!r}")


def ea_step(
    x: SearchPoint,
    f: LinearFunction,
    p: float,
    options: EngineOptions,
    rng: np.random.Generator,
) -> tuple[bool, int]:
    """One mutation/selection step; mutates x in place only on acceptance.

    Returns (accepted, fitness delta of the offspring).  Charges one
    (conceptual) evaluation; callers keep the count.
    """
    flips = sample_flip_set(f.n, p, rng)
    w = f.weights
    bits = x.bits
    delta = 0
    for pos in flips:
        delta += -w[pos] if bits[pos] else w[pos]
    accepted = delta < 0 or (delta == 0 and options.acceptance == "weak")
    if accepted and flips:
        for pos in flips:
            bits[pos] ^= 1
        x.fitness += delta
    return accepted, delta


class _CallableStream:
    """Adapts a plain t -> p_t callable to the block interface."""

    def __init__(self, fn: Callable[[int], float]):
        self._fn = fn

    def block(self, t0: int, count: int) -> np.ndarray:
        return np.array([self._fn(t) for t in range(t0, t0 + count)], dtype=np.float64)


def _as_stream(rates):
    return rates if hasattr(rates, "block") else _CallableStream(rates)


def run_ea(
    f: LinearFunction,
    rates,
    options: EngineOptions | None = None,
    *,
    seed: int,
) -> RunResult:
    """Run the (1+1) EA with per-step rates p_t from a rate stream.

    `rates` is either an object with .block(t0, count) -> ndarray or a plain
    callable t -> p_t (t starts at 1).  Deterministic in (f, rates, options,
    seed).
    """
    options = options or EngineOptions()
    rng = make_rng(seed)
    evals, found, traj = _run_loop(f, rates, options, rng)
    return RunResult(evaluations=evals, found=found, seed=seed, trajectory=traj)


def _run_loop(
    f: LinearFunction,
    rates,
    options: EngineOptions,
    rng: np.random.Generator,
    max_evals: int | None = None,
) -> tuple[int, bool, list[tuple[int, int]] | None]:
    """Shared loop; max_evals overrides options (used for nested run budgets)."""
    stream = _as_stream(rates)
    n = f.n
    w = f.weights
    budget = max_evals if max_evals is not None else options.max_evals
    if budget is None:
        budget = default_max_evals(n)
    weak = options.acceptance == "weak"
    stride = options.trajectory_stride
    traj: list[tuple[int, int]] | None = [] if stride else None

    x = init_search_point(f, rng)
    bits = x.bits
    fitness = x.fitness
    evals = 1
    if traj is not None:
        traj.append((evals, fitness))
    if fitness == 0:
        return evals, True, traj

    t = 1
    while evals < budget:
        m = min(_BLOCK, budget - evals)
        ps = stream.block(t, m)
        if np.any(ps < 0.0) or np.any(ps > 1.0):
            bad = int(np.nonzero((ps < 0.0) | (ps > 1.0))[0][0])
            raise ValueError(f"rate p_{t + bad} = {ps[bad]} outside [0, 1]")
        ks = rng.binomial(n, ps).tolist()
        # Pre-draw every flip position for the block; per-step scalar rng
        # calls dominate the loop otherwise.  Steps with duplicate draws
        # redraw their whole tuple from the generator (rare for k << sqrt n).
        total = sum(ks)
        buf = rng.integers(0, n, size=total).tolist() if total else []
        bp = 0
        for i in range(m):
            k = ks[i]
            evals += 1
            if k == 0:
                # Offspring equals the parent: accepted under weak mode,
                # rejected under strict; the state is unchanged either way.
                if traj is not None and evals % stride == 0:
                    traj.append((evals, fitness))
                continue
            if k == 1:
                # Single flip: a 1-bit improves (always accepted), a 0-bit
                # strictly worsens (always rejected).
                q = buf[bp]
                bp += 1
                if bits[q]:
                    bits[q] = 0
                    fitness -= w[q]
                    if fitness == 0:
                        if traj is not None:
                            traj.append((evals, fitness))
                        return evals, True, traj
                if traj is not None and evals % stride == 0:
                    traj.append((evals, fitness))
                continue
            if k * k <= n:
                pos = buf[bp : bp + k]
                bp += k
                while len(set(pos)) != k:
                    pos = rng.integers(0, n, size=k).tolist()
            else:
                pos = sample_positions(n, k, rng)
                bp += k
            delta = 0
            for q in pos:
                delta += -w[q] if bits[q] else w[q]
            if delta < 0 or (weak and delta == 0):
                for q in pos:
                    bits[q] ^= 1
                fitness += delta
                if fitness == 0:
                    if traj is not None:
                        traj.append((evals, fitness))
                    return evals, True, traj
            if traj is not None and evals % stride == 0:
                traj.append((evals, fitness))
        t += m
    if traj is not None and (not traj or traj[-1][0] != evals):
        traj.append((evals, fitness))
    return evals, False, traj
