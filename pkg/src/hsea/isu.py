"""Initial-segment-uncertainty model: fixed position-dependent mutation rates.

Rate sequences come from truncated iterated logarithms,
p_i = min(1/2, 1 / (i * prod_{j=1..k} ln^(j)(i))), or from a user table.
The clamp keeps p_1 <= 1/2 (the raw formula gives p_1 = 1).

Sampling non-identical independent Bernoulli flips:

* production hot loop: for a block of B steps, draw per-position flip counts
  Binomial(B, p_i) and place each position's flips on a uniform set of
  distinct steps -- across any single step this is exactly independent
  Bernoulli(p_i) per position, at O(n/B + sum p_i) amortized cost per step;
* `BucketedSampler`: per-step sampler that groups positions whose rates lie
  within a factor 2 of the bucket maximum q_b, draws Binomial(|bucket|, q_b)
  candidates and thins each with probability p_i / q_b;
* `method="perbit"`: the naive O(n)-per-step oracle both are tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import LinearFunction
from .engine import EngineOptions, RunResult, default_max_evals, sample_positions
from .seeding import make_rng

_BLOCK = 2048


@dataclass(frozen=True)
class PositionRates:
    """Non-increasing per-position flip probabilities in (0, 1/2]."""

    rates: tuple[float, ...]

    def __post_init__(self):
        if not self.rates:
            raise ValueError("rates must be non-empty")
        prev = None
        for i, p in enumerate(self.rates):
            if not 0.0 < p <= 0.5:
                raise ValueError(f"rate p_{i + 1} = {p} outside (0, 1/2]")
            if prev is not None and p > prev:
                raise ValueError(f"rates must be non-increasing (p_{i + 1} > p_{i})")
            prev = p

    def __len__(self) -> int:
        return len(self.rates)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.rates, dtype=np.float64)


@dataclass(frozen=True)
class SequenceSpec:
    kind: str  # "iterlog" or "custom"
    k: int | None = None
    table: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind == "iterlog":
            if self.k is None or self.k < 0:
                raise ValueError("iterlog spec needs k >= 0")
        elif self.kind == "custom":
            if not self.table:
                raise ValueError("custom spec needs a non-empty rate table")
        else:
            raise ValueError(f"unknown sequence kind {self.kind!r}")

    def label(self) -> str:
        return f"isu:iterlog:{self.k}" if self.kind == "iterlog" else "isu:custom"


def iterated_log(k: int, x: float) -> float:
    """k-fold logarithm with every intermediate value truncated below at 1."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    v = max(1.0, float(x))
    for _ in range(k):
        v = max(1.0, math.log(v))
        if v == 1.0:
            break  # all further iterates stay 1
    return v


def make_rates(spec: SequenceSpec, n: int) -> PositionRates:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if spec.kind == "custom":
        if len(spec.table) < n:
            raise ValueError(f"custom table has {len(spec.table)} rates, need {n}")
        return PositionRates(rates=spec.table[:n])
    k = spec.k
    out = []
    for i in range(1, n + 1):
        prod = float(i)
        for j in range(1, k + 1):
            fac = iterated_log(j, i)
            prod *= fac
            if fac == 1.0:
                break  # deeper iterates are all 1
        out.append(min(0.5, 1.0 / prod))
    return PositionRates(rates=tuple(out))


class BucketedSampler:
    """Per-step flip-set sampler via factor-2 rate buckets with thinning."""

    def __init__(self, rates: PositionRates):
        self.rates = rates
        arr = rates.as_array()
        buckets = []
        i, n = 0, len(arr)
        while i < n:
            q = arr[i]
            j = i
            while j < n and arr[j] > q / 2.0:
                j += 1
            buckets.append((i, j - i, q, arr[i:j] / q))
            i = j
        self._buckets = buckets

    def sample(self, rng: np.random.Generator) -> list[int]:
        flips: list[int] = []
        for lo, size, q, ratios in self._buckets:
            k = int(rng.binomial(size, q))
            if k == 0:
                continue
            for off in sample_positions(size, k, rng):
                r = ratios[off]
                if r >= 1.0 or rng.random() < r:
                    flips.append(lo + off)
        return flips


def sample_position_flips(
    rates: PositionRates, rng: np.random.Generator, method: str = "bucketed"
) -> frozenset[int]:
    """One flip set distributed as independent Bernoulli(p_i) per position."""
    if method == "bucketed":
        return frozenset(BucketedSampler(rates).sample(rng))
    if method == "perbit":
        return frozenset(np.nonzero(rng.random(len(rates)) < rates.as_array())[0].tolist())
    raise ValueError(f"unknown sampling method {method!r}")


def _block_flips(
    rates_arr: np.ndarray, block: int, rng: np.random.Generator
) -> tuple[list[int], list[int]]:
    """Flip proposals for `block` steps: (step indices sorted, positions).

    Per position, Binomial(block, p_i) flips on distinct uniform steps; per
    step this is exactly independent Bernoulli(p_i) sampling.
    """
    kpos = rng.binomial(block, rates_arr)
    nz = np.nonzero(kpos)[0]
    if len(nz) == 0:
        return [], []
    pos_rep = np.repeat(nz, kpos[nz])
    steps = np.empty(len(pos_rep), dtype=np.int64)
    at = 0
    for p in nz.tolist():
        k = int(kpos[p])
        steps[at : at + k] = np.fromiter(sample_positions(block, k, rng), np.int64, k)
        at += k
    order = np.argsort(steps, kind="stable")
    return steps[order].tolist(), pos_rep[order].tolist()


def run_isu(
    f: LinearFunction,
    rates: PositionRates,
    options: EngineOptions | None = None,
    *,
    seed: int,
) -> RunResult:
    """(1+1) EA with per-position rates fixed over time; engine conventions."""
    if len(rates) != f.n:
        raise ValueError(f"rates length {len(rates)} != n = {f.n}")
    options = options or EngineOptions()
    rng = make_rng(seed)
    n = f.n
    w = f.weights
    budget = options.max_evals if options.max_evals is not None else default_max_evals(n)
    weak = options.acceptance == "weak"
    stride = options.trajectory_stride
    traj: list[tuple[int, int]] | None = [] if stride else None
    rates_arr = rates.as_array()

    bits = rng.integers(0, 2, size=n, dtype=np.int8).tolist()
    fitness = 0
    for q, b in zip(w, bits):
        if b:
            fitness += q
    evals = 1
    if traj is not None:
        traj.append((evals, fitness))
    if fitness == 0:
        return RunResult(evaluations=evals, found=True, seed=seed, trajectory=traj)

    while evals < budget:
        m = min(_BLOCK, budget - evals)
        steps, positions = _block_flips(rates_arr, m, rng)
        ptr = 0
        total = len(steps)
        for i in range(m):
            evals += 1
            if ptr >= total or steps[ptr] != i:
                if traj is not None and evals % stride == 0:
                    traj.append((evals, fitness))
                continue
            lo = ptr
            while ptr < total and steps[ptr] == i:
                ptr += 1
            pos = positions[lo:ptr]
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
                    return RunResult(
                        evaluations=evals, found=True, seed=seed, trajectory=traj
                    )
            if traj is not None and evals % stride == 0:
                traj.append((evals, fitness))
    if traj is not None and (not traj or traj[-1][0] != evals):
        traj.append((evals, fitness))
    return RunResult(evaluations=evals, found=False, seed=seed, trajectory=traj)


def lower_bound_diagnostic(rates: PositionRates, n: int) -> float:
    """M_n = min(e^(S_n) / (S_n * p_ceil(n/2)), n^1.01 / ln(n)) with S_n = sum p_i.

    Computed in log space; the first term overflows double precision already
    for moderate S_n.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n} (ln n vanishes at n = 1)")
    if n > len(rates):
        raise ValueError(f"n = {n} exceeds rates length {len(rates)}")
    s_n = float(sum(rates.rates[:n]))
    p_half = rates.rates[math.ceil(n / 2) - 1]
    log_first = s_n - math.log(s_n * p_half)
    log_second = 1.01 * math.log(n) - math.log(math.log(n))
    return math.exp(min(log_first, log_second))


def parse_isu_spec(token: str) -> SequenceSpec:
    """Parse `iterlog:<k>` or `custom:<path>` (one rate per line)."""
    parts = token.split(":", 1)
    if parts[0] == "iterlog" and len(parts) == 2:
        return SequenceSpec(kind="iterlog", k=int(parts[1]))
    if parts[0] == "custom" and len(parts) == 2:
        lines = [ln.strip() for ln in Path(parts[1]).read_text().splitlines()]
        return SequenceSpec(kind="custom", table=tuple(float(ln) for ln in lines if ln))
    raise ValueError(f"unrecognized ISU sequence spec {token!r}")
