"""Adaptive (1+1) EA: estimate the hidden support size, then optimize.

Outer loop doubles a guess m starting at 2.  Each round spends 2m evaluations
estimating: m independent probes, each drawing a fresh uniform x and one
offspring y at rate p = m^(-1-epsilon), counting S = #{f(y) > f(x)}.  The
estimate is m' = round(2 S m^epsilon); when m/2 <= m' <= 2m the static engine
runs with rate 1/m' for ceil(10 m' ln m') steps from a fresh random point.

Probes are simulated sparsely: only the flipped relevant positions get
materialized x-values, which preserves the joint law of the comparison
f(y) > f(x) and of optimum hits exactly (the unflipped-bits-all-zero event has
probability 2^(K-n), drawn explicitly; below 2^-1074 it underflows to an
event of probability 0 instead of <1e-323, which is beyond observable).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import LinearFunction
from .engine import (
    EngineOptions,
    RunResult,
    _run_loop,
    default_max_evals,
    sample_positions,
)
from .policies import constant_policy, make_rate_stream
from .seeding import make_rng


@dataclass(frozen=True)
class AdaptiveOptions:
    epsilon: float = 0.01
    max_evals: int | None = None
    acceptance: str = "weak"

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.25:
            raise ValueError(f"epsilon must be in (0, 1/4), got {self.epsilon}")
        if self.max_evals is not None and self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if self.acceptance not in ("weak", "strict"):
            raise ValueError(f"unknown acceptance mode {self.acceptance!r}")


@dataclass(frozen=True)
class EstimationResult:
    S: int
    m_prime: int | None  # None when the round was cut short
    evals: int
    hit_at: int | None  # evaluation offset (1-based, within round) of an optimum hit


@dataclass(frozen=True)
class RoundRecord:
    m: int
    S: int
    m_prime: int | None
    estimation_evals: int
    optimization_executed: bool
    optimization_evals: int


@dataclass
class AdaptiveTrace:
    rounds: list[RoundRecord] = field(default_factory=list)

    def total_evaluations(self) -> int:
        return sum(r.estimation_evals + r.optimization_evals for r in self.rounds)


def estimation_round(
    f: LinearFunction,
    m: int,
    epsilon: float,
    rng: np.random.Generator,
    budget: int | None = None,
) -> EstimationResult:
    """One estimation round of m probes at rate p = m^(-1-epsilon).

    Each probe charges 2 evaluations (x, then y).  `budget` caps the number of
    evaluations; a capped round reports m_prime = None.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    n = f.n
    p = float(m) ** (-(1.0 + epsilon))
    full = budget is None or budget >= 2 * m
    trials = m if full else max(0, budget) // 2
    spare_eval = 0 if full else max(0, budget) - 2 * trials

    ks = rng.binomial(n, p, size=trials) if trials else np.zeros(0, dtype=np.int64)
    # Probability that all n-K unflipped relevant bits are 0 in the fresh x.
    z_hit = rng.random(trials) < np.exp2(ks.astype(np.float64) - float(n))

    uniform_weights = len(set(f.weights)) == 1
    nz = np.nonzero(ks)[0]
    if uniform_weights:
        # Sign of the fitness delta only needs the count of flipped 1-bits.
        ones = np.zeros(trials, dtype=np.int64)
        if len(nz):
            ones[nz] = rng.binomial(ks[nz], 0.5)
        improved = ones * 2 < ks  # delta > 0 <=> fewer than half flips were 1-bits
        x_all_zero = ones == 0
        y_all_zero = (ones == ks) & (ks > 0)
    else:
        improved = np.zeros(trials, dtype=bool)
        x_all_zero = np.ones(trials, dtype=bool)
        y_all_zero = np.zeros(trials, dtype=bool)
        w = f.weights
        for idx in nz:
            k = int(ks[idx])
            pos = sample_positions(n, k, rng)
            vals = rng.integers(0, 2, size=k)
            delta = 0
            no = 0
            for q, v in zip(pos, vals.tolist()):
                delta += -w[q] if v else w[q]
                no += v
            improved[idx] = delta > 0
            x_all_zero[idx] = no == 0
            y_all_zero[idx] = no == k

    hit_at = None
    hit_x = z_hit & x_all_zero
    hit_y = z_hit & y_all_zero & ~hit_x
    if hit_x.any() or hit_y.any():
        ix = int(np.nonzero(hit_x)[0][0]) if hit_x.any() else trials
        iy = int(np.nonzero(hit_y)[0][0]) if hit_y.any() else trials
        if ix <= iy:
            hit_at = 2 * ix + 1  # optimum seen when evaluating x
            trials_done = ix
        else:
            hit_at = 2 * iy + 2  # optimum seen when evaluating y
            trials_done = iy
        S = int(improved[:trials_done].sum())
        return EstimationResult(S=S, m_prime=None, evals=hit_at, hit_at=hit_at)

    S = int(improved.sum())
    if not full:
        if spare_eval:
            # One leftover evaluation: the next probe's x still gets evaluated.
            if rng.random() < math.ldexp(1.0, -n):
                hit = 2 * trials + 1
                return EstimationResult(S=S, m_prime=None, evals=hit, hit_at=hit)
        return EstimationResult(S=S, m_prime=None, evals=2 * trials + spare_eval, hit_at=None)
    m_prime = round(2.0 * S * float(m) ** epsilon)
    return EstimationResult(S=S, m_prime=m_prime, evals=2 * m, hit_at=None)


def optimization_steps(m_prime: int) -> int:
    """ceil(10 m' ln m'); zero for m' = 1 (the run is its init evaluation only)."""
    return 0 if m_prime <= 1 else math.ceil(10.0 * m_prime * math.log(m_prime))


def run_adaptive(
    f: LinearFunction,
    options: AdaptiveOptions | None = None,
    *,
    seed: int,
) -> tuple[RunResult, AdaptiveTrace]:
    """Doubling loop of estimation rounds plus conditional optimization runs.

    Every evaluation (probe or engine step) is checked for fitness 0; the run
    ends at the first optimum hit or when max_evals is exhausted.
    """
    options = options or AdaptiveOptions()
    rng = make_rng(seed)
    budget = options.max_evals if options.max_evals is not None else default_max_evals(f.n)
    engine_opts = EngineOptions(acceptance=options.acceptance)
    trace = AdaptiveTrace()
    evals = 0
    m = 1
    while evals < budget:
        m *= 2
        est = estimation_round(f, m, options.epsilon, rng, budget=budget - evals)
        evals += est.evals
        if est.hit_at is not None:
            trace.rounds.append(
                RoundRecord(m, est.S, est.m_prime, est.evals, False, 0)
            )
            return RunResult(evaluations=evals, found=True, seed=seed), trace
        if est.m_prime is None:  # budget ran out mid-round
            trace.rounds.append(
                RoundRecord(m, est.S, None, est.evals, False, 0)
            )
            break
        executed = m // 2 <= est.m_prime <= 2 * m
        opt_evals = 0
        found = False
        if executed and evals < budget:
            run_budget = min(1 + optimization_steps(est.m_prime), budget - evals)
            stream = make_rate_stream(constant_policy(1.0 / est.m_prime))
            opt_evals, found, _ = _run_loop(
                f, stream, engine_opts, rng, max_evals=run_budget
            )
            evals += opt_evals
        trace.rounds.append(
            RoundRecord(m, est.S, est.m_prime, est.evals, executed, opt_evals)
        )
        if found:
            return RunResult(evaluations=evals, found=True, seed=seed), trace
    return RunResult(evaluations=evals, found=False, seed=seed), trace
