"""Rate streams for the static and scheduled setups.

The optimal schedule sets p_t = alpha * ln(t) / t; scaled variants multiply
by a constant c.  Schedules are clamped at 1/2: the raw formula exceeds 1/2
for t = 2..7, OneMax-domination needs p <= 1/2, and the finitely many clamped
steps vanish in the asymptotics.  Constant streams are taken as given
(known-n baselines use p = 1/n unclamped).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constants import default_constants

DEFAULT_CLAMP = 0.5


@dataclass(frozen=True)
class RatePolicySpec:
    """kind in {"constant", "optimal", "scaled", "table"}."""

    kind: str
    p: float | None = None
    alpha: float | None = None
    c: float | None = None
    table: tuple[float, ...] | None = None
    clamp_max: float = DEFAULT_CLAMP

    def __post_init__(self):
        if not 0.0 < self.clamp_max <= 1.0:
            raise ValueError("clamp_max must be in (0, 1]")
        if self.kind == "constant":
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ValueError(f"constant rate must be in [0, 1], got {self.p}")
        elif self.kind in ("optimal", "scaled"):
            if self.alpha is None or self.alpha <= 1.0:
                raise ValueError("schedule needs alpha > 1")
            if self.kind == "scaled" and (self.c is None or self.c <= 0.0):
                raise ValueError("scaled schedule needs c > 0")
        elif self.kind == "table":
            if not self.table:
                raise ValueError("table policy needs at least one rate")
            if any(not 0.0 <= r <= self.clamp_max for r in self.table):
                raise ValueError(f"table rates must lie in [0, {self.clamp_max}]")
        else:
            raise ValueError(f"unknown policy kind {self.kind!r}")

    def label(self) -> str:
        if self.kind == "constant":
            return f"constant:{self.p:g}"
        if self.kind == "optimal":
            return "optimal"
        if self.kind == "scaled":
            return f"scaled:{self.c:g}"
        return f"table[{len(self.table)}]"


def constant_policy(p: float) -> RatePolicySpec:
    return RatePolicySpec(kind="constant", p=p)


def optimal_policy(alpha: float | None = None, clamp_max: float = DEFAULT_CLAMP) -> RatePolicySpec:
    if alpha is None:
        alpha = default_constants().alpha
    return RatePolicySpec(kind="optimal", alpha=alpha, clamp_max=clamp_max)


def scaled_policy(
    c: float, alpha: float | None = None, clamp_max: float = DEFAULT_CLAMP
) -> RatePolicySpec:
    if alpha is None:
        alpha = default_constants().alpha
    return RatePolicySpec(kind="scaled", alpha=alpha, c=c, clamp_max=clamp_max)


def table_policy(rates, clamp_max: float = DEFAULT_CLAMP) -> RatePolicySpec:
    return RatePolicySpec(kind="table", table=tuple(float(r) for r in rates), clamp_max=clamp_max)


def optimal_schedule_rate(t: int, alpha: float, clamp_max: float = DEFAULT_CLAMP) -> float:
    """min(clamp_max, alpha * ln(t) / t) for t >= 1 (p_1 = 0 since ln 1 = 0)."""
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    return min(clamp_max, alpha * math.log(t) / t)


def scaled_schedule_rate(
    t: int, alpha: float, c: float, clamp_max: float = DEFAULT_CLAMP
) -> float:
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if c <= 0.0:
        raise ValueError(f"c must be > 0, got {c}")
    return min(clamp_max, c * alpha * math.log(t) / t)


class RateStream:
    """Deterministic stream t -> p_t with vectorized block access."""

    def __init__(self, spec: RatePolicySpec):
        self.spec = spec

    def rate(self, t: int) -> float:
        return float(self.block(t, 1)[0])

    def block(self, t0: int, count: int) -> np.ndarray:
        if t0 < 1:
            raise ValueError(f"t must be >= 1, got {t0}")
        s = self.spec
        if s.kind == "constant":
            return np.full(count, s.p, dtype=np.float64)
        if s.kind in ("optimal", "scaled"):
            c = 1.0 if s.kind == "optimal" else s.c
            ts = np.arange(t0, t0 + count, dtype=np.float64)
            return np.minimum(s.clamp_max, c * s.alpha * np.log(ts) / ts)
        # table: repeat the last entry beyond its length
        tab = np.asarray(s.table, dtype=np.float64)
        idx = np.minimum(np.arange(t0 - 1, t0 - 1 + count), len(tab) - 1)
        return tab[idx]

    def __call__(self, t: int) -> float:
        return self.rate(t)


def make_rate_stream(spec: RatePolicySpec) -> RateStream:
    return RateStream(spec)


def parse_rate_policy(token: str, n: int | None = None) -> RatePolicySpec:
    """Parse `constant:<p>`, `optimal`, `scaled:<c>`, `known-n`, `table:<path>`."""
    parts = token.split(":", 1)
    kind = parts[0]
    if kind == "constant":
        if len(parts) != 2:
            raise ValueError(f"constant policy needs a rate: {token!r}")
        return constant_policy(float(parts[1]))
    if kind == "optimal":
        return optimal_policy()
    if kind == "scaled":
        if len(parts) != 2:
            raise ValueError(f"scaled policy needs a factor: {token!r}")
        return scaled_policy(float(parts[1]))
    if kind == "known-n":
        if n is None:
            raise ValueError("known-n policy needs the instance size n")
        return constant_policy(1.0 / n)
    if kind == "table":
        if len(parts) != 2:
            raise ValueError(f"table policy needs a path: {token!r}")
        lines = [ln.strip() for ln in Path(parts[1]).read_text().splitlines()]
        rates = [float(ln) for ln in lines if ln]
        return table_policy(rates)
    raise ValueError(f"unrecognized rate policy {token!r}")
