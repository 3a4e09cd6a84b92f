"""Seeded experiment grids with deterministic aggregation.

Per-trial seeds are split from (base_seed, n, trial index), trials are
independent work items, and results are reduced in trial order, so a grid
report is a pure function of its config regardless of worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .adaptive import AdaptiveOptions, run_adaptive
from .core import LinearFunction, parse_function_spec
from .engine import EngineOptions, run_ea
from .isu import SequenceSpec, make_rates, parse_isu_spec, run_isu
from .policies import RatePolicySpec, constant_policy, make_rate_stream, parse_rate_policy
from .seeding import split_seed


class ConfigError(ValueError):
    """Invalid experiment configuration or spec string."""


@dataclass(frozen=True)
class PolicyDispatch:
    """Resolved policy token: which runner to use and its payload."""

    token: str
    kind: str  # "stream", "known-n", "adaptive", "isu"
    stream_spec: RatePolicySpec | None = None
    epsilon: float | None = None
    isu_spec: SequenceSpec | None = None


def parse_policy(token: str) -> PolicyDispatch:
    """Parse any policy grammar token, including `adaptive[:<eps>]` and `isu:...`."""
    try:
        if token == "adaptive" or token.startswith("adaptive:"):
            parts = token.split(":", 1)
            eps = float(parts[1]) if len(parts) == 2 else 0.01
            AdaptiveOptions(epsilon=eps)  # validate range
            return PolicyDispatch(token=token, kind="adaptive", epsilon=eps)
        if token.startswith("isu:"):
            return PolicyDispatch(token=token, kind="isu", isu_spec=parse_isu_spec(token[4:]))
        if token == "known-n":
            return PolicyDispatch(token=token, kind="known-n")
        return PolicyDispatch(token=token, kind="stream", stream_spec=parse_rate_policy(token))
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"bad policy spec {token!r}: {e}") from e


def run_trial(
    fn_spec: str,
    policy: PolicyDispatch,
    n: int | None,
    seed: int,
    max_evals: int | None = None,
):
    """Run one trial; returns (resolved function label, evaluations, found)."""
    f = parse_function_spec(fn_spec, n=n)
    label = fn_spec if ":" in fn_spec or n is None else f"{fn_spec}:{f.n}"
    if policy.kind == "adaptive":
        opts = AdaptiveOptions(epsilon=policy.epsilon, max_evals=max_evals)
        result, _ = run_adaptive(f, opts, seed=seed)
        return label, result.evaluations, result.found
    opts = EngineOptions(max_evals=max_evals)
    if policy.kind == "isu":
        rates = make_rates(policy.isu_spec, f.n)
        result = run_isu(f, rates, opts, seed=seed)
        return label, result.evaluations, result.found
    spec = constant_policy(1.0 / f.n) if policy.kind == "known-n" else policy.stream_spec
    result = run_ea(f, make_rate_stream(spec), opts, seed=seed)
    return label, result.evaluations, result.found


def _work(item):
    fn_spec, policy, n, trial, seed, max_evals = item
    label, evals, found = run_trial(fn_spec, policy, n, seed, max_evals)
    return n, trial, seed, label, evals, found


@dataclass(frozen=True)
class ExperimentConfig:
    function: str
    policy: str
    n_grid: tuple[int, ...]
    trials: int
    base_seed: int
    max_evals: int | None = None
    csv_path: str | None = None
    report_path: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.n_grid:
            raise ConfigError("n_grid must be non-empty")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigError(f"n_grid must be strictly increasing, got {self.n_grid}")
        if any(n < 1 for n in self.n_grid):
            raise ConfigError("n_grid entries must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        parse_policy(self.policy)
        try:
            parse_function_spec(self.function, n=self.n_grid[0])
        except ValueError as e:
            raise ConfigError(f"bad function spec {self.function!r}: {e}") from e

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {
            "function",
            "policy",
            "n_grid",
            "trials",
            "base_seed",
            "max_evals",
            "csv",
            "report",
            "workers",
        }
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"function", "policy", "n_grid", "trials", "base_seed"} - set(d)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        return cls(
            function=d["function"],
            policy=d["policy"],
            n_grid=tuple(int(n) for n in d["n_grid"]),
            trials=int(d["trials"]),
            base_seed=int(d["base_seed"]),
            max_evals=int(d["max_evals"]) if d.get("max_evals") is not None else None,
            csv_path=d.get("csv"),
            report_path=d.get("report"),
            workers=int(d.get("workers", 1)),
        )


@dataclass(frozen=True)
class StatRecord:
    """Aggregates over the uncensored trials at one (policy, n) cell."""

    n: int
    count: int
    censored: int
    mean: float | None
    std: float | None
    min: int | None
    max: int | None
    mean_nlogn: float | None
    ci95_nlogn: float | None
    mean_nlog2n: float | None
    ci95_nlog2n: float | None
    wide_ci: bool
    censored_lower_bound: bool

    def to_dict(self) -> dict:
        return {
            "trials": self.count,
            "censored": self.censored,
            "mean": self.mean,
            "std": self.std,
            "min": self.min,
            "max": self.max,
            "mean_over_nlogn": self.mean_nlogn,
            "ci95_over_nlogn": self.ci95_nlogn,
            "mean_over_nlog2n": self.mean_nlog2n,
            "ci95_over_nlog2n": self.ci95_nlog2n,
            "wide_ci": self.wide_ci,
            "censored_lower_bound": self.censored_lower_bound,
        }


def summarize(samples, n: int, censored: int = 0) -> StatRecord:
    """Mean/std/CI of evaluation counts plus n ln n and n ln^2 n normalizations.

    CI half-widths use the normal approximation 1.96 * std / sqrt(count);
    counts below 30 are flagged wide rather than rejected.  If any run was
    censored the normalized means are lower bounds and flagged as such.
    """
    samples = list(samples)
    if not samples and censored == 0:
        raise ValueError("summarize needs at least one sample")
    k = len(samples)
    if k == 0:
        return StatRecord(
            n=n, count=0, censored=censored, mean=None, std=None, min=None, max=None,
            mean_nlogn=None, ci95_nlogn=None, mean_nlog2n=None, ci95_nlog2n=None,
            wide_ci=True, censored_lower_bound=True,
        )
    mean = sum(samples) / k
    if k > 1:
        var = sum((s - mean) ** 2 for s in samples) / (k - 1)
        std = math.sqrt(var)
    else:
        std = 0.0
    half = 1.96 * std / math.sqrt(k)
    logn = math.log(n) if n > 1 else None
    if logn:
        nlogn = n * logn
        nlog2n = n * logn * logn
        mean_nlogn, ci_nlogn = mean / nlogn, half / nlogn
        mean_nlog2n, ci_nlog2n = mean / nlog2n, half / nlog2n
    else:
        mean_nlogn = ci_nlogn = mean_nlog2n = ci_nlog2n = None
    return StatRecord(
        n=n, count=k, censored=censored, mean=mean, std=std,
        min=min(samples), max=max(samples),
        mean_nlogn=mean_nlogn, ci95_nlogn=ci_nlogn,
        mean_nlog2n=mean_nlog2n, ci95_nlog2n=ci_nlog2n,
        wide_ci=k < 30, censored_lower_bound=censored > 0,
    )


@dataclass
class BenchReport:
    """Per-(policy, n) statistics, keyed by policy token then n."""

    stats: dict[str, dict[int, StatRecord]] = field(default_factory=dict)

    def get(self, n: int, policy: str | None = None) -> StatRecord:
        policy = self._resolve(policy)
        try:
            return self.stats[policy][n]
        except KeyError:
            raise ValueError(f"report has no entry for policy {policy!r}, n = {n}") from None

    def _resolve(self, policy: str | None) -> str:
        if policy is not None:
            return policy
        if len(self.stats) != 1:
            raise ValueError(f"report has {len(self.stats)} policies; specify one")
        return next(iter(self.stats))

    def to_json(self) -> str:
        obj = {
            pol: {str(n): rec.to_dict() for n, rec in by_n.items()}
            for pol, by_n in self.stats.items()
        }
        return _dump_json(obj) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "BenchReport":
        raw = json.loads(text)
        stats: dict[str, dict[int, StatRecord]] = {}
        for pol, by_n in raw.items():
            stats[pol] = {}
            for n_str, d in by_n.items():
                n = int(n_str)
                stats[pol][n] = StatRecord(
                    n=n, count=d["trials"], censored=d["censored"], mean=d["mean"],
                    std=d["std"], min=d["min"], max=d["max"],
                    mean_nlogn=d["mean_over_nlogn"], ci95_nlogn=d["ci95_over_nlogn"],
                    mean_nlog2n=d["mean_over_nlog2n"], ci95_nlog2n=d["ci95_over_nlog2n"],
                    wide_ci=d["wide_ci"], censored_lower_bound=d["censored_lower_bound"],
                )
        return cls(stats=stats)


def _dump_json(obj) -> str:
    """JSON text with floats rendered at 17 significant digits."""
    out = io.StringIO()

    def emit(v):
        if v is None:
            out.write("null")
        elif isinstance(v, bool):
            out.write("true" if v else "false")
        elif isinstance(v, int):
            out.write(str(v))
        elif isinstance(v, float):
            out.write(format(v, ".17g"))
        elif isinstance(v, str):
            out.write(json.dumps(v))
        elif isinstance(v, dict):
            out.write("{")
            for i, (k, val) in enumerate(v.items()):
                if i:
                    out.write(", ")
                out.write(json.dumps(str(k)) + ": ")
                emit(val)
            out.write("}")
        elif isinstance(v, (list, tuple)):
            out.write("[")
            for i, val in enumerate(v):
                if i:
                    out.write(", ")
                emit(val)
            out.write("]")
        else:
            raise TypeError(f"cannot serialize {type(v)!r}")

    emit(obj)
    return out.getvalue()


def run_many(
    fn_spec: str,
    policy_token: str,
    n: int,
    trials: int,
    base_seed: int,
    max_evals: int | None = None,
    workers: int = 1,
):
    """Seeded independent trials; returns rows (trial, seed, label, evals, found)."""
    policy = parse_policy(policy_token)
    items = [
        (fn_spec, policy, n, j, split_seed(base_seed, n, j), max_evals)
        for j in range(trials)
    ]
    if workers == 1:
        results = [_work(it) for it in items]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(items) // (workers * 4))
            results = list(pool.map(_work, items, chunksize=chunk))
    results.sort(key=lambda r: (r[0], r[1]))
    return [(trial, seed, label, evals, found) for _, trial, seed, label, evals, found in results]


def run_grid(config: ExperimentConfig) -> BenchReport:
    """Full experiment grid; writes CSV/report files when paths are configured."""
    policy = parse_policy(config.policy)
    rows = []
    by_n: dict[int, StatRecord] = {}
    for n in config.n_grid:
        trial_rows = run_many(
            config.function,
            config.policy,
            n,
            config.trials,
            config.base_seed,
            config.max_evals,
            config.workers,
        )
        samples = [ev for _, _, _, ev, found in trial_rows if found]
        censored = sum(1 for _, _, _, _, found in trial_rows if not found)
        by_n[n] = summarize(samples, n, censored=censored)
        for trial, seed, label, evals, found in trial_rows:
            rows.append((policy.token, label, n, trial, seed, evals, found))
    report = BenchReport(stats={policy.token: by_n})
    if config.csv_path:
        write_csv(rows, config.csv_path)
    if config.report_path:
        Path(config.report_path).write_text(report.to_json())
    return report


def write_csv(rows, path: str) -> None:
    """CSV schema: policy,function,n,trial,seed,evaluations,found (LF endings)."""
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["policy", "function", "n", "trial", "seed", "evaluations", "found"])
        for pol, label, n, trial, seed, evals, found in rows:
            writer.writerow([pol, label, n, trial, seed, evals, "true" if found else "false"])


@dataclass(frozen=True)
class RatioRecord:
    n: int
    ratio: float
    ci_low: float
    ci_high: float
    count_a: int
    count_b: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "ratio": self.ratio,
            "ci95_low": self.ci_low,
            "ci95_high": self.ci_high,
            "trials_a": self.count_a,
            "trials_b": self.count_b,
        }


def compare_policies(
    a: BenchReport,
    b: BenchReport,
    n: int,
    policy_a: str | None = None,
    policy_b: str | None = None,
) -> RatioRecord:
    """Ratio of mean runtimes mean_a / mean_b with a delta-method 95% CI."""
    ra = a.get(n, policy_a)
    rb = b.get(n, policy_b)
    for rec, which in ((ra, "a"), (rb, "b")):
        if rec.count < 30:
            raise ValueError(
                f"report {which} has only {rec.count} uncensored trials at n = {n}; need >= 30"
            )
    ratio = ra.mean / rb.mean
    var = (ra.std**2 / (ra.count * rb.mean**2)) + (
        ra.mean**2 * rb.std**2 / (rb.count * rb.mean**4)
    )
    half = 1.96 * math.sqrt(var)
    return RatioRecord(
        n=n, ratio=ratio, ci_low=ratio - half, ci_high=ratio + half,
        count_a=ra.count, count_b=rb.count,
    )


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)
