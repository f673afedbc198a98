"""Seeded Monte Carlo harness with Wilson-interval summaries and CSV output.

Random streams: trial ``i`` of grid cell ``c`` under master seed ``s`` uses
``numpy.random.default_rng(trial_seed(s, c, i))`` where ``trial_seed`` takes the
first 64-bit word of ``SeedSequence([s, c, i])``. The same stream first
generates the graph (random families only) and then the initial coloring.
Streams are reproducible within a build; nothing is promised across builds
or languages.
"""

from __future__ import annotations

import csv
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Optional

import numpy as np

from .dynamics import (MIXED_FIXED, MIXED_PERIODIC, UNANIMOUS_BLUE, UNANIMOUS_RED,
                       default_round_cap, evolve, random_configuration)
from .errors import DataError, MajorityLabError, UsageError
from .generators import GenSpec

FAILED = "failed"
WILSON_Z = 1.959963984540054

RECORD_COLUMNS = ["graph_kind", "n", "param", "p_b", "seed", "trial", "rounds", "period", "outcome", "final_blue"]
SUMMARY_COLUMNS = [
    "cell", "graph_kind", "n", "param", "p_b", "trials", "completed", "failed",
    "fully_red_fraction", "fully_red_lo", "fully_red_hi",
    "fully_blue_fraction", "fully_blue_lo", "fully_blue_hi",
    "coexistence_fraction", "coexistence_lo", "coexistence_hi",
    "mean_rounds", "max_rounds", "errors",
]


def trial_seed(master: int, cell: int, trial: int) -> int:
    return int(np.random.SeedSequence([master, cell, trial]).generate_state(1, dtype=np.uint64)[0])


@dataclass
class TrialRecord:
    graph_kind: str
    n: int
    param: object
    p_b: float
    seed: int
    trial: int
    rounds: Optional[int]
    period: Optional[int]
    outcome: str
    final_blue: Optional[int]
    cell: int = 0
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.outcome == FAILED

    def row(self) -> list:
        return [self.graph_kind, self.n, _fmt(self.param), _fmt(self.p_b), self.seed, self.trial,
                _fmt(self.rounds), _fmt(self.period), self.outcome, _fmt(self.final_blue)]


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return x


@dataclass
class ExperimentSpec:
    """A sweep: graph template, grids over p (or p in units of ln n / n), delta and p_b."""

    gen: GenSpec
    p_b: list = field(default_factory=lambda: [0.5])
    trials: int = 1
    seed: int = 0
    max_rounds: Optional[int] = None
    p_grid: Optional[list] = None
    p_logn_grid: Optional[list] = None
    delta_grid: Optional[list] = None
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.p_b, (int, float)):
            self.p_b = [float(self.p_b)]
        if self.trials < 1:
            raise UsageError("trials must be >= 1")
        for grid in (self.p_b, self.p_grid or []):
            for v in grid:
                if not 0.0 <= v <= 1.0:
                    raise UsageError(f"grid value {v} outside [0, 1]")
        if not self.p_b:
            raise UsageError("p_b grid is empty")

    def graph_cells(self) -> list[GenSpec]:
        g = self.gen
        if self.p_logn_grid:
            return [replace(g, p=c * math.log(g.n) / g.n) for c in self.p_logn_grid]
        if self.p_grid:
            return [replace(g, p=p) for p in self.p_grid]
        if self.delta_grid:
            return [replace(g, delta=d) for d in self.delta_grid]
        return [g]

    def cells(self) -> list[tuple[GenSpec, float]]:
        return list(itertools.product(self.graph_cells(), self.p_b))


def _run_one(gen: GenSpec, p_b: float, master: int, cell: int, trial: int,
             max_rounds: Optional[int], graph=None) -> TrialRecord:
    seed = trial_seed(master, cell, trial)
    rng = np.random.default_rng(seed)
    base = dict(graph_kind=gen.kind, n=gen.n, param=gen.param, p_b=p_b, seed=seed, trial=trial, cell=cell)
    try:
        g = gen.build(rng) if graph is None else graph
        base["n"] = g.n
        cap = default_round_cap(g.n) if max_rounds is None else max_rounds
        traj = evolve(g, random_configuration(g.n, p_b, rng), cap=cap)
    except MajorityLabError as exc:
        return TrialRecord(rounds=None, period=None, outcome=FAILED, final_blue=None,
                           error=f"{type(exc).__name__}: {exc}", **base)
    return TrialRecord(rounds=traj.consensus_time, period=traj.period, outcome=traj.outcome,
                       final_blue=traj.final_blue, **base)


def _run_task(args):
    return _run_one(*args)


def run_trials(spec: ExperimentSpec, cell: int = 0, gen: Optional[GenSpec] = None,
               p_b: Optional[float] = None) -> Iterator[TrialRecord]:
    """Yield one record per trial, in trial order whatever the worker count.

    Random graph families are re-sampled every trial; deterministic ones are built once.
    """
    gen = spec.gen if gen is None else gen
    p_b = spec.p_b[0] if p_b is None else p_b
    graph = None
    if not gen.is_random:
        graph = gen.build()
    tasks = [(gen, p_b, spec.seed, cell, i, spec.max_rounds, graph) for i in range(spec.trials)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            yield from pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * spec.workers)))
    else:
        for t in tasks:
            yield _run_task(t)


def wilson_interval(successes: int, total: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (95% by default)."""
    if total == 0:
        return (math.nan, math.nan)
    phat = successes / total
    denom = 1 + z * z / total
    center = (phat + z * z / (2 * total)) / denom
    half = z * math.sqrt(phat * (1 - phat) / total + z * z / (4 * total * total)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass
class Summary:
    trials: int
    completed: int
    failed: int
    fully_red_fraction: float
    fully_blue_fraction: float
    coexistence_fraction: float
    fully_red_ci: tuple
    fully_blue_ci: tuple
    coexistence_ci: tuple
    mean_rounds: float
    max_rounds: Optional[int]
    errors: list


def summarize(records: Iterable[TrialRecord]) -> Summary:
    records = list(records)
    if not records:
        raise UsageError("cannot summarize an empty record set")
    ok = [r for r in records if not r.failed]
    k = len(ok)
    red = sum(r.outcome == UNANIMOUS_RED for r in ok)
    blue = sum(r.outcome == UNANIMOUS_BLUE for r in ok)
    mixed = sum(r.outcome in (MIXED_FIXED, MIXED_PERIODIC) for r in ok)
    frac = (lambda c: c / k) if k else (lambda c: math.nan)
    rounds = [r.rounds for r in ok]
    return Summary(
        trials=len(records), completed=k, failed=len(records) - k,
        fully_red_fraction=frac(red), fully_blue_fraction=frac(blue), coexistence_fraction=frac(mixed),
        fully_red_ci=wilson_interval(red, k), fully_blue_ci=wilson_interval(blue, k),
        coexistence_ci=wilson_interval(mixed, k),
        mean_rounds=float(np.mean(rounds)) if rounds else math.nan,
        max_rounds=max(rounds) if rounds else None,
        errors=sorted({r.error for r in records if r.error}),
    )


@dataclass
class CellResult:
    cell: int
    gen: GenSpec
    p_b: float
    records: list
    summary: Summary

    def summary_row(self) -> list:
        s = self.summary
        return [self.cell, self.gen.kind, self.gen.n, _fmt(self.gen.param), _fmt(self.p_b),
                s.trials, s.completed, s.failed,
                _fmt(s.fully_red_fraction), _fmt(s.fully_red_ci[0]), _fmt(s.fully_red_ci[1]),
                _fmt(s.fully_blue_fraction), _fmt(s.fully_blue_ci[0]), _fmt(s.fully_blue_ci[1]),
                _fmt(s.coexistence_fraction), _fmt(s.coexistence_ci[0]), _fmt(s.coexistence_ci[1]),
                _fmt(s.mean_rounds), _fmt(s.max_rounds), "; ".join(s.errors)]


def sweep(spec: ExperimentSpec) -> list[CellResult]:
    """Run every (graph cell, p_b) combination; cells are numbered in product order."""
    out = []
    for i, (gen, p_b) in enumerate(spec.cells()):
        recs = list(run_trials(spec, cell=i, gen=gen, p_b=p_b))
        out.append(CellResult(i, gen, p_b, recs, summarize(recs)))
    return out


def write_sweep(results: list[CellResult], prefix) -> tuple[Path, Path]:
    """Write ``PREFIX.csv`` (one row per trial) and ``PREFIX_summary.csv`` (one per cell)."""
    prefix = str(prefix)
    rec_path, sum_path = Path(prefix + ".csv"), Path(prefix + "_summary.csv")
    with open(rec_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for res in results:
            for r in res.records:
                w.writerow(r.row())
    with open(sum_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for res in results:
            w.writerow(res.summary_row())
    return rec_path, sum_path


# ------------------------------------------------------------------ config files

_INT_KEYS = {"n", "lps_p", "lps_q", "trials", "seed", "max_rounds", "workers"}
_GRID_KEYS = {"p", "p_logn", "delta", "p_b"}


def parse_config(text: str) -> ExperimentSpec:
    """Parse flat ``key=value`` lines; grids are comma lists, '#' starts a comment.

    Keys: kind, n, p | p_logn, delta, lps_p, lps_q, name, path, p_b, trials,
    seed, max_rounds, workers. ``p_logn=c1,c2`` means p = c * ln(n) / n.
    """
    kv = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, val = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key in kv:
            raise DataError(f"config line {lineno}: duplicate key {key!r}")
        kv[key] = val
    known = _INT_KEYS | _GRID_KEYS | {"kind", "name", "path"}
    unknown = set(kv) - known
    if unknown:
        raise DataError(f"unknown config keys: {sorted(unknown)}")
    if "kind" not in kv:
        raise DataError("config needs a 'kind'")

    def num(key, conv):
        try:
            return conv(kv[key])
        except ValueError:
            raise DataError(f"config key {key!r}: bad value {kv[key]!r}") from None

    def grid(key, conv):
        try:
            return [conv(v) for v in kv[key].split(",") if v.strip()]
        except ValueError:
            raise DataError(f"config key {key!r}: bad list {kv[key]!r}") from None

    grids = {k: grid(k, int if k == "delta" else float) for k in _GRID_KEYS if k in kv}
    if "p" in grids and "p_logn" in grids:
        raise DataError("give either p or p_logn, not both")
    ints = {k: num(k, int) for k in _INT_KEYS if k in kv}
    gen_kw = dict(kind=kv["kind"], n=ints.get("n"), lps_p=ints.get("lps_p"), lps_q=ints.get("lps_q"),
                  path=kv.get("path"), seed=ints.get("seed", 0))
    if "name" in kv:
        from .generators import parse_named
        gen_kw["name"], gen_kw["params"] = parse_named(kv["name"])
    first_p = grids.get("p", [None])[0]
    if "p_logn" in grids and ints.get("n"):
        first_p = grids["p_logn"][0] * math.log(ints["n"]) / ints["n"]
    gen_kw["p"] = first_p
    gen_kw["delta"] = grids.get("delta", [None])[0]
    gen = GenSpec(**gen_kw)
    return ExperimentSpec(
        gen=gen, p_b=grids.get("p_b", [0.5]), trials=ints.get("trials", 1), seed=ints.get("seed", 0),
        max_rounds=ints.get("max_rounds"), workers=ints.get("workers", 1),
        p_grid=grids.get("p") if len(grids.get("p", [])) > 1 else None,
        p_logn_grid=grids.get("p_logn"),
        delta_grid=grids.get("delta") if len(grids.get("delta", [])) > 1 else None,
    )


def read_config(path) -> ExperimentSpec:
    return parse_config(Path(path).read_text())
