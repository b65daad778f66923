"""Experiment harness: seeded trials and sweeps, summaries, reports and
Monte Carlo checks of closed-form probabilities."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import platform
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator, Optional

import numpy as np

from .cnf import nk_to_cnf
from .core import LocalFitness, NKInstance
from .generate import MASK64, GenParams, Stream, generate, mix64, sample_neighborhood
from .solver import DEFAULT_BUDGET, SolveStats, Status, dpll
from .structure import find_all_zero_function, find_conflicting_pair
from .twosat import extract_two_sat, module_ratio, solve_two_sat

WORKERS_ENV = "NKPHASE_WORKERS"
CSV_COLUMNS = (
    "n", "z", "trials", "frac_insoluble_full", "frac_insoluble_2sat",
    "mean_decisions", "median_decisions", "sqrt_mean_decisions",
)

# pipeline stages, in order
STAGE_ALL_ZERO = "all-zero-function"
STAGE_CONFLICT = "conflicting-pair"
STAGE_TWO_SAT = "two-sat"
STAGE_PREPROCESSING = "preprocessing"
STAGE_SEARCH = "search"
STAGE_BUDGET = "budget"
STAGE_ERROR = "error"


def instance_digest(inst: NKInstance) -> str:
    return hashlib.sha256(inst.to_json().encode()).hexdigest()[:16]


@dataclass(frozen=True)
class TrialOptions:
    fast: bool = False  # skip DPLL once an earlier stage proves insolubility
    budget: int = DEFAULT_BUDGET
    preprocess: str = "full"


@dataclass
class TrialRecord:
    params: GenParams
    trial: int = 0
    digest: str = ""
    all_zero: Optional[int] = None  # index of an all-zero function
    conflicting_pair: Optional[tuple[int, int]] = None
    two_sat_unsat: Optional[bool] = None
    soluble: Optional[bool] = None  # None: budget exceeded or error
    full_status: Optional[str] = None  # SAT, UNSAT, BUDGET; None when skipped
    stats: Optional[SolveStats] = None
    two_sat_clauses: int = 0
    two_sat_time: float = 0.0
    stage: str = ""
    error: Optional[str] = None

    @property
    def insoluble(self) -> bool:
        return self.soluble is False

    def consistent(self) -> bool:
        """Earlier-stage insolubility never contradicts the full verdict."""
        if self.full_status is None:
            return True
        proved = self.all_zero is not None or self.conflicting_pair is not None or self.two_sat_unsat
        return not (proved and self.full_status == Status.SAT.value)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = asdict(self.params)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrialRecord":
        d = dict(d)
        d["params"] = GenParams(**d["params"])
        if d.get("stats") is not None:
            d["stats"] = SolveStats(**d["stats"])
        if d.get("conflicting_pair") is not None:
            d["conflicting_pair"] = tuple(d["conflicting_pair"])
        return cls(**d)


def run_trial(params: GenParams, options: TrialOptions = TrialOptions(), trial: int = 0) -> TrialRecord:
    rec = TrialRecord(params, trial)
    try:
        inst = generate(params)
    except Exception as exc:  # recorded, not raised
        rec.stage, rec.error = STAGE_ERROR, f"{type(exc).__name__}: {exc}"
        return rec
    rec.digest = instance_digest(inst)
    rec.all_zero = find_all_zero_function(inst)
    rec.conflicting_pair = find_conflicting_pair(inst)
    t0 = time.perf_counter()
    sub = extract_two_sat(inst)
    rec.two_sat_unsat = not solve_two_sat(sub).satisfiable
    rec.two_sat_time = time.perf_counter() - t0
    rec.two_sat_clauses = len(sub.clauses) + sub.has_empty_clause

    early = None
    if rec.all_zero is not None:
        early = STAGE_ALL_ZERO
    elif rec.conflicting_pair is not None:
        early = STAGE_CONFLICT
    elif rec.two_sat_unsat:
        early = STAGE_TWO_SAT
    if early is not None and options.fast:
        rec.soluble, rec.stage = False, early
        return rec

    res = dpll(nk_to_cnf(inst), budget=options.budget, preprocess=options.preprocess)
    rec.full_status = res.status.value
    rec.stats = res.stats
    if res.status is Status.BUDGET:
        rec.stage = STAGE_BUDGET
        rec.soluble = False if early else None
    else:
        rec.soluble = res.status is Status.SAT
        if early and not rec.soluble:
            rec.stage = early
        else:
            rec.stage = STAGE_PREPROCESSING if res.stats.preprocessing else STAGE_SEARCH
    return rec


# ---------------------------------------------------------------- sweeps

def parse_values(text: str) -> list[float]:
    """``"2.71:3.00:0.01"`` (inclusive range) or ``"2.75,2.83"``."""
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        if step <= 0 or hi < lo:
            raise ValueError(f"bad range {text!r}")
        count = int(round((hi - lo) / step)) + 1
        return [round(lo + i * step, 10) for i in range(count)]
    return [float(x) for x in text.split(",") if x.strip()]


def trial_seed(root: int, n: int, value: float, trial: int) -> int:
    x = mix64(root & MASK64)
    x = mix64(x ^ n)
    x = mix64(x ^ (round(value * 1_000_000) & MASK64))
    return mix64(x ^ trial)


@dataclass(frozen=True)
class SweepGrid:
    ns: tuple[int, ...]
    values: tuple[float, ...]  # z, or p for the uniform model
    trials: int
    root_seed: int = 0
    k: int = 2
    model: str = "fixed_ratio"

    def check(self) -> None:
        if not self.ns or not self.values or self.trials < 1:
            raise ValueError("sweep grid must have at least one n, one value and one trial")

    def tasks(self) -> Iterator[tuple[GenParams, int]]:
        for n in sorted(self.ns):
            for v in sorted(self.values):
                for t in range(self.trials):
                    yield GenParams(n, self.k, self.model, v, trial_seed(self.root_seed, n, v, t)), t

    def to_dict(self) -> dict:
        return asdict(self)


def _run_task(task) -> TrialRecord:
    params, t, options = task
    return run_trial(params, options, t)


def worker_count(requested: Optional[int] = None) -> int:
    cap = os.environ.get(WORKERS_ENV)
    n = requested or os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def sweep(grid: SweepGrid, options: TrialOptions = TrialOptions(), out_dir=None,
          workers: Optional[int] = None, progress=None) -> tuple[list[TrialRecord], "SweepSummary"]:
    """Run every trial of ``grid``.  Records are appended to
    ``out_dir/records.jsonl`` as they finish, so an interrupted sweep keeps
    its completed trials."""
    grid.check()
    tasks = [(p, t, options) for p, t in grid.tasks()]
    sink = None
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        sink = open(Path(out_dir) / "records.jsonl", "w")
    records: list[TrialRecord] = []
    nw = worker_count(workers)
    try:
        if nw == 1:
            results: Iterable[TrialRecord] = map(_run_task, tasks)
            pool = None
        else:
            pool = ProcessPoolExecutor(nw)
            results = pool.map(_run_task, tasks, chunksize=4)
        try:
            for rec in results:
                records.append(rec)
                if sink is not None:
                    sink.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")
                    sink.flush()
                if progress is not None:
                    progress(len(records), len(tasks))
        finally:
            if pool is not None:
                pool.shutdown(cancel_futures=True)
    finally:
        if sink is not None:
            sink.close()
    records.sort(key=lambda r: (r.params.n, r.params.value, r.trial))
    return records, summarize(records)


def load_records(path) -> list[TrialRecord]:
    with open(path) as fh:
        return [TrialRecord.from_dict(json.loads(line)) for line in fh if line.strip()]


# ---------------------------------------------------------------- summaries

@dataclass(frozen=True)
class CellSummary:
    n: int
    z: float
    trials: int
    frac_insoluble_full: float
    frac_insoluble_2sat: float
    mean_decisions: float
    median_decisions: float
    sqrt_mean_decisions: float
    budget_exceeded: int = 0
    preprocessing_share: float = float("nan")  # insoluble trials decided before branching

    @property
    def stderr_full(self) -> float:
        f = self.frac_insoluble_full
        return math.sqrt(f * (1 - f) / self.trials) if self.trials else 0.0


@dataclass
class SweepSummary:
    cells: list[CellSummary] = field(default_factory=list)
    crossing_full: dict[int, Optional[float]] = field(default_factory=dict)
    crossing_2sat: dict[int, Optional[float]] = field(default_factory=dict)
    monotonicity_flags: list[tuple[int, float, float]] = field(default_factory=list)

    def cell(self, n: int, z: float) -> CellSummary:
        for c in self.cells:
            if c.n == n and math.isclose(c.z, z, abs_tol=1e-9):
                return c
        raise KeyError((n, z))

    def curve(self, n: int, which: str = "full") -> list[tuple[float, float]]:
        attr = "frac_insoluble_full" if which == "full" else "frac_insoluble_2sat"
        return [(c.z, getattr(c, attr)) for c in self.cells if c.n == n]


def crossing_point(curve: list[tuple[float, float]], level: float = 0.5) -> Optional[float]:
    """First grid value whose fraction reaches ``level``, interpolated
    linearly against the preceding grid value."""
    prev = None
    for z, f in curve:
        if f >= level:
            if prev is None or prev[1] >= f:
                return z
            z0, f0 = prev
            return z0 + (level - f0) * (z - z0) / (f - f0)
        prev = (z, f)
    return None


def summarize(records: list[TrialRecord]) -> SweepSummary:
    cells: dict[tuple[int, float], list[TrialRecord]] = {}
    for r in records:
        cells.setdefault((r.params.n, r.params.value), []).append(r)
    out = SweepSummary()
    for (n, z) in sorted(cells):
        rs = cells[(n, z)]
        decided = [r for r in rs if r.soluble is not None]
        dec = [r.stats.decisions for r in rs if r.stats is not None]
        insol = [r for r in decided if r.insoluble]
        pre = [r for r in insol if r.stats is not None and r.stats.decisions == 0]
        mean = statistics.fmean(dec) if dec else float("nan")
        out.cells.append(CellSummary(
            n=n,
            z=z,
            trials=len(rs),
            frac_insoluble_full=len(insol) / len(decided) if decided else float("nan"),
            frac_insoluble_2sat=sum(bool(r.two_sat_unsat) for r in rs) / len(rs),
            mean_decisions=mean,
            median_decisions=statistics.median(dec) if dec else float("nan"),
            sqrt_mean_decisions=math.sqrt(mean) if dec else float("nan"),
            budget_exceeded=sum(r.full_status == Status.BUDGET.value for r in rs),
            preprocessing_share=len(pre) / len(insol) if insol else float("nan"),
        ))
    for n in sorted({c.n for c in out.cells}):
        out.crossing_full[n] = crossing_point(out.curve(n, "full"))
        out.crossing_2sat[n] = crossing_point(out.curve(n, "2sat"))
        row = [c for c in out.cells if c.n == n]
        for a, b in zip(row, row[1:]):
            se = math.hypot(a.stderr_full, b.stderr_full)
            if a.frac_insoluble_full - b.frac_insoluble_full > 2 * se:
                out.monotonicity_flags.append((n, a.z, b.z))
    return out


def cost_exponent(ns: list[int], medians: list[float]) -> float:
    """Least-squares slope of ``log(1 + median)`` against ``log n``.  The
    shift keeps cells whose median is 0 decisions in the fit."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log1p(np.asarray(medians, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


# ---------------------------------------------------------------- reports

def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.6f}"


def summary_csv(summary: SweepSummary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in sorted(summary.cells, key=lambda c: (c.n, c.z)):
        w.writerow([
            c.n, f"{c.z:.6g}", c.trials, _fmt(c.frac_insoluble_full), _fmt(c.frac_insoluble_2sat),
            _fmt(c.mean_decisions), _fmt(c.median_decisions), _fmt(c.sqrt_mean_decisions),
        ])
    return buf.getvalue()


def render_svg(summary: SweepSummary, width: int = 480, height: int = 320) -> str:
    """Insoluble fraction against z, one polyline per n (full solve solid,
    2-SAT sub-problem dashed)."""
    zs = [c.z for c in summary.cells] or [0.0, 1.0]
    lo, hi = min(zs), max(zs)
    span = (hi - lo) or 1.0
    pad = 30

    def px(z, f):
        return pad + (z - lo) / span * (width - 2 * pad), height - pad - f * (height - 2 * pad)

    colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
        'fill="none" stroke="#888"/>',
        f'<text x="{pad}" y="{height - 8}" font-size="11">{lo:g}</text>',
        f'<text x="{width - pad - 20}" y="{height - 8}" font-size="11">{hi:g}</text>',
    ]
    for idx, n in enumerate(sorted(summary.crossing_full)):
        colour = colours[idx % len(colours)]
        for which, dash in (("full", ""), ("2sat", ' stroke-dasharray="4 3"')):
            pts = " ".join(f"{x:.1f},{y:.1f}" for x, y in (px(z, f) for z, f in summary.curve(n, which)
                                                           if not math.isnan(f)))
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{colour}"{dash}/>')
        parts.append(f'<text x="{pad + 4}" y="{pad + 14 * (idx + 1)}" font-size="11" '
                     f'fill="{colour}">n={n}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def report(summary: SweepSummary, out_dir, grid: Optional[SweepGrid] = None,
           options: Optional[TrialOptions] = None, svg: bool = False) -> list[Path]:
    """Write ``summary.csv`` and ``meta.json`` (plus ``fractions.svg``)."""
    import numba

    from . import __version__

    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / "summary.csv", out / "meta.json"]
        paths[0].write_text(summary_csv(summary))
        meta = {
            "grid": grid.to_dict() if grid else None,
            "options": asdict(options) if options else None,
            "crossing_full": {str(k): v for k, v in summary.crossing_full.items()},
            "crossing_2sat": {str(k): v for k, v in summary.crossing_2sat.items()},
            "monotonicity_flags": summary.monotonicity_flags,
            "versions": {
                "nkphase": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "numba": numba.__version__,
            },
        }
        paths[1].write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        if svg:
            paths.append(out / "fractions.svg")
            paths[2].write_text(render_svg(summary))
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc}") from exc
    return paths


# ---------------------------------------------------------------- Monte Carlo checks

@dataclass(frozen=True)
class MCReport:
    name: str
    estimate: float
    exact: float
    stderr: float  # binomial standard error at the exact value
    samples: int

    @property
    def z_score(self) -> float:
        if self.stderr == 0:
            return 0.0 if self.estimate == self.exact else math.inf
        return (self.estimate - self.exact) / self.stderr

    def within(self, sigmas: float = 3.0) -> bool:
        return abs(self.z_score) <= sigmas

    def to_dict(self) -> dict:
        return {**asdict(self), "z_score": self.z_score, "within_3sigma": self.within()}


def _mc_report(name: str, hits: int, samples: int, exact: float) -> MCReport:
    se = math.sqrt(exact * (1 - exact) / samples)
    return MCReport(name, hits / samples, exact, se, samples)


def _chunks(total: int, size: int = 200_000) -> Iterator[int]:
    while total > 0:
        yield min(size, total)
        total -= size


def mc_check_all_zero(p: float, n: int, k: int, samples: int, seed: int = 0) -> MCReport:
    """Share of uniform-model instances with an all-zero table, against
    ``1 - (1 - p^(2^(k+1)))^n``.  Table entries are drawn directly."""
    if samples < 10_000:
        raise ValueError("mc_check_all_zero needs at least 10^4 samples")
    rows = 2 ** (k + 1)
    rng = np.random.default_rng(seed)
    hits = 0
    for m in _chunks(samples, max(1, 2_000_000 // (n * rows))):
        zero = rng.random((m, n, rows)) < p
        hits += int(zero.all(axis=2).any(axis=1).sum())
    return _mc_report("all-zero", hits, samples, 1.0 - (1.0 - p ** rows) ** n)


def _tables_with_zeros(k: int, zeros: int) -> list[tuple[int, ...]]:
    rows = 2 ** (k + 1)
    return [tuple(0 if r in z else 1 for r in range(rows)) for z in combinations(range(rows), zeros)]


def conflict_lookup(shared_vars: int = 1) -> np.ndarray:
    """``L[a, pa, b, pb]``: whether 4-zero table ``a`` with the shared
    variable at position ``pa`` conflicts with table ``b`` at ``pb``,
    decided by :func:`is_conflicting` on concrete k=2 functions."""
    from .structure import is_conflicting

    tables = _tables_with_zeros(2, 4)
    out = np.zeros((len(tables), 3, len(tables), 3), dtype=bool)
    if shared_vars == 0:
        return out
    if shared_vars != 1:
        raise ValueError("shared_vars must be 0 or 1")

    def fn(table, pos, own):
        # shared variable 0 at position pos; the rest private
        vs = [own, own + 1]
        vs.insert(pos, 0)
        return LocalFitness(vs[0], tuple(vs[1:]), table)

    fa = [[fn(t, p, 1) for p in range(3)] for t in tables]
    fb = [[fn(t, p, 3) for p in range(3)] for t in tables]
    for a in range(len(tables)):
        for pa in range(3):
            for b in range(len(tables)):
                for pb in range(3):
                    out[a, pa, b, pb] = is_conflicting(fa[a][pa], fb[b][pb])
    return out


CONFLICT_TARGET = 2.0 / math.comb(8, 4) ** 2


def mc_check_conflict(samples: int, seed: int = 0, shared_vars: int = 1) -> MCReport:
    """Two independent k=2 tables with four zero rows each, over variable
    sets with ``shared_vars`` (0 or 1) common variables at random positions;
    conflict rate against ``2 / C(8,4)^2``."""
    lookup = conflict_lookup(shared_vars)
    rng = np.random.default_rng(seed)
    hits = 0
    for m in _chunks(samples, 1_000_000):
        a, b = rng.integers(0, 70, m), rng.integers(0, 70, m)
        pa, pb = rng.integers(0, 3, m), rng.integers(0, 3, m)
        hits += int(lookup[a, pa, b, pb].sum())
    exact = CONFLICT_TARGET if shared_vars == 1 else 0.0
    return _mc_report(f"conflict(shared={shared_vars})", hits, samples, exact)


def mc_check_module_prob(alpha: float, samples: int, seed: int = 0) -> MCReport:
    """A k=2 table gets 2 zero rows (probability ``1 - alpha``) or 3; the
    target is a random 3-module over the table's own variables, i.e. two
    clauses agreeing on two literals and split on the third.  The table
    implies the module iff both corresponding rows are zero."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    hits = 0
    for m in _chunks(samples):
        zeros = np.where(rng.random(m) < alpha, 3, 2)
        order = np.argsort(rng.random((m, 8)), axis=1)
        rank = np.argsort(order, axis=1)  # rank[s, r] < zeros[s]  <=>  row r is zero
        split = rng.integers(0, 3, m)  # position of the variable the two clauses disagree on
        base = rng.integers(0, 8, m)
        r1 = base & ~(4 >> split)
        r2 = r1 | (4 >> split)
        idx = np.arange(m)
        hits += int(((rank[idx, r1] < zeros) & (rank[idx, r2] < zeros)).sum())
    return _mc_report(f"module(alpha={alpha:g})", hits, samples, module_ratio(alpha))


def collision_factor(n: int, samples: int, seed: int = 0) -> tuple[MCReport, int]:
    """Chance that a function's neighbourhood is one given pair of the other
    ``n - 1`` variables, against ``1 / C(n-1, 2)``.  Also returns the number
    of candidate pairs, counted by enumeration."""
    pairs = sum(1 for _ in combinations([v for v in range(n) if v != 0], 2))
    target = {1, 2}
    hits = 0
    for s in range(samples):
        if set(sample_neighborhood(n, 2, 0, Stream(seed, s))) == target:
            hits += 1
    return _mc_report(f"collision(n={n})", hits, samples, 1.0 / pairs), pairs
