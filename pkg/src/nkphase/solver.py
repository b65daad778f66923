"""Exhaustive and DPLL satisfiability checks with cost accounting."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from enum import Enum
from itertools import combinations
from typing import Optional

import numpy as np

from . import _dpll_kernel as kernel
from .cnf import Clause, CnfFormula

DEFAULT_BUDGET = 10 ** 7
BRUTE_FORCE_MAX_VARS = 24


class Status(str, Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    BUDGET = "BUDGET"


class TooManyVariables(ValueError):
    pass


@dataclass
class SolveStats:
    decisions: int = 0
    propagations: int = 0
    pure_literals: int = 0
    probes: int = 0
    failed_literals: int = 0
    conflicts: int = 0
    resolvents: int = 0
    wall_time: float = 0.0
    preprocessing: bool = False  # verdict reached before the first decision

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SolveResult:
    status: Status
    witness: Optional[tuple[int, ...]] = None
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def satisfiable(self) -> Optional[bool]:
        if self.status is Status.BUDGET:
            return None
        return self.status is Status.SAT


def brute_force(cnf: CnfFormula) -> SolveResult:
    """First model in lexicographic order (variable 0 most significant)."""
    nv = cnf.num_vars
    if nv > BRUTE_FORCE_MAX_VARS:
        raise TooManyVariables(f"{nv} variables > {BRUTE_FORCE_MAX_VARS}")
    if cnf.has_empty_clause:
        return SolveResult(Status.UNSAT)
    total = 1 << nv
    chunk = 1 << 16
    shifts = np.array([nv - 1 - v for v in range(nv)], dtype=np.int64)
    for lo in range(0, total, chunk):
        a = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        bits = (a[:, None] >> shifts[None, :]) & 1 if nv else np.zeros((len(a), 0), np.int64)
        ok = np.ones(len(a), dtype=bool)
        for c in cnf.clauses:
            sat = np.zeros(len(a), dtype=bool)
            for x in c:
                sat |= bits[:, abs(x) - 1] == (1 if x > 0 else 0)
            ok &= sat
            if not ok.any():
                break
        hits = np.flatnonzero(ok)
        if hits.size:
            return SolveResult(Status.SAT, tuple(int(b) for b in bits[hits[0]]))
    return SolveResult(Status.UNSAT)


def _normalise(clauses) -> tuple[list[Clause], bool]:
    """Drop repeated literals and tautologies; report an empty clause."""
    out = []
    for c in clauses:
        s = tuple(dict.fromkeys(c))
        if any(-x in s for x in s):
            continue
        if not s:
            return out, True
        out.append(s)
    return out, False


def scope_resolvents(clauses: list[Clause]) -> tuple[list[Clause], bool]:
    """Resolvents of pairs of clauses over the same set of at most three
    variables that differ in the sign of exactly one literal, closed under
    repetition.  Returns ``(new clauses, empty clause derived)``."""
    groups: dict[frozenset, list[frozenset]] = {}
    known: set[frozenset] = set()
    for c in clauses:
        if len(c) > 3:
            continue
        fs = frozenset(c)
        if fs in known:
            continue
        known.add(fs)
        groups.setdefault(frozenset(abs(x) for x in c), []).append(fs)
    work = [key for key, members in groups.items() if len(members) > 1]
    new: list[Clause] = []
    while work:
        key = work.pop()
        members = groups[key]
        for a, b in combinations(list(members), 2):
            if len(a ^ b) != 2:
                continue
            r = a & b
            if not r:
                return new, True
            if r in known:
                continue
            known.add(r)
            new.append(tuple(sorted(r, key=abs)))
            rkey = frozenset(abs(x) for x in r)
            bucket = groups.setdefault(rkey, [])
            bucket.append(r)
            if len(bucket) > 1:
                work.append(rkey)
    return new, False


def _to_arrays(nv: int, clauses: list[Clause]):
    lens = np.fromiter((len(c) for c in clauses), dtype=np.int64, count=len(clauses))
    cstart = np.zeros(len(clauses) + 1, dtype=np.int32)
    np.cumsum(lens, out=cstart[1:])
    flat = np.fromiter((x for c in clauses for x in c), dtype=np.int64, count=int(lens.sum()))
    codes = (2 * (np.abs(flat) - 1) + (flat < 0)).astype(np.int32)
    owner = np.repeat(np.arange(len(clauses), dtype=np.int32), lens)
    order = np.argsort(codes, kind="stable")
    occ = owner[order].astype(np.int32)
    counts = np.bincount(codes, minlength=2 * nv)
    occ_start = np.zeros(2 * nv + 1, dtype=np.int32)
    np.cumsum(counts, out=occ_start[1:])
    return codes, cstart, occ_start, occ


def dpll(cnf: CnfFormula, budget: int = DEFAULT_BUDGET, preprocess: str = "full") -> SolveResult:
    """Complete DPLL search.

    Each node runs unit propagation and pure-literal elimination to a
    fixpoint; branching takes the variable with most occurrences in the
    shortest open clauses (lowest index on ties), false branch first.

    ``preprocess="full"`` additionally adds resolvents of clauses sharing a
    variable set (see :func:`scope_resolvents`) and probes every literal at
    the root, fixing the complement of any literal whose propagation fails.
    ``"basic"`` skips both.  Any verdict reached before the first decision
    sets ``stats.preprocessing``.
    """
    if preprocess not in ("full", "basic"):
        raise ValueError(f"unknown preprocess mode {preprocess!r}")
    t0 = time.perf_counter()
    stats = SolveStats()
    clauses, empty = _normalise(cnf.clauses)
    if cnf.has_empty_clause or empty:
        stats.preprocessing = True
        stats.wall_time = time.perf_counter() - t0
        return SolveResult(Status.UNSAT, None, stats)
    if preprocess == "full":
        extra, empty = scope_resolvents(clauses)
        stats.resolvents = len(extra)
        if empty:
            stats.preprocessing = True
            stats.wall_time = time.perf_counter() - t0
            return SolveResult(Status.UNSAT, None, stats)
        clauses = clauses + extra
    nv = cnf.num_vars
    if not clauses:
        stats.preprocessing = True
        stats.wall_time = time.perf_counter() - t0
        return SolveResult(Status.SAT, (0,) * nv, stats)
    codes, cstart, occ_start, occ = _to_arrays(nv, clauses)
    status, val, raw = kernel.solve_kernel(
        nv, codes, cstart, occ_start, occ, int(budget), True, preprocess == "full"
    )
    stats.decisions = int(raw[kernel.DECISIONS])
    stats.propagations = int(raw[kernel.PROPAGATIONS])
    stats.pure_literals = int(raw[kernel.PURE])
    stats.probes = int(raw[kernel.PROBES])
    stats.failed_literals = int(raw[kernel.FAILED])
    stats.conflicts = int(raw[kernel.CONFLICTS])
    stats.preprocessing = bool(raw[kernel.PREPROCESSED])
    stats.wall_time = time.perf_counter() - t0
    if status == kernel.SAT:
        witness = tuple(int(x) if x >= 0 else 0 for x in val)
        return SolveResult(Status.SAT, witness, stats)
    if status == kernel.UNSAT:
        return SolveResult(Status.UNSAT, None, stats)
    return SolveResult(Status.BUDGET, None, stats)
