"""Implied 2-SAT sub-problems, a linear-time 2-SAT solver and t-3-modules."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Optional

from .cnf import Clause, CnfFormula, lit
from .core import LocalFitness, NKInstance


@lru_cache(maxsize=4096)
def _implied_pattern(table: tuple[int, ...], k: int):
    """Implied units ``(pos, value)`` and 2-clauses ``(a, va, b, vb)`` by
    table position; depends on the table alone."""
    bits = [[(r >> (k - j)) & 1 for j in range(k + 1)] for r, v in enumerate(table) if v]
    units = []
    for j in range(k + 1):
        col = {b[j] for b in bits}
        if len(col) == 1:
            # every model has x_j == value
            units.append((j, col.pop()))
    unit_keys = set(units)
    pairs = []
    for a, b in combinations(range(k + 1), 2):
        for va in (1, 0):
            for vb in (1, 0):
                # clause (x_a == va) or (x_b == vb)
                if (a, va) in unit_keys or (b, vb) in unit_keys:
                    continue
                if all(row[a] == va or row[b] == vb for row in bits):
                    pairs.append((a, va, b, vb))
    return tuple(units), tuple(pairs)


def implied_binary_clauses(f: LocalFitness) -> list[Clause]:
    """Unit and 2-literal clauses over ``f``'s variables satisfied by every
    one-row of ``f``.  2-clauses containing an implied unit are dropped.

    A table without one-rows yields ``[()]``: the empty clause.
    """
    if not any(f.table):
        return [()]
    units, pairs = _implied_pattern(tuple(f.table), f.k)
    vs = f.variables
    return [(lit(vs[j], v == 1),) for j, v in units] + [
        (lit(vs[a], va == 1), lit(vs[b], vb == 1)) for a, va, b, vb in pairs
    ]


def extract_two_sat(inst: NKInstance) -> CnfFormula:
    clauses: list[Clause] = []
    origins = []
    empty = False
    for i, f in enumerate(inst.functions):
        for c in implied_binary_clauses(f):
            if not c:
                empty = True
                continue
            clauses.append(c)
            origins.append((i, -1))
    return CnfFormula(inst.n, tuple(clauses), tuple(origins), empty)


@dataclass(frozen=True)
class TwoSatResult:
    satisfiable: bool
    witness: Optional[tuple[int, ...]] = None
    conflict_var: Optional[int] = None


def _node(literal: int) -> int:
    # positive literal of v -> 2v, negative -> 2v + 1
    return 2 * (abs(literal) - 1) + (literal < 0)


def implication_graph(cnf: CnfFormula) -> list[list[int]]:
    """Adjacency lists over ``2 * num_vars`` literal nodes (see :func:`_node`)."""
    adj: list[list[int]] = [[] for _ in range(2 * cnf.num_vars)]
    for c in cnf.clauses:
        if len(c) == 1:
            a = _node(c[0])
            adj[a ^ 1].append(a)
        elif len(c) == 2:
            a, b = _node(c[0]), _node(c[1])
            adj[a ^ 1].append(b)
            adj[b ^ 1].append(a)
        else:
            raise ValueError(f"clause of size {len(c)} in a 2-SAT formula")
    return adj


def strongly_connected_components(adj: list[list[int]]) -> list[int]:
    """Tarjan's algorithm, iterative.  Component ids come out in reverse
    topological order of the condensation."""
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    comp = [-1] * n
    on_stack = [False] * n
    stack: list[int] = []
    counter = 0
    n_comp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            nbrs = adj[v]
            if i < len(nbrs):
                work[-1] = (v, i + 1)
                w = nbrs[i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = n_comp
                    if w == v:
                        break
                n_comp += 1
    return comp


def solve_two_sat(cnf: CnfFormula) -> TwoSatResult:
    if cnf.has_empty_clause:
        return TwoSatResult(False)
    comp = strongly_connected_components(implication_graph(cnf))
    for v in range(cnf.num_vars):
        if comp[2 * v] == comp[2 * v + 1]:
            return TwoSatResult(False, conflict_var=v)
    # Tarjan numbers sinks first: the literal whose component is closer to a
    # sink is the one set true.
    witness = tuple(1 if comp[2 * v] < comp[2 * v + 1] else 0 for v in range(cnf.num_vars))
    return TwoSatResult(True, witness)


@dataclass(frozen=True)
class T3Module:
    p: int
    cnf: CnfFormula  # the 2t three-literal clauses
    projection: CnfFormula  # one 2-clause per 3-module

    @property
    def t(self) -> int:
        return 3 * self.p + 2

    def u(self, i: int) -> int:
        return i

    def z(self, m: int) -> int:
        return 3 * self.p + m


def build_t3_module(p: int) -> T3Module:
    """The t-3-module with ``t = 3p + 2``.

    Variables: ``u_0 .. u_3p`` are 0 .. 3p and ``z_1 .. z_(3p+2)`` follow.
    Module ``M_m`` is the pair ``(a or b or z_m), (a or b or not z_m)``
    whose common part ``(a or b)`` forms the projection.  The projection has
    the implication chains ``u_0 -> u_1 -> ... -> u_p -> not u_0`` and
    ``not u_0 -> u_(p+1) -> ... -> u_3p -> u_0``.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    t = 3 * p + 2

    def u(i, positive=True):
        return lit(i, positive)

    pairs: list[tuple[int, int]] = []
    for m in range(1, t + 1):
        if 1 <= m <= p - 1 or p + 1 <= m <= 3 * p - 1:
            pairs.append((u(m, False), u(m + 1)))
        elif m == p:
            pairs.append((u(p, False), u(0, False)))
        elif m == 3 * p:
            pairs.append((u(3 * p, False), u(0)))
        elif m == 3 * p + 1:
            pairs.append((u(0, False), u(1)))
        else:
            pairs.append((u(0), u(p + 1)))
    num_vars = (3 * p + 1) + t
    clauses = []
    for m, (a, b) in enumerate(pairs, 1):
        zm = 3 * p + m
        clauses.append((a, b, lit(zm)))
        clauses.append((a, b, lit(zm, False)))
    return T3Module(
        p,
        CnfFormula(num_vars, tuple(clauses)),
        CnfFormula(num_vars, tuple(pairs)),
    )


def module_ratio(alpha: float) -> float:
    """Probability that a k=2 fixed-ratio table with ``2 + alpha`` zeros per
    function (on average) is zero on two given rows."""
    return (1.0 - alpha) / 28.0 + (6.0 / 56.0) * alpha


GROWTH = 2.0 * (3.0 + math.sqrt(5.0))


def threshold_constant() -> float:
    """The ``z`` at which ``2 (3 + sqrt 5) * module_ratio(z - 2) == 1``."""
    alpha = (14.0 / (3.0 + math.sqrt(5.0)) - 1.0) / 2.0
    return 2.0 + alpha
