"""Connection graph, component decomposition and conflicting pairs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import LocalFitness, NKInstance

DEFAULT_CAP = 30


class CapacityExceeded(RuntimeError):
    def __init__(self, component: int, size: int, cap: int):
        super().__init__(f"component {component} has {size} variables > cap {cap}")
        self.component = component
        self.size = size
        self.cap = cap


@dataclass(frozen=True)
class ConnectionGraph:
    n: int
    adjacency: tuple[tuple[int, ...], ...]

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, nb in enumerate(self.adjacency) for j in nb if i < j]


@dataclass(frozen=True)
class Component:
    vertices: tuple[int, ...]
    variables: tuple[int, ...]


@dataclass(frozen=True)
class ComponentStats:
    count: int
    max_variables: int
    max_vertices: int
    sizes: tuple[int, ...]  # vertex counts, in component order
    variable_sizes: tuple[int, ...]


@dataclass(frozen=True)
class Solubility:
    soluble: bool
    witness: Optional[tuple[int, ...]] = None
    reason: Optional[str] = None  # all-zero-function, conflicting-pair, component-unsat, solver-unsat
    detail: tuple[int, ...] = field(default=())


def variable_index(inst: NKInstance) -> list[list[int]]:
    """For each variable, the functions that read it (ascending)."""
    readers: list[list[int]] = [[] for _ in range(inst.n)]
    for i, f in enumerate(inst.functions):
        for v in f.variables:
            readers[v].append(i)
    return readers


def find_all_zero_function(inst: NKInstance) -> Optional[int]:
    for i, f in enumerate(inst.functions):
        if not any(f.table):
            return i
    return None


def main_literal_assignment(inst: NKInstance) -> Optional[tuple[int, ...]]:
    """Set each main variable to the complement of its bit in the function's
    only zero row (0 when there is none).  Solves every instance whose
    functions have at most one zero row; returns None for other instances."""
    a = [0] * inst.n
    for f in inst.functions:
        zeros = f.zero_rows
        if len(zeros) > 1:
            return None
        if zeros:
            a[f.main_var] = 1 - (zeros[0] >> f.k)
    return tuple(a)


def build_connection_graph(inst: NKInstance) -> ConnectionGraph:
    """Edges join functions that both have a zero row and read a common
    variable (main variables included)."""
    has_zero = [0 in f.table for f in inst.functions]
    adj: list[set[int]] = [set() for _ in range(inst.n)]
    for readers in variable_index(inst):
        live = [i for i in readers if has_zero[i]]
        for a in live:
            for b in live:
                if a != b:
                    adj[a].add(b)
    return ConnectionGraph(inst.n, tuple(tuple(sorted(s)) for s in adj))


def components(graph: ConnectionGraph, inst: NKInstance) -> tuple[list[Component], ComponentStats]:
    seen = [False] * graph.n
    comps: list[Component] = []
    for root in range(graph.n):
        if seen[root]:
            continue
        seen[root] = True
        members = [root]
        queue = [root]
        while queue:
            v = queue.pop()
            for w in graph.adjacency[v]:
                if not seen[w]:
                    seen[w] = True
                    members.append(w)
                    queue.append(w)
        members.sort()
        vars_ = sorted({x for i in members for x in inst.functions[i].variables})
        comps.append(Component(tuple(members), tuple(vars_)))
    sizes = tuple(len(c.vertices) for c in comps)
    vsizes = tuple(len(c.variables) for c in comps)
    stats = ComponentStats(len(comps), max(vsizes, default=0), max(sizes, default=0), sizes, vsizes)
    return comps, stats


def solve_component(inst: NKInstance, comp: Component, cap: int = DEFAULT_CAP,
                    index: int = 0) -> Optional[dict[int, int]]:
    """Exhaustive search over the component's variables, in lexicographic
    order with the lowest-numbered variable most significant.  Returns the
    first partial assignment satisfying every member, or None."""
    u = len(comp.variables)
    if u > cap:
        raise CapacityExceeded(index, u, cap)
    pos = {v: j for j, v in enumerate(comp.variables)}
    members = [inst.functions[i] for i in comp.vertices if 0 in inst.functions[i].table]
    total = 1 << u
    chunk = 1 << 18
    for lo in range(0, total, chunk):
        a = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        ok = np.ones(len(a), dtype=bool)
        for f in members:
            row = np.zeros(len(a), dtype=np.int64)
            for v in f.variables:
                row = (row << 1) | ((a >> (u - 1 - pos[v])) & 1)
            ok &= np.asarray(f.table, dtype=bool)[row]
            if not ok.any():
                break
        hits = np.flatnonzero(ok)
        if hits.size:
            x = int(a[hits[0]])
            return {v: (x >> (u - 1 - j)) & 1 for j, v in enumerate(comp.variables)}
    return None


def decompose_solve(inst: NKInstance, cap: int = DEFAULT_CAP) -> Solubility:
    i = find_all_zero_function(inst)
    if i is not None:
        return Solubility(False, reason="all-zero-function", detail=(i,))
    comps, _ = components(build_connection_graph(inst), inst)
    witness = [0] * inst.n
    for idx, comp in enumerate(comps):
        if not any(0 in inst.functions[i].table for i in comp.vertices):
            continue
        part = solve_component(inst, comp, cap, idx)
        if part is None:
            return Solubility(False, reason="component-unsat", detail=(idx,))
        for v, b in part.items():
            witness[v] = b
    return Solubility(True, tuple(witness))


def _shared_patterns(f: LocalFitness, shared: list[int]) -> set[tuple[int, ...]]:
    pos = [f.variables.index(v) for v in shared]
    k = f.k
    return {tuple((r >> (k - p)) & 1 for p in pos) for r in f.one_rows}


def is_conflicting(fi: LocalFitness, fj: LocalFitness) -> bool:
    """True iff the two functions read a common variable and no assignment
    makes both equal 1.  Checked by matching one-rows on the shared
    variables, which is equivalent to enumerating the joint assignments."""
    shared = sorted(set(fi.variables) & set(fj.variables))
    if not shared:
        return False
    return not (_shared_patterns(fi, shared) & _shared_patterns(fj, shared))


def find_conflicting_pair(inst: NKInstance) -> Optional[tuple[int, int]]:
    """First conflicting pair ``(i, j)``, ``i < j``, in lexicographic order."""
    readers = variable_index(inst)
    funcs = inst.functions
    for i, f in enumerate(funcs):
        ones = sum(f.table)
        partners = sorted({j for v in f.variables for j in readers[v] if j > i})
        for j in partners:
            g = funcs[j]
            # two functions with enough one-rows between them always agree somewhere
            if ones and sum(g.table) and _can_skip(f, g, ones):
                continue
            if is_conflicting(f, g):
                return i, j
    return None


def _can_skip(f: LocalFitness, g: LocalFitness, ones_f: int) -> bool:
    # With s shared variables, f's one-rows reach at least ceil(ones_f / 2^(k+1-s))
    # of the 2^s shared patterns; a conflict needs the two pattern sets disjoint.
    shared = len(set(f.variables) & set(g.variables))
    free_f = len(f.variables) - shared
    free_g = len(g.variables) - shared
    reach_f = -(-ones_f // (1 << free_f))
    reach_g = -(-sum(g.table) // (1 << free_g))
    return reach_f + reach_g > (1 << shared)
