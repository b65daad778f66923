"""CNF formulas, the NK-to-SAT reduction and DIMACS I/O.

Literals use the DIMACS convention throughout: variable ``v`` (0-based) is
``v + 1`` when positive and ``-(v + 1)`` when negated.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, TextIO

from .core import Assignment, LocalFitness, NKInstance

Clause = tuple[int, ...]
Origin = Optional[tuple[int, int]]  # (function index, row) or None for synthetic


def lit(var: int, positive: bool = True) -> int:
    return var + 1 if positive else -(var + 1)


def var_of(literal: int) -> int:
    return abs(literal) - 1


def lit_true(literal: int, a: Assignment) -> bool:
    return (a[abs(literal) - 1] == 1) == (literal > 0)


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[Clause, ...] = ()
    origins: tuple[Origin, ...] = field(default=None)
    has_empty_clause: bool = False

    def __post_init__(self):
        clauses = tuple(tuple(c) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        if self.origins is None:
            object.__setattr__(self, "origins", (None,) * len(clauses))
        else:
            object.__setattr__(self, "origins", tuple(self.origins))
        if len(self.origins) != len(clauses):
            raise ValueError("one origin tag per clause is required")

    def __len__(self) -> int:
        return len(self.clauses)

    def check(self) -> None:
        for i, c in enumerate(self.clauses):
            if not c:
                raise ValueError(f"clause {i} is empty; use has_empty_clause instead")
            vs = [abs(x) for x in c]
            if len(set(vs)) != len(vs):
                raise ValueError(f"clause {i} repeats a variable: {c}")
            if any(x == 0 or v > self.num_vars for x, v in zip(c, vs)):
                raise ValueError(f"clause {i} has a literal out of range: {c}")

    def satisfied_by(self, a: Assignment) -> bool:
        if self.has_empty_clause:
            return False
        return all(any(lit_true(x, a) for x in c) for c in self.clauses)

    def max_clause_len(self) -> int:
        return max((len(c) for c in self.clauses), default=0)


def local_to_clauses(f: LocalFitness) -> list[Clause]:
    """One clause per zero row, falsified by exactly that row."""
    k = f.k
    out = []
    for r, v in enumerate(f.table):
        if v == 0:
            out.append(tuple(
                lit(x, ((r >> (k - j)) & 1) == 0) for j, x in enumerate(f.variables)
            ))
    return out


def nk_to_cnf(inst: NKInstance) -> CnfFormula:
    clauses: list[Clause] = []
    origins: list[Origin] = []
    for i, f in enumerate(inst.functions):
        rows = f.zero_rows
        for r, c in zip(rows, local_to_clauses(f)):
            clauses.append(c)
            origins.append((i, r))
    return CnfFormula(inst.n, tuple(clauses), tuple(origins))


class DimacsError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def write_dimacs(cnf: CnfFormula, sink: TextIO | None = None) -> str:
    """Serialise ``cnf``.  Origin tags go in a comment block before the header
    as ``c origin <clause> <function> <row>``; the empty-clause marker is
    written as a lone ``0`` line."""
    lines = []
    for idx, o in enumerate(cnf.origins):
        if o is not None:
            lines.append(f"c origin {idx} {o[0]} {o[1]}")
    n_clauses = len(cnf.clauses) + (1 if cnf.has_empty_clause else 0)
    lines.append(f"p cnf {cnf.num_vars} {n_clauses}")
    for c in cnf.clauses:
        lines.append(" ".join(str(x) for x in c) + " 0")
    if cnf.has_empty_clause:
        lines.append("0")
    text = "\n".join(lines) + "\n"
    if sink is not None:
        sink.write(text)
    return text


def parse_dimacs(source: str | TextIO | Iterable[str]) -> CnfFormula:
    if isinstance(source, str):
        source = io.StringIO(source)
    header = None
    origin_tags: dict[int, tuple[int, int]] = {}
    clauses: list[Clause] = []
    empty = False
    current: list[int] = []
    lineno = 0
    for lineno, raw in enumerate(source, 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) == 5 and parts[1] == "origin":
                try:
                    origin_tags[int(parts[2])] = (int(parts[3]), int(parts[4]))
                except ValueError:
                    raise DimacsError(lineno, f"bad origin comment {line!r}") from None
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None:
                raise DimacsError(lineno, "duplicate header")
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(lineno, f"malformed header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsError(lineno, f"malformed header {line!r}") from None
            if header[0] < 0 or header[1] < 0:
                raise DimacsError(lineno, "negative counts in header")
            continue
        if header is None:
            raise DimacsError(lineno, "clause before 'p cnf' header")
        for tok in line.split():
            try:
                x = int(tok)
            except ValueError:
                raise DimacsError(lineno, f"not an integer: {tok!r}") from None
            if x == 0:
                if current:
                    clauses.append(tuple(current))
                else:
                    empty = True
                current = []
            else:
                if abs(x) > header[0]:
                    raise DimacsError(lineno, f"literal {x} out of range for {header[0]} variables")
                current.append(x)
    if header is None:
        raise DimacsError(lineno, "missing 'p cnf' header")
    if current:
        raise DimacsError(lineno, "last clause is missing its 0 terminator")
    if len(clauses) + empty != header[1]:
        raise DimacsError(lineno, f"header announces {header[1]} clauses, found {len(clauses) + empty}")
    origins = tuple(origin_tags.get(i) for i in range(len(clauses)))
    return CnfFormula(header[0], tuple(clauses), origins, empty)


def read_dimacs(path) -> CnfFormula:
    with open(path) as fh:
        return parse_dimacs(fh)


def save_dimacs(cnf: CnfFormula, path) -> None:
    with open(path, "w") as fh:
        write_dimacs(cnf, fh)


def clause_vars(c: Sequence[int]) -> tuple[int, ...]:
    return tuple(abs(x) - 1 for x in c)
