"""NK landscape instances with binary local fitness tables.

A local fitness function reads its main variable and ``k`` neighbours.  Its
table is indexed by the row number built from those bits with the main
variable as the most significant bit and the last neighbour as the least
significant one, so for ``k = 2`` row ``0b011`` means ``x_main=0, n1=1, n2=1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

Assignment = Sequence[int]


def encode_row(bits: Sequence[int]) -> int:
    """Row index of a ``(x_main, n_1, ..., n_k)`` bit tuple."""
    r = 0
    for b in bits:
        r = (r << 1) | (b & 1)
    return r


def decode_row(r: int, k: int) -> tuple[int, ...]:
    """Inverse of :func:`encode_row` for a table with ``k`` neighbours."""
    return tuple((r >> (k - j)) & 1 for j in range(k + 1))


@dataclass(frozen=True)
class LocalFitness:
    main_var: int
    neighborhood: tuple[int, ...]
    table: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "neighborhood", tuple(self.neighborhood))
        object.__setattr__(self, "table", tuple(int(b) for b in self.table))

    @property
    def k(self) -> int:
        return len(self.neighborhood)

    @property
    def variables(self) -> tuple[int, ...]:
        """``(main_var, *neighborhood)``, i.e. the table's bit order."""
        return (self.main_var,) + self.neighborhood

    @property
    def zero_rows(self) -> tuple[int, ...]:
        return tuple(r for r, v in enumerate(self.table) if v == 0)

    @property
    def one_rows(self) -> tuple[int, ...]:
        return tuple(r for r, v in enumerate(self.table) if v == 1)

    def row_of(self, a: Assignment) -> int:
        r = 0
        for v in self.variables:
            r = (r << 1) | (a[v] & 1)
        return r

    def __call__(self, a: Assignment) -> int:
        return self.table[self.row_of(a)]


def evaluate_local(f: LocalFitness, a: Assignment) -> int:
    return f(a)


@dataclass(frozen=True)
class NKInstance:
    n: int
    k: int
    functions: tuple[LocalFitness, ...]

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "functions": [
                {
                    "main": f.main_var,
                    "nbrs": list(f.neighborhood),
                    "table": "".join(str(b) for b in f.table),
                }
                for f in self.functions
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NKInstance":
        funcs = []
        for fd in d["functions"]:
            table = fd["table"]
            if any(ch not in "01" for ch in table):
                raise ValueError(f"table of function {fd['main']} is not a bitstring: {table!r}")
            funcs.append(LocalFitness(int(fd["main"]), tuple(int(v) for v in fd["nbrs"]),
                                      tuple(int(ch) for ch in table)))
        return cls(int(d["n"]), int(d["k"]), tuple(funcs))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "NKInstance":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "NKInstance":
        with open(path) as fh:
            return cls.from_json(fh.read())


def evaluate(inst: NKInstance, a: Assignment) -> int:
    """Number of local fitness functions equal to 1 under ``a``."""
    if len(a) != inst.n:
        raise ValueError(f"assignment has length {len(a)}, instance has n={inst.n}")
    return sum(f.table[f.row_of(a)] for f in inst.functions)


def is_solution(inst: NKInstance, a: Assignment) -> bool:
    if len(a) != inst.n:
        raise ValueError(f"assignment has length {len(a)}, instance has n={inst.n}")
    return all(f.table[f.row_of(a)] for f in inst.functions)


@dataclass(frozen=True)
class Violation:
    function: int | None
    message: str

    def __str__(self) -> str:
        where = "instance" if self.function is None else f"function {self.function}"
        return f"{where}: {self.message}"


def validate(inst: NKInstance) -> list[Violation]:
    out: list[Violation] = []
    n, k = inst.n, inst.k
    if not 0 <= k <= n - 1:
        out.append(Violation(None, f"k={k} outside [0, n-1] for n={n}"))
    if len(inst.functions) != n:
        out.append(Violation(None, f"{len(inst.functions)} functions for n={n}"))
    for i, f in enumerate(inst.functions):
        if f.main_var != i:
            out.append(Violation(i, f"main_var is {f.main_var}, expected {i}"))
        nb = f.neighborhood
        if len(nb) != k:
            out.append(Violation(i, f"neighborhood has {len(nb)} entries, expected {k}"))
        if len(set(nb)) != len(nb):
            out.append(Violation(i, f"duplicate index in neighborhood {nb}"))
        if f.main_var in nb:
            out.append(Violation(i, "neighborhood contains the main variable"))
        if any(not 0 <= v < n for v in nb):
            out.append(Violation(i, f"neighborhood index out of range in {nb}"))
        if len(f.table) != 2 ** (k + 1):
            out.append(Violation(i, f"table length {len(f.table)}, expected {2 ** (k + 1)}"))
        if any(b not in (0, 1) for b in f.table):
            out.append(Violation(i, "table entries must be 0 or 1"))
    return out
