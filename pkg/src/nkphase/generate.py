"""Seeded random NK instances under the uniform and fixed-ratio models.

Randomness comes from a counter-based generator so that every local fitness
function owns an independent, individually reproducible stream:

* ``key(seed, s) = mix64(mix64(seed) + (s + 1) * GOLDEN)`` for stream ``s``,
* draw ``j`` of stream ``s`` is ``mix64(key + (j + 1) * GOLDEN)``, turned into
  a float in ``[0, 1)`` from its top 53 bits,

where ``mix64`` is the SplitMix64 finaliser and all arithmetic is mod 2**64.
Function ``i`` uses stream ``i``; the fixed-ratio model's choice of which
functions get the smaller zero count uses stream ``SPLIT_STREAM``.  Within a
function, draws ``0 .. k-1`` pick the neighbourhood and the following draws
fill the table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import LocalFitness, NKInstance

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
SPLIT_STREAM = MASK64


def mix64(x: int) -> int:
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


class Stream:
    """Counter-based uniform stream ``(seed, index)``."""

    __slots__ = ("key", "counter")

    def __init__(self, seed: int, index: int):
        self.key = mix64((mix64(seed) + (index + 1) * GOLDEN) & MASK64)
        self.counter = 0

    def next_u64(self) -> int:
        self.counter += 1
        return mix64((self.key + self.counter * GOLDEN) & MASK64)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def below(self, bound: int) -> int:
        """Integer in ``[0, bound)``; always consumes exactly one draw."""
        return min(int(self.random() * bound), bound - 1)


class InvalidParameters(ValueError):
    pass


@dataclass(frozen=True)
class GenParams:
    n: int
    k: int
    model: str  # "uniform" or "fixed_ratio"
    value: float  # p for uniform, z for fixed_ratio
    seed: int = 0

    @classmethod
    def uniform(cls, n: int, k: int, p: float, seed: int = 0) -> "GenParams":
        return cls(n, k, "uniform", p, seed)

    @classmethod
    def fixed_ratio(cls, n: int, k: int, z: float, seed: int = 0) -> "GenParams":
        return cls(n, k, "fixed_ratio", z, seed)

    def check(self) -> None:
        if self.k < 0 or self.n < self.k + 1:
            raise InvalidParameters(f"need n >= k + 1 >= 1, got n={self.n}, k={self.k}")
        if not 0 <= self.seed <= MASK64:
            raise InvalidParameters(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.model == "uniform":
            if not 0.0 <= self.value <= 1.0:
                raise InvalidParameters(f"p must lie in [0, 1], got {self.value}")
        elif self.model == "fixed_ratio":
            if not 0.0 <= self.value <= 2 ** (self.k + 1):
                raise InvalidParameters(f"z must lie in [0, {2 ** (self.k + 1)}], got {self.value}")
        else:
            raise InvalidParameters(f"unknown model {self.model!r}")


def _partial_shuffle(size: int, picks: int, stream: Stream) -> list[int]:
    """First ``picks`` entries of a Fisher-Yates shuffle of ``range(size)``."""
    moved: dict[int, int] = {}
    out = []
    for j in range(picks):
        r = j + stream.below(size - j)
        out.append(moved.get(r, r))
        moved[r] = moved.get(j, j)
    return out


def sample_neighborhood(n: int, k: int, exclude: int, stream: Stream) -> list[int]:
    """``k`` distinct indices from ``range(n)`` minus ``exclude``, in draw order."""
    if k < 0 or n < k + 1:
        raise InvalidParameters(f"need n >= k + 1, got n={n}, k={k}")
    picks = _partial_shuffle(n - 1, k, stream)
    return [v + (v >= exclude) for v in picks]


def fixed_ratio_split(n: int, z: float) -> tuple[int, int]:
    """``(zeros_low, n_low)``: ``n_low`` functions get ``zeros_low`` zero rows and
    the remaining ones get ``zeros_low + 1``.

    ``n_low = floor((1 - alpha) * n)`` with ``alpha`` the fractional part of ``z``;
    the product is rounded to 9 decimals first so that e.g. ``z = 2.7`` does
    not lose a function to binary floating point.
    """
    base = math.floor(z)
    alpha = z - base
    n_low = math.floor(round((1.0 - alpha) * n, 9))
    return base, n_low


def gen_uniform(params: GenParams) -> NKInstance:
    params.check()
    if params.model != "uniform":
        raise InvalidParameters("gen_uniform needs model='uniform'")
    n, k, p = params.n, params.k, params.value
    rows = 2 ** (k + 1)
    funcs = []
    for i in range(n):
        s = Stream(params.seed, i)
        nbrs = sample_neighborhood(n, k, i, s)
        table = tuple(0 if s.random() < p else 1 for _ in range(rows))
        funcs.append(LocalFitness(i, tuple(nbrs), table))
    return NKInstance(n, k, tuple(funcs))


def gen_fixed_ratio(params: GenParams) -> NKInstance:
    params.check()
    if params.model != "fixed_ratio":
        raise InvalidParameters("gen_fixed_ratio needs model='fixed_ratio'")
    n, k = params.n, params.k
    rows = 2 ** (k + 1)
    base, n_low = fixed_ratio_split(n, params.value)
    zeros = [base + 1] * n
    if n_low == n:
        zeros = [base] * n
    else:
        for i in _partial_shuffle(n, n_low, Stream(params.seed, SPLIT_STREAM)):
            zeros[i] = base
    funcs = []
    for i in range(n):
        s = Stream(params.seed, i)
        nbrs = sample_neighborhood(n, k, i, s)
        table = [1] * rows
        for r in _partial_shuffle(rows, zeros[i], s):
            table[r] = 0
        funcs.append(LocalFitness(i, tuple(nbrs), tuple(table)))
    return NKInstance(n, k, tuple(funcs))


def generate(params: GenParams) -> NKInstance:
    if params.model == "uniform":
        return gen_uniform(params)
    return gen_fixed_ratio(params)
