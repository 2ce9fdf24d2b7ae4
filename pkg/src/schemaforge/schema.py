"""Fixed-length GA schemata over ``{0, 1, *}``."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .fitness import FitnessFunction
from .ga import BitString, Population, fitness_values

CENSUS_CAP = 2**22


class CapExceeded(RuntimeError):
    """An enumeration would exceed its configured cap."""


@dataclass(frozen=True, order=True)
class GaSchema:
    pattern: str

    def __post_init__(self):
        if not self.pattern or set(self.pattern) - {"0", "1", "*"}:
            raise ValueError(f"schema must be a nonempty string over 0/1/*: {self.pattern!r}")

    @classmethod
    def all_star(cls, ell: int) -> "GaSchema":
        return cls("*" * ell)

    def __len__(self) -> int:
        return len(self.pattern)

    def __str__(self) -> str:
        return self.pattern

    @property
    def fixed(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.pattern) if c != "*")

    @property
    def order(self) -> int:
        return len(self.fixed)

    @property
    def defining_length(self) -> int:
        fx = self.fixed
        return fx[-1] - fx[0] if len(fx) > 1 else 0


def schema_metrics(h: GaSchema) -> tuple[int, int, Fraction]:
    """Return ``(order, defining_length, fragility)``."""
    ell = len(h)
    if ell < 2:
        raise ValueError("fragility is undefined for length-1 schemata")
    return h.order, h.defining_length, Fraction(h.defining_length, ell - 1)


def matches(h: GaSchema, s: BitString) -> bool:
    if len(h) != len(s):
        raise ValueError(f"length mismatch: schema {len(h)}, string {len(s)}")
    return all(c == "*" or int(c) == b for c, b in zip(h.pattern, s.bits))


def count_and_fitness(
    h: GaSchema, pop: Population, f: FitnessFunction
) -> tuple[int, Fraction]:
    """``m(H,t)`` and the mean fitness of the matching members (0 if none)."""
    values = fitness_values(pop, f)
    hits = [v for s, v in zip(pop.members, values) if matches(h, s)]
    if not hits:
        return 0, Fraction(0)
    return len(hits), sum(hits, Fraction(0)) / len(hits)


def mean_fitness(pop: Population, f: FitnessFunction) -> Fraction:
    values = fitness_values(pop, f)
    return sum(values, Fraction(0)) / len(values)


def truncate(h: GaSchema, i: int, side: str) -> GaSchema:
    """``L(H,i)`` keeps positions ``0..i``; ``R(H,i)`` keeps ``i+1..l-1``."""
    ell = len(h)
    if not 0 <= i <= ell - 1:
        raise IndexError(f"truncation index {i} outside 0..{ell - 1}")
    if side in ("left", "L"):
        return GaSchema(h.pattern[: i + 1] + "*" * (ell - i - 1))
    if side in ("right", "R"):
        return GaSchema("*" * (i + 1) + h.pattern[i + 1 :])
    raise ValueError(f"side must be 'left' or 'right', not {side!r}")


def flip(h: GaSchema, positions: Iterable[int]) -> GaSchema:
    """Complement the fixed symbols at ``positions``."""
    chars = list(h.pattern)
    for j in positions:
        if chars[j] == "*":
            raise ValueError(f"position {j} is not fixed in {h}")
        chars[j] = "1" if chars[j] == "0" else "0"
    return GaSchema("".join(chars))


def all_schemata(ell: int, max_order: int | None = None) -> Iterable[GaSchema]:
    for pat in itertools.product("*01", repeat=ell):
        h = GaSchema("".join(pat))
        if max_order is None or h.order <= max_order:
            yield h


def census_size_bound(ell: int, max_order: int) -> int:
    return sum(math.comb(ell, o) * 2**o for o in range(min(max_order, ell) + 1))


@dataclass(frozen=True)
class CensusRow:
    schema: GaSchema
    count: int
    fitness: Fraction


def schema_census(
    pop: Population, f: FitnessFunction, max_order: int, cap: int = CENSUS_CAP
) -> list[CensusRow]:
    """Every schema of order <= ``max_order`` with at least one instance.

    Rows are sorted by pattern, so the result does not depend on member order.
    """
    ell = pop.length
    if census_size_bound(ell, max_order) > cap:
        raise CapExceeded(
            f"census of order <= {max_order} at length {ell} exceeds {cap} entries; "
            "lower max_order"
        )
    values = fitness_values(pop, f)
    counts: Counter[str] = Counter()
    totals: dict[str, Fraction] = {}
    for s, v in zip(pop.members, values):
        text = str(s)
        for o in range(min(max_order, ell) + 1):
            for positions in itertools.combinations(range(ell), o):
                chars = ["*"] * ell
                for j in positions:
                    chars[j] = text[j]
                key = "".join(chars)
                counts[key] += 1
                totals[key] = totals.get(key, Fraction(0)) + v
    return [
        CensusRow(GaSchema(k), counts[k], totals[k] / counts[k]) for k in sorted(counts)
    ]


@dataclass(frozen=True)
class ParallelismResult:
    theta: int
    schema_count: int
    holds: bool


def implicit_parallelism(n: int, ell: int, phi: int) -> ParallelismResult:
    """Order ``theta = floor(log2(n/phi))`` and the count ``2^theta * C(l, theta)``.

    ``holds`` compares that count with ``n**3``; the comparison is only
    guaranteed for ``64 <= n <= 2**20`` and ``l >= 64`` but is computed
    literally everywhere.
    """
    if phi <= 0 or n <= 0:
        raise ValueError("n and phi must be positive")
    if phi >= n:
        raise ValueError("phi must be smaller than n")
    theta = 0
    while phi * 2 ** (theta + 1) <= n:
        theta += 1
    count = 2**theta * math.comb(ell, theta)
    return ParallelismResult(theta, count, count >= n**3)
