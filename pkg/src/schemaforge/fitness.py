"""Fitness catalog shared by the GA and GP engines.

All fitness values are exact ``Fraction`` objects and strictly positive, since
fitness-proportional selection divides by the population total.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping


class FitnessError(ValueError):
    """Raised for invalid fitness definitions or non-positive values."""


def as_fraction(x: Any) -> Fraction:
    """Convert ints, decimal strings and floats to ``Fraction``.

    Floats go through ``str`` so that ``0.1`` becomes ``1/10`` rather than the
    binary expansion.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


@dataclass(frozen=True)
class FitnessFunction:
    """A named, pure, strictly positive fitness function.

    ``fn`` maps a genotype (``BitString`` or ``Tree``) to a rational.  ``length``
    is the declared genome length for bitstring functions, ``None`` when any
    length is accepted.
    """

    name: str
    fn: Callable[[Any], Fraction] = field(repr=False, compare=False)
    params: tuple[tuple[str, Fraction], ...] = ()
    length: int | None = None

    def __call__(self, genotype) -> Fraction:
        if self.length is not None and len(genotype) != self.length:
            raise FitnessError(
                f"{self.name} expects length {self.length}, got {len(genotype)}"
            )
        value = as_fraction(self.fn(genotype))
        if value <= 0:
            raise FitnessError(
                f"{self.name} returned non-positive fitness {value} for {genotype}"
            )
        return value

    @property
    def is_flat(self) -> bool:
        return self.name == "flat"


def evaluate_fitness(genotype, f: FitnessFunction) -> Fraction:
    return f(genotype)


def _bits(s) -> tuple[int, ...]:
    return tuple(s.bits) if hasattr(s, "bits") else tuple(int(c) for c in str(s))


# -- bitstring catalog ------------------------------------------------------


def one_max(offset=1, length: int | None = None) -> FitnessFunction:
    off = as_fraction(offset)
    return FitnessFunction(
        "one-max", lambda s: sum(_bits(s)) + off, (("offset", off),), length
    )


def flat(value=1, length: int | None = None) -> FitnessFunction:
    v = as_fraction(value)
    return FitnessFunction("flat", lambda s: v, (("value", v),), length)


def trap_value(ones: int, k: int) -> int:
    """Deceptive trap score of one block with ``ones`` ones out of ``k``.

    The all-ones block scores ``k``; otherwise the score is ``k - 1 - ones``,
    so every step towards the optimum lowers fitness until the last one.
    """
    return k if ones == k else k - 1 - ones


def binary_trap(k: int, offset=1, length: int | None = None) -> FitnessFunction:
    """Concatenated traps over consecutive blocks of ``k`` bits."""
    if k < 2:
        raise FitnessError("trap block size must be >= 2")
    if length is not None and length % k:
        raise FitnessError(f"length {length} is not a multiple of trap size {k}")
    off = as_fraction(offset)

    def fn(s):
        b = _bits(s)
        if len(b) % k:
            raise FitnessError(f"length {len(b)} is not a multiple of trap size {k}")
        return sum(trap_value(sum(b[i : i + k]), k) for i in range(0, len(b), k)) + off

    return FitnessFunction(
        "binary-trap", fn, (("k", Fraction(k)), ("offset", off)), length
    )


def royal_road(block: int, offset=1, length: int | None = None) -> FitnessFunction:
    """Each complete all-ones block of size ``block`` contributes ``block``."""
    if block < 1:
        raise FitnessError("royal-road block size must be >= 1")
    off = as_fraction(offset)

    def fn(s):
        b = _bits(s)
        if len(b) % block:
            raise FitnessError(f"length {len(b)} is not a multiple of block {block}")
        return (
            sum(block for i in range(0, len(b), block) if all(b[i : i + block])) + off
        )

    return FitnessFunction(
        "royal-road", fn, (("block", Fraction(block)), ("offset", off)), length
    )


def user_table(table: Mapping[str, Any], default=None) -> FitnessFunction:
    """Lookup table keyed by genotype text (bitstring or tree text form)."""
    tab = {str(k): as_fraction(v) for k, v in table.items()}
    dflt = None if default is None else as_fraction(default)
    binary = all(k and set(k) <= {"0", "1"} for k in tab)
    lengths = {len(k) for k in tab}
    length = lengths.pop() if binary and len(lengths) == 1 else None

    def fn(g):
        key = str(g)
        if key in tab:
            return tab[key]
        if dflt is None:
            raise FitnessError(f"user-table has no entry for {key}")
        return dflt

    params = (("default", dflt),) if dflt is not None else ()
    return FitnessFunction("user-table", fn, params, length)


# -- program catalog --------------------------------------------------------


def program_size(offset=0) -> FitnessFunction:
    """Fitness equal to the number of nodes (plus ``offset``)."""
    off = as_fraction(offset)
    return FitnessFunction("size", lambda t: t.size + off, (("offset", off),))


_OPS: dict[str, Callable[[Fraction, Fraction], Fraction]] = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
}


def evaluate_program(tree, env: Mapping[str, Fraction]) -> Fraction:
    """Evaluate an arithmetic tree over ``+ - *`` with variables from ``env``.

    Numeric terminal names evaluate to themselves.
    """
    if not tree.children:
        if tree.symbol in env:
            return env[tree.symbol]
        try:
            return Fraction(tree.symbol)
        except ValueError:
            raise FitnessError(f"unbound terminal {tree.symbol!r}") from None
    if tree.symbol not in _OPS or len(tree.children) != 2:
        raise FitnessError(f"cannot evaluate function {tree.symbol!r}")
    a, b = (evaluate_program(c, env) for c in tree.children)
    return _OPS[tree.symbol](a, b)


def expression_fit(target: str, variables=("x", "y"), points=(-1, 0, 1, 2)) -> FitnessFunction:
    """Symbolic-regression fitness ``1 / (1 + sum |program - target|)``.

    ``target`` is a tree text form evaluated on the grid ``points ** len(variables)``.
    """
    from .trees import parse_tree

    target_tree = parse_tree(target)
    grid = [
        dict(zip(variables, map(Fraction, p)))
        for p in itertools.product(points, repeat=len(variables))
    ]
    wanted = [evaluate_program(target_tree, env) for env in grid]

    def fn(t):
        err = sum(abs(evaluate_program(t, env) - w) for env, w in zip(grid, wanted))
        return 1 / (1 + err)

    return FitnessFunction("expression-fit", fn)


CATALOG: dict[str, Callable[..., FitnessFunction]] = {
    "one-max": one_max,
    "flat": flat,
    "binary-trap": binary_trap,
    "royal-road": royal_road,
    "user-table": user_table,
    "size": program_size,
    "expression-fit": expression_fit,
}


def make_fitness(name: str, **params) -> FitnessFunction:
    try:
        factory = CATALOG[name]
    except KeyError:
        raise FitnessError(
            f"unknown fitness {name!r}; choose from {sorted(CATALOG)}"
        ) from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise FitnessError(f"bad parameters for {name}: {exc}") from None
