"""Generational bitstring GA with proportional/tournament selection,
one-point crossover and bit mutation.

The generative model for one offspring is fixed and shared by the sampler, the
exact formulas and the enumeration oracle:

1. with probability ``1 - p_c`` select one parent and copy it;
2. otherwise select two parents independently, draw a cut ``k`` uniformly from
   ``{0, ..., l-2}`` and keep the first child ``A[0..k] + B[k+1..l-1]``;
3. mutate the result (per-bit or single-bit mode).

Offspring are i.i.d. given the current population.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .fitness import FitnessFunction, as_fraction
from .streams import KEY_GENERATION, substream


class ConfigError(ValueError):
    """Invalid engine configuration."""


@dataclass(frozen=True, order=True)
class BitString:
    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise ValueError("a bitstring needs at least one allele")
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"alleles must be 0 or 1: {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def parse(cls, text: str) -> "BitString":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {text!r}")
        return cls(tuple(int(c) for c in text))

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, i):
        return self.bits[i]

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


def bs(text: str) -> BitString:
    return BitString.parse(text)


@dataclass(frozen=True)
class GaConfig:
    n: int
    p_c: Fraction = Fraction(0)
    p_m: Fraction = Fraction(0)
    mutation_mode: str = "per-bit"
    selection: str = "proportional"
    tournament_size: int = 2
    tournament_bias: Fraction = Fraction(1)
    seed: int = 0

    def __post_init__(self):
        for name in ("p_c", "p_m", "tournament_bias"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.n < 2:
            raise ConfigError("population size n must be >= 2")
        for name in ("p_c", "p_m"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.mutation_mode not in ("per-bit", "single-bit"):
            raise ConfigError(f"unknown mutation mode {self.mutation_mode!r}")
        if self.selection not in ("proportional", "tournament"):
            raise ConfigError(f"unknown selection {self.selection!r}")
        if self.selection == "tournament":
            if self.tournament_size < 2:
                raise ConfigError("tournament size must be >= 2")
            if self.tournament_size > self.n:
                raise ConfigError("tournament size exceeds population size")
            if not Fraction(1, 2) <= self.tournament_bias <= 1:
                raise ConfigError("tournament bias q must lie in [0.5, 1]")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class Population:
    members: tuple[BitString, ...]
    t: int = 0
    _array: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        members = tuple(m if isinstance(m, BitString) else bs(str(m)) for m in self.members)
        if not members:
            raise ValueError("empty population")
        if len({len(m) for m in members}) != 1:
            raise ValueError("population members must share one length")
        object.__setattr__(self, "members", members)
        arr = np.array([m.bits for m in members], dtype=np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "_array", arr)

    @classmethod
    def parse(cls, texts: Iterable[str], t: int = 0) -> "Population":
        return cls(tuple(bs(x) for x in texts), t)

    @classmethod
    def from_array(cls, arr: np.ndarray, t: int = 0) -> "Population":
        return cls(tuple(BitString(tuple(row)) for row in arr.tolist()), t)

    @property
    def n(self) -> int:
        return len(self.members)

    @property
    def length(self) -> int:
        return len(self.members[0])

    def array(self) -> np.ndarray:
        return self._array

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def fitness_values(pop: Population, f: FitnessFunction) -> list[Fraction]:
    cache: dict[BitString, Fraction] = {}
    out = []
    for m in pop.members:
        if m not in cache:
            cache[m] = f(m)
        out.append(cache[m])
    return out


def _check_selection(values: Sequence[Fraction], cfg: GaConfig) -> None:
    if any(v <= 0 for v in values):
        raise ConfigError("selection requires strictly positive fitness values")
    if cfg.selection == "tournament" and cfg.tournament_size > len(values):
        raise ConfigError("tournament size exceeds population size")


def select_indices(
    values: Sequence[Fraction], cfg: GaConfig, rng: np.random.Generator, size: int
) -> np.ndarray:
    """Draw ``size`` parent indices with the configured selection scheme.

    Tournament: ``k`` entrants are drawn uniformly with replacement and paired
    off in a single-elimination bracket (an odd entrant gets a bye).  Each pair
    goes to the fitter entrant with probability ``q``; equal fitness is a fair
    coin.
    """
    _check_selection(values, cfg)
    w = np.array([float(v) for v in values])
    n = len(w)
    if cfg.selection == "proportional":
        return rng.choice(n, size=size, p=w / w.sum())
    q = float(cfg.tournament_bias)
    entrants = list(rng.integers(0, n, size=(cfg.tournament_size, size)))
    while len(entrants) > 1:
        nxt = []
        for j in range(0, len(entrants) - 1, 2):
            x, y = entrants[j], entrants[j + 1]
            fx, fy = w[x], w[y]
            fitter_coin = rng.random(size) < q
            tie_coin = rng.random(size) < 0.5
            fitter = np.where(fx > fy, x, y)
            weaker = np.where(fx > fy, y, x)
            winner = np.where(fitter_coin, fitter, weaker)
            nxt.append(np.where(fx == fy, np.where(tie_coin, x, y), winner))
        if len(entrants) % 2:
            nxt.append(entrants[-1])
        entrants = nxt
    return entrants[0]


def select_parent(
    pop: Population, f: FitnessFunction, cfg: GaConfig, rng: np.random.Generator
) -> BitString:
    values = fitness_values(pop, f)
    if sum(values) == 0:
        raise ConfigError("zero total fitness")
    return pop.members[int(select_indices(values, cfg, rng, 1)[0])]


def one_point_crossover(a: BitString, b: BitString, cut: int) -> tuple[BitString, BitString]:
    """Split after index ``cut`` and swap tails; ``cut`` ranges over 0..l-2."""
    if len(a) != len(b):
        raise ValueError("parents must have equal length")
    ell = len(a)
    if ell < 2:
        raise ValueError("one-point crossover needs length >= 2")
    if not 0 <= cut <= ell - 2:
        raise ValueError(f"cut {cut} outside 0..{ell - 2}")
    k = cut + 1
    return (
        BitString(a.bits[:k] + b.bits[k:]),
        BitString(b.bits[:k] + a.bits[k:]),
    )


def _mutate_rows(rows: np.ndarray, cfg: GaConfig, rng: np.random.Generator) -> np.ndarray:
    size, ell = rows.shape
    pm = float(cfg.p_m)
    if cfg.mutation_mode == "per-bit":
        flips = rng.random((size, ell)) < pm
        return rows ^ flips.astype(np.uint8)
    hit = rng.random(size) < pm
    where = rng.integers(0, ell, size=size)
    out = rows.copy()
    idx = np.nonzero(hit)[0]
    out[idx, where[idx]] ^= 1
    return out


def mutate(s: BitString, cfg: GaConfig, rng: np.random.Generator) -> BitString:
    row = np.array([s.bits], dtype=np.uint8)
    return BitString(tuple(_mutate_rows(row, cfg, rng)[0].tolist()))


def breed(
    pop: Population,
    values: Sequence[Fraction],
    cfg: GaConfig,
    rng: np.random.Generator,
    size: int,
) -> np.ndarray:
    """Sample ``size`` i.i.d. offspring; returns a ``(size, l)`` uint8 array."""
    arr = pop.array()
    ell = arr.shape[1]
    pc = float(cfg.p_c)
    if pc > 0 and ell < 2:
        raise ConfigError("crossover needs string length >= 2")
    crossing = rng.random(size) < pc
    first = select_indices(values, cfg, rng, size)
    second = select_indices(values, cfg, rng, size)
    cuts = rng.integers(0, max(ell - 1, 1), size=size)
    tail = np.arange(ell)[None, :] > cuts[:, None]
    take_b = crossing[:, None] & tail
    children = np.where(take_b, arr[second], arr[first]).astype(np.uint8)
    if cfg.p_m > 0:
        children = _mutate_rows(children, cfg, rng)
    return children


def next_generation(
    pop: Population, f: FitnessFunction, cfg: GaConfig, trial: int = 0
) -> Population:
    """Advance one generation.

    The stream is keyed by ``(seed, trial, t)`` so a generation is a pure
    function of population, fitness and config.
    """
    if pop.n != cfg.n:
        raise ConfigError(f"population has {pop.n} members, config says n={cfg.n}")
    values = fitness_values(pop, f)
    rng = substream(cfg.seed, KEY_GENERATION, trial, pop.t)
    children = breed(pop, values, cfg, rng, cfg.n)
    return Population.from_array(children, pop.t + 1)


def random_population(n: int, ell: int, rng: np.random.Generator) -> Population:
    return Population.from_array(rng.integers(0, 2, size=(n, ell), dtype=np.uint8))


def run(
    pop: Population, f: FitnessFunction, cfg: GaConfig, generations: int, trial: int = 0
) -> list[Population]:
    history = [pop]
    for _ in range(generations):
        pop = next_generation(pop, f, cfg, trial)
        history.append(pop)
    return history
