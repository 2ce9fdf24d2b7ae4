"""Generational GP engine with one-point homologous crossover.

One offspring: with probability ``1 - p_c`` copy a selected program; otherwise
select two programs ``h1, h2`` independently, pick a crossover point uniformly
among the nodes of their common region (root included) and replace ``h1``'s
subtree there by ``h2``'s.  Point mutation follows.  Selection is
fitness-proportional.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .fitness import FitnessFunction, as_fraction
from .ga import ConfigError
from .streams import KEY_GENERATION, KEY_INIT, substream
from .trees import PrimitiveSet, Tree, common_region, node_at, parse_tree, point_mutation_gp, replace_at, shape_of


@dataclass(frozen=True)
class GpConfig:
    n: int
    p_c: Fraction = Fraction(0)
    p_m: Fraction = Fraction(0)
    seed: int = 0
    init_depth: int = 3
    init_method: str = "grow"

    def __post_init__(self):
        for name in ("p_c", "p_m"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.n < 2:
            raise ConfigError("population size n must be >= 2")
        if self.init_method not in ("grow", "full"):
            raise ConfigError(f"unknown init method {self.init_method!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class GpPopulation:
    members: tuple[Tree, ...]
    t: int = 0

    def __post_init__(self):
        members = tuple(m if isinstance(m, Tree) else parse_tree(str(m)) for m in self.members)
        if not members:
            raise ValueError("empty population")
        object.__setattr__(self, "members", members)

    @classmethod
    def parse(cls, texts: Iterable[str], t: int = 0) -> "GpPopulation":
        return cls(tuple(parse_tree(x) for x in texts), t)

    @property
    def n(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def shapes(self) -> Counter:
        return Counter(shape_of(m) for m in self.members)

    def mean_size(self) -> Fraction:
        return Fraction(sum(m.size for m in self.members), self.n)


def program_fitness(pop: GpPopulation, f: FitnessFunction) -> list[Fraction]:
    cache: dict[Tree, Fraction] = {}
    out = []
    for m in pop.members:
        if m not in cache:
            cache[m] = f(m)
        out.append(cache[m])
    return out


def program_masses(pop: GpPopulation, f: FitnessFunction) -> dict[Tree, Fraction]:
    """Exact selection probability of each distinct program."""
    values = program_fitness(pop, f)
    total = sum(values, Fraction(0))
    if total <= 0:
        raise ConfigError("selection requires positive total fitness")
    mass: dict[Tree, Fraction] = {}
    for m, v in zip(pop.members, values):
        mass[m] = mass.get(m, Fraction(0)) + v
    return {m: v / total for m, v in mass.items()}


def crossover_at_random(h1: Tree, h2: Tree, rng: np.random.Generator) -> Tree:
    region = common_region(h1, h2)
    point = region.paths[rng.integers(region.size)]
    return replace_at(h1, point, node_at(h2, point))


@dataclass(frozen=True)
class GenerationStats:
    crossovers: int
    disruptions: int

    @property
    def disruption_frequency(self) -> float:
        return self.disruptions / self.crossovers if self.crossovers else 0.0


def breed_gp(
    pop: GpPopulation,
    values: Sequence[Fraction],
    cfg: GpConfig,
    pset: PrimitiveSet | None,
    rng: np.random.Generator,
    size: int,
) -> tuple[list[Tree], GenerationStats]:
    """Sample ``size`` i.i.d. offspring.

    A crossover counts as disruptive when the child differs from the parent
    that supplied its upper part.
    """
    if cfg.p_m > 0 and pset is None:
        raise ConfigError("point mutation needs a primitive set")
    w = np.array([float(v) for v in values])
    probs = w / w.sum()
    crossing = rng.random(size) < float(cfg.p_c)
    first = rng.choice(pop.n, size=size, p=probs)
    second = rng.choice(pop.n, size=size, p=probs)
    children = []
    disrupted = 0
    for c, a, b in zip(crossing, first, second):
        h1 = pop.members[a]
        if c:
            child = crossover_at_random(h1, pop.members[b], rng)
            disrupted += child != h1
        else:
            child = h1
        if cfg.p_m > 0:
            child = point_mutation_gp(child, cfg.p_m, rng, pset)
        children.append(child)
    return children, GenerationStats(int(crossing.sum()), disrupted)


def next_generation_gp(
    pop: GpPopulation,
    f: FitnessFunction,
    cfg: GpConfig,
    pset: PrimitiveSet | None = None,
    trial: int = 0,
) -> tuple[GpPopulation, GenerationStats]:
    if pop.n != cfg.n:
        raise ConfigError(f"population has {pop.n} members, config says n={cfg.n}")
    rng = substream(cfg.seed, KEY_GENERATION, trial, pop.t)
    children, stats = breed_gp(pop, program_fitness(pop, f), cfg, pset, rng, cfg.n)
    return GpPopulation(tuple(children), pop.t + 1), stats


def random_gp_population(pset: PrimitiveSet, cfg: GpConfig, trial: int = 0) -> GpPopulation:
    rng = substream(cfg.seed, KEY_INIT, trial)
    return GpPopulation(
        tuple(pset.random_tree(rng, cfg.init_depth, cfg.init_method) for _ in range(cfg.n))
    )


def run_gp(
    pop: GpPopulation,
    f: FitnessFunction,
    cfg: GpConfig,
    pset: PrimitiveSet | None,
    generations: int,
    trial: int = 0,
) -> tuple[list[GpPopulation], list[GenerationStats]]:
    history, stats = [pop], []
    for _ in range(generations):
        pop, s = next_generation_gp(pop, f, cfg, pset, trial)
        history.append(pop)
        stats.append(s)
    return history, stats
