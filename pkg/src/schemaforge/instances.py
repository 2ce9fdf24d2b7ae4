"""Random tiny instances for oracle sweeps (tests and the ``verify`` command)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fitness import FitnessFunction
from .ga import BitString, GaConfig, Population
from .gp import GpConfig, GpPopulation
from .gpschema import EQ
from .schema import GaSchema
from .trees import PrimitiveSet, Tree, all_programs

PROBS = (Fraction(0), Fraction(1, 2), Fraction(1))
SMALL_PSET = PrimitiveSet({"+": 2, "-": 1}, ("x", "y"))


def table_fitness(values: dict, name: str = "table") -> FitnessFunction:
    """Fitness from a dict keyed by genotype text."""
    return FitnessFunction(name, lambda g: values[str(g)])


@dataclass(frozen=True)
class GaInstance:
    pop: Population
    f: FitnessFunction
    cfg: GaConfig
    schema: GaSchema


def random_ga_instance(
    rng: np.random.Generator,
    max_n: int = 5,
    max_length: int = 4,
    p_c_choices=PROBS,
    p_m_choices=(Fraction(0),),
) -> GaInstance:
    n = int(rng.integers(2, max_n + 1))
    ell = int(rng.integers(2, max_length + 1))
    members = tuple(BitString(tuple(int(b) for b in rng.integers(0, 2, ell))) for _ in range(n))
    values = {
        "".join(map(str, bits)): Fraction(int(rng.integers(1, 9)))
        for bits in itertools.product((0, 1), repeat=ell)
    }
    cfg = GaConfig(
        n=n,
        p_c=p_c_choices[int(rng.integers(len(p_c_choices)))],
        p_m=p_m_choices[int(rng.integers(len(p_m_choices)))],
    )
    schema = GaSchema("".join("01*"[int(rng.integers(3))] for _ in range(ell)))
    return GaInstance(Population(members), table_fitness(values), cfg, schema)


@dataclass(frozen=True)
class GpInstance:
    pop: GpPopulation
    f: FitnessFunction
    cfg: GpConfig
    schema: Tree


_PROGRAMS: dict[tuple, list[Tree]] = {}


def _programs(pset: PrimitiveSet, max_nodes: int) -> list[Tree]:
    key = (pset, max_nodes)
    if key not in _PROGRAMS:
        _PROGRAMS[key] = all_programs(pset, max_nodes)
    return _PROGRAMS[key]


def random_schema_from(program: Tree, rng: np.random.Generator, keep: float = 0.4) -> Tree:
    """Relabel a random subset of ``program``'s nodes to ``=``."""
    return Tree(
        program.symbol if rng.random() < keep else EQ,
        tuple(random_schema_from(c, rng, keep) for c in program.children),
    )


def random_gp_instance(
    rng: np.random.Generator,
    max_trees: int = 4,
    max_nodes: int = 7,
    pset: PrimitiveSet = SMALL_PSET,
    p_c_choices=PROBS,
    flat: bool = False,
) -> GpInstance:
    """Population of 2..``max_trees`` programs drawn from all programs of at most
    ``max_nodes`` nodes; schema derived from one of the members."""
    progs = _programs(pset, max_nodes)
    n = int(rng.integers(2, max_trees + 1))
    members = tuple(progs[int(rng.integers(len(progs)))] for _ in range(n))
    if flat:
        f = FitnessFunction("flat", lambda g: Fraction(1))
    else:
        values = {str(p): Fraction(int(rng.integers(1, 9))) for p in set(members)}
        f = table_fitness(values)
    cfg = GpConfig(n=n, p_c=p_c_choices[int(rng.integers(len(p_c_choices)))])
    schema = random_schema_from(members[int(rng.integers(n))], rng)
    return GpInstance(GpPopulation(members), f, cfg, schema)
