from fractions import Fraction

import pytest

from schemaforge.fitness import program_size
from schemaforge.ga import ConfigError
from schemaforge.gp import (
    GpConfig, GpPopulation, breed_gp, crossover_at_random, next_generation_gp, program_fitness,
    program_masses, random_gp_population, run_gp,
)
from schemaforge.streams import substream
from schemaforge.trees import PrimitiveSet, common_region, t

PSET = PrimitiveSet({"+": 2, "-": 2, "*": 2}, ("x", "y"))
POP = GpPopulation.parse(["(+ x y)", "x", "(* x (- y x))"])


def test_config_validation():
    with pytest.raises(ConfigError):
        GpConfig(n=1)
    with pytest.raises(ConfigError):
        GpConfig(n=3, p_c=2)
    with pytest.raises(ConfigError):
        GpConfig(n=3, init_method="ramped")


def test_population_summaries():
    assert POP.n == 3
    assert POP.mean_size() == Fraction(9, 3)
    assert POP.shapes()[t("=")] == 1


def test_masses_pool_duplicates():
    pop = GpPopulation.parse(["x", "x", "(+ x y)"])
    assert program_fitness(pop, program_size()) == [1, 1, 3]
    assert program_masses(pop, program_size()) == {t("x"): Fraction(2, 5), t("(+ x y)"): Fraction(3, 5)}


def test_crossover_at_random_keeps_donor_position():
    rng = substream(0, 0)
    a, b = t("(+ x y)"), t("(* y (- x x))")
    seen = {crossover_at_random(a, b, rng) for _ in range(200)}
    assert seen == {b, t("(+ y y)"), t("(+ x (- x x))")}
    assert len(seen) == common_region(a, b).size


def test_breed_without_crossover_copies_parents():
    kids, stats = breed_gp(POP, program_fitness(POP, program_size()), GpConfig(n=3), None, substream(1), 40)
    assert set(kids) <= set(POP.members)
    assert stats.crossovers == 0 and stats.disruption_frequency == 0.0


def test_mutation_needs_primitive_set():
    with pytest.raises(ConfigError):
        breed_gp(POP, [1, 1, 1], GpConfig(n=3, p_m=Fraction(1, 2)), None, substream(1), 1)


def test_generation_deterministic():
    cfg = GpConfig(n=3, p_c=Fraction(9, 10), seed=4)
    a = next_generation_gp(POP, program_size(), cfg)
    assert a == next_generation_gp(POP, program_size(), cfg)
    assert a[0].t == 1
    hist, stats = run_gp(POP, program_size(), cfg, None, 4)
    assert len(hist) == 5 and len(stats) == 4
    for s in stats:
        assert 0 <= s.disruptions <= s.crossovers <= 3


def test_generation_checks_size():
    with pytest.raises(ConfigError):
        next_generation_gp(POP, program_size(), GpConfig(n=4))


def test_random_population_is_valid():
    pop = random_gp_population(PSET, GpConfig(n=20, seed=3, init_depth=3))
    assert pop.n == 20
    for m in pop:
        PSET.validate(m)
        assert m.depth <= 3
    assert pop == random_gp_population(PSET, GpConfig(n=20, seed=3, init_depth=3))
