from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from schemaforge.fitness import one_max
from schemaforge.ga import (
    BitString, ConfigError, GaConfig, Population, breed, bs, fitness_values, mutate,
    next_generation, one_point_crossover, random_population, run, select_indices,
)
from schemaforge.streams import substream

bitstrings = st.integers(2, 8).flatmap(
    lambda ell: st.tuples(*(st.lists(st.integers(0, 1), min_size=ell, max_size=ell) for _ in range(2)))
)


def test_bitstring_parse_and_text():
    assert str(bs("0110")) == "0110"
    with pytest.raises(ValueError):
        bs("012")
    with pytest.raises(ValueError):
        BitString(())


def test_config_validation():
    with pytest.raises(ConfigError):
        GaConfig(n=1)
    with pytest.raises(ConfigError):
        GaConfig(n=4, p_c=Fraction(3, 2))
    with pytest.raises(ConfigError):
        GaConfig(n=4, selection="tournament", tournament_size=5)
    with pytest.raises(ConfigError):
        GaConfig(n=4, selection="tournament", tournament_bias=Fraction(1, 4))
    assert GaConfig(n=4, p_c="1/2").p_c == Fraction(1, 2)


def test_population_needs_equal_lengths():
    with pytest.raises(ValueError):
        Population.parse(["01", "011"])


def test_crossover_cut_range():
    a, b = bs("0000"), bs("1111")
    assert one_point_crossover(a, b, 0) == (bs("0111"), bs("1000"))
    assert one_point_crossover(a, b, 2) == (bs("0001"), bs("1110"))
    with pytest.raises(ValueError):
        one_point_crossover(a, b, 3)


@given(bitstrings, st.data())
def test_crossover_conserves_alleles(pair, data):
    a, b = BitString(tuple(pair[0])), BitString(tuple(pair[1]))
    cut = data.draw(st.integers(0, len(a) - 2))
    c, d = one_point_crossover(a, b, cut)
    for i in range(len(a)):
        assert sorted((c[i], d[i])) == sorted((a[i], b[i]))


def test_mutation_off_and_full():
    s = bs("0101")
    rng = substream(1, 0)
    assert mutate(s, GaConfig(n=2, p_m=0), rng) == s
    assert mutate(s, GaConfig(n=2, p_m=1), rng) == bs("1010")
    one = mutate(s, GaConfig(n=2, p_m=1, mutation_mode="single-bit"), rng)
    assert sum(x != y for x, y in zip(one, s)) == 1


def test_proportional_selection_frequencies():
    values = [Fraction(1), Fraction(3)]
    idx = select_indices(values, GaConfig(n=2), substream(3, 0), 20000)
    assert abs(idx.mean() - 0.75) < 0.02


def test_selection_rejects_nonpositive_fitness():
    with pytest.raises(ConfigError):
        select_indices([Fraction(0), Fraction(1)], GaConfig(n=2), substream(0), 1)


def test_breed_without_variation_copies_members():
    pop = Population.parse(["0011", "1100"])
    kids = breed(pop, fitness_values(pop, one_max()), GaConfig(n=2), substream(0), 50)
    assert {"".join(map(str, r)) for r in kids.tolist()} <= {"0011", "1100"}


def test_generation_is_deterministic_and_counts_time():
    f = one_max()
    cfg = GaConfig(n=6, p_c=Fraction(1, 2), p_m=Fraction(1, 10), seed=11)
    pop = random_population(6, 5, substream(11, 2))
    a = next_generation(pop, f, cfg)
    b = next_generation(pop, f, cfg)
    assert a == b and a.t == 1
    hist = run(pop, f, cfg, 3)
    assert [p.t for p in hist] == [0, 1, 2, 3]


def test_generation_checks_population_size():
    with pytest.raises(ConfigError):
        next_generation(Population.parse(["01", "10"]), one_max(), GaConfig(n=3))


def test_random_population_shape():
    pop = random_population(5, 7, np.random.default_rng(0))
    assert pop.n == 5 and pop.length == 7
