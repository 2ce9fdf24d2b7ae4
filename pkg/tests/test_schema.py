from fractions import Fraction
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from schemaforge.fitness import one_max
from schemaforge.ga import Population, bs
from schemaforge.schema import (
    CapExceeded, GaSchema, all_schemata, census_size_bound, count_and_fitness, flip,
    implicit_parallelism, matches, mean_fitness, schema_census, schema_metrics, truncate,
)

schemas = st.text("01*", min_size=2, max_size=8).map(GaSchema)


def test_metrics():
    assert schema_metrics(GaSchema("1**0*")) == (2, 3, Fraction(3, 4))
    assert schema_metrics(GaSchema("*1***")) == (1, 0, 0)


def test_matching():
    h = GaSchema("1*0")
    assert matches(h, bs("110")) and not matches(h, bs("111"))
    with pytest.raises(ValueError):
        matches(h, bs("11"))


def test_truncation():
    h = GaSchema("10*1")
    assert truncate(h, 1, "left") == GaSchema("10**")
    assert truncate(h, 1, "right") == GaSchema("***1")


@given(schemas, st.data())
def test_truncations_partition_fixed_positions(h, data):
    i = data.draw(st.integers(0, len(h) - 1))
    left, right = truncate(h, i, "L"), truncate(h, i, "R")
    assert left.order + right.order == h.order
    for a, b, c in zip(left.pattern, right.pattern, h.pattern):
        assert c == (a if a != "*" else b)


def test_flip_requires_fixed_position():
    assert flip(GaSchema("1*0"), (0, 2)) == GaSchema("0*1")
    with pytest.raises(ValueError):
        flip(GaSchema("1*0"), (1,))


def test_count_and_fitness():
    pop = Population.parse(["110", "100", "011"])
    assert count_and_fitness(GaSchema("1**"), pop, one_max()) == (2, Fraction(5, 2))
    assert count_and_fitness(GaSchema("000"), pop, one_max()) == (0, 0)
    assert mean_fitness(pop, one_max()) == Fraction(8, 3)


def test_all_schemata_counts():
    assert len(list(all_schemata(3))) == 27
    assert len(list(all_schemata(4, 1))) == census_size_bound(4, 1) == 9


def test_census_lists_every_present_schema():
    pop = Population.parse(["10", "11"])
    rows = {str(r.schema): (r.count, r.fitness) for r in schema_census(pop, one_max(), 2)}
    assert rows == {
        "**": (2, Fraction(5, 2)), "1*": (2, Fraction(5, 2)), "*0": (1, 2), "*1": (1, 3),
        "10": (1, 2), "11": (1, 3),
    }


def test_census_cap():
    pop = Population.parse(["0" * 30, "1" * 30])
    with pytest.raises(CapExceeded):
        schema_census(pop, one_max(), 30)


def test_implicit_parallelism_reference_point():
    r = implicit_parallelism(1024, 64, 8)
    assert r.theta == 7
    assert r.schema_count == 2**7 * math.comb(64, 7)
    assert r.holds


def test_implicit_parallelism_rejects_bad_phi():
    with pytest.raises(ValueError):
        implicit_parallelism(8, 10, 8)
