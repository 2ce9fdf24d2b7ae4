"""Closed-form transmission results for the bitstring GA.

Frozen values marked [DERIVED] were produced by the enumeration oracle and are
re-checked against it here.
"""

from fractions import Fraction
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schemaforge.fitness import binary_trap, one_max
from schemaforge.ga import GaConfig, Population
from schemaforge.instances import random_ga_instance
from schemaforge.oracle import compose_count_law, oracle_alpha
from schemaforge.schema import GaSchema
from schemaforge.streams import substream
from schemaforge.theorems import (
    adjusted_and_effective_fitness, alpha_tilde, chebychev_bounds, conditional_event_holds,
    deception_report, disruptive_cuts, exact_alpha, holland_bound, mu_event_holds,
    next_count_distribution, noop_cut_alpha, recursive_conditional_bound,
    selection_probability,
)

POP = Population.parse(["0110", "1011", "0001", "1100"])
CFG = GaConfig(n=4, p_c=Fraction(1, 2))

# [DERIVED] alpha, p_c/l variant, Holland bound, operator-adjusted and effective fitness
FROZEN = {
    "1**1": (Fraction(5, 16), Fraction(61, 192), Fraction(2, 3), Fraction(2), Fraction(15, 4)),
    "*11*": (Fraction(37, 144), Fraction(49, 192), Fraction(5, 6), Fraction(5, 2), Fraction(37, 12)),
    "1***": (Fraction(7, 12), Fraction(7, 12), Fraction(7, 3), Fraction(7, 2), Fraction(7, 2)),
    "**01": (Fraction(25, 144), Fraction(11, 64), Fraction(5, 9), Fraction(5, 3), Fraction(25, 12)),
}


@pytest.mark.parametrize("pattern", sorted(FROZEN))
def test_frozen_transmission_values(pattern):
    h = GaSchema(pattern)
    alpha, variant, bound, f_a, f_e = FROZEN[pattern]
    assert oracle_alpha(h, POP, one_max(), CFG) == alpha
    assert exact_alpha(h, POP, one_max(), CFG).alpha == alpha
    assert noop_cut_alpha(h, POP, one_max(), CFG) == variant
    assert holland_bound(h, POP, one_max(), CFG) == bound
    adj = adjusted_and_effective_fitness(h, POP, one_max(), CFG)
    assert (adj.operator_adjusted, adj.effective) == (f_a, f_e)
    assert adj.forms_agree


def test_no_crossover_alpha_is_selection_probability():
    h = GaSchema("1***")
    cfg = GaConfig(n=4)
    assert exact_alpha(h, POP, one_max(), cfg).alpha == selection_probability(h, POP, one_max())


def test_order_one_schema_unaffected_by_crossover():
    h = GaSchema("**1*")
    a = exact_alpha(h, POP, one_max(), GaConfig(n=4, p_c=1)).alpha
    assert a == selection_probability(h, POP, one_max())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_exact_alpha_matches_oracle_with_mutation(seed):
    probs = (Fraction(0), Fraction(1, 3), Fraction(1))
    inst = random_ga_instance(substream(seed, 3), p_m_choices=probs)
    for mode in ("per-bit", "single-bit"):
        cfg = GaConfig(n=inst.cfg.n, p_c=inst.cfg.p_c, p_m=inst.cfg.p_m, mutation_mode=mode)
        assert exact_alpha(inst.schema, inst.pop, inst.f, cfg).alpha == oracle_alpha(
            inst.schema, inst.pop, inst.f, cfg
        )


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_holland_bound_below_expectation(seed):
    probs = (Fraction(0), Fraction(1, 10), Fraction(1, 2))
    inst = random_ga_instance(substream(seed, 3), p_m_choices=probs)
    expected = inst.pop.n * oracle_alpha(inst.schema, inst.pop, inst.f, inst.cfg)
    assert holland_bound(inst.schema, inst.pop, inst.f, inst.cfg) <= expected


def test_disruptive_cuts():
    assert list(disruptive_cuts(GaSchema("*1**0*"))) == [1, 2, 3]
    assert list(disruptive_cuts(GaSchema("**1*"))) == []


def test_one_max_is_not_deceptive():
    r = deception_report(one_max(), GaConfig(n=8, p_c=Fraction(3, 4)), 3)
    assert r.argmax_f == (GaSchema("111"),)
    assert not r.deceptive


def test_trap_is_deceptive():
    r = deception_report(binary_trap(3), GaConfig(n=8, p_c=Fraction(3, 4)), 3, scope="schemata")
    assert r.best_f == GaSchema("111")
    assert GaSchema("111") not in r.argmax_fa
    assert r.deceptive
    assert r.channels


def test_binomial_law_and_its_moments():
    alpha = Fraction(1, 3)
    law = next_count_distribution(alpha, 6)
    assert law.pmf == compose_count_law(alpha, 6)
    assert sum(law.pmf) == 1
    assert law.mean == 2 and law.variance == Fraction(4, 3)
    assert law.extinction == Fraction(2, 3) ** 6
    assert law.tail(0) == 1
    assert law.survives == (alpha > Fraction(4, 6))


def test_signal_to_noise():
    law = next_count_distribution(Fraction(1, 5), 100)
    assert math.isclose(law.signal_to_noise, 10 * math.sqrt(0.25))


def test_chebychev_interval():
    b = chebychev_bounds(Fraction(1, 2), 100, 2)
    assert (b.low, b.high) == (40.0, 60.0)
    assert b.confidence == Fraction(3, 4)
    assert b.covers(50) and not b.covers(61)


def test_alpha_tilde_exact_cases():
    assert alpha_tilde(0, 3, 10) == Fraction(3, 10)
    assert alpha_tilde(2, 0, 4) == Fraction(1, 2)
    assert alpha_tilde(1, 4, 4) == 1


@settings(max_examples=60)
@given(st.integers(1, 200), st.data())
def test_alpha_tilde_is_the_threshold(n, data):
    x = data.draw(st.integers(0, n))
    k = data.draw(st.sampled_from([Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3)]))
    a = float(alpha_tilde(k, x, n))
    assert 0 <= a <= 1
    lhs = n * a - float(k) * math.sqrt(n * a * (1 - a))
    assert lhs >= x - 1e-9 * n
    assert alpha_tilde(k, min(x + 1, n), n) >= alpha_tilde(k, x, n)


def test_conditional_event():
    h = GaSchema("1***")
    assert conditional_event_holds(h, POP, one_max(), CFG, 1, 0)
    assert not conditional_event_holds(h, POP, one_max(), CFG, 2, 4)
    with pytest.raises(ValueError):
        conditional_event_holds(h, POP, one_max(), GaConfig(n=4, p_m=Fraction(1, 10)), 1, 0)


def test_recursive_bound_clamps():
    assert recursive_conditional_bound(Fraction(9, 10), Fraction(9, 10), 2) == Fraction(3, 5)
    assert recursive_conditional_bound(Fraction(1, 4), Fraction(1, 4), 2) == 0


def test_mu_event():
    assert mu_event_holds(10, 10, 1, 1, 10, 2, 1, 1, 1)
    assert not mu_event_holds(1, 1, 9, 1, 10, 2, 1, 1, 1)


def test_closed_forms_reject_tournament():
    cfg = GaConfig(n=4, selection="tournament")
    with pytest.raises(ValueError):
        exact_alpha(GaSchema("1***"), POP, one_max(), cfg)
