"""Acceptance suite: one test per criterion, each recording a pass/fail line."""

from fractions import Fraction
import math
import statistics
import time
from pathlib import Path

import numpy as np

from schemaforge.fitness import one_max
from schemaforge.ga import GaConfig, random_population
from schemaforge.gp import GpConfig, GpPopulation, random_gp_population, run_gp
from schemaforge.gptheorems import (
    creation_correction, macroscopic_alpha_gp, microscopic_alpha_gp, schema_probability_gp,
    size_evolution,
)
from schemaforge.harness.config import load_config
from schemaforge.harness.experiment import run_experiment
from schemaforge.harness.verify import (
    LEMMA_PSET, _simulate_counts, chebychev_coverage, extinction_figures, simulate_extinction,
)
from schemaforge.instances import random_ga_instance, random_gp_instance
from schemaforge.oracle import (
    compose_count_law, mask_lemma_check, oracle_alpha, oracle_alpha_gp, oracle_expected_mean_size,
)
from schemaforge.schema import GaSchema, implicit_parallelism
from schemaforge.streams import KEY_INSTANCES, KEY_MONTE_CARLO, substream
from schemaforge.theorems import alpha_tilde, exact_alpha, holland_bound, next_count_distribution
from schemaforge.trees import fill_shape, shape_of, shapes_up_to

ROOT = Path(__file__).resolve().parent.parent
SEED = 20240601
HALF = Fraction(1, 2)


def test_exact_ga_transmission(criteria):
    start = time.perf_counter()
    equal = 0
    total = 300
    for i in range(total):
        inst = random_ga_instance(substream(SEED, KEY_INSTANCES, 1, i))
        equal += exact_alpha(inst.schema, inst.pop, inst.f, inst.cfg).alpha == oracle_alpha(
            inst.schema, inst.pop, inst.f, inst.cfg
        )
    elapsed = time.perf_counter() - start
    criteria.record(1, equal == total and elapsed < 60,
                    f"exact alpha equals oracle in {equal}/{total} instances, {elapsed:.1f}s")


def test_holland_bound_soundness(criteria):
    start = time.perf_counter()
    held = 0
    total = 300
    for i in range(total):
        inst = random_ga_instance(substream(SEED, KEY_INSTANCES, 2, i),
                                  p_m_choices=(Fraction(0), Fraction(1, 10)))
        expected = inst.pop.n * oracle_alpha(inst.schema, inst.pop, inst.f, inst.cfg)
        held += holland_bound(inst.schema, inst.pop, inst.f, inst.cfg) <= expected
    elapsed = time.perf_counter() - start
    criteria.record(2, held == total and elapsed < 60,
                    f"bound below oracle expectation in {held}/{total} instances, {elapsed:.1f}s")


def test_binomial_law(criteria):
    exact = 0
    total = 200
    for i in range(total):
        inst = random_ga_instance(substream(SEED, KEY_INSTANCES, 3, i))
        composed = compose_count_law(oracle_alpha(inst.schema, inst.pop, inst.f, inst.cfg), inst.pop.n)
        alpha = exact_alpha(inst.schema, inst.pop, inst.f, inst.cfg).alpha
        exact += composed == next_count_distribution(alpha, inst.pop.n).pmf

    n, ell, trials = 100, 16, 20000
    cfg = GaConfig(n=n, p_c=HALF, p_m=Fraction(1, 100))
    pop = random_population(n, ell, substream(SEED, 2, 3))
    h = GaSchema("11" + "*" * (ell - 2))
    alpha = float(exact_alpha(h, pop, one_max(), cfg).alpha)
    counts = _simulate_counts(pop, one_max(), cfg, h, trials, substream(SEED, KEY_MONTE_CARLO, 3))
    mean, var = counts.mean(), counts.var(ddof=1)
    se = math.sqrt(var / trials)
    want_mean, want_var = n * alpha, n * alpha * (1 - alpha)
    ok = (exact == total and abs(mean - want_mean) <= 4 * se
          and abs(var - want_var) <= 0.1 * want_var)
    criteria.record(3, ok, f"composed law binomial in {exact}/{total}; mean {mean:.3f} vs "
                           f"{want_mean:.3f} (se {se:.3f}), variance {var:.3f} vs {want_var:.3f}")


def test_extinction_figures(criteria):
    one, two = extinction_figures(100)
    sim_one, sim_two = simulate_extinction(100, 20000, substream(SEED, KEY_MONTE_CARLO, 4))
    ok = (abs(float(one) - sim_one) <= 0.01 and abs(float(one) - 0.37) <= 0.02
          and abs(sim_one - 0.37) <= 0.02 and float(two) >= 0.48 and sim_two >= 0.48)
    criteria.record(4, ok, f"one generation {float(one):.4f} predicted, {sim_one:.4f} simulated; "
                           f"two generations {float(two):.4f} predicted, {sim_two:.4f} simulated")


def test_chebychev_coverage(criteria):
    n, ell, trials = 30, 10, 10000
    cfg = GaConfig(n=n, p_c=Fraction(7, 10))
    pop = random_population(n, ell, substream(SEED, 2, 5))
    h = GaSchema("1*1" + "*" * (ell - 3))
    parts = []
    ok = True
    for j, k in enumerate((Fraction(3, 2), Fraction(2), Fraction(3))):
        cov, _, conf = chebychev_coverage(pop, one_max(), cfg, h, k, trials,
                                          substream(SEED, KEY_MONTE_CARLO, 5, j))
        ok &= cov >= conf
        parts.append(f"k={float(k)}: {cov:.4f} >= {float(conf):.4f}")
    criteria.record(5, ok, "; ".join(parts))


def test_alpha_tilde_contract(criteria):
    exact = mono = trip = True
    for n in (4, 10, 100):
        exact &= all(alpha_tilde(0, x, n) == Fraction(x, n) for x in range(n + 1))
        for k in (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3)):
            vals = [alpha_tilde(k, x, n) for x in range(n + 1)]
            mono &= all(a < b for a, b in zip(vals, vals[1:]))
            for x, a in enumerate(vals):
                a = float(a)
                trip &= n * a - float(k) * math.sqrt(n * a * (1 - a)) >= x - 1e-9
    criteria.record(6, exact and mono and trip,
                    f"exact at k=0 {exact}, strictly increasing {mono}, round trip {trip}")


def test_gp_exact_theorems(criteria):
    from schemaforge.instances import SMALL_PSET, table_fitness

    start = time.perf_counter()
    total = 150
    equal = nonneg = zero_single = iff = no_crossover = 0
    for i in range(total):
        rng = substream(SEED, KEY_INSTANCES, 7, i)
        inst = random_gp_instance(rng)
        h, pop, f, cfg = inst.schema, inst.pop, inst.f, inst.cfg
        o = oracle_alpha_gp(h, pop, f, cfg)
        equal += microscopic_alpha_gp(h, pop, f, cfg) == o == macroscopic_alpha_gp(h, pop, f, cfg)
        delta = creation_correction(h, pop, f, cfg).delta_alpha
        nonneg += delta >= 0
        if cfg.p_c == 0 or schema_probability_gp(h, pop, f) == 0:
            # the equivalence needs crossover and a selectable member of H
            no_crossover += 1
            iff += delta == 0
        else:
            iff += (delta == 0) == (set(pop.shapes()) == {shape_of(h)})

        options = list(fill_shape(shape_of(h), SMALL_PSET))
        same = GpPopulation(tuple(options[int(rng.integers(len(options)))] for _ in range(pop.n)))
        same_f = table_fitness({str(p): Fraction(int(rng.integers(1, 9))) for p in set(same.members)})
        same_cfg = GpConfig(n=same.n, p_c=(Fraction(0), HALF, Fraction(1))[i % 3])
        zero_single += creation_correction(h, same, same_f, same_cfg).delta_alpha == 0
    elapsed = time.perf_counter() - start
    ok = (equal == total and nonneg == total and zero_single == total
          and iff == total and elapsed < 300)
    criteria.record(7, ok, f"micro = macro = oracle {equal}/{total}; delta >= 0 {nonneg}/{total}; "
                           f"delta = 0 on single-shape populations {zero_single}/{total}; "
                           f"delta = 0 iff one shape (p_c > 0) or delta = 0 (p_c = 0) {iff}/{total}, "
                           f"{no_crossover} with p_c = 0; {elapsed:.1f}s")


def test_mask_lemma(criteria):
    shapes = shapes_up_to(7, (0, 2))
    bad = schemata = pairs = 0
    for j, shape in enumerate(shapes):
        r = mask_lemma_check(shape, LEMMA_PSET, rng=substream(SEED, KEY_INSTANCES, 8, j))
        bad += r.counterexamples
        schemata += r.schemata
        pairs += r.schemata * r.masks * r.pairs
    criteria.record(8, bad == 0, f"{len(shapes)} shapes, {schemata} schemata, "
                                 f"{pairs} (schema, mask, pair) cases, {bad} counterexamples")


def test_size_evolution(criteria):
    total = 100
    flat_ok = oracle_ok = invariant = 0
    for i in range(total):
        inst = random_gp_instance(substream(SEED, KEY_INSTANCES, 9, i), flat=True)
        flat_ok += oracle_expected_mean_size(inst.pop, inst.f, inst.cfg) == inst.pop.mean_size()
        inst = random_gp_instance(substream(SEED, KEY_INSTANCES, 10, i))
        values = set()
        match = True
        for p_c in (Fraction(0), HALF, Fraction(1)):
            cfg = GpConfig(n=inst.pop.n, p_c=p_c)
            se = size_evolution(inst.pop, inst.f, cfg)
            match &= se.by_program == se.by_shape == oracle_expected_mean_size(inst.pop, inst.f, cfg)
            values.add(se.value)
        oracle_ok += match
        invariant += len(values) == 1
    ok = flat_ok == oracle_ok == invariant == total
    criteria.record(9, ok, f"flat keeps mean size {flat_ok}/{total}; equals oracle {oracle_ok}/{total}; "
                           f"invariant in p_c {invariant}/{total}")


def test_implicit_parallelism(criteria):
    r = implicit_parallelism(1024, 64, 8)
    ok = r.theta == 7 and r.schema_count == 2**7 * math.comb(64, 7) and r.schema_count >= 1024**3
    criteria.record(10, ok, f"theta = {r.theta}, 2^theta C(64,theta) = {r.schema_count} >= {1024**3}")


def test_reproducibility(criteria, tmp_path):
    same = []
    for name in ("ga_tiny_oracle.yaml", "gp_default.yaml"):
        dirs = []
        for run in ("a", "b"):
            out = tmp_path / name / run
            run_experiment(ROOT / "configs" / name, out=str(out))
            dirs.append(out)
        for f in sorted(dirs[0].iterdir()):
            same.append((f"{name}:{f.name}", f.read_bytes() == (dirs[1] / f.name).read_bytes()))
    ok = all(s for _, s in same)
    criteria.record(11, ok, f"{sum(s for _, s in same)}/{len(same)} artifacts byte-identical")


def test_disruption_trend(criteria):
    base = load_config(ROOT / "configs" / "gp_default.yaml")
    runs = 30
    gens = base.generations
    quarter = max(gens // 4, 1)
    early, late = [], []
    for r in range(runs):
        eng = GpConfig(n=base.engine.n, p_c=base.engine.p_c, p_m=base.engine.p_m, seed=base.seed + r,
                       init_depth=base.engine.init_depth, init_method=base.engine.init_method)
        pop = random_gp_population(base.pset, eng)
        _, stats = run_gp(pop, base.fitness, eng, base.pset, gens)
        freq = [s.disruption_frequency for s in stats]
        early.append(float(np.mean(freq[:quarter])))
        late.append(float(np.mean(freq[-quarter:])))
    e, l = statistics.median(early), statistics.median(late)
    criteria.record(12, e > l, f"median disruption frequency over {runs} runs: "
                               f"first {quarter} generations {e:.4f}, last {quarter} {l:.4f}")
