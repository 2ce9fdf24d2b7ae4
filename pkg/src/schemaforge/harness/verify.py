"""Verification suites: theorem predictions against the oracle or Monte Carlo.

Each suite yields :class:`VerifyRow` objects; the verdict rules are the same
pure functions used by the experiment runner.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from ..fitness import flat
from ..ga import GaConfig, Population, breed, fitness_values, random_population
from ..gptheorems import (
    creation_correction,
    gp_schema_theorem_bound,
    macroscopic_alpha_gp,
    microscopic_alpha_gp,
    size_evolution,
)
from ..instances import random_ga_instance, random_gp_instance
from ..oracle import (
    compose_count_law,
    mask_lemma_check,
    oracle_alpha,
    oracle_alpha_gp,
    oracle_expected_mean_size,
    schemata_of_shape,
)
from ..schema import GaSchema
from ..streams import KEY_INSTANCES, KEY_MONTE_CARLO, substream
from ..theorems import (
    alpha_tilde,
    chebychev_bounds,
    exact_alpha,
    holland_bound,
    next_count_distribution,
)
from ..trees import PrimitiveSet, shapes_up_to
from .config import ExperimentConfig, load_config
from .experiment import BAND, FAILING, fmt
from .plot import CSV_HEADER

VERIFY_COLUMNS = ("suite", "instance", "predicted", "reference", "mc_se", "verdict", "detail")


@dataclass(frozen=True)
class VerifyRow:
    suite: str
    instance: int
    predicted: object
    reference: object
    mc_se: float | None
    verdict: str
    detail: str = ""

    def cells(self) -> list[str]:
        return [self.suite, str(self.instance), fmt(self.predicted), fmt(self.reference),
                fmt(self.mc_se), self.verdict, self.detail]


def _eq(p, r) -> str:
    return "equality" if p == r else "mismatch"


def _le(p, r) -> str:
    return "bound-holds" if p <= r else "bound-violated"


def _rng(cfg: ExperimentConfig, suite: str, i: int) -> np.random.Generator:
    return substream(cfg.seed, KEY_INSTANCES, sum(map(ord, suite)), i)


# -- GA suites -------------------------------------------------------------------


def suite_exact_alpha(cfg: ExperimentConfig) -> Iterator[VerifyRow]:
    for i in range(cfg.instances):
        inst = random_ga_instance(_rng(cfg, "exact-alpha", i))
        a = exact_alpha(inst.schema, inst.pop, inst.f, inst.cfg).alpha
        o = oracle_alpha(inst.schema, inst.pop, inst.f, inst.cfg)
        yield VerifyRow("exact-alpha", i, a, o, None, _eq(a, o),
                        f"H={inst.schema} n={inst.pop.n} p_c={inst.cfg.p_c}")


def suite_holland(cfg: ExperimentConfig) -> Iterator[VerifyRow]:
    for i in range(cfg.instances):
        inst = random_ga_instance(_rng(cfg, "holland-bound", i),
                                  p_m_choices=(Fraction(0), Fraction(1, 10)))
        b = holland_bound(inst.schema, inst.pop, inst.f, inst.cfg)
        e = inst.pop.n * oracle_alpha(inst.schema, inst.pop, inst.f, inst.cfg)
        yield VerifyRow("holland-bound", i, b, e, None, _le(b, e),
                        f"H={inst.schema} p_c={inst.cfg.p_c} p_m={inst.cfg.p_m}")


def suite_binomial(cfg: ExperimentConfig) -> Iterator[VerifyRow]:
    for i in range(cfg.instances):
        inst = random_ga_instance(_rng(cfg, "binomial", i))
        composed = compose_count_law(oracle_alpha(inst.schema, inst.pop, inst.f, inst.cfg), inst.pop.n)
        binom = next_count_distribution(exact_alpha(inst.schema, inst.pop, inst.f, inst.cfg).alpha,
                                        inst.pop.n).pmf
        ok = tuple(composed) == tuple(binom)
        yield VerifyRow("binomial", i, int(ok), 1, None, "equality" if ok else "mismatch",
                        f"H={inst.schema}")


def _simulate_counts(pop: Population, f, eng: GaConfig, h: GaSchema, trials: int,
                     rng: np.random.Generator) -> np.ndarray:
    kids = breed(pop, fitness_values(pop, f), eng, rng, trials * pop.n)
    kids = kids.reshape(trials, pop.n, pop.length)
    fixed = list(h.fixed)
    want = np.array([int(h.pattern[j]) for j in fixed], dtype=np.uint8)
    return (kids[:, :, fixed] == want).all(axis=2).sum(axis=1)


def chebychev_coverage(pop: Population, f, eng: GaConfig, h: GaSchema, k, trials: int,
                       rng: np.random.Generator) -> tuple[float, float, Fraction]:
    """Empirical coverage of the two-sided interval over ``trials`` generations."""
    alpha = exact_alpha(h, pop, f, eng).alpha
    cb = chebychev_bounds(alpha, pop.n, k)
    counts = _simulate_counts(pop, f, eng, h, trials, rng)
    hits = (counts >= cb.low) & (counts <= cb.high)
    cov = float(hits.mean())
    return cov, math.sqrt(max(cov * (1 - cov), 1e-12) / trials), cb.confidence


def suite_chebychev(cfg: ExperimentConfig) -> Iterator[VerifyRow]:
    eng = cfg.engine
    pop = (Population.parse(cfg.population) if cfg.population
           else random_population(eng.n, cfg.length, _rng(cfg, "chebychev-pop", 0)))
    schemata = cfg.schemata or (GaSchema("1" + "*" * (cfg.length - 1)),)
    for i, h in enumerate(schemata):
        for k in (Fraction(3, 2), Fraction(2), Fraction(3)):
            cov, se, conf = chebychev_coverage(pop, cfg.fitness, eng, h, k, cfg.trials,
                                               substream(cfg.seed, KEY_MONTE_CARLO, i, int(k * 2)))
            v = "coverage" if cov + BAND * se >= conf else "coverage-failed"
            yield VerifyRow("chebychev", i, conf, cov, se, v, f"H={h} k={k}")


def suite_alpha_tilde(cfg: ExperimentConfig) -> Iterator[VerifyRow]:
    for n in (4, 10, 100):
        exact = all(alpha_tilde(0, x, n) == Fraction(x, n) for x in range(n + 1))
        yield VerifyRow("alpha-tilde", n, int(exact), 1, None, "equality" if exact else "mismatch",
                        "alpha_tilde(0,x,n) = x/n")
        for k in (1, 2, 3):
            vals = [alpha_tilde(k, x, n) for x in range(n + 1)]
            mono = all(a < b for a, b in zip(vals, vals[1:]))
            trip = all(
                n * float(a) - k * math.sqrt(n * float(a) * (1 - float(a))) >= x - 1e-9
                for x, a in enumerate(vals)
            )
            ok = mono and trip
            yield VerifyRow("alpha-tilde", n, int(ok), 1, None, "equality" if ok else "mismatch",
                            f"k={k} monotone={mono} round-trip={trip}")


def extinction_figures(n: int = 100) -> tuple[Fraction, Fraction]:
    """One fresh instance under neutral selection: exact extinction within one
    and within two generations.

    With ``alpha = m/n`` the next count is Binomial(n, m/n), so two-generation
    extinction is ``E[(1 - M/n)^n]`` over ``M ~ Binomial(n, 1/n)``.
    """
    one = (1 - Fraction(1, n)) ** n
    law = next_count_distribution(Fraction(1, n), n).pmf
    two = sum((p * (1 - Fraction(m, n)) ** n for m, p in enumerate(law)), Fraction(0))
    return one, two


def simulate_extinction(n: int, trials: int, rng: np.random.Generator) -> tuple[float, float]:
    """Neutral GA (flat fitness, no operators) with one copy of allele 1 at locus 0."""
    eng = GaConfig(n=n)
    f = flat()
    pop = Population.from_array(np.array([[1]] + [[0]] * (n - 1), dtype=np.uint8))
    first = breed(pop, fitness_values(pop, f), eng, rng, trials * n).reshape(trials, n)
    m1 = first.sum(axis=1)
    ones = np.ones(n)
    m2 = np.zeros_like(m1)
    for trial in np.nonzero(m1)[0]:
        survivors = Population.from_array(first[trial][:, None])
        m2[trial] = breed(survivors, ones, eng, rng, n).sum()
    return float((m1 == 0).mean()), float((m2 == 0).mean())


def suite_extinction(cfg: ExperimentConfig) -> Iterator[VerifyRow]:
    one, two = extinction_figures(100)
    sim_one, sim_two = simulate_extinction(100, cfg.trials, _rng(cfg, "extinction", 0))
    se1 = math.sqrt(sim_one * (1 - sim_one) / cfg.trials)
    se2 = math.sqrt(sim_two * (1 - sim_two) / cfg.trials)
    yield VerifyRow("extinction", 1, one, sim_one, se1,
                    "equality" if abs(float(one) - sim_one) <= BAND * se1 else "mismatch",
                    "one generation, n=100")
    yield VerifyRow("extinction", 2, two, sim_two, se2,
                    "equality" if abs(float(two) - sim_two) <= BAND * se2 else "mismatch",
                    "two generations, n=100")


# -- GP suites -------------------------------------------------------------------


def suite_gp_exact(cfg: ExperimentConfig) -> Iterator[VerifyRow]:
    for i in range(cfg.instances):
        inst = random_gp_instance(_rng(cfg, "gp-exact", i))
        o = oracle_alpha_gp(inst.schema, inst.pop, inst.f, inst.cfg)
        mic = microscopic_alpha_gp(inst.schema, inst.pop, inst.f, inst.cfg)
        mac = macroscopic_alpha_gp(inst.schema, inst.pop, inst.f, inst.cfg)
        yield VerifyRow("gp-microscopic", i, mic, o, None, _eq(mic, o), f"H={inst.schema}")
        yield VerifyRow("gp-macroscopic", i, mac, o, None, _eq(mac, o), f"H={inst.schema}")


def suite_creation(cfg: ExperimentConfig) -> Iterator[VerifyRow]:
    for i in range(cfg.instances):
        inst = random_gp_instance(_rng(cfg, "creation-correction", i))
        cc = creation_correction(inst.schema, inst.pop, inst.f, inst.cfg)
        o = oracle_alpha_gp(inst.schema, inst.pop, inst.f, inst.cfg)
        yield VerifyRow("creation-correction", i, cc.lower_bound, o, None, _le(cc.lower_bound, o),
                        f"H={inst.schema} delta={cc.delta_alpha}")


def suite_gp_bound(cfg: ExperimentConfig) -> Iterator[VerifyRow]:
    for i in range(cfg.instances):
        inst = random_gp_instance(_rng(cfg, "gp-bound", i))
        b = gp_schema_theorem_bound(inst.schema, inst.pop, inst.f, inst.cfg)
        e = inst.pop.n * oracle_alpha_gp(inst.schema, inst.pop, inst.f, inst.cfg)
        yield VerifyRow("gp-bound", i, b, e, None, _le(b, e), f"H={inst.schema} p_c={inst.cfg.p_c}")


def suite_size(cfg: ExperimentConfig) -> Iterator[VerifyRow]:
    for i in range(cfg.instances):
        inst = random_gp_instance(_rng(cfg, "size-evolution", i))
        s = size_evolution(inst.pop, inst.f, inst.cfg)
        o = oracle_expected_mean_size(inst.pop, inst.f, inst.cfg)
        yield VerifyRow("size-evolution", i, s.value, o, None,
                        _eq(s.by_program, o) if s.by_shape == o else "mismatch",
                        f"p_c={inst.cfg.p_c}")


LEMMA_PSET = PrimitiveSet({"+": 2, "*": 2}, ("x", "y"))


def suite_mask_lemma(cfg: ExperimentConfig) -> Iterator[VerifyRow]:
    """All shapes up to 7 nodes; every schema up to 5 nodes, a seeded sample of
    ``instances`` schemata per 7-node shape."""
    for i, shape in enumerate(shapes_up_to(7, (0, 2))):
        hs = None
        if shape.size > 5:
            allh = list(schemata_of_shape(shape, LEMMA_PSET))
            rng = _rng(cfg, "mask-lemma", i)
            pick = rng.choice(len(allh), size=min(cfg.instances, len(allh)), replace=False)
            hs = [allh[j] for j in sorted(pick)]
        r = mask_lemma_check(shape, LEMMA_PSET, hs, rng=_rng(cfg, "mask-lemma-x", i))
        yield VerifyRow("mask-lemma", i, r.counterexamples, 0, None,
                        "equality" if r.counterexamples == 0 else "mismatch",
                        f"shape={shape} schemata={r.schemata} masks={r.masks} pairs={r.pairs}")


SUITES: dict[str, Callable[[ExperimentConfig], Iterator[VerifyRow]]] = {
    "exact-alpha": suite_exact_alpha,
    "holland-bound": suite_holland,
    "binomial": suite_binomial,
    "chebychev": suite_chebychev,
    "alpha-tilde": suite_alpha_tilde,
    "extinction": suite_extinction,
    "gp-exact": suite_gp_exact,
    "gp-microscopic": suite_gp_exact,
    "gp-macroscopic": suite_gp_exact,
    "creation-correction": suite_creation,
    "gp-bound": suite_gp_bound,
    "size-evolution": suite_size,
    "mask-lemma": suite_mask_lemma,
}


@dataclass(frozen=True)
class PredictionReport:
    rows: tuple[VerifyRow, ...]
    verdicts: dict
    path: Path

    @property
    def failures(self) -> int:
        return sum(self.verdicts.get(v, 0) for v in FAILING)


def verify_theorem(config, **overrides) -> PredictionReport:
    """Run every suite named in ``theorems`` and write ``verify.csv``."""
    cfg = config if isinstance(config, ExperimentConfig) else load_config(config, **overrides)
    rows: list[VerifyRow] = []
    seen = set()
    for name in cfg.theorems:
        suite = SUITES[name]
        if suite in seen:
            continue
        seen.add(suite)
        rows.extend(suite(cfg))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "verify.csv"
    with path.open("w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(VERIFY_COLUMNS)
        w.writerows(r.cells() for r in rows)
    counts = Counter(r.verdict for r in rows)
    return PredictionReport(tuple(rows), dict(sorted(counts.items())), path)

