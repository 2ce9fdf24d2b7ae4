"""Experiment runner: trajectories, one-step Monte Carlo checks, census, plots.

At every generation ``t`` each tracked schema gets one row per selected
theorem: the prediction computed from the current population, the oracle value
when the instance is within the oracle caps, and the mean and standard error
of ``m(H,t+1)`` over ``trials`` independently sampled next generations.  The
population then advances along trial 0.

Verdict rules (tolerance 4 standard errors for Monte Carlo):

* equality claims: ``equality`` if the prediction equals the oracle exactly,
  or without the oracle lies within the band of the Monte Carlo mean;
  otherwise ``mismatch``;
* bounds: ``bound-holds`` if the prediction does not exceed the oracle value
  (or the Monte Carlo mean plus the band); otherwise ``bound-violated``;
* Chebychev: ``coverage`` if empirical coverage plus the band reaches
  ``1 - 1/k^2``; otherwise ``coverage-failed``.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from ..ga import Population, breed, fitness_values, next_generation, random_population
from ..gp import GpPopulation, breed_gp, next_generation_gp, program_fitness, random_gp_population
from ..gpschema import gp_matches
from ..gptheorems import (
    creation_correction,
    gp_schema_theorem_bound,
    macroscopic_alpha_gp,
    microscopic_alpha_gp,
    size_evolution,
)
from ..oracle import (
    GA_MAX_LENGTH,
    GA_MAX_N,
    GP_MAX_NODES,
    GP_MAX_TREES,
    oracle_alpha,
    oracle_alpha_gp,
    oracle_expected_mean_size,
)
from ..schema import count_and_fitness, schema_census
from ..streams import KEY_INIT, KEY_MONTE_CARLO, substream
from ..theorems import chebychev_bounds, exact_alpha, holland_bound
from ..trees import shape_of
from .config import ExperimentConfig, load_config
from .plot import CSV_HEADER, PlotSpec, emit_plot

BAND = 4

TRAJECTORY_COLUMNS = (
    "t", "schema", "theorem", "m", "fitness", "predicted", "oracle",
    "mc_mean", "mc_se", "tolerance", "verdict",
)
FAILING = ("mismatch", "bound-violated", "coverage-failed")
EQUALITY_THEOREMS = ("exact-alpha", "gp-microscopic", "gp-macroscopic", "size-evolution")
BOUND_THEOREMS = ("holland-bound", "gp-bound", "creation-correction")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def verdict(theorem: str, predicted, oracle, mc_mean, mc_se) -> str:
    """Pure function of the numbers written to the CSV."""
    band = BAND * (mc_se or 0.0)
    if theorem == "chebychev":
        return "coverage" if mc_mean + band >= predicted else "coverage-failed"
    if theorem in BOUND_THEOREMS:
        if oracle is not None:
            return "bound-holds" if predicted <= oracle else "bound-violated"
        return "bound-holds" if float(predicted) <= mc_mean + band + 1e-12 else "bound-violated"
    if oracle is not None:
        return "equality" if predicted == oracle else "mismatch"
    return "equality" if abs(float(predicted) - mc_mean) <= band + 1e-12 else "mismatch"


@dataclass(frozen=True)
class ReportRow:
    t: int
    schema: str
    theorem: str
    m: int
    fitness: Fraction
    predicted: object
    oracle: object
    mc_mean: float
    mc_se: float
    verdict: str

    def cells(self) -> list[str]:
        return [
            str(self.t), self.schema, self.theorem, str(self.m), fmt(self.fitness),
            fmt(self.predicted), fmt(self.oracle), fmt(self.mc_mean), fmt(self.mc_se),
            f"{BAND}se", self.verdict,
        ]


@dataclass(frozen=True)
class ArtifactSet:
    out: Path
    files: tuple[Path, ...]
    rows: tuple[ReportRow, ...]
    verdicts: dict

    @property
    def failures(self) -> int:
        return sum(self.verdicts.get(v, 0) for v in FAILING)


def _mean_se(samples: np.ndarray) -> tuple[float, float]:
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2:
        return float(samples.mean()), 0.0
    return float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(samples.size))


def _write_csv(path: Path, columns, rows) -> None:
    with path.open("w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)


# -- GA --------------------------------------------------------------------------


def _ga_rows(cfg: ExperimentConfig, pop: Population) -> list[ReportRow]:
    eng = cfg.engine
    n = pop.n
    values = fitness_values(pop, cfg.fitness)
    rng = substream(cfg.seed, KEY_MONTE_CARLO, pop.t)
    kids = breed(pop, values, eng, rng, cfg.trials * n).reshape(cfg.trials, n, pop.length)
    use_oracle = cfg.oracle and n <= GA_MAX_N and pop.length <= GA_MAX_LENGTH
    rows = []
    for h in cfg.schemata:
        fixed = list(h.fixed)
        want = np.array([int(h.pattern[j]) for j in fixed], dtype=np.uint8)
        counts = (kids[:, :, fixed] == want).all(axis=2).sum(axis=1)
        mc_mean, mc_se = _mean_se(counts)
        m, fh = count_and_fitness(h, pop, cfg.fitness)
        alpha = exact_alpha(h, pop, cfg.fitness, eng).alpha
        oracle_count = n * oracle_alpha(h, pop, cfg.fitness, eng) if use_oracle else None
        for theorem in cfg.theorems:
            if theorem == "exact-alpha":
                pred, orc, mean, se = n * alpha, oracle_count, mc_mean, mc_se
            elif theorem == "holland-bound":
                if eng.mutation_mode != "per-bit":
                    continue
                pred, orc, mean, se = holland_bound(h, pop, cfg.fitness, eng), oracle_count, mc_mean, mc_se
            elif theorem == "chebychev":
                cb = chebychev_bounds(alpha, n, cfg.k)
                hits = (counts >= cb.low) & (counts <= cb.high)
                mean, se = _mean_se(hits)
                pred, orc = cb.confidence, None
            else:
                continue
            rows.append(ReportRow(pop.t, str(h), theorem, m, fh, pred, orc, mean, se,
                                  verdict(theorem, pred, orc, mean, se)))
    return rows


def _ga_census(cfg: ExperimentConfig, pop: Population) -> list[list[str]]:
    order = min(cfg.census_order, pop.length)
    return [[str(pop.t), str(r.schema), str(r.count), fmt(r.fitness)]
            for r in schema_census(pop, cfg.fitness, order)]


def _initial_ga(cfg: ExperimentConfig) -> Population:
    if cfg.population:
        return Population.parse(cfg.population)
    return random_population(cfg.engine.n, cfg.length, substream(cfg.seed, KEY_INIT, 0))


# -- GP --------------------------------------------------------------------------


def _gp_rows(cfg: ExperimentConfig, pop: GpPopulation) -> list[ReportRow]:
    eng = cfg.engine
    n = pop.n
    f = cfg.fitness
    values = program_fitness(pop, f)
    rng = substream(cfg.seed, KEY_MONTE_CARLO, pop.t)
    kids, _ = breed_gp(pop, values, eng, cfg.pset, rng, cfg.trials * n)
    use_oracle = (
        cfg.oracle and eng.p_m == 0 and n <= GP_MAX_TREES and all(m.size <= GP_MAX_NODES for m in pop)
    )
    sizes = np.array([k.size for k in kids], dtype=float).reshape(cfg.trials, n).mean(axis=1)
    rows = []
    if "size-evolution" in cfg.theorems:
        mean, se = _mean_se(sizes)
        pred = size_evolution(pop, f, eng).value
        orc = oracle_expected_mean_size(pop, f, eng) if use_oracle else None
        rows.append(ReportRow(pop.t, "*", "size-evolution", n, sum(values, Fraction(0)) / n,
                              pred, orc, mean, se, verdict("size-evolution", pred, orc, mean, se)))
    for h in cfg.schemata:
        memo: dict = {}
        hit = np.array([memo.setdefault(k, gp_matches(h, k)) for k in kids], dtype=bool)
        counts = hit.reshape(cfg.trials, n).sum(axis=1)
        mc_mean, mc_se = _mean_se(counts)
        members = [(p, v) for p, v in zip(pop.members, values) if gp_matches(h, p)]
        m = len(members)
        fh = sum((v for _, v in members), Fraction(0)) / m if m else Fraction(0)
        orc_alpha = oracle_alpha_gp(h, pop, f, eng) if use_oracle else None
        orc = None if orc_alpha is None else n * orc_alpha
        for theorem in cfg.theorems:
            if theorem == "gp-microscopic":
                pred = n * microscopic_alpha_gp(h, pop, f, eng)
            elif theorem == "gp-macroscopic":
                pred = n * macroscopic_alpha_gp(h, pop, f, eng)
            elif theorem == "creation-correction":
                pred = n * creation_correction(h, pop, f, eng).lower_bound
            elif theorem == "gp-bound":
                pred = gp_schema_theorem_bound(h, pop, f, eng)
            else:
                continue
            rows.append(ReportRow(pop.t, str(h), theorem, m, fh, pred, orc, mc_mean, mc_se,
                                  verdict(theorem, pred, orc, mc_mean, mc_se)))
    return rows


def _gp_census(cfg: ExperimentConfig, pop: GpPopulation) -> list[list[str]]:
    values = program_fitness(pop, cfg.fitness)
    by_shape: dict[str, list] = {}
    for p, v in zip(pop.members, values):
        by_shape.setdefault(str(shape_of(p)), []).append((p.size, v))
    out = []
    for shape in sorted(by_shape):
        items = by_shape[shape]
        out.append([str(pop.t), shape, str(len(items)),
                    fmt(sum((v for _, v in items), Fraction(0)) / len(items)), str(items[0][0])])
    return out


def _initial_gp(cfg: ExperimentConfig) -> GpPopulation:
    if cfg.population:
        return GpPopulation.parse(cfg.population)
    return random_gp_population(cfg.pset, cfg.engine)


# -- driver ----------------------------------------------------------------------


def run_experiment(config, **overrides) -> ArtifactSet:
    """Run the configured experiment and write its artifacts.

    ``config`` is a path or a parsed :class:`ExperimentConfig`.  Writes
    ``trajectory.csv``, ``census.csv``, ``summary.json``, ``trajectory.svg``
    and, in GP mode, ``disruption.csv``.
    """
    cfg = config if isinstance(config, ExperimentConfig) else load_config(config, **overrides)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows: list[ReportRow] = []
    census: list[list[str]] = []
    disruption: list[list[str]] = []
    if cfg.mode == "ga":
        pop = _initial_ga(cfg)
        for g in range(cfg.generations + 1):
            census += _ga_census(cfg, pop)
            if g < cfg.generations:
                rows += _ga_rows(cfg, pop)
                pop = next_generation(pop, cfg.fitness, cfg.engine)
        census_cols = ("t", "schema", "count", "fitness")
    else:
        pop = _initial_gp(cfg)
        for g in range(cfg.generations + 1):
            census += _gp_census(cfg, pop)
            if g < cfg.generations:
                rows += _gp_rows(cfg, pop)
                t = pop.t
                pop, stats = next_generation_gp(pop, cfg.fitness, cfg.engine, cfg.pset)
                disruption.append([str(t), str(stats.crossovers), str(stats.disruptions),
                                   fmt(stats.disruption_frequency), str(len(pop.shapes())),
                                   fmt(pop.mean_size())])
        census_cols = ("t", "shape", "count", "fitness", "size")

    rows.sort(key=lambda r: (r.t, r.schema, r.theorem))
    files = []
    traj = out / "trajectory.csv"
    _write_csv(traj, TRAJECTORY_COLUMNS, [r.cells() for r in rows])
    files.append(traj)
    cen = out / "census.csv"
    _write_csv(cen, census_cols, census)
    files.append(cen)
    if cfg.mode == "gp":
        dis = out / "disruption.csv"
        _write_csv(dis, ("t", "crossovers", "disruptions", "frequency", "shapes", "mean_size"),
                   disruption)
        files.append(dis)
    counts = Counter(r.verdict for r in rows)
    summary = {
        "mode": cfg.mode,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "generations": cfg.generations,
        "fitness": cfg.fitness_spec[0],
        "theorems": list(cfg.theorems),
        "schemata": [str(h) for h in cfg.schemata],
        "verdicts": dict(sorted(counts.items())),
        "conventions": _conventions(cfg),
    }
    summ = out / "summary.json"
    summ.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    files.append(summ)
    plot_theorem = next((x for x in cfg.theorems if x not in ("chebychev", "size-evolution")), None)
    if rows and plot_theorem:
        svg = emit_plot(traj, PlotSpec(x="t", y=("m", "predicted"), out=out / "trajectory.svg",
                                       where=(("theorem", plot_theorem),), series="schema",
                                       title=f"m(H,t) and {plot_theorem} prediction"))
        files.append(svg)
    return ArtifactSet(out, tuple(files), tuple(rows), dict(sorted(counts.items())))


def _conventions(cfg: ExperimentConfig) -> dict:
    common = {
        "mean_fitness": "population mean f(t)",
        "monte_carlo_band": f"{BAND} standard errors",
    }
    if cfg.mode == "ga":
        return {
            **common,
            "cuts": "l-1 cut points, cut k keeps positions 0..k from the first parent",
            "mutation": cfg.engine.mutation_mode,
            "selection": cfg.engine.selection,
        }
    return {
        **common,
        "crossover_points": "uniform over common-region nodes, root included",
        "lower_building_block": "pruned",
        "active_nodes": "single same-arity substitution changes fitness",
        "mutation": "point mutation per node",
    }
