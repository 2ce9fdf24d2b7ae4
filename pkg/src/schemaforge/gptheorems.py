"""GP schema-theorem predictions for one-point homologous crossover.

The crossover point is uniform over the ``NC(h1, h2)`` nodes of the common
region, root included, matching :mod:`schemaforge.gp`.  Selection is
fitness-proportional.  Everything except :func:`program_effective_fitness` is
exact in rational arithmetic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .fitness import FitnessFunction
from .gp import GpConfig, GpPopulation, program_fitness, program_masses
from .gpschema import L_READINGS, gp_matches, gp_schema_metrics, lower_hyperschema, upper_hyperschema
from .streams import KEY_EFFECTIVE, substream
from .trees import (
    PrimitiveSet,
    Tree,
    common_region,
    has_path,
    iter_nodes,
    node_at,
    replace_at,
    shape_of,
)


def _mass(pred, masses: Mapping[Tree, Fraction]) -> Fraction:
    return sum((p for h, p in masses.items() if pred(h)), Fraction(0))


def _require_no_mutation(cfg: GpConfig) -> None:
    if cfg.p_m != 0:
        raise ValueError("exact GP transmission is stated for p_m = 0")


@dataclass(frozen=True)
class ShapeIndex:
    """Shapes present in the population, sorted by text form, with their
    selection masses and sizes."""

    shapes: tuple[Tree, ...]
    mass: tuple[Fraction, ...]
    sizes: tuple[int, ...]

    def __post_init__(self):
        if sum(self.mass, Fraction(0)) != 1:
            raise ValueError("shape masses must sum to 1")


def shape_index(pop: GpPopulation, f: FitnessFunction) -> ShapeIndex:
    masses = program_masses(pop, f)
    by_shape: dict[Tree, Fraction] = {}
    for h, p in masses.items():
        g = shape_of(h)
        by_shape[g] = by_shape.get(g, Fraction(0)) + p
    shapes = tuple(sorted(by_shape, key=str))
    return ShapeIndex(shapes, tuple(by_shape[g] for g in shapes), tuple(g.size for g in shapes))


def schema_probability_gp(h: Tree, pop: GpPopulation, f: FitnessFunction) -> Fraction:
    """``p(H,t)``: selection mass of the programs matching ``h``."""
    return _mass(lambda p: gp_matches(h, p), program_masses(pop, f))


def _count_and_fitness(h: Tree, pop: GpPopulation, f: FitnessFunction) -> tuple[int, Fraction]:
    hits = [v for p, v in zip(pop.members, program_fitness(pop, f)) if gp_matches(h, p)]
    if not hits:
        return 0, Fraction(0)
    return len(hits), sum(hits, Fraction(0)) / len(hits)


# -- exact transmission -------------------------------------------------------


def microscopic_alpha_gp(
    h: Tree, pop: GpPopulation, f: FitnessFunction, cfg: GpConfig, reading: str = "pruned"
) -> Fraction:
    """Sum over ordered program pairs and their common-region nodes::

        alpha = (1-p_c) p(H) + p_c sum_{h1,h2} p(h1) p(h2) / NC(h1,h2)
                    * sum_{i in C(h1,h2)} [h1 in L(H,i)] [h2 in U(H,i)]

    A node ``i`` that is not a node of ``H`` contributes nothing.  The
    ``reading`` selects which ``L(H,i)`` construction is used.
    """
    _require_no_mutation(cfg)
    masses = program_masses(pop, f)
    p_h = _mass(lambda p: gp_matches(h, p), masses)
    if cfg.p_c == 0:
        return p_h
    lower: dict = {}
    upper: dict = {}
    total = Fraction(0)
    for (h1, p1), (h2, p2) in itertools.product(masses.items(), repeat=2):
        region = common_region(h1, h2)
        hits = 0
        for i in region.paths:
            if not has_path(h, i):
                continue
            if i not in lower:
                lower[i] = lower_hyperschema(h, i, reading)
                upper[i] = upper_hyperschema(h, i)
            hits += gp_matches(lower[i], h1) and gp_matches(upper[i], h2)
        total += p1 * p2 * Fraction(hits, region.size)
    return (1 - cfg.p_c) * p_h + cfg.p_c * total


def _shape_pair_sum(
    h: Tree, masses: Mapping[Tree, Fraction], shapes: tuple[Tree, ...], reading: str
) -> Fraction:
    """``sum_{j,k} 1/NC(G_j,G_k) sum_i p(L(H,i) & G_j) p(U(H,i) & G_k)``."""
    total = Fraction(0)
    for gj, gk in itertools.product(shapes, repeat=2):
        region = common_region(gj, gk)
        acc = Fraction(0)
        for i in region.paths:
            if not has_path(h, i):
                continue
            low = lower_hyperschema(h, i, reading)
            up = upper_hyperschema(h, i)
            pl = _mass(lambda p: shape_of(p) == gj and gp_matches(low, p), masses)
            if pl:
                acc += pl * _mass(lambda p: shape_of(p) == gk and gp_matches(up, p), masses)
        total += acc / region.size
    return total


def macroscopic_alpha_gp(
    h: Tree, pop: GpPopulation, f: FitnessFunction, cfg: GpConfig, reading: str = "pruned"
) -> Fraction:
    """Shape-pair form: programs grouped by shape, since ``NC`` and the common
    region depend on shapes only."""
    _require_no_mutation(cfg)
    masses = program_masses(pop, f)
    p_h = _mass(lambda p: gp_matches(h, p), masses)
    if cfg.p_c == 0:
        return p_h
    shapes = shape_index(pop, f).shapes
    return (1 - cfg.p_c) * p_h + cfg.p_c * _shape_pair_sum(h, masses, shapes, reading)


@dataclass(frozen=True)
class CreationCorrection:
    lower_bound: Fraction
    delta_alpha: Fraction


def creation_correction(
    h: Tree, pop: GpPopulation, f: FitnessFunction, cfg: GpConfig
) -> CreationCorrection:
    """Transmission restricted to pairs of programs that both have ``H``'s shape.

    That is the shape-pair sum with ``j = k = G(H)``.  Dropping the other pairs
    ignores schema creation by mixed-shape crossover, so ``delta_alpha >= 0``;
    it is zero whenever no program of another shape is selectable (and also
    when ``p_c = 0``).
    """
    _require_no_mutation(cfg)
    masses = program_masses(pop, f)
    p_h = _mass(lambda p: gp_matches(h, p), masses)
    g = shape_of(h)
    lower = (1 - cfg.p_c) * p_h
    if cfg.p_c:
        lower += cfg.p_c * _shape_pair_sum(h, masses, (g,), "pruned")
    alpha = macroscopic_alpha_gp(h, pop, f, cfg)
    return CreationCorrection(lower, alpha - lower)


@dataclass(frozen=True)
class GpEffectiveFitness:
    value: Fraction
    from_alpha: Fraction

    @property
    def consistent(self) -> bool:
        return self.value == self.from_alpha


def effective_fitness_gp(
    h: Tree, pop: GpPopulation, f: FitnessFunction, cfg: GpConfig
) -> GpEffectiveFitness | None:
    """``f_e(H,t) = f(H,t) (1 - p_c (1 - S / p(H)))`` with ``S`` the shape-pair sum.

    ``from_alpha`` is ``alpha f(H,t) / p(H,t)``; the two must agree.  Returns
    ``None`` when ``p(H,t) = 0``.
    """
    _require_no_mutation(cfg)
    masses = program_masses(pop, f)
    p_h = _mass(lambda p: gp_matches(h, p), masses)
    if p_h == 0:
        return None
    _, fh = _count_and_fitness(h, pop, f)
    shapes = shape_index(pop, f).shapes
    s = _shape_pair_sum(h, masses, shapes, "pruned")
    value = fh * (1 - cfg.p_c * (1 - s / p_h))
    alpha = macroscopic_alpha_gp(h, pop, f, cfg)
    return GpEffectiveFitness(value, alpha * fh / p_h)


# -- lower bound -------------------------------------------------------------


def disruption_probability_gp(h: Tree, pop: GpPopulation, f: FitnessFunction) -> Fraction:
    """``p_d``: chance that crossing a parent in ``H`` with a selected parent of
    another shape yields a child outside ``H``.

    Exact, by enumeration of the selectable pairs and crossover points; zero
    when no parent in ``H`` or no parent of another shape is selectable.
    """
    masses = program_masses(pop, f)
    g = shape_of(h)
    inside = {p: w for p, w in masses.items() if gp_matches(h, p)}
    other = {p: w for p, w in masses.items() if shape_of(p) != g}
    weight = sum(inside.values(), Fraction(0)) * sum(other.values(), Fraction(0))
    if weight == 0:
        return Fraction(0)
    lost = Fraction(0)
    for (h1, p1), (h2, p2) in itertools.product(inside.items(), other.items()):
        region = common_region(h1, h2)
        bad = sum(
            1 for i in region.paths if not gp_matches(h, replace_at(h1, i, node_at(h2, i)))
        )
        lost += p1 * p2 * Fraction(bad, region.size)
    return lost / weight


def gp_schema_theorem_bound(
    h: Tree,
    pop: GpPopulation,
    f: FitnessFunction,
    cfg: GpConfig,
    p_d: Fraction | None = None,
) -> Fraction:
    """Lower bound on ``E m(H,t+1)``::

        m f(H)/fbar (1-p_m)^o (1 - p_c [p_d (1 - m_G f_G/(n fbar))
                                        + d(H) (m_G f_G - m f(H)) / ((N(H)-1) n fbar)])

    ``m_G, f_G`` are count and mean fitness of the programs with ``H``'s shape,
    ``d(H)`` the defining length and ``N(H)`` the node count.  With a single
    shape in the population the bracket reduces to the GA form
    ``d/(N-1) (1 - m f/(n fbar))``.  ``p_d`` defaults to
    :func:`disruption_probability_gp`.  Clamped below at 0.
    """
    m, fh = _count_and_fitness(h, pop, f)
    if m == 0:
        return Fraction(0)
    n = pop.n
    fbar = sum(program_fitness(pop, f), Fraction(0)) / n
    met = gp_schema_metrics(h)
    m_g, f_g = _count_and_fitness(met.shape, pop, f)
    if p_d is None:
        p_d = disruption_probability_gp(h, pop, f)
    p_g = m_g * f_g / (n * fbar)
    p_h = m * fh / (n * fbar)
    same_shape = (
        Fraction(met.defining_length, met.length - 1) * (p_g - p_h) if met.length > 1 else Fraction(0)
    )
    loss = cfg.p_c * (p_d * (1 - p_g) + same_shape)
    bound = m * fh / fbar * (1 - cfg.p_m) ** met.order * (1 - loss)
    return max(bound, Fraction(0))


# -- size evolution ------------------------------------------------------------


@dataclass(frozen=True)
class SizeEvolution:
    by_program: Fraction
    by_shape: Fraction

    @property
    def value(self) -> Fraction:
        return self.by_program


def size_evolution(pop: GpPopulation, f: FitnessFunction, cfg: GpConfig) -> SizeEvolution:
    """``E mu(t+1) = sum_h S(h) p(h,t) = sum_k S(G_k) p(G_k,t)``.

    One-point crossover places a subtree at the same position in the child as
    in its donor, so the expected size depends on selection only and not on
    ``p_c``.
    """
    _require_no_mutation(cfg)
    masses = program_masses(pop, f)
    by_program = sum((p * h.size for h, p in masses.items()), Fraction(0))
    idx = shape_index(pop, f)
    by_shape = sum((p * s for p, s in zip(idx.mass, idx.sizes)), Fraction(0))
    return SizeEvolution(by_program, by_shape)


# -- program effective fitness ---------------------------------------------------


def _alphabet(pop: GpPopulation, pset: PrimitiveSet | None) -> dict[int, tuple[str, ...]]:
    if pset is not None:
        arities = {0} | {a for _, a in pset.functions}
        return {a: pset.symbols_of_arity(a) for a in arities}
    out: dict[int, set[str]] = {}
    for prog in pop.members:
        for _, node in iter_nodes(prog):
            out.setdefault(node.arity, set()).add(node.symbol)
    return {a: tuple(sorted(s)) for a, s in out.items()}


def active_nodes(
    j: Tree, f: FitnessFunction, alphabet: Mapping[int, tuple[str, ...]]
) -> list[tuple[int, ...]]:
    """Paths whose symbol matters: some different same-arity symbol changes ``f``."""
    base = f(j)
    out = []
    for path, node in iter_nodes(j):
        for sym in alphabet.get(node.arity, ()):
            if sym != node.symbol and f(replace_at(j, path, Tree(sym, node.children))) != base:
                out.append(path)
                break
    return out


@dataclass(frozen=True)
class ProgramEffectiveFitness:
    fitness: Fraction
    total_nodes: int
    active_nodes: int
    p_d: float
    effective: float
    proportion: Fraction
    predicted_proportion: float

    def __post_init__(self):
        if not 0 <= self.active_nodes <= self.total_nodes:
            raise ValueError("active node count out of range")
        if not 0 <= self.p_d <= 1:
            raise ValueError("p_d must lie in [0, 1]")


def program_effective_fitness(
    j: Tree,
    pop: GpPopulation,
    f: FitnessFunction,
    cfg: GpConfig,
    trials: int,
    pset: PrimitiveSet | None = None,
    stream: int = 0,
) -> ProgramEffectiveFitness:
    """``f_j^e = f_j (1 - p_c (C_j^e / C_j^a) p_j^d)`` and ``P_j^{t+1} ~ P_j^t f_j^e / fbar``.

    ``C_j^e`` counts active nodes (see :func:`active_nodes`; the alphabet is the
    primitive set, or the symbols seen in the population).  ``p_j^d`` is the
    Monte Carlo frequency with which crossing ``j`` with a selected partner at
    a uniformly drawn active common-region node lowers fitness.  Draws whose
    common region holds no active node count as harmless.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    fj = f(j)
    alive = active_nodes(j, f, _alphabet(pop, pset))
    alive_set = set(alive)
    p_d = 0.0
    if alive and cfg.p_c > 0:
        rng = substream(cfg.seed, KEY_EFFECTIVE, stream)
        values = program_fitness(pop, f)
        w = np.array([float(v) for v in values])
        partners = rng.choice(pop.n, size=trials, p=w / w.sum())
        worse = 0
        for b in partners:
            mate = pop.members[b]
            points = [i for i in common_region(j, mate).paths if i in alive_set]
            if not points:
                continue
            i = points[rng.integers(len(points))]
            worse += f(replace_at(j, i, node_at(mate, i))) < fj
        p_d = worse / trials
    effective = float(fj) * (1 - float(cfg.p_c) * len(alive) / j.size * p_d)
    fbar = sum(program_fitness(pop, f), Fraction(0)) / pop.n
    proportion = Fraction(sum(1 for m in pop.members if m == j), pop.n)
    return ProgramEffectiveFitness(
        fj, j.size, len(alive), p_d, effective, proportion, float(proportion) * effective / float(fbar)
    )


def transmission_report(h: Tree, pop: GpPopulation, f: FitnessFunction, cfg: GpConfig) -> dict:
    """Microscopic alpha under each ``L(H,i)`` reading, for side-by-side reports."""
    return {r: microscopic_alpha_gp(h, pop, f, cfg, r) for r in L_READINGS}

