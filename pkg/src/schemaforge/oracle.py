"""Brute-force ground truth for one offspring, in exact rational arithmetic.

Each enumerator walks every (parent choice, cut or crossover point, mutation
pattern) branch of the generative model and accumulates ``Fraction``
probabilities.  Nothing here reuses the closed-form code in ``theorems`` or
``gptheorems``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .fitness import FitnessFunction
from .ga import BitString, GaConfig, Population, fitness_values
from .gp import GpConfig, GpPopulation, program_fitness
from .gpschema import EQ, gamma, gp_matches
from .schema import CapExceeded, GaSchema, matches
from .trees import PrimitiveSet, Tree, common_region, iter_nodes, node_at, replace_at, uniform_crossover_gp

GA_MAX_N = 6
GA_MAX_LENGTH = 5
GP_MAX_TREES = 4
GP_MAX_NODES = 7


@dataclass(frozen=True)
class OffspringDistribution:
    """Law of one offspring: ``support`` lists ``(genotype, probability)``."""

    support: tuple[tuple[Any, Fraction], ...]

    def __post_init__(self):
        genotypes = [g for g, _ in self.support]
        if len(set(genotypes)) != len(genotypes):
            raise ValueError("duplicate genotypes in support")
        if sum((p for _, p in self.support), Fraction(0)) != 1:
            raise ValueError("offspring probabilities do not sum to 1")

    @classmethod
    def from_mapping(cls, probs: Mapping[Any, Fraction]) -> "OffspringDistribution":
        return cls(tuple(sorted(((g, p) for g, p in probs.items() if p), key=lambda x: str(x[0]))))

    def as_dict(self) -> dict[Any, Fraction]:
        return dict(self.support)

    def probability(self, genotype) -> Fraction:
        return self.as_dict().get(genotype, Fraction(0))

    def mass(self, predicate: Callable[[Any], bool]) -> Fraction:
        return sum((p for g, p in self.support if predicate(g)), Fraction(0))

    def expectation(self, value: Callable[[Any], Any]) -> Fraction:
        return sum((p * value(g) for g, p in self.support), Fraction(0))


def _add(acc: dict, key, p: Fraction) -> None:
    if p:
        acc[key] = acc.get(key, Fraction(0)) + p


# -- selection -----------------------------------------------------------------


def _bracket(
    entrants: tuple[int, ...], values: Sequence[Fraction], q: Fraction
) -> dict[int, Fraction]:
    """Exact winner law of the single-elimination bracket used by the engine."""
    if len(entrants) == 1:
        return {entrants[0]: Fraction(1)}
    rounds: list[dict[int, Fraction]] = []
    for j in range(0, len(entrants) - 1, 2):
        x, y = entrants[j], entrants[j + 1]
        law: dict[int, Fraction] = {}
        if values[x] == values[y]:
            _add(law, x, Fraction(1, 2))
            _add(law, y, Fraction(1, 2))
        else:
            fitter, weaker = (x, y) if values[x] > values[y] else (y, x)
            _add(law, fitter, q)
            _add(law, weaker, 1 - q)
        rounds.append(law)
    if len(entrants) % 2:
        rounds.append({entrants[-1]: Fraction(1)})
    out: dict[int, Fraction] = {}
    for combo in itertools.product(*(list(r.items()) for r in rounds)):
        p = Fraction(1)
        for _, w in combo:
            p *= w
        for winner, w in _bracket(tuple(i for i, _ in combo), values, q).items():
            _add(out, winner, p * w)
    return out


def tournament_selection_distribution(
    values: Sequence[Fraction], k: int, q: Fraction
) -> list[Fraction]:
    """Per-index selection probability: all ``n^k`` entrant draws enumerated."""
    n = len(values)
    probs = [Fraction(0)] * n
    weight = Fraction(1, n**k)
    for draw in itertools.product(range(n), repeat=k):
        for winner, p in _bracket(draw, values, q).items():
            probs[winner] += weight * p
    return probs


def selection_distribution(
    pop: Population, f: FitnessFunction, cfg: GaConfig
) -> dict[BitString, Fraction]:
    values = fitness_values(pop, f)
    if any(v <= 0 for v in values):
        raise ValueError("selection requires strictly positive fitness values")
    if cfg.selection == "proportional":
        total = sum(values, Fraction(0))
        per_index = [v / total for v in values]
    else:
        per_index = tournament_selection_distribution(
            values, cfg.tournament_size, cfg.tournament_bias
        )
    out: dict[BitString, Fraction] = {}
    for s, p in zip(pop.members, per_index):
        _add(out, s, p)
    return out


# -- GA --------------------------------------------------------------------------


def _check_ga_caps(pop: Population, max_n: int, max_length: int) -> None:
    if pop.n > max_n or pop.length > max_length:
        raise CapExceeded(
            f"GA oracle caps are n <= {max_n}, l <= {max_length}; got n={pop.n}, l={pop.length}"
        )


def _mutation_patterns(cfg: GaConfig, ell: int) -> list[tuple[tuple[int, ...], Fraction]]:
    pm = cfg.p_m
    if pm == 0:
        return [((0,) * ell, Fraction(1))]
    if cfg.mutation_mode == "per-bit":
        out = []
        for flips in itertools.product((0, 1), repeat=ell):
            r = sum(flips)
            out.append((flips, pm**r * (1 - pm) ** (ell - r)))
        return out
    out = [((0,) * ell, 1 - pm)]
    for j in range(ell):
        out.append((tuple(int(i == j) for i in range(ell)), pm / ell))
    return out


def enumerate_offspring_ga(
    pop: Population,
    f: FitnessFunction,
    cfg: GaConfig,
    max_n: int = GA_MAX_N,
    max_length: int = GA_MAX_LENGTH,
) -> OffspringDistribution:
    """Exact law of one offspring of :func:`schemaforge.ga.next_generation`."""
    _check_ga_caps(pop, max_n, max_length)
    ell = pop.length
    if cfg.p_c > 0 and ell < 2:
        raise ValueError("crossover needs l >= 2")
    sel = selection_distribution(pop, f, cfg)
    before: dict[BitString, Fraction] = {}
    for a, pa in sel.items():
        _add(before, a, (1 - cfg.p_c) * pa)
    if cfg.p_c > 0:
        for (a, pa), (b, pb) in itertools.product(sel.items(), repeat=2):
            w = cfg.p_c * pa * pb / (ell - 1)
            for k in range(ell - 1):
                _add(before, BitString(a.bits[: k + 1] + b.bits[k + 1 :]), w)
    after: dict[BitString, Fraction] = {}
    patterns = _mutation_patterns(cfg, ell)
    for s, p in before.items():
        for flips, w in patterns:
            _add(after, BitString(tuple(x ^ y for x, y in zip(s.bits, flips))), p * w)
    return OffspringDistribution.from_mapping(after)


def enumerate_offspring_ga_by_masks(
    pop: Population,
    f: FitnessFunction,
    cfg: GaConfig,
    max_n: int = GA_MAX_N,
    max_length: int = GA_MAX_LENGTH,
) -> OffspringDistribution:
    """Second enumeration, ordered differently, as a cross-check.

    Walks member indices (not distinct strings), expresses both cloning and
    every cut as a crossover mask (1 = allele from the first parent), and
    applies mutation patterns in the outermost loop.
    """
    _check_ga_caps(pop, max_n, max_length)
    ell = pop.length
    values = fitness_values(pop, f)
    if cfg.selection == "proportional":
        total = sum(values, Fraction(0))
        per_index = [v / total for v in values]
    else:
        per_index = tournament_selection_distribution(
            values, cfg.tournament_size, cfg.tournament_bias
        )
    masks: list[tuple[tuple[int, ...], Fraction]] = [((1,) * ell, 1 - cfg.p_c)]
    if cfg.p_c > 0:
        masks += [
            (tuple(int(j <= k) for j in range(ell)), cfg.p_c / (ell - 1)) for k in range(ell - 1)
        ]
    out: dict[BitString, Fraction] = {}
    n = pop.n
    for flips, pw in reversed(_mutation_patterns(cfg, ell)):
        for mask, mw in masks:
            for i in reversed(range(n)):
                for j in reversed(range(n)):
                    a, b = pop.members[i].bits, pop.members[j].bits
                    child = tuple((a[x] if mask[x] else b[x]) ^ flips[x] for x in range(ell))
                    _add(out, BitString(child), pw * mw * per_index[i] * per_index[j])
    return OffspringDistribution.from_mapping(out)


def oracle_alpha(h: GaSchema, pop: Population, f: FitnessFunction, cfg: GaConfig, **caps) -> Fraction:
    """Probability that one offspring samples ``h``."""
    if len(h) != pop.length:
        raise ValueError("schema length does not match the population")
    return enumerate_offspring_ga(pop, f, cfg, **caps).mass(lambda s: matches(h, s))


def compose_count_law(alpha: Fraction, n: int) -> tuple[Fraction, ...]:
    """Law of the number of hits among ``n`` independent offspring.

    Built by ``n``-fold convolution of the one-offspring Bernoulli law rather
    than by the binomial formula.
    """
    law = [Fraction(1)]
    step = (1 - alpha, alpha)
    for _ in range(n):
        nxt = [Fraction(0)] * (len(law) + 1)
        for c, p in enumerate(law):
            for hit, w in enumerate(step):
                nxt[c + hit] += p * w
        law = nxt
    return tuple(law)


def oracle_count_distribution(
    h: GaSchema, pop: Population, f: FitnessFunction, cfg: GaConfig
) -> tuple[Fraction, ...]:
    return compose_count_law(oracle_alpha(h, pop, f, cfg), pop.n)


# -- GP --------------------------------------------------------------------------


def _check_gp_caps(pop: GpPopulation, cfg: GpConfig, max_trees: int, max_nodes: int) -> None:
    if pop.n > max_trees or any(m.size > max_nodes for m in pop.members):
        raise CapExceeded(
            f"GP oracle caps are {max_trees} trees of <= {max_nodes} nodes"
        )
    if cfg.p_m != 0:
        raise ValueError("the GP oracle enumerates crossover only (p_m = 0)")


def gp_selection_distribution(pop: GpPopulation, f: FitnessFunction) -> dict[Tree, Fraction]:
    values = program_fitness(pop, f)
    total = sum(values, Fraction(0))
    out: dict[Tree, Fraction] = {}
    for m, v in zip(pop.members, values):
        _add(out, m, v / total)
    return out


def enumerate_offspring_gp(
    pop: GpPopulation,
    f: FitnessFunction,
    cfg: GpConfig,
    max_trees: int = GP_MAX_TREES,
    max_nodes: int = GP_MAX_NODES,
) -> OffspringDistribution:
    """Exact law of one offspring under one-point GP crossover.

    Every ordered pair of selected programs and every node of their common
    region (root included, each with weight ``1/NC``) is visited.
    """
    _check_gp_caps(pop, cfg, max_trees, max_nodes)
    sel = gp_selection_distribution(pop, f)
    out: dict[Tree, Fraction] = {}
    for h, p in sel.items():
        _add(out, h, (1 - cfg.p_c) * p)
    if cfg.p_c > 0:
        for (h1, p1), (h2, p2) in itertools.product(sel.items(), repeat=2):
            region = common_region(h1, h2)
            w = cfg.p_c * p1 * p2 / region.size
            for point in region.paths:
                _add(out, replace_at(h1, point, node_at(h2, point)), w)
    return OffspringDistribution.from_mapping(out)


def oracle_alpha_gp(h: Tree, pop: GpPopulation, f: FitnessFunction, cfg: GpConfig, **caps) -> Fraction:
    return enumerate_offspring_gp(pop, f, cfg, **caps).mass(lambda p: gp_matches(h, p))


def oracle_expected_mean_size(
    pop: GpPopulation, f: FitnessFunction, cfg: GpConfig, **caps
) -> Fraction:
    """``E(mu(t+1))``: offspring are i.i.d., so this is one offspring's mean size."""
    return enumerate_offspring_gp(pop, f, cfg, **caps).expectation(lambda p: p.size)



# -- mask lemma ------------------------------------------------------------------


@dataclass(frozen=True)
class MaskLemmaResult:
    shape: Tree
    schemata: int
    masks: int
    pairs: int
    counterexamples: int
    crosschecked: int


def _programs_by_code(shape: Tree, pset: PrimitiveSet) -> tuple[list[Tree], list[tuple[str, str]]]:
    nodes = [node for _, node in iter_nodes(shape)]
    choices = []
    for node in nodes:
        syms = pset.symbols_of_arity(node.arity)
        if len(syms) != 2:
            raise ValueError("mask-lemma check needs exactly two symbols per arity in the shape")
        choices.append(tuple(syms))

    def build(template: Tree, code: int, k: list[int]) -> Tree:
        idx = k[0]
        k[0] += 1
        sym = choices[idx][(code >> idx) & 1]
        return Tree(sym, tuple(build(c, code, k) for c in template.children))

    return [build(shape, code, [0]) for code in range(2 ** len(nodes))], choices


def schemata_of_shape(shape: Tree, pset: PrimitiveSet) -> Iterator[Tree]:
    """Every fixed-shape schema of ``shape``: each node ``=`` or a symbol."""
    nodes = [node for _, node in iter_nodes(shape)]
    options = [(EQ, *pset.symbols_of_arity(n.arity)) for n in nodes]
    for labels in itertools.product(*options):
        it = iter(labels)

        def build(template: Tree) -> Tree:
            sym = next(it)
            return Tree(sym, tuple(build(c) for c in template.children))

        yield build(shape)


def mask_lemma_check(
    shape: Tree,
    pset: PrimitiveSet,
    schemata: Iterable[Tree] | None = None,
    crosscheck: int = 256,
    rng: np.random.Generator | None = None,
) -> MaskLemmaResult:
    """Count counterexamples to: child in H iff p1 in gamma(H,m) and p2 in gamma(H, not m).

    Every mask and every ordered pair of programs of ``shape`` is visited for
    each schema.  Programs are indexed by a bit code (bit ``k`` picks the
    symbol of preorder node ``k``), so the equal-shape child of mask ``m`` has
    code ``(m & c1) | (~m & c2)``.  That indexing is confirmed against
    :func:`uniform_crossover_gp` on ``crosscheck`` random triples; membership
    in ``H`` and in each ``gamma`` is decided by :func:`gp_matches` on trees.
    """
    programs, _ = _programs_by_code(shape, pset)
    size = shape.size
    full = 2**size - 1
    region = common_region(shape, shape)
    masks = [dict(zip(region.paths, ((code >> k) & 1 for k in range(size)))) for code in range(full + 1)]
    codes = np.arange(full + 1)
    rng = rng if rng is not None else np.random.default_rng(0)
    for _ in range(crosscheck):
        m, i, j = (int(x) for x in rng.integers(0, full + 1, 3))
        child = uniform_crossover_gp(programs[i], programs[j], masks[m])
        if child != programs[(m & i) | (~m & full & j)]:
            raise AssertionError(f"bit indexing disagrees with uniform crossover at {m, i, j}")
    mask_codes = codes[:, None, None]
    children = (mask_codes & codes[None, :, None]) | ((full ^ mask_codes) & codes[None, None, :])
    if schemata is None:
        schemata = schemata_of_shape(shape, pset)
    bad = 0
    count = 0
    cache: dict[Tree, np.ndarray] = {}
    for h in schemata:
        count += 1
        in_h = np.array([gp_matches(h, p) for p in programs])
        rows = []
        for mk in masks:
            g = gamma(h, mk)
            if g not in cache:
                cache[g] = np.array([gp_matches(g, p) for p in programs])
            rows.append(cache[g])
        in_gamma = np.array(rows)
        lhs = in_h[children]
        rhs = in_gamma[:, :, None] & in_gamma[full ^ codes][:, None, :]
        bad += int((lhs != rhs).sum())
    return MaskLemmaResult(shape, count, full + 1, (full + 1) ** 2, bad, crosscheck)
