"""GA schema-theorem predictions.

Everything here is a closed-form function of the current population.  Rational
inputs give exact ``Fraction`` outputs; only square roots fall back to floats.
Cut points follow the engine: ``l - 1`` cuts, cut ``k`` keeping positions
``0..k`` from the first parent.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .fitness import FitnessFunction, as_fraction
from .ga import BitString, GaConfig, Population, fitness_values
from .schema import (
    CapExceeded,
    GaSchema,
    all_schemata,
    count_and_fitness,
    flip,
    matches,
    mean_fitness,
    truncate,
)

log = logging.getLogger(__name__)

Number = Fraction | float


def clamp01(x: Number, what: str = "probability") -> Number:
    if x < 0 or x > 1:
        log.warning("clamping %s %r into [0, 1]", what, x)
        return type(x)(0) if x < 0 else type(x)(1)
    return x


# -- selection ---------------------------------------------------------------


def selection_masses(pop: Population, f: FitnessFunction) -> dict[BitString, Fraction]:
    """Exact proportional-selection probability of each distinct string."""
    values = fitness_values(pop, f)
    total = sum(values, Fraction(0))
    if total == 0:
        raise ValueError("zero total fitness")
    mass: Counter = Counter()
    for s, v in zip(pop.members, values):
        mass[s] += v
    return {s: Fraction(v) / total for s, v in mass.items()}


def schema_mass(h: GaSchema, masses: Mapping[BitString, Fraction]) -> Fraction:
    return sum((p for s, p in masses.items() if matches(h, s)), Fraction(0))


def _require_proportional(cfg: GaConfig | None) -> None:
    if cfg is not None and cfg.selection != "proportional":
        raise ValueError("closed-form transmission assumes proportional selection")


def selection_probability(h: GaSchema, pop: Population, f: FitnessFunction) -> Fraction:
    """``p(H,t) = m(H,t) f(H,t) / (n fbar(t))`` under proportional selection."""
    return schema_mass(h, selection_masses(pop, f))


# -- Holland's bound -----------------------------------------------------------


def holland_bound(h: GaSchema, pop: Population, f: FitnessFunction, cfg: GaConfig) -> Fraction:
    """Lower bound on ``E m(H,t+1)`` counting only survival of ``H``."""
    if cfg.mutation_mode != "per-bit":
        raise ValueError("the (1-p_m)^o factor assumes per-bit mutation")
    ell = len(h)
    if ell < 2:
        raise ValueError("Holland's bound needs l >= 2")
    m, fh = count_and_fitness(h, pop, f)
    if m == 0:
        return Fraction(0)
    fbar = mean_fitness(pop, f)
    bound = (
        fh / fbar * m
        * (1 - cfg.p_c * Fraction(h.defining_length, ell - 1))
        * (1 - cfg.p_m) ** h.order
    )
    return max(bound, Fraction(0))


# -- exact transmission ------------------------------------------------------


@dataclass(frozen=True)
class TransmissionEstimate:
    alpha: Number
    n: int
    provenance: str = "formula"

    @property
    def expected_count(self) -> Number:
        return self.n * self.alpha

    @property
    def variance(self) -> Number:
        return self.n * self.alpha * (1 - self.alpha)


def crossover_alpha(
    h: GaSchema, masses: Mapping[BitString, Fraction], p_c: Fraction
) -> Fraction:
    """Transmission probability before mutation."""
    ell = len(h)
    p_h = schema_mass(h, masses)
    if p_c == 0:
        return p_h
    if ell < 2:
        raise ValueError("crossover needs l >= 2")
    pairs = sum(
        (
            schema_mass(truncate(h, k, "left"), masses)
            * schema_mass(truncate(h, k, "right"), masses)
            for k in range(ell - 1)
        ),
        Fraction(0),
    )
    return (1 - p_c) * p_h + p_c / (ell - 1) * pairs


def mutated_alpha(h: GaSchema, cfg: GaConfig, pre_alpha) -> Fraction:
    """Fold exact bit mutation into a pre-mutation transmission function.

    ``pre_alpha(schema)`` returns the pre-mutation probability of a schema.  An
    offspring lands in ``H`` after mutation iff it was in the schema obtained by
    flipping exactly the fixed positions that mutation hit.
    """
    pm = cfg.p_m
    fixed = h.fixed
    o = len(fixed)
    if pm == 0:
        return pre_alpha(h)
    if cfg.mutation_mode == "per-bit":
        total = Fraction(0)
        for r in range(o + 1):
            weight = pm**r * (1 - pm) ** (o - r)
            for subset in itertools.combinations(fixed, r):
                total += weight * pre_alpha(flip(h, subset))
        return total
    ell = len(h)
    base = pre_alpha(h)
    flipped = sum((pre_alpha(flip(h, (j,))) for j in fixed), Fraction(0))
    return (1 - pm) * base + pm / ell * ((ell - o) * base + flipped)


def exact_alpha(
    h: GaSchema, pop: Population, f: FitnessFunction, cfg: GaConfig
) -> TransmissionEstimate:
    """Exact probability that one offspring samples ``H``.

    Crossover part::

        alpha = (1 - p_c) p(H) + p_c/(l-1) * sum_{k=0}^{l-2} p(L(H,k)) p(R(H,k))

    Mutation, when ``p_m > 0``, is folded in exactly by :func:`mutated_alpha`.
    """
    _require_proportional(cfg)
    masses = selection_masses(pop, f)
    alpha = mutated_alpha(h, cfg, lambda g: crossover_alpha(g, masses, cfg.p_c))
    return TransmissionEstimate(alpha, pop.n, "formula")


def noop_cut_alpha(
    h: GaSchema, pop: Population, f: FitnessFunction, cfg: GaConfig
) -> Fraction:
    """The ``p_c / l`` variant that also counts the no-op cut after the last bit.

    It describes a crossover drawing ``l`` cut positions, one of which leaves
    the first parent intact; it is reported next to :func:`exact_alpha` for
    comparison and matches the engine only when ``p_c = 0``.
    """
    masses = selection_masses(pop, f)
    ell = len(h)
    p_h = schema_mass(h, masses)
    pairs = sum(
        (
            schema_mass(truncate(h, i, "left"), masses)
            * schema_mass(truncate(h, i, "right"), masses)
            for i in range(ell)
        ),
        Fraction(0),
    )
    return (1 - cfg.p_c) * p_h + cfg.p_c / ell * pairs


def disruptive_cuts(h: GaSchema) -> range:
    """``B(H)``: cuts strictly between the first and last fixed position."""
    fx = h.fixed
    if len(fx) < 2:
        return range(0)
    return range(fx[0], fx[-1])


@dataclass(frozen=True)
class AdjustedFitness:
    operator_adjusted: Fraction
    effective: Fraction | None
    effective_bsum: Fraction | None

    @property
    def forms_agree(self) -> bool | None:
        if self.effective is None or self.effective_bsum is None:
            return None
        return self.effective == self.effective_bsum


def adjusted_and_effective_fitness(
    h: GaSchema, pop: Population, f: FitnessFunction, cfg: GaConfig
) -> AdjustedFitness:
    """Operator-adjusted fitness ``f_a`` and effective fitness ``f_e``.

    ``f_e = alpha / p(H) * f(H,t)``.  The disruptive-cut form::

        f_e = f(H,t) (1 - p_c/(l-1) * sum_{i in B(H)} (1 - p(L)p(R)/p(H)))

    is computed independently when ``p_m = 0`` and must equal it.
    """
    ell = len(h)
    if ell < 2:
        raise ValueError("needs l >= 2")
    _, fh = count_and_fitness(h, pop, f)
    f_a = fh * (1 - cfg.p_c * Fraction(h.defining_length, ell - 1) - cfg.p_m * h.order)
    masses = selection_masses(pop, f)
    p_h = schema_mass(h, masses)
    if p_h == 0:
        return AdjustedFitness(f_a, None, None)
    alpha = exact_alpha(h, pop, f, cfg).alpha
    f_e = alpha / p_h * fh
    f_b = None
    if cfg.p_m == 0:
        loss = sum(
            (
                1
                - schema_mass(truncate(h, i, "left"), masses)
                * schema_mass(truncate(h, i, "right"), masses)
                / p_h
                for i in disruptive_cuts(h)
            ),
            Fraction(0),
        )
        f_b = fh * (1 - cfg.p_c / (ell - 1) * loss)
    return AdjustedFitness(f_a, f_e, f_b)


# -- deception -----------------------------------------------------------------

DECEPTION_CAP = 3**10


def uniform_population(ell: int) -> Population:
    return Population(
        tuple(BitString(bits) for bits in itertools.product((0, 1), repeat=ell))
    )


@dataclass(frozen=True)
class Channel:
    schema: GaSchema
    cut: int
    pair_mass: Fraction
    mass: Fraction


@dataclass(frozen=True)
class DeceptionReport:
    scope: str
    argmax_f: tuple[GaSchema, ...]
    argmax_fa: tuple[GaSchema, ...]
    channels: tuple[Channel, ...] = field(default=())

    @property
    def deceptive(self) -> bool:
        return set(self.argmax_f) != set(self.argmax_fa)

    @property
    def best_f(self) -> GaSchema:
        return self.argmax_f[0]

    @property
    def best_fa(self) -> GaSchema:
        return self.argmax_fa[0]


def _argmax(scores: dict[GaSchema, Fraction]) -> tuple[GaSchema, ...]:
    top = max(scores.values())
    return tuple(sorted(h for h, v in scores.items() if v == top))


def deception_report(
    f: FitnessFunction,
    cfg: GaConfig,
    ell: int,
    scope: str = "strings",
    max_order: int | None = None,
    pop: Population | None = None,
) -> DeceptionReport:
    """Compare the maximisers of ``f`` and ``f_a`` and list deceptive channels.

    ``scope`` is ``"strings"`` (all order-``l`` schemata) or ``"schemata"`` (every
    schema of order <= ``max_order``, default all).  The population defaults to
    one copy of each of the ``2^l`` strings.  Maximiser sets are sorted
    lexicographically, so ties resolve to the first entry.
    """
    if scope == "strings":
        size = 2**ell
    elif scope == "schemata":
        size = 3**ell
    else:
        raise ValueError(f"unknown scope {scope!r}")
    if size > DECEPTION_CAP:
        raise CapExceeded(f"deception scope of {size} schemata exceeds {DECEPTION_CAP}")
    pop = pop or uniform_population(ell)
    if pop.length != ell:
        raise ValueError("population length does not match l")
    if scope == "strings":
        universe = [GaSchema(str(BitString(b))) for b in itertools.product((0, 1), repeat=ell)]
    else:
        universe = list(all_schemata(ell, max_order))
    masses = selection_masses(pop, f)
    f_scores: dict[GaSchema, Fraction] = {}
    fa_scores: dict[GaSchema, Fraction] = {}
    channels = []
    for h in universe:
        m, fh = count_and_fitness(h, pop, f)
        if m == 0:
            continue
        f_scores[h] = fh
        fa_scores[h] = fh * (
            1 - cfg.p_c * Fraction(h.defining_length, ell - 1) - cfg.p_m * h.order
        )
        p_h = schema_mass(h, masses)
        for i in range(ell - 1):
            pair = schema_mass(truncate(h, i, "left"), masses) * schema_mass(
                truncate(h, i, "right"), masses
            )
            if pair < p_h:
                channels.append(Channel(h, i, pair, p_h))
    channels.sort(key=lambda c: (c.schema.pattern, c.cut))
    return DeceptionReport(scope, _argmax(f_scores), _argmax(fa_scores), tuple(channels))


# -- the binomial law and its consequences -----------------------------------


@dataclass(frozen=True)
class CountDistribution:
    """Law of ``m(H,t+1)`` when each of ``n`` offspring samples ``H`` w.p. ``alpha``."""

    alpha: Number
    n: int
    pmf: tuple[Number, ...]

    def tail(self, x: int) -> Number:
        """``Pr(m >= x)``."""
        x = max(int(math.ceil(x)), 0)
        zero = Fraction(0) if isinstance(self.alpha, Fraction) else 0.0
        return sum(self.pmf[x:], zero)

    @property
    def mean(self) -> Number:
        return self.n * self.alpha

    @property
    def variance(self) -> Number:
        return self.n * self.alpha * (1 - self.alpha)

    @property
    def signal_to_noise(self) -> float:
        if self.alpha >= 1:
            return math.inf
        return math.sqrt(self.n) * math.sqrt(float(self.alpha) / (1 - float(self.alpha)))

    @property
    def extinction(self) -> Number:
        return (1 - self.alpha) ** self.n

    @property
    def survives(self) -> bool:
        """Rule of thumb: a schema is expected to survive when ``alpha > 4/n``."""
        return self.alpha > Fraction(4, self.n)


def next_count_distribution(alpha, n: int) -> CountDistribution:
    if isinstance(alpha, int):
        alpha = Fraction(alpha)
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    if n < 1:
        raise ValueError("n must be positive")
    pmf = tuple(math.comb(n, k) * alpha**k * (1 - alpha) ** (n - k) for k in range(n + 1))
    return CountDistribution(alpha, n, pmf)


@dataclass(frozen=True)
class ChebychevBounds:
    low: float
    high: float
    one_sided_lower: float
    confidence: Number

    def covers(self, m: float) -> bool:
        return self.low <= m <= self.high


def chebychev_bounds(alpha, n: int, k) -> ChebychevBounds:
    """``n alpha +- k sqrt(n alpha (1-alpha))`` holds with probability >= 1 - 1/k^2."""
    if k <= 0:
        raise ValueError("k must be positive")
    a = float(alpha)
    mu = n * a
    half = float(k) * math.sqrt(max(n * a * (1 - a), 0.0))
    kk = k if isinstance(k, float) else as_fraction(k)
    return ChebychevBounds(mu - half, mu + half, mu - half, 1 - 1 / kk**2)


def _exact_sqrt(q: Fraction) -> Fraction | float:
    num, den = q.numerator, q.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return math.sqrt(q)


def alpha_tilde(k, x, n: int) -> Number:
    """Smallest ``alpha`` with ``n alpha - k sqrt(n alpha (1-alpha)) >= x``.

    The closed form is the larger root of the quadratic obtained by squaring::

        (n (k^2 + 2x) + k sqrt(n^2 k^2 + 4 n x (n - x))) / (2 n (k^2 + n))

    Exact when every quantity (including the square root) is rational.
    """
    if not 0 <= x <= n:
        raise ValueError("x must lie in [0, n]")
    if k < 0:
        raise ValueError("k must be non-negative")
    if isinstance(k, float) or isinstance(x, float):
        k, x = float(k), float(x)
        disc = n * n * k * k + 4 * n * x * (n - x)
        value = (n * (k * k + 2 * x) + k * math.sqrt(disc)) / (2 * n * (k * k + n))
        return clamp01(value, "alpha_tilde")
    k, x = Fraction(k), Fraction(x)
    root = _exact_sqrt(n * n * k * k + 4 * n * x * (n - x)) if k else Fraction(0)
    value = (n * (k * k + 2 * x) + k * root) / (2 * n * (k * k + n))
    return value if isinstance(value, Fraction) else clamp01(value, "alpha_tilde")


def conditional_event_holds(
    h: GaSchema, pop: Population, f: FitnessFunction, cfg: GaConfig, k, x
) -> bool:
    """Event ``E``: the (mutation-free) transmission probability reaches ``alpha_tilde``.

    When it holds, ``Pr(m(H,t+1) > x | E) >= 1 - 1/k^2``.
    """
    if cfg.p_m != 0:
        raise ValueError("the conditional theorem is stated without mutation")
    return exact_alpha(h, pop, f, cfg).alpha >= alpha_tilde(k, x, pop.n)


def recursive_conditional_bound(prob_l, prob_r, k) -> Number:
    """``(1 - 1/k^2) (Pr(m_L > M_L) + Pr(m_R > M_R) - 1)`` clamped to [0, 1]."""
    if k <= 0:
        raise ValueError("k must be positive")
    for p in (prob_l, prob_r):
        if not 0 <= p <= 1:
            raise ValueError("probabilities must lie in [0, 1]")
    if not isinstance(k, float):
        k = as_fraction(k)
    value = (1 - 1 / (k * k)) * (prob_l + prob_r - 1)
    if value < 0:
        return type(value)(0)
    return min(value, type(value)(1))


def mu_event_holds(m_l, m_r, m_h, k, n: int, ell: int, fbar, f_l, f_r) -> bool:
    """``M_L M_R > alpha_tilde(k, M_H, n) (l-1) n^2 fbar^2 / (f_L f_R)``."""
    threshold = alpha_tilde(k, m_h, n) * (ell - 1) * n * n * fbar * fbar / (f_l * f_r)
    return m_l * m_r > threshold


def schema_family_alphas(
    schemata: Iterable[GaSchema], pop: Population, f: FitnessFunction, cfg: GaConfig
) -> dict[GaSchema, Fraction]:
    return {h: exact_alpha(h, pop, f, cfg).alpha for h in schemata}
