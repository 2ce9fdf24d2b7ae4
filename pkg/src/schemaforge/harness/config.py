"""YAML experiment configuration with line-precise validation errors.

Layout::

    mode: ga                  # or gp
    seed: 7
    trials: 200               # Monte Carlo next generations per step / suite
    generations: 5
    out: results
    oracle: true
    engine: {n: 20, length: 8, p_c: 0.5, p_m: 0.01}
    fitness: {name: one-max, params: {offset: 1}}
    population: ["0101", ...] # optional initial population
    schemata: ["1*******"]
    theorems: [exact-alpha, holland-bound, chebychev]
    census_order: 2
    instances: 200            # verify command only
    k: 2                      # Chebychev width

GP engines take ``functions`` (symbol to arity), ``terminals``,
``init_depth`` and ``init_method`` instead of ``length``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import yaml

from ..fitness import FitnessError, FitnessFunction, as_fraction, make_fitness
from ..ga import ConfigError as EngineConfigError
from ..ga import GaConfig
from ..gp import GpConfig
from ..gpschema import is_hyperschema, validate_pattern
from ..schema import GaSchema
from ..trees import PrimitiveSet, Tree, TreeError, iter_nodes, parse_tree


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line else f"{source}: "
        super().__init__(where + message)


GA_THEOREMS = ("exact-alpha", "holland-bound", "chebychev")
GP_THEOREMS = ("gp-microscopic", "gp-macroscopic", "creation-correction", "gp-bound", "size-evolution")
GA_SUITES = ("exact-alpha", "holland-bound", "chebychev", "binomial", "alpha-tilde", "extinction")
GP_SUITES = ("gp-exact", "creation-correction", "gp-bound", "size-evolution", "mask-lemma")

TOP_FIELDS = {
    "mode", "seed", "trials", "generations", "out", "oracle", "engine", "fitness",
    "population", "schemata", "theorems", "census_order", "instances", "k",
}
GA_ENGINE_FIELDS = {
    "n", "length", "p_c", "p_m", "mutation_mode", "selection", "tournament_size", "tournament_bias",
}
GP_ENGINE_FIELDS = {"n", "p_c", "p_m", "functions", "terminals", "init_depth", "init_method"}

DEFAULT_FUNCTIONS = {"+": 2, "-": 2, "*": 2}
DEFAULT_TERMINALS = ("x", "y")


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    engine: GaConfig | GpConfig
    fitness: FitnessFunction
    fitness_spec: tuple
    schemata: tuple
    theorems: tuple[str, ...]
    trials: int = 100
    generations: int = 1
    oracle: bool = True
    out: Path = Path("results")
    seed: int = 0
    length: int | None = None
    pset: PrimitiveSet | None = None
    population: tuple[str, ...] | None = None
    census_order: int = 1
    instances: int = 200
    k: Fraction = Fraction(2)
    source_text: str = field(default="", repr=False)


class _Marks:
    """Line numbers of every key and value in the YAML document."""

    def __init__(self, node):
        self.lines: dict[tuple, int] = {}
        self._walk(node, ())

    def _walk(self, node, path):
        self.lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = k.value
                self.lines[path + (key,)] = k.start_mark.line + 1
                self._walk(v, path + (key,))
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                self._walk(v, path + (i,))

    def line(self, *path) -> int | None:
        while path and path not in self.lines:
            path = path[:-1]
        return self.lines.get(path)


def _number(value, what: str, fail) -> Fraction:
    try:
        return as_fraction(value if not isinstance(value, str) else value.strip())
    except (ValueError, TypeError, ZeroDivisionError):
        fail(f"{what} must be a number or a fraction like '1/2', got {value!r}")


def parse_config(text: str, source: str = "<config>", seed: int | None = None,
                 trials: int | None = None, out: str | None = None) -> ExperimentConfig:
    """Parse and validate; command-line overrides win over file values."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                          mark.line + 1 if mark else None, source) from None
    if node is None:
        raise ConfigError("empty configuration", None, source)
    marks = _Marks(node)
    data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", 1, source)

    def fail(msg, *path):
        raise ConfigError(msg, marks.line(*path), source)

    for key in data:
        if key not in TOP_FIELDS:
            fail(f"unknown field {key!r}", key)
    mode = data.get("mode")
    if mode not in ("ga", "gp"):
        fail("mode must be 'ga' or 'gp'", "mode")

    def integer(key, default, low=None):
        value = data.get(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            fail(f"{key} must be an integer", key)
        if low is not None and value < low:
            fail(f"{key} must be >= {low}", key)
        return value

    seed_v = integer("seed", 0, 0) if seed is None else seed
    if not 0 <= seed_v < 2**64:
        fail("seed must be a 64-bit unsigned integer", "seed")
    trials_v = integer("trials", 100, 1) if trials is None else trials
    if trials_v < 1:
        raise ConfigError("--trials must be >= 1", None, source)
    generations = integer("generations", 1, 0)
    census_order = integer("census_order", 1, 0)
    instances = integer("instances", 200, 1)
    oracle = data.get("oracle", True)
    if not isinstance(oracle, bool):
        fail("oracle must be true or false", "oracle")
    k = _number(data.get("k", 2), "k", lambda m: fail(m, "k"))
    if k <= 0:
        fail("k must be positive", "k")

    engine = data.get("engine") or {}
    if not isinstance(engine, dict):
        fail("engine must be a mapping", "engine")
    allowed = GA_ENGINE_FIELDS if mode == "ga" else GP_ENGINE_FIELDS
    for key in engine:
        if key not in allowed:
            fail(f"unknown engine field {key!r} for mode {mode}", "engine", key)
    if "n" not in engine:
        fail("engine.n is required", "engine")
    params = dict(engine)
    for key in ("p_c", "p_m", "tournament_bias"):
        if key in params:
            params[key] = _number(params[key], f"engine.{key}", lambda m, key=key: fail(m, "engine", key))
    length = None
    pset = None
    try:
        if mode == "ga":
            length = params.pop("length", None)
            if not isinstance(length, int) or isinstance(length, bool) or length < 1:
                fail("engine.length must be a positive integer", "engine", "length")
            cfg = GaConfig(seed=seed_v, **params)
        else:
            functions = params.pop("functions", DEFAULT_FUNCTIONS)
            terminals = params.pop("terminals", DEFAULT_TERMINALS)
            if not isinstance(functions, dict) or not isinstance(terminals, (list, tuple)):
                fail("functions must map symbols to arities and terminals must be a list", "engine")
            try:
                pset = PrimitiveSet({str(a): int(b) for a, b in functions.items()},
                                    tuple(str(x) for x in terminals))
            except (TreeError, ValueError) as exc:
                fail(str(exc), "engine", "functions")
            cfg = GpConfig(seed=seed_v, **params)
    except (EngineConfigError, TypeError) as exc:
        fail(str(exc), "engine")

    fit = data.get("fitness")
    if isinstance(fit, str):
        fit = {"name": fit}
    if not isinstance(fit, dict) or "name" not in fit:
        fail("fitness must be a name or a mapping with 'name'", "fitness")
    for key in fit:
        if key not in ("name", "params"):
            fail(f"unknown fitness field {key!r}", "fitness", key)
    fparams = fit.get("params") or {}
    if not isinstance(fparams, dict):
        fail("fitness.params must be a mapping", "fitness", "params")
    sized = mode == "ga" and fit["name"] in ("one-max", "flat", "binary-trap", "royal-road")
    try:
        fn = make_fitness(fit["name"], **fparams, **({"length": length} if sized else {}))
    except FitnessError as exc:
        fail(str(exc), "fitness")
    fitness_spec = (fit["name"], tuple(sorted((str(a), str(b)) for a, b in fparams.items())))

    population = data.get("population")
    if population is not None:
        if not isinstance(population, list) or len(population) != cfg.n:
            fail(f"population must list exactly n={cfg.n} members", "population")
        for i, member in enumerate(population):
            item = str(member)
            try:
                if mode == "ga":
                    if len(item) != length or set(item) - {"0", "1"}:
                        raise ValueError(f"{item!r} is not a bitstring of length {length}")
                else:
                    pset.validate(parse_tree(item))
            except (ValueError, TreeError) as exc:
                fail(str(exc), "population", i)
        population = tuple(str(m) for m in population)

    schemata = []
    for i, item in enumerate(data.get("schemata") or []):
        item = str(item)
        try:
            if mode == "ga":
                h = GaSchema(item)
                if len(h) != length:
                    raise ValueError(f"schema {item} has length {len(h)}, engine length is {length}")
            else:
                h = validate_pattern(parse_tree(item))
                if is_hyperschema(h):
                    raise ValueError("tracked GP schemata must have a fixed shape (no '#')")
                _check_pattern_symbols(h, pset)
            schemata.append(h)
        except (ValueError, TreeError) as exc:
            fail(str(exc), "schemata", i)

    theorems = data.get("theorems") or []
    if not isinstance(theorems, list) or not theorems:
        fail("theorems must be a nonempty list", "theorems")
    known = (GA_THEOREMS + GA_SUITES) if mode == "ga" else (GP_THEOREMS + GP_SUITES)
    for i, name in enumerate(theorems):
        if name not in known:
            fail(f"unknown theorem {name!r} for mode {mode}; choose from {sorted(set(known))}",
                 "theorems", i)
    if mode == "ga" and cfg.selection != "proportional":
        closed = [x for x in theorems if x in ("exact-alpha", "holland-bound", "chebychev")]
        if closed:
            fail(f"{closed[0]} assumes proportional selection", "theorems")
    if mode == "gp" and cfg.p_m != 0:
        exact = [x for x in theorems if x not in ("gp-bound",)]
        if exact:
            fail(f"{exact[0]} is exact only for p_m = 0", "theorems")

    return ExperimentConfig(
        mode=mode, engine=cfg, fitness=fn, fitness_spec=fitness_spec, schemata=tuple(schemata),
        theorems=tuple(theorems), trials=trials_v, generations=generations, oracle=oracle,
        out=Path(out if out is not None else data.get("out", "results")), seed=seed_v,
        length=length, pset=pset, population=population, census_order=census_order,
        instances=instances, k=k, source_text=text,
    )


def _check_pattern_symbols(h: Tree, pset: PrimitiveSet) -> None:
    for _, node in iter_nodes(h):
        if node.symbol in ("=", "#"):
            continue
        if pset.arity_of(node.symbol) != node.arity:
            raise TreeError(f"{node.symbol!r} has the wrong arity in pattern {h}")


def load_config(path, **overrides) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return parse_config(text, str(path), **overrides)
