"""Program trees, the Cartesian node reference system, common regions and
homologous crossover.

Internally a node is addressed by its *path*, the tuple of child indices from
the root.  Lexicographic order on paths is preorder.  The Cartesian coordinate
``(d, i)`` of a path is its depth and its index in an ``a_m``-ary grid row,
child ``j`` of ``(d, i)`` sitting at ``(d + 1, a_m * i + j)``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping, Sequence

import numpy as np

Path = tuple[int, ...]
ROOT: Path = ()


class TreeError(ValueError):
    pass


@dataclass(frozen=True)
class Tree:
    symbol: str
    children: tuple["Tree", ...] = ()

    @cached_property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children)

    @cached_property
    def depth(self) -> int:
        return 1 + max((c.depth for c in self.children), default=-1)

    @property
    def arity(self) -> int:
        return len(self.children)

    def __str__(self) -> str:
        if not self.children:
            return self.symbol
        return "(" + " ".join([self.symbol, *map(str, self.children)]) + ")"

    def __repr__(self) -> str:
        return f"Tree({str(self)!r})"

    def __lt__(self, other: "Tree") -> bool:
        return str(self) < str(other)

    @cached_property
    def _hash(self) -> int:
        return hash((self.symbol, self.children))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tree):
            return NotImplemented
        return self.symbol == other.symbol and self.children == other.children


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse_tree(text: str) -> Tree:
    """Parse prefix notation such as ``(+ a (* b b))``.

    A bare symbol or a parenthesised lone symbol ``(a)`` is a leaf.
    """
    tokens = _TOKEN.findall(text)
    if not tokens:
        raise TreeError("empty tree text")
    pos = 0

    def parse() -> Tree:
        nonlocal pos
        if pos >= len(tokens):
            raise TreeError(f"unexpected end of tree text: {text!r}")
        tok = tokens[pos]
        pos += 1
        if tok == ")":
            raise TreeError(f"unexpected ')' in {text!r}")
        if tok != "(":
            return Tree(tok)
        if pos >= len(tokens) or tokens[pos] in "()":
            raise TreeError(f"expected a symbol after '(' in {text!r}")
        symbol = tokens[pos]
        pos += 1
        kids = []
        while pos < len(tokens) and tokens[pos] != ")":
            kids.append(parse())
        if pos >= len(tokens):
            raise TreeError(f"missing ')' in {text!r}")
        pos += 1
        return Tree(symbol, tuple(kids))

    tree = parse()
    if pos != len(tokens):
        raise TreeError(f"trailing tokens in {text!r}")
    return tree


def t(text: str) -> Tree:
    return parse_tree(text)


# -- addressing ----------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Coord:
    depth: int
    index: int

    def __str__(self) -> str:
        return f"({self.depth},{self.index})"


def coord_of(path: Path, a_m: int) -> Coord:
    i = 0
    for j in path:
        if j >= a_m:
            raise TreeError(f"child index {j} exceeds max arity {a_m}")
        i = a_m * i + j
    return Coord(len(path), i)


def path_of(coord: Coord, a_m: int) -> Path:
    if coord.index < 0 or coord.index >= a_m**coord.depth:
        raise TreeError(f"{coord} is outside the {a_m}-ary grid")
    digits = []
    i = coord.index
    for _ in range(coord.depth):
        i, j = divmod(i, a_m)
        digits.append(j)
    return tuple(reversed(digits))


def node_at(tree: Tree, path: Path) -> Tree:
    node = tree
    for j in path:
        if j >= len(node.children):
            raise TreeError(f"no node at path {path} in {tree}")
        node = node.children[j]
    return node


def has_path(tree: Tree, path: Path) -> bool:
    try:
        node_at(tree, path)
    except TreeError:
        return False
    return True


def iter_nodes(tree: Tree, prefix: Path = ROOT) -> Iterator[tuple[Path, Tree]]:
    """Preorder ``(path, subtree)`` pairs."""
    yield prefix, tree
    for j, c in enumerate(tree.children):
        yield from iter_nodes(c, prefix + (j,))


def paths(tree: Tree) -> list[Path]:
    return [p for p, _ in iter_nodes(tree)]


def replace_at(tree: Tree, path: Path, sub: Tree) -> Tree:
    if not path:
        return sub
    j = path[0]
    if j >= len(tree.children):
        raise TreeError(f"no node at path {path} in {tree}")
    kids = list(tree.children)
    kids[j] = replace_at(kids[j], path[1:], sub)
    return Tree(tree.symbol, tuple(kids))


def shape_of(tree: Tree) -> Tree:
    """``G(h)``: same structure, every node the wildcard ``=``."""
    return Tree("=", tuple(shape_of(c) for c in tree.children))


def max_arity(*trees: Tree) -> int:
    return max(max(n.arity for _, n in iter_nodes(tr)) for tr in trees)


def _to_path(point, a_m: int | None, *trees: Tree) -> Path:
    if isinstance(point, Coord):
        return path_of(point, a_m or max(2, max_arity(*trees)))
    return tuple(point)


@dataclass(frozen=True)
class NodeInfo:
    name: str
    size: int
    arity: int
    is_function: bool


def node_accessors(tree: Tree, d: int, i: int, a_m: int | None = None) -> NodeInfo:
    """The name, size, arity and function-node functions at ``(d, i)``."""
    node = node_at(tree, path_of(Coord(d, i), a_m or max(2, max_arity(tree))))
    return NodeInfo(node.symbol, node.size, node.arity, node.arity > 0)


# -- primitive sets ------------------------------------------------------------


@dataclass(frozen=True)
class PrimitiveSet:
    functions: tuple[tuple[str, int], ...]
    terminals: tuple[str, ...]

    def __post_init__(self):
        items = self.functions.items() if isinstance(self.functions, Mapping) else self.functions
        fns = tuple((str(n), int(a)) for n, a in items)
        object.__setattr__(self, "functions", fns)
        object.__setattr__(self, "terminals", tuple(self.terminals))
        names = [n for n, _ in fns] + list(self.terminals)
        if len(set(names)) != len(names):
            raise TreeError("primitive names must be unique")
        if not self.terminals:
            raise TreeError("a primitive set needs at least one terminal")
        if any(a < 1 for _, a in fns):
            raise TreeError("functions must have arity >= 1")
        if {"=", "#"} & set(names):
            raise TreeError("'=' and '#' are reserved wildcard symbols")

    @property
    def max_arity(self) -> int:
        return max((a for _, a in self.functions), default=0)

    def arity_of(self, symbol: str) -> int:
        if symbol in self.terminals:
            return 0
        for n, a in self.functions:
            if n == symbol:
                return a
        raise TreeError(f"unknown primitive {symbol!r}")

    def symbols_of_arity(self, arity: int) -> tuple[str, ...]:
        if arity == 0:
            return self.terminals
        return tuple(n for n, a in self.functions if a == arity)

    def validate(self, tree: Tree) -> Tree:
        for _, node in iter_nodes(tree):
            if self.arity_of(node.symbol) != node.arity:
                raise TreeError(f"{node.symbol!r} has wrong arity in {tree}")
        return tree

    def random_tree(self, rng: np.random.Generator, max_depth: int, method: str = "grow") -> Tree:
        """Grow/full initialisation; ``max_depth`` 0 yields a terminal."""
        if max_depth <= 0 or not self.functions:
            return Tree(self.terminals[rng.integers(len(self.terminals))])
        n_fn, n_term = len(self.functions), len(self.terminals)
        if method == "full":
            pick = rng.integers(n_fn)
        else:
            pick = rng.integers(n_fn + n_term)
        if pick >= n_fn:
            return Tree(self.terminals[pick - n_fn])
        name, arity = self.functions[pick]
        return Tree(name, tuple(self.random_tree(rng, max_depth - 1, method) for _ in range(arity)))


def shapes_up_to(max_nodes: int, arities: Sequence[int]) -> list[Tree]:
    """All shapes (trees of ``=``) with at most ``max_nodes`` nodes."""
    arities = sorted(set(arities))
    memo: dict[int, list[Tree]] = {}

    def exact(k: int) -> list[Tree]:
        if k in memo:
            return memo[k]
        out: list[Tree] = []
        if k == 1:
            out.append(Tree("="))
        for a in arities:
            if a == 0:
                continue
            for sizes in _compositions(k - 1, a):
                for kids in itertools.product(*(exact(s) for s in sizes)):
                    out.append(Tree("=", tuple(kids)))
        memo[k] = out
        return out

    return [s for k in range(1, max_nodes + 1) for s in exact(k)]


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def fill_shape(shape: Tree, pset: PrimitiveSet) -> Iterator[Tree]:
    """Every program of ``pset`` with the given shape."""
    options = pset.symbols_of_arity(shape.arity)
    for sym in options:
        for kids in itertools.product(*(list(fill_shape(c, pset)) for c in shape.children)):
            yield Tree(sym, tuple(kids))


def all_programs(pset: PrimitiveSet, max_nodes: int) -> list[Tree]:
    arities = [0] + [a for _, a in pset.functions]
    return [p for s in shapes_up_to(max_nodes, arities) for p in fill_shape(s, pset)]


# -- common region and crossover ----------------------------------------------


@dataclass(frozen=True)
class CommonRegion:
    """Root-anchored set of paths where two trees have matching arities above."""

    paths: tuple[Path, ...]

    @property
    def size(self) -> int:
        """``NC(h1, h2)``."""
        return len(self.paths)

    @property
    def links(self) -> tuple[Path, ...]:
        return tuple(p for p in self.paths if p)

    def __contains__(self, path) -> bool:
        return tuple(path) in self._set

    @cached_property
    def _set(self) -> frozenset:
        return frozenset(self.paths)

    def coords(self, a_m: int) -> tuple[Coord, ...]:
        return tuple(coord_of(p, a_m) for p in self.paths)

    def __hash__(self) -> int:
        return hash(self.paths)

    def __eq__(self, other) -> bool:
        return isinstance(other, CommonRegion) and self.paths == other.paths


def common_region(t1: Tree, t2: Tree) -> CommonRegion:
    out: list[Path] = []

    def walk(a: Tree, b: Tree, path: Path) -> None:
        out.append(path)
        if a.arity == b.arity:
            for j, (ca, cb) in enumerate(zip(a.children, b.children)):
                walk(ca, cb, path + (j,))

    walk(t1, t2, ROOT)
    return CommonRegion(tuple(sorted(out)))


def one_point_crossover_gp(t1: Tree, t2: Tree, point, a_m: int | None = None) -> Tree:
    """Offspring: ``t1`` with the subtree at ``point`` taken from ``t2``.

    ``point`` is a path tuple or a :class:`Coord`; it must lie in the common
    region.  The root is a legal point and yields a copy of ``t2``.
    """
    path = _to_path(point, a_m, t1, t2)
    if path not in common_region(t1, t2):
        raise TreeError(f"crossover point {point} is outside the common region")
    return replace_at(t1, path, node_at(t2, path))


Mask = Mapping[Path, int]


def full_mask(region: CommonRegion, bit: int) -> dict[Path, int]:
    return {p: bit for p in region.paths}


def complement(mask: Mask) -> dict[Path, int]:
    return {p: 1 - b for p, b in mask.items()}


def all_masks(region: CommonRegion) -> Iterator[dict[Path, int]]:
    for bits in itertools.product((0, 1), repeat=region.size):
        yield dict(zip(region.paths, bits))


def one_point_mask(region: CommonRegion, point: Path) -> dict[Path, int]:
    """Mask reproducing one-point crossover at ``point`` (0 inside its subtree)."""
    k = len(point)
    return {p: 0 if p[:k] == point else 1 for p in region.paths}


def uniform_crossover_gp(t1: Tree, t2: Tree, mask: Mask) -> Tree:
    """Homologous crossover driven by a mask over the common region.

    Mask 1 takes the node from ``t1``, 0 from ``t2``.  At a boundary node (the
    parents' arities differ there) the chosen parent's whole subtree comes along.
    """
    region = common_region(t1, t2)
    if set(mask) != set(region.paths):
        raise TreeError("mask is not defined exactly on the common region")
    if any(b not in (0, 1) for b in mask.values()):
        raise TreeError("mask entries must be 0 or 1")

    def build(a: Tree, b: Tree, path: Path) -> Tree:
        src = a if mask[path] else b
        if a.arity != b.arity:
            return src
        kids = tuple(build(ca, cb, path + (j,)) for j, (ca, cb) in enumerate(zip(a.children, b.children)))
        return Tree(src.symbol, kids)

    return build(t1, t2, ROOT)


def point_mutation_gp(
    tree: Tree, p_m: float, rng: np.random.Generator, pset: PrimitiveSet
) -> Tree:
    """Each node, with probability ``p_m``, becomes a different same-arity symbol."""
    if p_m <= 0:
        return tree
    p = float(p_m)

    def walk(node: Tree) -> Tree:
        hit = rng.random() < p
        kids = tuple(walk(c) for c in node.children)
        sym = node.symbol
        if hit:
            others = [s for s in pset.symbols_of_arity(node.arity) if s != sym]
            if others:
                sym = others[rng.integers(len(others))]
        return Tree(sym, kids)

    return walk(tree)
