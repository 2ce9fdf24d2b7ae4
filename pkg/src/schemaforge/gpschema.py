"""Fixed-size-and-shape GP schemata and hyperschemata.

Patterns are ordinary :class:`~schemaforge.trees.Tree` values whose symbols may
include ``=`` (exactly one node, arity given by its pattern children) and ``#``
(any subtree, leaves only).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

from .trees import ROOT, Path, Tree, TreeError, iter_nodes, node_at, shape_of

EQ = "="
HASH = "#"
UNIVERSAL = Tree(HASH)

L_READINGS = ("pruned", "literal", "l-style")


def validate_pattern(h: Tree) -> Tree:
    for _, node in iter_nodes(h):
        if node.symbol == HASH and node.children:
            raise TreeError("'#' may only appear at leaves")
    return h


def is_hyperschema(h: Tree) -> bool:
    return any(node.symbol == HASH for _, node in iter_nodes(h))


@dataclass(frozen=True)
class GpSchemaMetrics:
    order: int
    length: int
    defining_length: int
    shape: Tree


def fixed_paths(h: Tree) -> list[Path]:
    return [p for p, node in iter_nodes(h) if node.symbol not in (EQ, HASH)]


def gp_schema_metrics(h: Tree) -> GpSchemaMetrics:
    """Order, length ``N(H)``, defining length and shape ``G(H)``.

    The defining length counts the links of the smallest connected fragment
    holding every fixed node: the union of paths from their deepest common
    ancestor down to each of them.
    """
    fixed = fixed_paths(h)
    if len(fixed) <= 1:
        dl = 0
    else:
        k = 0
        while all(len(p) > k for p in fixed) and len({p[k] for p in fixed}) == 1:
            k += 1
        top = fixed[0][:k]
        fragment = {top}
        for p in fixed:
            for j in range(k + 1, len(p) + 1):
                fragment.add(p[:j])
        dl = len(fragment) - 1
    return GpSchemaMetrics(len(fixed), h.size, dl, shape_of(h))


def gp_matches(h: Tree, p: Tree) -> bool:
    """Positional match; ``=`` consumes one node of equal arity, ``#`` any subtree."""
    if h.symbol == HASH:
        return True
    if h.arity != p.arity:
        return False
    if h.symbol != EQ and h.symbol != p.symbol:
        return False
    return all(gp_matches(hc, pc) for hc, pc in zip(h.children, p.children))


def _relabel(h: Tree, label: Callable[[Path, Tree], str], path: Path = ROOT) -> Tree:
    return Tree(
        label(path, h),
        tuple(_relabel(c, label, path + (j,)) for j, c in enumerate(h.children)),
    )


def _below(path: Path, point: Path) -> bool:
    return path[: len(point)] == point


def _graft(h: Tree, fn: Callable[[Path, Tree], Tree | None], path: Path = ROOT) -> Tree:
    out = fn(path, h)
    if out is not None:
        return out
    return Tree(h.symbol, tuple(_graft(c, fn, path + (j,)) for j, c in enumerate(h.children)))


@dataclass(frozen=True)
class BuildingBlocks:
    u: Tree
    l: Tree
    upper: Tree
    lower: Tree
    reading: str


def upper_hyperschema(h: Tree, point: Path) -> Tree:
    """``U(H,i)``: the subtree rooted at ``point`` becomes a single ``#``."""
    node_at(h, point)
    return _graft(h, lambda p, n: UNIVERSAL if p == point else None)


def lower_hyperschema(h: Tree, point: Path, reading: str = "pruned") -> Tree:
    """``L(H,i)`` under one of three readings.

    ``pruned``: nodes on the path from the root to ``point`` become ``=`` and
    every subtree hanging off that path becomes ``#``; the subtree at ``point``
    is kept.  ``literal``: only the path nodes become ``=``, everything else is
    kept.  ``l-style``: every node outside the subtree at ``point`` becomes
    ``=`` (the same as ``l(H,i)``).
    """
    node_at(h, point)
    if reading == "l-style":
        return _relabel(h, lambda p, n: n.symbol if _below(p, point) else EQ)
    if reading == "literal":
        return _relabel(
            h, lambda p, n: EQ if point[: len(p)] == p and p != point else n.symbol
        )
    if reading != "pruned":
        raise ValueError(f"unknown L reading {reading!r}; choose from {L_READINGS}")

    def fn(p: Path, n: Tree):
        if _below(p, point):
            return n
        if point[: len(p)] == p:
            return None
        return UNIVERSAL

    def build(n: Tree, p: Path) -> Tree:
        out = fn(p, n)
        if out is not None:
            return out
        return Tree(EQ, tuple(build(c, p + (j,)) for j, c in enumerate(n.children)))

    return build(h, ROOT)


def building_blocks(h: Tree, point: Path, reading: str = "pruned") -> BuildingBlocks:
    """``u(H,i)``, ``l(H,i)``, ``U(H,i)`` and ``L(H,i)`` at a node of ``H``.

    ``u`` turns the subtree rooted at ``point`` into ``=`` nodes; ``l`` turns
    every other node into ``=``.
    """
    node_at(h, point)
    u = _relabel(h, lambda p, n: EQ if _below(p, point) else n.symbol)
    l = _relabel(h, lambda p, n: n.symbol if _below(p, point) else EQ)
    return BuildingBlocks(u, l, upper_hyperschema(h, point), lower_hyperschema(h, point, reading), reading)


def gamma(h: Tree, mask: Mapping[Path, int]) -> Tree:
    """Building-block generating function for homologous crossover.

    Keeps ``H``'s symbol wherever the mask is 1 and puts ``=`` elsewhere, so
    ``gamma(H, m)`` and ``gamma(H, complement m)`` are the parental schemata
    that mask ``m`` combines into ``H``.
    """
    shape_paths = {p for p, _ in iter_nodes(h)}
    if set(mask) != shape_paths:
        raise TreeError("mask does not cover the schema's shape exactly")
    return _relabel(h, lambda p, n: n.symbol if mask[p] else EQ)


def expand(h: Tree, universe: list[Tree]) -> set[Tree]:
    """Explicit program set of a (hyper)schema, restricted to ``universe``.

    Built bottom-up from the pattern rather than by matching: ``#`` expands to
    every program in ``universe``, ``=`` to every node with the right arity.
    """
    by_arity: dict[int, set[str]] = {}
    for prog in universe:
        for _, node in iter_nodes(prog):
            by_arity.setdefault(node.arity, set()).add(node.symbol)
    sizes = max(p.size for p in universe)

    def build(pat: Tree) -> set[Tree]:
        if pat.symbol == HASH:
            return set(universe)
        symbols = by_arity.get(pat.arity, set()) if pat.symbol == EQ else {pat.symbol}
        options = [build(c) for c in pat.children]
        out = {Tree(s) for s in symbols} if not options else set()
        if options:
            combos = [()]
            for opts in options:
                combos = [c + (o,) for c in combos for o in opts if sum(x.size for x in c) + o.size < sizes]
            out = {Tree(s, kids) for s in symbols for kids in combos}
        return {p for p in out if p.size <= sizes}

    return build(h) & set(universe)
