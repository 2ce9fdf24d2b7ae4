import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schemaforge.trees import (
    Coord, PrimitiveSet, TreeError, all_masks, all_programs, common_region, complement,
    coord_of, fill_shape, full_mask, node_accessors, node_at, one_point_crossover_gp,
    one_point_mask, parse_tree, path_of, paths, point_mutation_gp, replace_at, shape_of,
    shapes_up_to, t, uniform_crossover_gp,
)
from schemaforge.streams import substream

PSET = PrimitiveSet({"+": 2, "-": 1}, ("x", "y"))
PROGRAMS = all_programs(PSET, 5)
programs = st.sampled_from(PROGRAMS)


def test_parse_round_trip_and_errors():
    assert str(t("(+ a (* b b))")) == "(+ a (* b b))"
    assert t("(a)") == t("a")
    for bad in ("", "(+ a", "(+ a))", "()", "a b"):
        with pytest.raises(TreeError):
            parse_tree(bad)


def test_size_depth_arity():
    tree = t("(+ a (* b b))")
    assert (tree.size, tree.depth, tree.arity) == (5, 2, 2)


def test_coordinates():
    assert coord_of((1, 0), 2) == Coord(2, 2)
    assert path_of(Coord(2, 2), 2) == (1, 0)
    with pytest.raises(TreeError):
        path_of(Coord(1, 2), 2)


@given(st.integers(1, 4), st.data())
def test_coordinate_round_trip(a_m, data):
    path = tuple(data.draw(st.lists(st.integers(0, a_m - 1), max_size=5)))
    assert path_of(coord_of(path, a_m), a_m) == path


def test_node_accessors():
    info = node_accessors(t("(+ a b)"), 0, 0)
    assert (info.name, info.size, info.arity, info.is_function) == ("+", 3, 2, True)
    leaf = node_accessors(t("(+ a b)"), 1, 1)
    assert (leaf.name, leaf.size, leaf.is_function) == ("b", 1, False)


def test_common_region_example():
    region = common_region(t("(+ a b)"), t("(* (* a a) b)"))
    assert region.size == 3
    assert region.paths == ((), (0,), (1,))
    assert region.links == ((0,), (1,))


def test_common_region_stops_at_arity_mismatch():
    region = common_region(t("(+ (- x) y)"), t("(+ (+ x y) y)"))
    assert region.paths == ((), (0,), (1,))


@given(programs, programs)
def test_common_region_symmetric_and_shape_only(a, b):
    r = common_region(a, b)
    assert r == common_region(b, a) == common_region(shape_of(a), shape_of(b))
    assert () in r and r.size <= min(a.size, b.size)


def test_one_point_crossover_example():
    child = one_point_crossover_gp(t("(+ a b)"), t("(* c d)"), Coord(1, 1))
    assert child == t("(+ a d)")
    assert one_point_crossover_gp(t("(+ a b)"), t("(* c d)"), ()) == t("(* c d)")
    with pytest.raises(TreeError):
        one_point_crossover_gp(t("(+ a b)"), t("c"), (0,))


def test_replace_and_node_at():
    tree = t("(+ a (* b c))")
    assert node_at(tree, (1, 1)) == t("c")
    assert replace_at(tree, (1,), t("z")) == t("(+ a z)")
    assert paths(tree) == [(), (0,), (1,), (1, 0), (1, 1)]


def test_shape_enumeration_counts():
    # binary trees with 1, 3, 5, 7 nodes: Catalan numbers 1, 1, 2, 5
    assert len(shapes_up_to(7, [0, 2])) == 1 + 1 + 2 + 5
    assert len(list(fill_shape(t("(= = =)"), PSET))) == 4
    assert all(PSET.validate(p) for p in PROGRAMS)


def test_primitive_set_validation():
    with pytest.raises(TreeError):
        PrimitiveSet({"x": 2}, ("x",))
    with pytest.raises(TreeError):
        PrimitiveSet({"+": 2}, ())
    with pytest.raises(TreeError):
        PrimitiveSet({"=": 2}, ("x",))
    with pytest.raises(TreeError):
        PSET.validate(t("(+ x)"))


def test_random_trees_respect_depth():
    rng = substream(5, 0)
    for method in ("grow", "full"):
        for _ in range(50):
            tree = PSET.random_tree(rng, 3, method)
            assert tree.depth <= 3
            PSET.validate(tree)


@given(programs, programs)
def test_full_masks_return_parents(a, b):
    region = common_region(a, b)
    assert uniform_crossover_gp(a, b, full_mask(region, 1)) == a
    assert uniform_crossover_gp(a, b, full_mask(region, 0)) == b


@settings(max_examples=60)
@given(programs, programs, st.data())
def test_one_point_is_a_uniform_mask(a, b, data):
    region = common_region(a, b)
    point = data.draw(st.sampled_from(region.paths))
    assert uniform_crossover_gp(a, b, one_point_mask(region, point)) == one_point_crossover_gp(a, b, point)


@settings(max_examples=40)
@given(programs, programs)
def test_complementary_masks_swap_material(a, b):
    region = common_region(a, b)
    for mask in list(all_masks(region))[:16]:
        c = uniform_crossover_gp(a, b, mask)
        d = uniform_crossover_gp(b, a, complement(mask))
        assert c == d


def test_mask_must_cover_region():
    with pytest.raises(TreeError):
        uniform_crossover_gp(t("(+ x y)"), t("(+ y x)"), {(): 1})


def test_point_mutation_keeps_shape():
    rng = substream(2, 0)
    tree = t("(+ (- x) y)")
    for _ in range(20):
        assert shape_of(point_mutation_gp(tree, 0.5, rng, PSET)) == shape_of(tree)
    assert point_mutation_gp(tree, 0, rng, PSET) is tree
