from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liftbench.errors import DisconnectedInput, NotRegular, NotSymmetric, SizeMismatch, UnbalancedBipartition
from liftbench.graph_core import (
    Multigraph,
    SimpleGraph,
    complete_graph,
    cycle_graph,
    double_cover,
    find_bipartition,
    graph_distance,
    hkd,
    load_graph,
    prism,
    relabel,
    save_graph,
    uniform_complete,
)


def test_loops_count_once_in_degree():
    g = Multigraph([[1, 2], [2, 1]])
    assert g.degrees().tolist() == [3, 3]
    assert g.require_regular() == 3
    assert g.edge_weight_total() == Fraction(3)
    assert not g.is_simple()


def test_rejects_bad_matrices():
    with pytest.raises(NotSymmetric):
        Multigraph([[0, 1], [0, 0]])
    with pytest.raises(ValueError):
        Multigraph([[0, -1], [-1, 0]])
    with pytest.raises(ValueError):
        SimpleGraph([[1, 0], [0, 1]])
    with pytest.raises(ValueError):
        SimpleGraph([[0, 2], [2, 0]])


def test_irregular_graph_raises():
    path = SimpleGraph.from_edges(3, [(0, 1), (1, 2)])
    assert path.regular_degree() is None
    with pytest.raises(NotRegular):
        path.require_regular()


def test_from_edges_rejects_repeats():
    with pytest.raises(ValueError):
        SimpleGraph.from_edges(3, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        SimpleGraph.from_edges(3, [(1, 1)])


def test_bipartition_of_even_cycle():
    layout = find_bipartition(cycle_graph(6))
    assert layout.left == (0, 2, 4)
    assert layout.right == (1, 3, 5)
    assert layout.sign_vector().tolist() == [1, -1, 1, -1, 1, -1]
    projector = layout.signed_projector()
    assert projector[0, 1] == -1.0 and projector[0, 2] == 1.0


def test_bipartition_none_for_odd_cycle_and_loops():
    assert find_bipartition(cycle_graph(5)) is None
    assert find_bipartition(Multigraph([[1, 2], [2, 1]])) is None


def test_bipartition_errors():
    two_triangles = SimpleGraph.from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
    with pytest.raises(DisconnectedInput):
        find_bipartition(two_triangles)
    star = SimpleGraph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    with pytest.raises(UnbalancedBipartition):
        find_bipartition(star)


def test_builtin_families():
    assert complete_graph(3).require_regular() == 3
    assert complete_graph(3).n == 4
    h = hkd(3, 4)
    assert h.require_regular() == 4
    assert h.mult[0, 1] == 2
    with pytest.raises(ValueError):
        hkd(4, 4)
    u = uniform_complete(3, 2, 1)
    assert u.require_regular() == 4
    assert u.loops.tolist() == [2, 2, 2]
    p = prism(17)
    assert p.n == 34
    assert p.require_regular() == 3
    assert find_bipartition(p) is None


def test_double_cover_is_bipartite_and_regular():
    h = Multigraph([[1, 2], [2, 1]])
    cover = double_cover(h)
    assert cover.require_regular() == 3
    assert not cover.has_loops()
    assert find_bipartition(cover) is not None


def test_graph_distance():
    a = cycle_graph(6)
    b = SimpleGraph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)])
    assert graph_distance(a, b) == 0
    ## three edges traded for three others
    c = SimpleGraph.from_edges(6, [(0, 3), (1, 2), (2, 5), (3, 4), (4, 1), (5, 0)])
    assert graph_distance(a, c) == Fraction(6, 12)
    with pytest.raises(SizeMismatch):
        graph_distance(a, cycle_graph(5))


@settings(max_examples=30, deadline=None)
@given(st.permutations(list(range(8))))
def test_relabel_keeps_degrees_and_distance_zero_to_itself(perm):
    g = prism(4)
    h = relabel(g, perm)
    assert h.require_regular() == 3
    assert sorted(h.degrees().tolist()) == sorted(g.degrees().tolist())
    assert graph_distance(h, h) == 0
    assert int(h.mult.sum()) == int(g.mult.sum())


@pytest.mark.parametrize("fmt, ext", [("json", ".json"), ("csv", ".csv"), ("bin", ".bin")])
def test_save_and_load(tmp_path, fmt, ext):
    g = uniform_complete(4, 2, 1)
    path = str(tmp_path / f"graph{ext}")
    save_graph(g, path, fmt)
    loaded = load_graph(path)
    assert loaded == g
    assert loaded.digest() == g.digest()


def test_simple_graph_loads_back_simple(tmp_path):
    path = str(tmp_path / "ring.json")
    save_graph(cycle_graph(5), path)
    assert isinstance(load_graph(path), SimpleGraph)


def test_unknown_formats(tmp_path):
    with pytest.raises(ValueError):
        save_graph(cycle_graph(4), str(tmp_path / "x.xml"), "xml")
    with pytest.raises(ValueError):
        load_graph(str(tmp_path / "x.xml"))


def test_networkx_view_keeps_multiplicity():
    g = Multigraph([[1, 2], [2, 1]])
    nxg = g.to_networkx()
    assert nxg.number_of_edges() == 4
    assert np.array_equal(np.array(g.adjacency_lists()[0]), np.array([0, 1, 1]))
