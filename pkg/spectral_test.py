import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liftbench.errors import DepthCapExceeded, Disconnected, LayoutMissing
from liftbench.graph_core import SimpleGraph, complete_graph, cycle_graph, double_cover, prism, uniform_complete
from liftbench.spectral import (
    bad_vertices,
    chebyshev_eval,
    chebyshev_T,
    graph_spectrum,
    is_ramanujan,
    km_integrate,
    nb_coefficients,
    nb_matrices,
    nb_norm_sq,
    nb_polynomial,
    nb_values,
    self_avoiding_matrix,
    short_cycle_vertices,
    spectral_radius,
)


def test_complete_graph_spectrum():
    spectrum = graph_spectrum(complete_graph(3))
    assert spectrum.values[0] == pytest.approx(3.0)
    assert spectrum.nontrivial == pytest.approx([-1.0, -1.0, -1.0])
    assert spectrum.extreme == pytest.approx(1.0)
    assert spectral_radius(complete_graph(3)) == pytest.approx(1.0)


def test_deflated_spectrum_matches_dense_solver():
    g = prism(9)
    spectrum = graph_spectrum(g)
    dense = np.sort(np.linalg.eigvalsh(g.mult.astype(float)))
    assert np.sort(spectrum.values) == pytest.approx(dense, abs=1e-9)
    assert int(spectrum.trivial_mask.sum()) == 1


def test_bipartite_spectrum_flags_both_trivial_values():
    spectrum = graph_spectrum(cycle_graph(6), bipartite=True)
    assert int(spectrum.trivial_mask.sum()) == 2
    assert sorted(spectrum.values[spectrum.trivial_mask].tolist()) == pytest.approx([-2.0, 2.0])
    with pytest.raises(LayoutMissing):
        graph_spectrum(cycle_graph(5), bipartite=True)


def test_spectral_radius_skips_minus_d_on_bipartite_graphs():
    assert spectral_radius(cycle_graph(6)) == pytest.approx(1.0)
    assert spectral_radius(cycle_graph(6), bipartite=False) == pytest.approx(2.0)
    assert spectral_radius(prism(4)) == pytest.approx(1.0)
    assert spectral_radius(cycle_graph(5)) == pytest.approx(2 * math.cos(math.pi / 5))


def test_disconnected_spectrum_raises():
    two_triangles = SimpleGraph.from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
    with pytest.raises(Disconnected):
        graph_spectrum(two_triangles)


def test_ramanujan_reports():
    report = is_ramanujan(complete_graph(3))
    assert report
    assert report.margin == pytest.approx(2.0 * math.sqrt(2) - 1.0)
    assert report.lambda_n == pytest.approx(-1.0)
    assert not is_ramanujan(prism(17))
    ## |a - b| <= 2 sqrt(d - 1) decides the uniform complete family
    assert is_ramanujan(uniform_complete(4, 2, 1))
    assert not is_ramanujan(uniform_complete(2, 0, 5))


def test_double_cover_of_ramanujan_base_is_bipartite_ramanujan():
    h = complete_graph(3)
    assert is_ramanujan(double_cover(h), bipartite=True)


def test_nb_matrices_count_paths_below_girth():
    g = prism(17)
    matrices = nb_matrices(g, 3)
    for s in range(4):
        assert np.array_equal(matrices[s], self_avoiding_matrix(g, s))
        assert matrices[s].sum(axis=1) == pytest.approx([nb_norm_sq(s, 3)] * g.n)


def test_self_avoiding_depth_cap():
    with pytest.raises(DepthCapExceeded):
        self_avoiding_matrix(prism(5), 9)


def test_nb_polynomial_agrees_with_recurrence():
    xs = np.linspace(-3.0, 3.0, 13)
    for s in range(7):
        p = nb_polynomial(s, 4)
        assert p.to_numpy()(xs) == pytest.approx(nb_values(xs, s, 4)[s])
    assert nb_polynomial(3, 3).coeffs == (0, -5, 0, 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=3, max_value=7), st.integers(min_value=0, max_value=5), st.integers(min_value=0, max_value=5))
def test_nb_polynomials_are_km_orthogonal(d, s, t):
    value = km_integrate(lambda x: nb_values(x, max(s, t), d)[s] * nb_values(x, max(s, t), d)[t], d)
    expected = nb_norm_sq(s, d) if s == t else 0.0
    assert value == pytest.approx(expected, abs=1e-7 * nb_norm_sq(max(s, t), d))


def test_nb_coefficients_recover_a_basis_polynomial():
    coeffs = nb_coefficients(lambda x: nb_values(x, 2, 3)[2], 3, 3)
    assert coeffs == pytest.approx([0.0, 0.0, 1.0, 0.0], abs=1e-8)


def test_chebyshev_inside_and_outside():
    xs = np.array([-2.5, -1.0, -0.3, 0.0, 0.7, 1.0, 1.8])
    for s in range(8):
        assert chebyshev_eval(s, xs) == pytest.approx(chebyshev_T(s)(xs), rel=1e-9, abs=1e-9)


def test_short_cycles_and_bad_vertices():
    assert short_cycle_vertices(cycle_graph(10), 4) == set()
    assert short_cycle_vertices(complete_graph(3), 3) == {0, 1, 2, 3}
    g = prism(17)
    assert bad_vertices(g, 0, 3) == frozenset()
    assert bad_vertices(g, 0, 4) == frozenset(range(34))
    ring = cycle_graph(12)
    assert bad_vertices(ring, 5, 12) == frozenset(range(12))
    with pytest.raises(ValueError):
        bad_vertices(ring, -1, 3)


def test_loops_and_parallel_edges_are_short_cycles():
    h = uniform_complete(3, 1, 1)
    assert short_cycle_vertices(h, 1) == {0, 1, 2}
