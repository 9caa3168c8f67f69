import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from liftbench.certificates import (
    Direction,
    Quantity,
    certify,
    hoffman_chromatic,
    hoffman_independence,
    hoffman_max_t_cut,
    kahale_bound,
    quantity_from_name,
    smallest_eigenvalue,
    trivial_domination,
)
from liftbench.graph_core import complete_graph, cycle_graph, prism


def _edge(d):
    return -2.0 * math.sqrt(d - 1)


@pytest.mark.parametrize("d, expected", [(3, 0.9714), (4, 0.9330)])
def test_cut_certificate_at_ramanujan_edge(d, expected):
    assert hoffman_max_t_cut(d=d, lambda_n=_edge(d)).bound == pytest.approx(expected, abs=5e-4)


@pytest.mark.parametrize("d, expected", [(3, 0.4853), (4, 0.4641)])
def test_independence_certificate_at_ramanujan_edge(d, expected):
    assert hoffman_independence(d=d, lambda_n=_edge(d)).bound == pytest.approx(expected, abs=5e-4)


def test_chromatic_certificate_at_ramanujan_edge():
    result = hoffman_chromatic(d=7, lambda_n=_edge(7))
    assert result.bound == 3.0
    assert result.exact == Fraction(3)
    assert result.direction is Direction.LOWER


def test_hoffman_is_tight_on_complete_graph():
    k4 = complete_graph(3)
    assert smallest_eigenvalue(k4) == pytest.approx(-1.0)
    assert hoffman_max_t_cut(k4).bound == pytest.approx(2 / 3)
    assert hoffman_independence(k4).bound == pytest.approx(1 / 4)
    assert hoffman_chromatic(k4).bound == 4.0


def test_bipartite_deflation_drops_minus_d():
    ring = cycle_graph(6)
    assert hoffman_independence(ring).bound == pytest.approx(0.5)
    assert hoffman_independence(ring, bipartite=True).bound == pytest.approx(1 / 3)
    ## odd cycles have no -d to drop
    assert smallest_eigenvalue(cycle_graph(5), bipartite=True) == pytest.approx(smallest_eigenvalue(cycle_graph(5)))


def test_admits():
    cert = hoffman_max_t_cut(d=3, lambda_n=_edge(3))
    assert cert.admits(Fraction(17, 18))
    assert not cert.admits(1.0)
    assert trivial_domination(3).admits(Fraction(1, 4))
    assert not trivial_domination(3).admits(Fraction(1, 5))


def test_kahale_leading_terms():
    vertex = kahale_bound(epsilon=0.01, mode="vertex", d=3, lambda_2=0.0)
    assert vertex.bound == pytest.approx(1.5)
    assert vertex.inputs["lambda_tilde"] == pytest.approx(2.0 * math.sqrt(2))
    edge = kahale_bound(epsilon=0.01, mode="edge", d=3, lambda_2=0.0)
    assert edge.bound == pytest.approx(2.0 - math.sqrt(2))
    assert edge.correction is not None
    with pytest.raises(ValueError):
        kahale_bound(epsilon=1.5, d=3, lambda_2=0.0)
    with pytest.raises(ValueError):
        kahale_bound(epsilon=0.1, mode="face", d=3, lambda_2=0.0)


def test_kahale_grows_worse_with_lambda_2():
    low = kahale_bound(prism(9), epsilon=0.1, mode="vertex")
    high = kahale_bound(epsilon=0.1, mode="vertex", d=3, lambda_2=2.99)
    assert high.bound <= low.bound


def test_argument_errors():
    with pytest.raises(ValueError):
        hoffman_max_t_cut(d=3, lambda_n=-1.0, t=1)
    with pytest.raises(ValueError):
        hoffman_max_t_cut(d=3)
    with pytest.raises(ValueError):
        hoffman_chromatic(d=3, lambda_n=0.0)
    with pytest.raises(ValueError):
        trivial_domination(0)


def test_quantity_names_and_dispatch():
    assert quantity_from_name("maxcut") is Quantity.MAX_T_CUT
    assert quantity_from_name("Colouring") is Quantity.CHROMATIC
    assert quantity_from_name("vertex-expansion") is Quantity.VERTEX_EXPANSION
    with pytest.raises(ValueError):
        quantity_from_name("girth")
    result = certify("dom", complete_graph(4))
    assert result.exact == Fraction(1, 5)
    assert str(certify(Quantity.EDGE_EXPANSION, prism(9)).quantity) == "edge_expansion"


@given(st.integers(min_value=3, max_value=12), st.floats(min_value=0.0, max_value=1.0), st.integers(min_value=2, max_value=5))
def test_cut_certificate_range_and_monotonicity(d, fraction, t):
    lam = -fraction * d
    bound = hoffman_max_t_cut(d=d, lambda_n=lam, t=t).bound
    assert (t - 1) / t - 1e-12 <= bound <= 2 * (t - 1) / t + 1e-12
    assert hoffman_max_t_cut(d=d, lambda_n=lam - 0.1, t=t).bound >= bound
    assert hoffman_independence(d=d, lambda_n=lam).bound <= 0.5 + 1e-12
