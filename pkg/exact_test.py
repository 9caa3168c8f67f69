from fractions import Fraction

import pytest

from liftbench.certificates import Quantity
from liftbench.ensembles import NoiseSpec, apply_noise, random_lift, sample_regular
from liftbench.errors import BaseMismatch, SizeCapExceeded
from liftbench.exact import (
    chromatic_exact,
    cut_value,
    domination_exact,
    independence_exact,
    is_independent,
    lift_assignment,
    max_t_cut_exact,
    modified_independence,
    reassign_after_noise,
    small_set_expansion_exact,
    solve,
)
from liftbench.graph_core import Multigraph, complete_graph, cycle_graph, prism


@pytest.mark.parametrize("g, cut, ind, chi, dom", [
    (complete_graph(3), Fraction(2, 3), Fraction(1, 4), 4, Fraction(1, 4)),
    (cycle_graph(5), Fraction(4, 5), Fraction(2, 5), 3, Fraction(2, 5)),
    (prism(4), Fraction(1), Fraction(1, 2), 2, Fraction(1, 4)),
])
def test_small_graph_values(g, cut, ind, chi, dom):
    assert max_t_cut_exact(g).value == cut
    assert independence_exact(g).value == ind
    assert chromatic_exact(g).value == chi
    assert domination_exact(g).value == dom


def test_max_cut_threads_agree():
    g = prism(7)
    assert max_t_cut_exact(g, threads=1).value == max_t_cut_exact(g, threads=3).value


def test_max_three_cut():
    result = max_t_cut_exact(complete_graph(3), t=3)
    assert result.value == Fraction(5, 6)
    assert cut_value(complete_graph(3), result.witness) == Fraction(5, 6)


def test_loops_are_never_cut():
    h = Multigraph([[1, 2], [2, 1]])
    ## four of six degree units sit on the parallel pair
    assert max_t_cut_exact(h).value == Fraction(2, 3)


def test_modified_independence_halves_looped_vertices():
    h = Multigraph([[1, 2], [2, 1]])
    result = modified_independence(h)
    assert result.quantity is Quantity.MODIFIED_INDEPENDENCE
    assert result.value == Fraction(1, 4)


def test_chromatic_rejects_loops():
    with pytest.raises(ValueError):
        chromatic_exact(Multigraph([[1, 2], [2, 1]]))


def test_size_caps():
    with pytest.raises(SizeCapExceeded):
        max_t_cut_exact(prism(15))
    with pytest.raises(SizeCapExceeded):
        small_set_expansion_exact(prism(20), 0.5)


@pytest.mark.parametrize("g, eps", [(cycle_graph(12), 0.25), (prism(5), 0.3)])
@pytest.mark.parametrize("mode", ["vertex", "edge"])
def test_expansion_search_matches_full_enumeration(g, eps, mode):
    fast = small_set_expansion_exact(g, eps, mode)
    full = small_set_expansion_exact(g, eps, mode, full=True)
    assert fast.value == full.value


def test_expansion_values_on_a_ring():
    ## every other vertex: four neighbours for three vertices
    assert small_set_expansion_exact(cycle_graph(12), 0.25, "vertex").value == Fraction(4, 3)
    assert small_set_expansion_exact(cycle_graph(12), 0.25, "edge").value == Fraction(2, 3)
    assert small_set_expansion_exact(cycle_graph(12), 0.25, "vertex", include_self=False).value == Fraction(2, 3)
    with pytest.raises(ValueError):
        small_set_expansion_exact(cycle_graph(12), 0.01)


@pytest.mark.parametrize("quantity", [Quantity.MAX_T_CUT, Quantity.CHROMATIC, Quantity.INDEPENDENCE, Quantity.DOMINATION])
def test_lifted_witness_keeps_base_value(quantity):
    base = complete_graph(3)
    result = solve(quantity, base)
    lift = random_lift(base, 3, seed=21)
    lifted = lift_assignment(result, lift)
    assert lifted.value == result.value
    assert lifted.graph_digest == lift.graph.digest()


def test_lifted_expansion_keeps_base_value():
    base = prism(5)
    result = solve(Quantity.EDGE_EXPANSION, base, epsilon=0.3)
    lift = random_lift(base, 2, seed=3)
    assert lift_assignment(result, lift).value == result.value


def test_lifted_modified_independence():
    h = Multigraph([[1, 2], [2, 1]])
    lift = random_lift(h, 4, seed=5)
    lifted = lift_assignment(modified_independence(h), lift)
    assert lifted.quantity is Quantity.INDEPENDENCE
    assert lifted.value == Fraction(1, 4)
    assert is_independent(lift.graph, lifted.witness)


def test_lift_of_other_base_is_rejected():
    result = solve(Quantity.INDEPENDENCE, complete_graph(3))
    with pytest.raises(BaseMismatch):
        lift_assignment(result, random_lift(prism(3), 2, seed=0))


def test_reassignment_after_noise_stays_feasible():
    base = complete_graph(3)
    lift = random_lift(base, 10, seed=8)
    lifted = lift_assignment(solve(Quantity.INDEPENDENCE, base), lift)
    noisy = apply_noise(lift.graph, NoiseSpec(0.05, "rand"), seed=9)
    patched = reassign_after_noise(lifted, noisy)
    assert is_independent(noisy, patched.witness)
    ## each of the floor(eps n) new edges costs at most one vertex
    assert lifted.value - patched.value <= Fraction(2, lift.n)


def test_cut_of_random_graph_is_at_least_half():
    g = sample_regular(18, 3, seed=4)
    cut = solve(Quantity.MAX_T_CUT, g)
    assert cut.value <= 1
    assert Fraction(1, 2) <= cut.value
