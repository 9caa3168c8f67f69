from fractions import Fraction

import numpy as np
import pytest

from liftbench.ensembles import (
    LiftedGraph,
    NoiseSpec,
    apply_noise,
    derive_seed,
    detect_experiment,
    identity_adversary,
    random_lift,
    random_switching_adversary,
    sample_bipartite_regular,
    sample_regular,
)
from liftbench.errors import AdversaryViolation, MissingBase, OddFiberWithLoops, ParityViolation, RetryCapExceeded
from liftbench.graph_core import SimpleGraph, complete_graph, graph_distance, prism, uniform_complete
from liftbench.serial import parse_fraction


def test_sample_regular_is_simple_regular_and_seeded():
    g = sample_regular(20, 3, seed=1)
    assert g.n == 20
    assert g.require_regular() == 3
    assert g.is_simple()
    assert sample_regular(20, 3, seed=1) == g


def test_sample_regular_dense_path():
    g = sample_regular(16, 6, seed=5)
    assert g.require_regular() == 6
    assert g.is_simple()
    assert g.meta["sampler"]["method"] == "stub_repair"
    assert g.meta["sampler"]["uniform"] is False


def test_sample_regular_rejection_is_uniform_by_default():
    g = sample_regular(30, 4, seed=3)
    assert g.meta["sampler"]["method"] == "pairing"
    assert g.meta["sampler"]["uniform"] is True
    assert g.meta["sampler"]["attempts"] >= 1
    ## a forced uniform draw at high degree has almost no acceptance
    with pytest.raises(RetryCapExceeded):
        sample_regular(8, 6, seed=0, uniform=True, retry_cap=1)


def test_sample_regular_preconditions():
    with pytest.raises(ParityViolation):
        sample_regular(7, 3)
    with pytest.raises(ValueError):
        sample_regular(4, 4)


def test_sample_bipartite_regular():
    g, layout = sample_bipartite_regular(20, 3, seed=2)
    assert g.require_regular() == 3
    assert layout.left == tuple(range(10))
    side = layout.side_of()
    iu, ju = np.nonzero(g.mult)
    assert np.all(side[iu] != side[ju])
    with pytest.raises(ParityViolation):
        sample_bipartite_regular(9, 3)


def test_sample_bipartite_regular_flags_repaired_draws():
    g, _ = sample_bipartite_regular(20, 3, seed=2)
    assert g.meta["sampler"] == {"method": "matchings", "uniform": True, "attempts": g.meta["sampler"]["attempts"]}
    dense, layout = sample_bipartite_regular(20, 6, seed=4)
    assert dense.require_regular() == 6
    assert dense.meta["sampler"]["method"] == "matching_repair"
    assert dense.meta["sampler"]["uniform"] is False
    assert sample_bipartite_regular(20, 6, seed=4, uniform=False)[0] == dense


def test_derive_seed_streams():
    assert derive_seed(7, 3, 0) == derive_seed(7, 3, 0)
    assert len({derive_seed(7, 3, s) for s in range(4)}) == 4
    assert derive_seed(7, 3, 0) != derive_seed(7, 4, 0)


@pytest.mark.parametrize("base, m", [(complete_graph(3), 5), (uniform_complete(3, 2, 1), 6), (prism(5), 3)])
def test_lift_invariants(base, m):
    lift = random_lift(base, m, seed=11)
    assert lift.n == base.n * m
    assert lift.check_invariants()
    assert lift.graph.require_regular() == base.require_regular()
    assert lift.containment_residual() <= 1e-8
    assert lift.indicator().sum(axis=0).tolist() == [m] * base.n


def test_lift_fibers_and_vectors():
    lift = random_lift(complete_graph(3), 4, seed=0)
    assert lift.fiber(2).tolist() == [8, 9, 10, 11]
    assert lift.fiber_vector([1.0, 2.0, 3.0, 4.0])[5] == 2.0


def test_looped_base_needs_even_fibers():
    with pytest.raises(OddFiberWithLoops):
        random_lift(uniform_complete(3, 2, 1), 5)


def test_lift_dict_round_trip_checks_invariants():
    lift = random_lift(complete_graph(3), 3, seed=4)
    again = LiftedGraph.from_dict(lift.to_dict())
    assert again.graph == lift.graph
    assert again.m == 3
    bad = lift.to_dict()
    bad["sigma"] = [0] * lift.n
    with pytest.raises(ValueError):
        LiftedGraph.from_dict(bad)


def test_random_noise_stays_regular_and_close():
    g = sample_regular(40, 3, seed=3)
    out = apply_noise(g, NoiseSpec(0.1, "rand"), seed=4)
    meta = out.meta["noise"]
    assert out.require_regular() == 3
    assert out.is_simple()
    assert meta["deleted"] == 4
    assert parse_fraction(meta["delta"]) == graph_distance(g, out)
    assert graph_distance(g, out) <= Fraction(1, 10)


def test_zero_budget_noise_is_identity():
    g = sample_regular(10, 3, seed=3)
    out = apply_noise(g, NoiseSpec(0.05, "rand"), seed=1)
    assert out == g
    assert out.meta["noise"]["deleted"] == 0


def test_respectful_noise_keeps_fiber_pattern():
    lift = random_lift(complete_graph(3), 10, seed=6)
    with pytest.raises(MissingBase):
        apply_noise(lift.graph, NoiseSpec(0.1, "respectful_rand"))
    out = apply_noise(lift.graph, NoiseSpec(0.1, "respectful_rand"), base=lift, seed=7)
    for u, v in out.edges():
        assert lift.sigma[u] != lift.sigma[v]


def test_bipartite_noise_keeps_sides():
    g, layout = sample_bipartite_regular(30, 3, seed=8)
    out = apply_noise(g, NoiseSpec(0.2, "rand_bi"), seed=9)
    side = layout.side_of()
    for u, v in out.edges():
        assert side[u] != side[v]


def test_adversaries():
    g = sample_regular(30, 3, seed=12)
    same = apply_noise(g, NoiseSpec(0.1, "adversarial", adversary=identity_adversary), seed=0)
    assert graph_distance(g, same) == 0
    switched = apply_noise(g, NoiseSpec(0.2, "adversarial", adversary=random_switching_adversary), seed=0)
    assert switched.require_regular() == 3
    assert graph_distance(g, switched) <= Fraction(1, 5)

    def broken(target, epsilon, rng):
        return SimpleGraph.from_edges(30, [(0, 1)])

    with pytest.raises(AdversaryViolation):
        apply_noise(g, NoiseSpec(0.1, "adversarial", adversary=broken))


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec(0.1, "gaussian")
    with pytest.raises(ValueError):
        NoiseSpec(1.5)


def test_detect_experiment_is_thread_independent():
    base = prism(17)

    def null(seed):
        return sample_regular(136, 3, seed=seed)

    def planted(seed):
        return random_lift(base, 4, seed=seed)

    one = detect_experiment(null, planted, trials=4, seed=2, threads=1)
    two = detect_experiment(null, planted, trials=4, seed=2, threads=2)
    assert one.null_stats == two.null_stats
    assert one.planted_stats == two.planted_stats
    ## every lift keeps the base eigenvalue 2 cos(16 pi / 17) - 1
    assert one.type_II == 0.0
    rows = one.roc()
    assert all(0.0 <= t1 <= 1.0 and 0.0 <= t2 <= 1.0 for _, t1, t2 in rows)
    assert one.threshold == pytest.approx(2.0 * np.sqrt(2.0) + 0.05)
