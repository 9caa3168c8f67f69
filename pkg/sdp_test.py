import math

import numpy as np
import pytest

from liftbench.ensembles import random_lift, sample_bipartite_regular, sample_regular
from liftbench.errors import KernelMomentFailure, RepairInfeasible
from liftbench.graph_core import complete_graph, cycle_graph, double_cover, prism
from liftbench.harness import default_registry
from liftbench.sdp import (
    WITNESS_MODES,
    PathStatsInstance,
    balance_factor,
    gram_repair,
    infeasibility_certificate,
    noise_residuals,
    null_witness,
    path_stats_check,
    planted_witness,
    symmetric_path_stats,
    window_basis,
)


def test_instance_validation():
    with pytest.raises(ValueError):
        PathStatsInstance(D=-1, delta=0.1, k=4, base_spectrum=[3, -1, -1, -1])
    with pytest.raises(ValueError):
        PathStatsInstance(D=2, delta=0.0, k=4, base_spectrum=[3, -1, -1, -1])
    with pytest.raises(ValueError):
        PathStatsInstance(D=2, delta=0.1, k=3, base_spectrum=[3, -1, -1, -1])
    with pytest.raises(ValueError):
        PathStatsInstance.from_base(complete_graph(3), 2, 0.1, bipartite=True)
    with pytest.raises(ValueError):
        PathStatsInstance.symmetric(3.5, 3, 4, 2, 0.1)
    with pytest.raises(ValueError):
        PathStatsInstance.symmetric(0.0, 3, 2, 2, 0.1, bipartite=True)


def test_instance_targets_of_complete_base():
    instance = PathStatsInstance.from_base(complete_graph(3), 3, 0.1)
    assert instance.d == 3
    assert instance.t0 == pytest.approx(0.75)
    assert instance.ramanujan
    ## only the triangles close up, six non-backtracking walks of length three per vertex
    assert instance.targets() == pytest.approx([1.0, 0.0, 0.0, 6.0], abs=1e-9)
    assert instance.nontrivial_targets()[0] == pytest.approx(0.75)


def test_prism_instance_is_not_ramanujan():
    instance = PathStatsInstance.from_base(prism(17), 2, 0.1)
    assert not instance.ramanujan
    assert len(instance.nontrivial) == 33


def test_bipartite_instance_drops_both_trivial_values():
    instance = PathStatsInstance.from_base(prism(4), 2, 0.1, bipartite=True)
    assert instance.t0 == pytest.approx(6 / 8)
    assert len(instance.nontrivial) == 6


def test_planted_witness_passes_on_a_lift():
    lift = random_lift(complete_graph(3), 10, seed=1)
    instance = PathStatsInstance.from_base(lift.base, 3, 0.05)
    report = path_stats_check(lift.graph, planted_witness(lift), instance, c0=0.0)
    assert report.passed
    for s in range(4):
        assert abs(report.by_name(f"moment_{s}").residual) <= 1e-8
    assert report.failed() == []


def test_path_stats_check_rejects_wrong_shapes():
    lift = random_lift(complete_graph(3), 3, seed=1)
    instance = PathStatsInstance.from_base(lift.base, 2, 0.1)
    with pytest.raises(ValueError):
        path_stats_check(lift.graph, np.eye(5), instance)
    with pytest.raises(ValueError):
        path_stats_check(cycle_graph(12), np.eye(12), instance)


def test_null_witness_is_feasible():
    g = sample_regular(40, 3, seed=6)
    instance = PathStatsInstance.from_base(complete_graph(3), 1, 1.0)
    witness = null_witness(g, instance)
    p = witness.matrix
    assert witness.log["mode"] in ("kernel", "lp", "window")
    assert np.diag(p) == pytest.approx(np.ones(40), abs=1e-8)
    assert p.sum() == pytest.approx(40 * 40 / 4, abs=1e-6)
    assert np.linalg.eigvalsh(p - np.ones((40, 40)) / 4)[0] >= -1e-7
    report = path_stats_check(g, witness, instance)
    assert report.passed, [c.name for c in report.failed()]
    assert witness.log["moment_residuals"] == pytest.approx([report.by_name("moment_1").residual], abs=1e-6)


def test_window_witness_meets_the_moment_windows():
    g = sample_regular(200, 3, seed=2)
    instance = PathStatsInstance.from_base(complete_graph(3), 3, 0.5)
    witness = null_witness(g, instance, mode="window")
    assert witness.log["mode"] == "window"
    assert witness.log["windows"] + (witness.log["projector_weight"] > 0) >= 1
    report = path_stats_check(g, witness, instance)
    assert report.passed, [c.name for c in report.failed()]


def test_bipartite_window_witness_keeps_the_sides_apart():
    g, layout = sample_bipartite_regular(120, 3, seed=3)
    instance = PathStatsInstance.from_base(double_cover(complete_graph(3)), 2, 0.5, bipartite=True)
    witness = null_witness(g, instance, mode="window")
    left, right = list(layout.left), list(layout.right)
    assert np.abs(witness.matrix[np.ix_(left, right)]).max() <= 1e-8
    report = path_stats_check(g, witness, instance)
    assert report.passed, [c.name for c in report.failed()]


def test_window_basis_pieces_have_unit_diagonal_and_kill_the_constants():
    g = sample_regular(60, 3, seed=1)
    basis = window_basis(g, 3)
    assert len(basis) == len(basis.factors) + 1
    assert basis.moments[:, 0] == pytest.approx(np.ones(len(basis)))
    for factor in basis.factors[:5] + basis.factors[-2:]:
        y = factor @ factor.T
        assert np.diag(y) == pytest.approx(np.ones(60), abs=1e-9)
        assert np.abs(y.sum(axis=1)).max() <= 1e-7
    assert np.diag(basis.projector) == pytest.approx(np.ones(60))
    theta, error = basis.fit(basis.moments[3], [1, 2, 3])
    assert error <= 1e-7
    assert theta.sum() == pytest.approx(1.0)


def test_balance_factor_gives_up_on_a_vanishing_row():
    basis = np.ones((3, 1)) / np.sqrt(3)
    with pytest.raises(RepairInfeasible):
        balance_factor(np.array([[1.0], [1.0], [1.0]]), basis)


def test_explicit_mode_never_returns_a_witness_outside_the_windows():
    g = sample_regular(1200, 3, seed=0)
    instance = PathStatsInstance.symmetric(2.0, 3, 12, 2, 0.1)
    with pytest.raises(RepairInfeasible, match="moment_"):
        null_witness(g, instance, mode="lp")
    try:
        witness = null_witness(g, instance)
    except (KernelMomentFailure, RepairInfeasible):
        return
    assert path_stats_check(g, witness, instance).passed


def test_no_witness_survives_a_certificate_on_a_ramanujan_graph():
    g = default_registry().get("fig1_d3")
    base = prism(17)
    cert = infeasibility_certificate(g, PathStatsInstance.from_base(base, 2, 0.1))
    assert cert.nonnegative_on_graph
    instance = PathStatsInstance.from_base(base, cert.S, cert.delta_star / 2)
    for mode in WITNESS_MODES:
        try:
            witness = null_witness(g, instance, mode=mode, c0=0.0)
        except (KernelMomentFailure, RepairInfeasible):
            continue
        assert not path_stats_check(g, witness, instance, c0=0.0).passed


def test_null_witness_rejects_bad_arguments():
    instance = PathStatsInstance.from_base(complete_graph(3), 1, 1.0)
    with pytest.raises(ValueError):
        null_witness(prism(5), instance, mode="magic")
    with pytest.raises(ValueError):
        null_witness(complete_graph(4), instance)


def test_gram_repair_fixes_norms_and_sum():
    rng = np.random.default_rng(3)
    rows = rng.normal(size=(9, 6))
    rows -= rows.mean(axis=0)
    out, info = gram_repair(rows, 0.5)
    assert np.einsum("ij,ij->i", out, out) == pytest.approx([0.5] * 9)
    assert np.abs(out.sum(axis=0)).max() <= 1e-8
    assert info["repaired"] >= 2


def test_gram_repair_needs_room():
    with pytest.raises(RepairInfeasible):
        gram_repair(np.array([[5.0], [-7.0], [2.0]]), 1.0)


def test_infeasibility_certificate_on_prism():
    instance = PathStatsInstance.from_base(prism(17), 2, 0.1)
    cert = infeasibility_certificate(None, instance)
    assert cert.S % 2 == 0
    assert cert.nontrivial_sum < 0
    assert cert.delta_star > 0
    ## 2 - T_S stays at least 1 on the bulk
    assert cert.bulk_minimum >= 1.0 - 1e-9
    assert cert.refutes(cert.delta_star / 2, 1000)
    assert not cert.refutes(2 * cert.delta_star, 1000)
    assert not cert.refutes(cert.delta_star / 2, 1000, level=cert.S - 1)
    assert cert.to_dict()["applies_at_level"] == cert.S


def test_ramanujan_instance_has_no_certificate():
    instance = PathStatsInstance.from_base(complete_graph(3), 2, 0.1)
    assert infeasibility_certificate(complete_graph(3), instance) is None


def test_certificate_defeats_every_candidate_below_delta_star():
    base = prism(17)
    cert = infeasibility_certificate(None, PathStatsInstance.from_base(base, 2, 0.1))
    assert cert.nonnegative_on_graph is None
    instance = PathStatsInstance.from_base(base, cert.S, cert.delta_star / 2)
    g = complete_graph(3)
    n, k = g.n, instance.k
    ## spread the diagonal over the nontrivial space of K4
    p = np.ones((n, n)) / k + ((k - 1) / k) * (n / (n - 1)) * (np.eye(n) - np.ones((n, n)) / n)
    assert np.diag(p) == pytest.approx(np.ones(n))
    report = path_stats_check(g, p, instance, c0=0.0)
    assert report.by_name("diagonal").passed
    assert report.by_name("psd").passed
    assert not report.passed


def test_symmetric_decisions():
    g = complete_graph(3)
    decided = symmetric_path_stats(g, 2.95, D=8, delta=1e-4, c0=0.0)
    assert decided.decision == "infeasible"
    assert decided.certificate.nonnegative_on_graph
    shallow = symmetric_path_stats(g, 2.95, D=2, delta=1e-4, c0=0.0)
    assert shallow.decision == "undecided"
    with pytest.raises(ValueError):
        symmetric_path_stats(g, -3.5, D=2, delta=0.1)


def test_noise_residuals_start_at_zero():
    lift = random_lift(complete_graph(3), 10, seed=1)
    rows = noise_residuals(lift, [0.0, 0.1], D=2, seed=0)
    assert len(rows) == 2
    assert rows[0].residuals == pytest.approx([0.0, 0.0, 0.0], abs=1e-8)
    assert len(rows[1].residuals) == 3
    assert 0.0 <= rows[1].achieved <= 0.1
    assert all(math.isfinite(s) for s in rows[1].slopes)


@pytest.mark.slow
def test_planted_fig1_lifts_pass_at_desk_scale():
    base = default_registry().get("fig1_d3")
    instance = PathStatsInstance.from_base(base, 3, 0.05)
    passed = 0
    for seed in range(10):
        lift = random_lift(base, 100, seed=seed)
        passed += path_stats_check(lift.graph, planted_witness(lift), instance).passed
    assert passed >= 9


@pytest.mark.slow
def test_null_witness_meets_the_fig1_spectrum_at_desk_scale():
    instance = PathStatsInstance.from_base(default_registry().get("fig1_d3"), 3, 0.1)
    passed = 0
    for seed in range(10):
        g = sample_regular(1200, 3, seed=seed)
        try:
            witness = null_witness(g, instance)
        except (KernelMomentFailure, RepairInfeasible):
            continue
        passed += path_stats_check(g, witness, instance).passed
    assert passed >= 8


@pytest.mark.slow
def test_prism_targets_have_no_null_witness_at_desk_scale():
    base = prism(17)
    refuted = 0
    for seed in range(10):
        g = sample_regular(1200, 3, seed=seed)
        cert = infeasibility_certificate(g, PathStatsInstance.from_base(base, 2, 0.1))
        assert cert.delta_star > 0
        instance = PathStatsInstance.from_base(base, cert.S, cert.delta_star / 2)
        try:
            witness = null_witness(g, instance, c0=0.0)
        except (KernelMomentFailure, RepairInfeasible):
            refuted += 1
            continue
        refuted += not path_stats_check(g, witness, instance, c0=0.0).passed
    assert refuted == 10
