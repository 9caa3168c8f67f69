import csv
import json
import math
import os
import shutil
from fractions import Fraction

import pytest

from liftbench.certificates import Quantity
from liftbench.config import ExperimentConfig
from liftbench.errors import UnknownRow
from liftbench.graph_core import prism, save_graph
from liftbench.harness import (
    BuiltinRegistry,
    default_registry,
    ideal_certificate,
    repro_figures,
    repro_table1,
    run,
    table1_row,
)


def test_registry_families():
    registry = default_registry()
    assert registry.get("complete_3").n == 4
    assert registry.get("complete_d", d=4).require_regular() == 4
    assert registry.get("prism(17)").n == 34
    assert registry.get("hkd(3, 4)").require_regular() == 4
    assert registry.get("uniform_complete(3,2,1)").loops.tolist() == [2, 2, 2]
    assert "fig1_d3" in registry.names()
    for name, bad in (("complete_40", None), ("complete_d", None), ("petersen", None)):
        with pytest.raises(ValueError):
            registry.get(name, d=bad)


def test_figures_load_and_verify():
    registry = BuiltinRegistry()
    assert set(registry.checksums()) == set(BuiltinRegistry.FIGURES)
    g = registry.figure("fig1_d3")
    assert g.n == 12
    assert g.require_regular() == 3
    assert g.has_loops()
    assert registry.figure("fig1_d3") is g
    with pytest.raises(ValueError):
        registry.figure("fig9_d3")


def test_checksum_mismatch(tmp_path):
    shutil.copy(os.path.join(BuiltinRegistry.DATA_DIR, "fig2_d4.txt"), tmp_path / "fig2_d4.txt")
    (tmp_path / "checksums.json").write_text(json.dumps({"fig2_d4": "0" * 64}))
    with pytest.raises(ValueError):
        BuiltinRegistry(data_dir=str(tmp_path)).figure("fig2_d4")
    assert BuiltinRegistry(data_dir=str(tmp_path), verify=False).figure("fig2_d4").n == 8


def test_resolve_prefers_files(tmp_path):
    path = str(tmp_path / "ring.json")
    save_graph(prism(6), path)
    assert default_registry().resolve(path) == prism(6)


def test_figure_reproduction():
    report = repro_figures()
    assert report.passed, report.table()
    names = {(c.figure, c.check) for c in report.checks}
    assert ("fig1_d3", "max_t_cut") in names
    assert ("fig4_d7", "chromatic") in names
    assert "FAIL" not in report.table()


def test_table_row_names():
    assert table1_row("max_cut_d3")[2] == 3
    assert table1_row("Colouring-d7")[2] == 7
    name, spec, d = table1_row("edge_expansion_d5")
    assert (spec.quantity, d) == (Quantity.EDGE_EXPANSION, 5)
    for bad in ("girth_d3", "domination", "domination_d2", "max_cut"):
        with pytest.raises(UnknownRow):
            table1_row(bad)


@pytest.mark.parametrize("quantity, d, expected", [
    (Quantity.MAX_T_CUT, 3, 0.9714),
    (Quantity.MAX_T_CUT, 4, 0.9330),
    (Quantity.INDEPENDENCE, 3, 0.4853),
    (Quantity.INDEPENDENCE, 4, 0.4641),
    (Quantity.CHROMATIC, 7, 3.0),
    (Quantity.DOMINATION, 4, 0.2),
    (Quantity.VERTEX_EXPANSION, 3, 1.5),
    (Quantity.EDGE_EXPANSION, 3, 2.0 - math.sqrt(2)),
])
def test_ideal_certificates(quantity, d, expected):
    assert ideal_certificate(quantity, d) == pytest.approx(expected, abs=5e-4)


def test_domination_row():
    report = repro_table1("domination_d4", trials=2)
    assert report.passed
    assert report.lower_bound == Fraction(1, 5)
    assert report.true_value == "Theta(log d / d)"
    assert report.to_dict()["passed"] is True


def test_max_cut_row_lower_bound():
    report = repro_table1("max_cut_d3", n=100, trials=2, seed=1)
    assert report.lower_bound == Fraction(17, 18)
    assert report.checks["lower_bound_exact"]
    assert report.checks["ideal_matches_table"]
    assert len(report.certificate_values) == 2
    with pytest.raises(ValueError):
        repro_table1("max_cut_d3", n=101)
    with pytest.raises(ValueError):
        repro_table1("max_cut_d3", n=100, m=3)


def test_run_noise_robustness(tmp_path):
    config = ExperimentConfig(experiment="noise_robustness", base="complete_3", m=10, epsilons=[0.0, 0.1],
                              level=2, out=str(tmp_path))
    artifacts = run(config)
    assert artifacts.passed
    with open(tmp_path / "noise_residuals.csv") as f:
        rows = list(csv.reader(f))
    assert rows[0][:3] == ["epsilon", "achieved", "residual_0"]
    assert len(rows) == 3
    with open(tmp_path / "noise_robustness_manifest.json") as f:
        manifest = json.load(f)
    assert manifest["config"]["m"] == 10
    assert manifest["meta"]["n"] == 40


def test_run_planted_sweep_on_a_non_ramanujan_base(tmp_path):
    config = ExperimentConfig(experiment="sdp_sweep", base="prism(17)", m=2, deltas=[0.05, 0.5], level=2,
                              out=str(tmp_path))
    artifacts = run(config)
    rows = artifacts.result["rows"]
    assert [r["passed"] for r in rows] == [True, True]
    assert artifacts.result["certificate"] is not None
    ## the certificate needs a deeper level than the sweep uses
    assert all(r["certificate_refutes"] is False for r in rows)
    with open(tmp_path / "sdp_sweep.json") as f:
        assert json.load(f)["witness"] == "planted"


def test_run_table_row_as_csv(tmp_path):
    config = ExperimentConfig(experiment="table1", row="domination_d4", trials=1, format="csv", out=str(tmp_path))
    artifacts = run(config)
    assert artifacts.passed
    with open(tmp_path / "table1.csv") as f:
        rows = list(csv.reader(f))
    assert rows[1][-1] == "PASS"


def test_run_detect_writes_roc(tmp_path):
    config = ExperimentConfig(experiment="detect", base="complete_3", m=10, trials=2, out=str(tmp_path))
    artifacts = run(config)
    with open(tmp_path / "roc.csv") as f:
        header = next(csv.reader(f))
    assert header == ["threshold", "typeI", "typeII"]
    assert artifacts.meta["n"] == 40


@pytest.mark.slow
def test_independence_row_at_desk_scale():
    report = repro_table1("independence_d3", n=2000, trials=2, seed=0)
    assert report.lower_bound == Fraction(11, 24)
    assert report.passed, report.checks


@pytest.mark.slow
def test_detection_separates_only_the_non_ramanujan_base(tmp_path):
    def total_error(base, m, epsilon=0.0):
        config = ExperimentConfig(experiment="detect", base=base, m=m, trials=40, epsilon=epsilon, threads=4,
                                  out=str(tmp_path / f"{base}_{epsilon}"))
        return run(config).result.total_error

    ## the lifts keep the base eigenvalue near -2.966, past 2 sqrt 2 + margin
    assert total_error("prism(17)", 30) <= 0.1
    assert total_error("prism(17)", 30, epsilon=0.005) <= 0.2
    assert total_error("fig1_d3", 84) >= 0.8
