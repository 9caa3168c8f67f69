## TITLE: liftbench experiment harness
## CC: okzyrox
## LICENSE: MIT

import csv
import json
import logging
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .certificates import Quantity, certify, hoffman_chromatic, hoffman_independence, hoffman_max_t_cut, kahale_bound, trivial_domination
from .config import ExperimentConfig
from .errors import KernelMomentFailure, RepairInfeasible, UnknownRow
from .ensembles import (
    NoiseSpec,
    apply_noise,
    derive_seed,
    detect_experiment,
    random_lift,
    sample_bipartite_regular,
    sample_regular,
)
from .exact import lift_assignment, solve
from .graph_core import Multigraph, complete_graph, hkd, load_graph, prism, uniform_complete
from .sdp import (
    PathStatsInstance,
    infeasibility_certificate,
    noise_residuals,
    null_witness,
    path_stats_check,
    planted_witness,
    slack_for,
)
from .serial import Record, matrix_digest
from .spectral import is_ramanujan

logger = logging.getLogger(__name__)

COMPLETE_CAP = 16
TABLE1_TOL = 5e-3


## built-in graphs

class BuiltinRegistry:
    DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")
    FIGURES = ("fig1_d3", "fig2_d4", "fig3_d4", "fig4_d7")

    _PATTERNS = (
        ("complete", re.compile(r"complete_(\d+)")),
        ("hkd", re.compile(r"hkd\((\d+),\s*(\d+)\)")),
        ("prism", re.compile(r"prism\((\d+)\)")),
        ("uniform_complete", re.compile(r"uniform_complete\((\d+),\s*(\d+),\s*(\d+)\)")),
    )

    def __init__(self, data_dir: Optional[str] = None, verify: bool = True):
        self.data_dir = data_dir or self.DATA_DIR
        self.verify = verify
        self._cache: Dict[str, Multigraph] = {}
        self._checksums: Optional[Dict[str, str]] = None

    def checksums(self) -> Dict[str, str]:
        if self._checksums is None:
            with open(os.path.join(self.data_dir, "checksums.json"), "r") as f:
                self._checksums = json.load(f)
        return self._checksums

    def figure(self, name: str) -> Multigraph:
        if name not in self.FIGURES:
            raise ValueError(f"Unknown figure graph {name!r}, expected one of {', '.join(self.FIGURES)}")
        if name in self._cache:
            return self._cache[name]
        g = load_graph(os.path.join(self.data_dir, f"{name}.txt"))
        if self.verify:
            digest = matrix_digest(g.mult)
            if digest != self.checksums()[name]:
                raise ValueError(f"Checksum mismatch for {name}: {digest}")
            g.require_regular()
        self._cache[name] = g
        return g

    def get(self, name: str, d: Optional[int] = None) -> Multigraph:
        """built-in by name: fig*, complete_<d> (or complete_d with d given), hkd(k,d), prism(k), uniform_complete(k,a,b)"""
        name = name.strip()
        if name in self.FIGURES:
            return self.figure(name)
        if name == "complete_d":
            if d is None:
                raise ValueError("complete_d needs a degree")
            name = f"complete_{d}"
        for kind, pattern in self._PATTERNS:
            found = pattern.fullmatch(name)
            if found is None:
                continue
            args = [int(x) for x in found.groups()]
            match kind:
                case "complete":
                    if not 1 <= args[0] <= COMPLETE_CAP:
                        raise ValueError(f"complete_<d> is registered for 1 <= d <= {COMPLETE_CAP}, got {args[0]}")
                    return complete_graph(args[0])
                case "hkd": return hkd(*args)
                case "prism": return prism(*args)
                case "uniform_complete": return uniform_complete(*args)
        raise ValueError(f"Unknown built-in graph {name!r}")

    def resolve(self, name_or_path: str, d: Optional[int] = None) -> Multigraph:
        if os.path.isfile(name_or_path):
            return load_graph(name_or_path)
        return self.get(name_or_path, d=d)

    def names(self) -> List[str]:
        return list(self.FIGURES) + ["complete_<d>", "hkd(k,d)", "prism(k)", "uniform_complete(k,a,b)"]


_default_registry: Optional[BuiltinRegistry] = None


def default_registry() -> BuiltinRegistry:
    global _default_registry
    if _default_registry is None:
        _default_registry = BuiltinRegistry()
    return _default_registry


## figures

@dataclass(frozen=True)
class FigureClaim:
    d: int
    band: Tuple[float, float]
    values: Tuple[Tuple[Quantity, Fraction], ...]


FIGURE_CLAIMS = {
    "fig1_d3": FigureClaim(3, (2.824, 2.826), ((Quantity.MAX_T_CUT, Fraction(17, 18)),
                                                 (Quantity.MODIFIED_INDEPENDENCE, Fraction(11, 24)))),
    "fig2_d4": FigureClaim(4, (3.235, 3.237), ((Quantity.MAX_T_CUT, Fraction(7, 8)),)),
    "fig3_d4": FigureClaim(4, (3.0 - 1e-9, 3.0 + 1e-9), ((Quantity.INDEPENDENCE, Fraction(3, 7)),)),
    "fig4_d7": FigureClaim(7, (3.790, 3.792), ((Quantity.CHROMATIC, Fraction(3)),)),
}


@dataclass
class FigureCheck(Record):
    figure: str
    check: str
    value: Any
    expected: Any
    passed: bool


@dataclass
class FiguresReport(Record):
    passed: bool
    checks: List[FigureCheck] = field(default_factory=list)

    def table(self) -> str:
        lines = [f"{'figure':<8} {'check':<24} {'value':<22} {'expected':<22} result"]
        for c in self.checks:
            lines.append(f"{c.figure:<8} {c.check:<24} {str(c.value):<22} {str(c.expected):<22} "
                         f"{'PASS' if c.passed else 'FAIL'}")
        return "\n".join(lines)


def _figure_checks(name: str, g: Multigraph, claim: FigureClaim, threads: int) -> List[FigureCheck]:
    checks = [FigureCheck(name, "regular", g.regular_degree(), claim.d, g.regular_degree() == claim.d)]
    report = is_ramanujan(g)
    checks.append(FigureCheck(name, "ramanujan", round(report.margin, 6), ">= 0", bool(report)))
    low, high = claim.band
    checks.append(FigureCheck(name, "extreme", round(report.extreme, 6), f"[{low}, {high}]",
                              low <= report.extreme <= high))
    for quantity, expected in claim.values:
        result = solve(quantity, g, threads=threads)
        checks.append(FigureCheck(name, str(quantity), result.value, expected, result.value == expected))
    return checks


def repro_figures(registry: Optional[BuiltinRegistry] = None, threads: int = 1) -> FiguresReport:
    """regularity, Ramanujan margin and the captioned combinatorial value of every figure graph"""
    registry = registry or default_registry()
    checks = []
    for name, claim in FIGURE_CLAIMS.items():
        checks.extend(_figure_checks(name, registry.figure(name), claim, threads))
    passed = all(c.passed for c in checks)
    logger.info("figure reproduction: %d checks, %s", len(checks), "PASS" if passed else "FAIL")
    return FiguresReport(passed, checks)


## table of applications

@dataclass(frozen=True)
class Table1Row:
    quantity: Quantity
    d: Optional[int]
    ## literature value, report only
    true_value: str
    base: Optional[str] = None
    base_quantity: Optional[Quantity] = None
    lower_bound: Optional[Fraction] = None
    certificate: Optional[float] = None


TABLE1 = {
    "max_cut_d3": Table1Row(Quantity.MAX_T_CUT, 3, "[0.906, 0.925]", "fig1_d3", Quantity.MAX_T_CUT, Fraction(17, 18), 0.971),
    "max_cut_d4": Table1Row(Quantity.MAX_T_CUT, 4, "[0.833, 0.869]", "fig2_d4", Quantity.MAX_T_CUT, Fraction(7, 8), 0.933),
    "independence_d3": Table1Row(Quantity.INDEPENDENCE, 3, "[0.445, 0.451]", "fig1_d3", Quantity.MODIFIED_INDEPENDENCE,
                                 Fraction(11, 24), 0.485),
    "independence_d4": Table1Row(Quantity.INDEPENDENCE, 4, "[0.404, 0.412]", "fig3_d4", Quantity.INDEPENDENCE,
                                 Fraction(3, 7), 0.464),
    "colouring_d7": Table1Row(Quantity.CHROMATIC, 7, "{4, 5, 6}", "fig4_d7", Quantity.CHROMATIC, Fraction(3), 3.0),
    ## d is filled in from the row name
    "domination": Table1Row(Quantity.DOMINATION, None, "Theta(log d / d)", "complete_d", Quantity.DOMINATION),
    "vertex_expansion": Table1Row(Quantity.VERTEX_EXPANSION, None, "d - 1"),
    "edge_expansion": Table1Row(Quantity.EDGE_EXPANSION, None, "d - 2"),
}

_ROW_RE = re.compile(r"(?P<family>[a-z_]+?)(?:_d(?P<d>\d+))?")


def table1_row(name: str) -> Tuple[str, Table1Row, int]:
    name = name.lower().replace("-", "_")
    if name in TABLE1 and TABLE1[name].d is not None:
        return name, TABLE1[name], TABLE1[name].d
    found = _ROW_RE.fullmatch(name)
    if found is None or found["d"] is None or found["family"] not in TABLE1 or TABLE1[found["family"]].d is not None:
        known = [k for k, row in TABLE1.items() if row.d is not None] + ["domination_d<d>", "vertex_expansion_d<d>",
                                                                           "edge_expansion_d<d>"]
        raise UnknownRow(f"Unknown table row {name!r}, expected one of {', '.join(known)}")
    d = int(found["d"])
    if d < 3:
        raise UnknownRow(f"Table rows need d >= 3, got {d}")
    return name, TABLE1[found["family"]], d


def ideal_certificate(quantity: Quantity, d: int, epsilon: float = 0.01) -> float:
    """certificate value at lambda_n = -2 sqrt(d - 1) (lambda_2 = 2 sqrt(d - 1) for expansion)"""
    edge = 2.0 * math.sqrt(d - 1)
    match quantity:
        case Quantity.MAX_T_CUT: return hoffman_max_t_cut(d=d, lambda_n=-edge).bound
        case Quantity.INDEPENDENCE: return hoffman_independence(d=d, lambda_n=-edge).bound
        case Quantity.CHROMATIC: return hoffman_chromatic(d=d, lambda_n=-edge).bound
        case Quantity.DOMINATION: return trivial_domination(d).bound
        case Quantity.VERTEX_EXPANSION: return kahale_bound(epsilon=epsilon, mode="vertex", d=d, lambda_2=edge).bound
        case Quantity.EDGE_EXPANSION: return kahale_bound(epsilon=epsilon, mode="edge", d=d, lambda_2=edge).bound
    raise ValueError(f"No certificate for {quantity}")


@dataclass
class Table1Report(Record):
    row: str
    quantity: Quantity
    d: int
    true_value: str
    lower_bound: Optional[Fraction]
    lower_bound_source: Optional[str]
    certificate_ideal: float
    certificate_mean: float
    certificate_values: List[float]
    n: int
    trials: int
    seed: int
    tolerance: float
    checks: Dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> Dict[str, Any]:
        out = super().to_dict()
        out["passed"] = self.passed
        return out


def _lifted_lower_bound(spec: Table1Row, d: int, registry: BuiltinRegistry, m: int, seed: int,
                        threads: int) -> Tuple[Optional[Fraction], Optional[str]]:
    if spec.base is None:
        return None, None
    base = registry.get(spec.base, d=d)
    base_result = solve(spec.base_quantity, base, threads=threads)
    lift = random_lift(base, m, seed=derive_seed(seed, 0, stream=3))
    lifted = lift_assignment(base_result, lift)
    return lifted.value, f"{base.name} lifted with m = {m}"


def repro_table1(row: str, n: int = 2000, trials: int = 5, seed: int = 0, threads: int = 1, m: int = 10,
                 epsilon: float = 0.01, tol: float = TABLE1_TOL,
                 registry: Optional[BuiltinRegistry] = None) -> Table1Report:
    """
    certificate column on sampled d-regular graphs next to the lifted witness value of the row's
    base graph. the true value column is a literature citation and never computed
    """
    name, spec, d = table1_row(row)
    if (n * d) % 2:
        raise ValueError(f"n * d = {n * d} must be even")
    if m % 2:
        raise ValueError(f"Lift size m = {m} must be even for looped bases")
    registry = registry or default_registry()
    logger.info("table row %s: d=%d, n=%d, %d trials, seed %d", name, d, n, trials, seed)

    def one_trial(t: int) -> float:
        if spec.quantity is Quantity.DOMINATION:
            return trivial_domination(d).bound
        g = sample_regular(n, d, seed=derive_seed(seed, t, 0))
        return certify(spec.quantity, g, epsilon=epsilon).bound

    with ThreadPoolExecutor(max_workers=threads) as pool:
        values = list(pool.map(one_trial, range(trials)))
    ideal = ideal_certificate(spec.quantity, d, epsilon)
    mean = float(np.mean(values))
    lower, source = _lifted_lower_bound(spec, d, registry, m, seed, threads)

    checks = {"certificate_near_ideal": abs(mean - ideal) <= tol}
    if spec.certificate is not None:
        checks["ideal_matches_table"] = abs(ideal - spec.certificate) <= 5e-4
    if lower is not None:
        expected = spec.lower_bound if spec.lower_bound is not None else Fraction(1, d + 1)
        checks["lower_bound_exact"] = lower == expected
        if spec.quantity in (Quantity.MAX_T_CUT, Quantity.INDEPENDENCE):
            checks["lower_below_certificate"] = float(lower) <= ideal + tol
    return Table1Report(name, spec.quantity, d, spec.true_value, lower, source, ideal, mean, values, n, trials, seed,
                        tol, checks)


## experiment runner

@dataclass
class Artifacts(Record):
    experiment: str
    passed: bool
    files: List[str] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)
    result: Any = None


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _write_report(config: ExperimentConfig, stem: str, record: Any, header: Sequence[str],
                  rows: Sequence[Sequence[Any]]) -> str:
    if config.format == "csv":
        path = os.path.join(config.out, f"{stem}.csv")
        _write_csv(path, header, rows)
    else:
        path = os.path.join(config.out, f"{stem}.json")
        with open(path, "w") as f:
            json.dump(Record._json_serializer(record), f, indent=4)
    return path


def _lift_size(config: ExperimentConfig, base: Multigraph) -> int:
    if config.m is not None:
        return config.m
    if config.n % base.n:
        raise ValueError(f"Field n: {config.n} is not a multiple of the base size {base.n}")
    return config.n // base.n


def planted_graph(base: Multigraph, m: int, seed: int, epsilon: float = 0.0, mode: str = "rand"):
    """planted side of a detection trial, noise seeded from the lift seed on stream 2"""
    lift = random_lift(base, m, seed=seed)
    if epsilon > 0:
        return apply_noise(lift.graph, NoiseSpec(epsilon, mode), base=lift, seed=derive_seed(seed, 0, stream=2))
    return lift


def _run_detect(config: ExperimentConfig, registry: BuiltinRegistry) -> Artifacts:
    base = registry.resolve(config.base, d=config.d)
    d = base.require_regular()
    m = _lift_size(config, base)
    n = base.n * m

    def null_sampler(s: int):
        if config.bipartite:
            return sample_bipartite_regular(n, d, seed=s)[0]
        return sample_regular(n, d, seed=s)

    def planted_sampler(s: int):
        return planted_graph(base, m, s, config.epsilon, config.mode)

    result = detect_experiment(null_sampler, planted_sampler, trials=config.trials, seed=config.seed,
                               threads=config.threads, margin=config.margin)
    roc_path = os.path.join(config.out, "roc.csv")
    _write_csv(roc_path, ("threshold", "typeI", "typeII"), result.roc())
    report = _write_report(config, "detect", result,
                           ("threshold", "type_I", "type_II", "trials", "seed"),
                           [(result.threshold, result.type_I, result.type_II, result.trials, result.seed)])
    meta = {"seed": config.seed, "trials": config.trials, "tolerance": config.margin, "n": n, "d": d,
            "epsilon": config.epsilon, "mode": config.mode, "base": base.name}
    return Artifacts("detect", True, [roc_path, report], meta, result)


def _sweep_row(g: Multigraph, base: Multigraph, witness_fn, config: ExperimentConfig, delta: float) -> Dict[str, Any]:
    instance = PathStatsInstance.from_base(base, config.level, delta, bipartite=config.bipartite)
    try:
        witness = witness_fn(instance)
    except (KernelMomentFailure, RepairInfeasible) as e:
        logger.info("no witness at delta %g: %s", delta, e)
        return {"delta": delta, "passed": False, "first_failure": None, "error": str(e)}
    report = path_stats_check(g, witness, instance, threads=config.threads)
    failed = report.failed()
    return {"delta": delta, "passed": report.passed, "first_failure": failed[0].name if failed else None,
            "error": None, "report": report}


def _run_sdp_sweep(config: ExperimentConfig, registry: BuiltinRegistry) -> Artifacts:
    base = registry.resolve(config.base, d=config.d)
    d = base.require_regular()
    deltas = config.deltas or [config.delta]
    if config.m is not None:
        lift = random_lift(base, config.m, seed=config.seed)
        g = lift.graph
        planted = planted_witness(lift)
        witness_fn = lambda instance: planted
        source = "planted"
    else:
        if config.null_base:
            g = registry.resolve(config.null_base, d=d)
        elif config.n is None:
            raise ValueError("Fields n/m/null_base: sdp_sweep needs a lift size, a null size or a null graph")
        elif config.bipartite:
            g = sample_bipartite_regular(config.n, d, seed=config.seed)[0]
        else:
            g = sample_regular(config.n, d, seed=config.seed)
        witness_fn = lambda instance: null_witness(g, instance, mode=config.witness, margin=config.margin)
        source = f"null_{config.witness}"

    rows = [_sweep_row(g, base, witness_fn, config, delta) for delta in deltas]
    certificate = None
    if not is_ramanujan(base, bipartite=config.bipartite):
        certificate = infeasibility_certificate(g, PathStatsInstance.from_base(base, config.level, deltas[0],
                                                                               bipartite=config.bipartite))
    slack = slack_for(g.n, 1.0)
    for row in rows:
        row["certificate_refutes"] = None if certificate is None else \
            bool(certificate.refutes(row["delta"], g.n, slack, level=config.level))
    table = [(r["delta"], "PASS" if r["passed"] else "FAIL", r["first_failure"], r["certificate_refutes"]) for r in rows]
    result = {"graph": g.name, "n": g.n, "base": base.name, "witness": source, "rows": rows, "certificate": certificate}
    report = _write_report(config, "sdp_sweep", result, ("delta", "result", "first_failure", "certificate_refutes"),
                           table)
    meta = {"seed": config.seed, "trials": 1, "tolerance": {"c0": 1.0, "level": config.level}, "n": g.n, "d": d}
    return Artifacts("sdp_sweep", True, [report], meta, result)


def _run_noise_robustness(config: ExperimentConfig, registry: BuiltinRegistry) -> Artifacts:
    base = registry.resolve(config.base, d=config.d)
    lift = random_lift(base, _lift_size(config, base), seed=config.seed)
    epsilons = config.epsilons or [0.0, config.epsilon or 0.01]
    rows = noise_residuals(lift, epsilons, config.level, mode=config.mode, seed=config.seed)
    levels = range(config.level + 1)
    header = ["epsilon", "achieved"] + [f"residual_{s}" for s in levels] + [f"slope_{s}" for s in levels]
    path = os.path.join(config.out, "noise_residuals.csv")
    _write_csv(path, header, [[r.epsilon, r.achieved] + r.residuals + r.slopes for r in rows])
    meta = {"seed": config.seed, "trials": 1, "tolerance": None, "n": lift.n, "mode": config.mode,
            "base": base.name, "level": config.level}
    return Artifacts("noise_robustness", True, [path], meta, rows)


def _run_figures(config: ExperimentConfig, registry: BuiltinRegistry) -> Artifacts:
    report = repro_figures(registry, threads=config.threads)
    path = _write_report(config, "figures", report, ("figure", "check", "value", "expected", "result"),
                         [(c.figure, c.check, str(c.value), str(c.expected), "PASS" if c.passed else "FAIL")
                          for c in report.checks])
    return Artifacts("figures", report.passed, [path], {"seed": None, "trials": 1, "tolerance": 1e-9}, report)


def _run_table1(config: ExperimentConfig, registry: BuiltinRegistry) -> Artifacts:
    report = repro_table1(config.row, n=config.n or 2000, trials=config.trials, seed=config.seed,
                          threads=config.threads, m=config.m or 10, epsilon=config.epsilon or 0.01, registry=registry)
    path = _write_report(config, "table1", report,
                         ("row", "true_value", "lower_bound", "certificate_ideal", "certificate_mean", "result"),
                         [(report.row, report.true_value, "" if report.lower_bound is None else str(report.lower_bound),
                           report.certificate_ideal, report.certificate_mean, "PASS" if report.passed else "FAIL")])
    meta = {"seed": config.seed, "trials": config.trials, "tolerance": report.tolerance, "n": report.n}
    return Artifacts("table1", report.passed, [path], meta, report)


def run(config: ExperimentConfig, registry: Optional[BuiltinRegistry] = None) -> Artifacts:
    config.validate()
    registry = registry or default_registry()
    os.makedirs(config.out, exist_ok=True)
    logger.info("running %s", config)
    match config.experiment:
        case "detect": artifacts = _run_detect(config, registry)
        case "sdp_sweep": artifacts = _run_sdp_sweep(config, registry)
        case "noise_robustness": artifacts = _run_noise_robustness(config, registry)
        case "figures": artifacts = _run_figures(config, registry)
        case "table1": artifacts = _run_table1(config, registry)
        case _: raise ValueError(f"Unknown experiment {config.experiment!r}")
    manifest = os.path.join(config.out, f"{config.experiment}_manifest.json")
    with open(manifest, "w") as f:
        json.dump({"config": config.to_dict(), "files": artifacts.files, "meta": artifacts.meta,
                   "passed": artifacts.passed}, f, indent=4)
    artifacts.files.append(manifest)
    logger.info("%s finished: %s", config.experiment, "PASS" if artifacts.passed else "FAIL")
    return artifacts
