## TITLE: liftbench command line
## CC: okzyrox
## LICENSE: MIT

import argparse
import json
import logging
import os
import sys
from typing import Any, Optional

import numpy as np

from .certificates import certify, quantity_from_name
from .config import ExperimentConfig
from .ensembles import NOISE_MODES, LiftedGraph, NoiseSpec, apply_noise, detect_experiment, random_lift, sample_bipartite_regular, \
    sample_regular
from .errors import LiftbenchError
from .exact import solve
from .graph_core import Multigraph, save_graph
from .harness import default_registry, planted_graph, repro_figures, repro_table1, run
from .local_stats import lost2_build_constraints, lost2_check, lost2_lower_witness, lost2_planted
from .sdp import WITNESS_MODES, PathStatsInstance, null_witness, path_stats_check, planted_witness, symmetric_path_stats
from .serial import Record
from .spectral import graph_spectrum, is_ramanujan, nb_matrix, self_avoiding_matrix

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _emit(args, payload: Any, name: str = "result"):
    text = json.dumps(Record._json_serializer(payload), indent=4)
    if args.out:
        path = args.out if not os.path.isdir(args.out) else os.path.join(args.out, f"{name}.json")
        with open(path, "w") as f:
            f.write(text)
        logger.info("wrote %s", path)
    else:
        print(text)


def _graph(args, name: Optional[str] = None) -> Multigraph:
    return default_registry().resolve(name or args.graph, d=getattr(args, "d", None))


def _load_lift(filename: str) -> LiftedGraph:
    with open(filename, "r") as f:
        return LiftedGraph.from_dict(json.load(f))


## subcommands

def cmd_gen(args) -> int:
    match args.kind:
        case "regular":
            out = sample_regular(args.n, args.d, seed=args.seed)
        case "bipartite":
            out = sample_bipartite_regular(args.n, args.d, seed=args.seed)[0]
        case "lift":
            lift = random_lift(_graph(args, args.base), args.m, seed=args.seed)
            if args.out:
                with open(args.out, "w") as f:
                    json.dump(lift.to_dict(), f)
            else:
                print(json.dumps(lift.to_dict()))
            return EXIT_OK
    if args.out:
        save_graph(out, args.out, args.format)
    else:
        print(json.dumps(out.to_dict()))
    return EXIT_OK


def cmd_noise(args) -> int:
    lift = _load_lift(args.lift) if args.lift else None
    g = lift.graph if lift is not None else _graph(args)
    out = apply_noise(g, NoiseSpec(args.eps, args.mode), base=lift, seed=args.seed)
    if args.out:
        save_graph(out, args.out, args.format)
    else:
        print(json.dumps(dict(out.to_dict(), meta=out.meta)))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    g = _graph(args)
    spectrum = graph_spectrum(g, bipartite=args.bipartite)
    report = is_ramanujan(g, bipartite=args.bipartite)
    if args.export is not None:
        kind, s = args.export
        matrix = nb_matrix(g, int(s)) if kind == "nb" else self_avoiding_matrix(g, int(s))
        path = args.export_path or f"{kind}_{s}.csv"
        np.savetxt(path, matrix, delimiter=",", fmt="%.0f")
        logger.info("wrote %s", path)
    _emit(args, {"values": spectrum.values, "rho": report.extreme, "ramanujan": report.ramanujan,
                 "margin": report.margin}, "spectrum")
    return EXIT_OK


def cmd_certify(args) -> int:
    result = certify(quantity_from_name(args.quantity), _graph(args), t=args.t, epsilon=args.eps,
                     bipartite=args.bipartite)
    _emit(args, result, "certificate")
    return EXIT_OK


def cmd_exact(args) -> int:
    result = solve(quantity_from_name(args.quantity), _graph(args), t=args.t, epsilon=args.eps,
                   include_self=not args.exclude_self, full=args.full, threads=args.threads)
    _emit(args, result, "exact")
    return EXIT_OK


def cmd_sdp(args) -> int:
    match args.problem:
        case "path-stats":
            if args.lift:
                lift = _load_lift(args.lift)
                g, base, witness = lift.graph, lift.base, planted_witness(lift)
            else:
                g, base = _graph(args), _graph(args, args.base)
                witness = None
            instance = PathStatsInstance.from_base(base, args.level, args.delta, bipartite=args.bipartite)
            if witness is None:
                witness = null_witness(g, instance, mode=args.witness, c0=args.c0)
            report = path_stats_check(g, witness, instance, c0=args.c0, threads=args.threads)
            _emit(args, {"report": report, "witness": witness.log}, "path_stats")
            return EXIT_OK if report.passed else EXIT_FAIL
        case "sym-path-stats":
            decision = symmetric_path_stats(_graph(args), args.lam, args.level, args.delta, bipartite=args.bipartite,
                                            k=args.k, mode=args.witness, c0=args.c0)
            _emit(args, decision, "sym_path_stats")
            return EXIT_OK if decision.decision != "undecided" else EXIT_FAIL
        case "lost2":
            if args.lift:
                lift = _load_lift(args.lift)
                g, base, pm = lift.graph, lift.base, lost2_planted(lift)
            else:
                g, base = _graph(args), _graph(args, args.base)
                pm = lost2_lower_witness(g, base, args.level, args.delta, bipartite=args.bipartite,
                                         c0=args.c0)
            constraints = lost2_build_constraints(g, base, args.level, args.delta, bipartite=args.bipartite,
                                                  c0=args.c0, threads=args.threads)
            report = lost2_check(pm, constraints, threads=args.threads)
            _emit(args, {"report": report, "witness": pm.log}, "lost2")
            return EXIT_OK if report.passed else EXIT_FAIL
    return EXIT_USAGE


def cmd_detect(args) -> int:
    base = _graph(args, args.base)
    d = base.require_regular()
    n = base.n * args.m

    def null_sampler(s):
        return sample_regular(n, d, seed=s)

    def planted_sampler(s):
        return planted_graph(base, args.m, s, args.eps, args.mode)

    result = detect_experiment(null_sampler, planted_sampler, trials=args.trials, seed=args.seed,
                               threads=args.threads, margin=args.margin)
    _emit(args, result, "detect")
    return EXIT_OK


def cmd_repro(args) -> int:
    match args.suite:
        case "figures":
            report = repro_figures(threads=args.threads)
            print(report.table(), file=sys.stderr)
            _emit(args, report, "figures")
            return EXIT_OK if report.passed else EXIT_FAIL
        case "table1":
            report = repro_table1(args.row, n=args.n, trials=args.trials, seed=args.seed, threads=args.threads)
            _emit(args, report, "table1")
            return EXIT_OK if report.passed else EXIT_FAIL
    return EXIT_USAGE


def cmd_run(args) -> int:
    config = ExperimentConfig.load(args.config)
    ## command line flags win over the file when given
    for key in args.explicit:
        setattr(config, key, getattr(args, key))
    artifacts = run(config)
    print(json.dumps({"files": artifacts.files, "passed": artifacts.passed, "meta": Record._json_serializer(artifacts.meta)}))
    return EXIT_OK if artifacts.passed else EXIT_FAIL


## parser

_DEFAULTS = {"seed": 0, "threads": 1, "out": None, "format": "json"}


def _graph_args(parser: argparse.ArgumentParser, required: bool = True):
    parser.add_argument("--graph", "-g", required=required, help="built-in name or graph file (json, csv, bin, txt)")
    parser.add_argument("--bipartite", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liftbench", description="Random lifts, spectral certificates and "
                                                                     "path statistics feasibility checks")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--out", "-o", help="output file or directory, stdout when omitted")
    parser.add_argument("--format", choices=("json", "csv", "bin"))
    parser.add_argument("-v", "--verbose", action="store_true")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="sample a graph or a lift")
    gen.add_argument("kind", choices=("regular", "bipartite", "lift"))
    gen.add_argument("--n", type=int)
    gen.add_argument("--d", type=int)
    gen.add_argument("--base")
    gen.add_argument("--m", type=int)
    gen.set_defaults(func=cmd_gen)

    noise = commands.add_parser("noise", help="apply a noise operator")
    noise.add_argument("--graph", "-g")
    noise.add_argument("--lift", help="lift JSON written by 'gen lift', needed by respectful modes")
    noise.add_argument("--mode", choices=NOISE_MODES, default="rand")
    noise.add_argument("--eps", type=float, required=True)
    noise.set_defaults(func=cmd_noise)

    spectrum = commands.add_parser("spectrum", help="adjacency spectrum and Ramanujan margin")
    _graph_args(spectrum)
    spectrum.add_argument("--export", nargs=2, metavar=("KIND", "S"), help="write the nb or saw matrix of length S")
    spectrum.add_argument("--export-path")
    spectrum.set_defaults(func=cmd_spectrum)

    for name, func in (("certify", cmd_certify), ("exact", cmd_exact)):
        sub = commands.add_parser(name)
        _graph_args(sub)
        sub.add_argument("--quantity", "-q", required=True)
        sub.add_argument("--t", type=int, default=2)
        sub.add_argument("--eps", type=float, default=0.01 if name == "certify" else 0.25)
        if name == "exact":
            sub.add_argument("--full", action="store_true")
            sub.add_argument("--exclude-self", action="store_true")
        sub.set_defaults(func=func)

    sdp = commands.add_parser("sdp", help="path / local statistics feasibility")
    sdp.add_argument("problem", choices=("path-stats", "sym-path-stats", "lost2"))
    _graph_args(sdp, required=False)
    sdp.add_argument("--base")
    sdp.add_argument("--lift")
    sdp.add_argument("--level", "-D", type=int, default=3)
    sdp.add_argument("--delta", type=float, default=0.1)
    sdp.add_argument("--lam", type=float)
    sdp.add_argument("--k", type=int, default=2)
    sdp.add_argument("--c0", type=float, default=1.0)
    sdp.add_argument("--witness", choices=WITNESS_MODES, default="auto")
    sdp.set_defaults(func=cmd_sdp)

    detect = commands.add_parser("detect", help="spectral radius test, random graph against a lift")
    detect.add_argument("--base", required=True)
    detect.add_argument("--m", type=int, required=True)
    detect.add_argument("--trials", type=int, default=20)
    detect.add_argument("--eps", type=float, default=0.0)
    detect.add_argument("--mode", choices=NOISE_MODES, default="rand")
    detect.add_argument("--margin", type=float, default=0.05)
    detect.set_defaults(func=cmd_detect)

    repro = commands.add_parser("repro", help="reproduce the figure graphs or a table row")
    repro.add_argument("suite", choices=("figures", "table1"))
    repro.add_argument("--row")
    repro.add_argument("--n", type=int, default=2000)
    repro.add_argument("--trials", type=int, default=5)
    repro.set_defaults(func=cmd_repro)

    runner = commands.add_parser("run", help="run an experiment config")
    runner.add_argument("--config", "-c", required=True)
    runner.set_defaults(func=cmd_run)
    return parser


def _usage_problems(args) -> Optional[str]:
    match args.command:
        case "gen":
            if args.kind == "lift" and (args.base is None or args.m is None):
                return "gen lift needs --base and --m"
            if args.kind != "lift" and (args.n is None or args.d is None):
                return f"gen {args.kind} needs --n and --d"
        case "noise":
            if args.graph is None and args.lift is None:
                return "noise needs --graph or --lift"
        case "sdp":
            if args.problem == "sym-path-stats" and (args.graph is None or args.lam is None):
                return "sdp sym-path-stats needs --graph and --lam"
            if args.problem != "sym-path-stats" and not args.lift and (args.graph is None or args.base is None):
                return f"sdp {args.problem} needs --lift, or --graph and --base"
        case "repro":
            if args.suite == "table1" and not args.row:
                return "repro table1 needs --row"
    return None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    ## None marks a global flag left off the command line
    args.explicit = [key for key in _DEFAULTS if getattr(args, key) is not None]
    for key, value in _DEFAULTS.items():
        if getattr(args, key) is None:
            setattr(args, key, value)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    problem = _usage_problems(args)
    if problem:
        parser.print_usage(sys.stderr)
        print(f"liftbench: error: {problem}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (ValueError, TypeError, KeyError, FileNotFoundError) as e:
        ## bad input: preconditions, unknown names, missing files
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_USAGE
    except (LiftbenchError, RuntimeError) as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
