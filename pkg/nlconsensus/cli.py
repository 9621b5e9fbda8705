"""
nlconsensus command line
========================

Usage:
    python -m nlconsensus check-graph GRAPH
    python -m nlconsensus simulate --preset example1_case1 --out runs/case1
    python -m nlconsensus simulate --graph g.txt --protocol linsin:2 --x0 1,2,3 --plot
    python -m nlconsensus compare --preset example2 --eps 1e-3
    python -m nlconsensus compare a.cfg b.cfg
    python -m nlconsensus export-graph GRAPH OUT

Exit codes: 0 ok / consensus reached, 1 bad input, 2 not strongly connected,
3 time limit, 4 divergence, 5 incomparable runs.
"""

import argparse
import asyncio
import sys
from pathlib import Path
from typing import List, Optional

from nlconsensus.core.config import settings
from nlconsensus.core.exceptions import (
    ConfigError,
    ConsensusError,
    GraphParseError,
    Incomparable,
    NotStronglyConnected,
    ProtocolSpecError,
)
from nlconsensus.core.logger import logger
from nlconsensus.services.experiment_config import config_loader, parse_vector
from nlconsensus.services.export import export_service
from nlconsensus.services.graph_io import graph_reader, graph_writer
from nlconsensus.services.plotting import plotting_service
from nlconsensus.services.runner import experiment_runner
from nlconsensus.modules.graph import graph_module

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_NOT_SC = 2
EXIT_TIME_LIMIT = 3
EXIT_DIVERGENCE = 4
EXIT_INCOMPARABLE = 5

TERMINATION_EXIT = {
    "ConsensusReached": EXIT_OK,
    "TimeLimit": EXIT_TIME_LIMIT,
    "Divergence": EXIT_DIVERGENCE,
}

INPUT_ERRORS = (ConfigError, GraphParseError, ProtocolSpecError)


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _format_nodes(nodes) -> str:
    ordered = sorted(nodes)
    label = "node" if len(ordered) == 1 else "nodes"
    return f"{label} " + ", ".join(str(v + 1) for v in ordered)


def cmd_check_graph(args) -> int:
    try:
        g = graph_reader.read(args.graph, args.format)
    except GraphParseError as e:
        return _fail(str(e), EXIT_BAD_INPUT)

    report = graph_module.connectivity(g)
    if report.strongly_connected:
        try:
            xi = graph_module.left_eigenvector(graph_module.build_laplacian(g))
        except ConsensusError as e:
            return _fail(str(e), EXIT_BAD_INPUT)
        print("strongly connected; xi = " + " ".join(f"{v:.10g}" for v in xi.xi))
        return EXIT_OK

    tree = "yes" if report.has_spanning_tree else "no"
    line = f"not strongly connected; spanning tree: {tree}"
    if report.has_spanning_tree:
        line += f"; root: {_format_nodes(report.root_candidates)}"
    print(line)
    print(f"strongly connected components: {report.scc_count}")
    return EXIT_NOT_SC


def _sim_overrides(args) -> dict:
    return {
        "graph": getattr(args, "graph", None),
        "format": getattr(args, "format", None),
        "protocol": getattr(args, "protocol", None),
        "x0": parse_vector(args.x0) if getattr(args, "x0", None) else None,
        "dt": args.dt,
        "t_max": args.t_max,
        "consensus_tol": args.tol,
        "record_every": args.record_every,
        "integrator": args.integrator,
        "mode": "unchecked" if getattr(args, "unchecked", False) else None,
        "plot": True if args.plot else None,
    }


def _load_experiment(args):
    overrides = _sim_overrides(args)
    if args.config:
        return config_loader.load(args.config, overrides)
    if args.preset:
        return config_loader.load_preset(args.preset, overrides)
    return config_loader.build({}, Path.cwd(), overrides)


def _print_summary(summary) -> None:
    print(export_service.format_key_values(summary), end="")


def cmd_simulate(args) -> int:
    try:
        cfg = _load_experiment(args)
        result = experiment_runner.run(cfg)
    except INPUT_ERRORS as e:
        return _fail(str(e), EXIT_BAD_INPUT)
    except NotStronglyConnected as e:
        return _fail(f"{e} (use --unchecked to run anyway)", EXIT_NOT_SC)
    except ConsensusError as e:
        # degenerate null space, non-positive xi, broken B invariants
        return _fail(str(e), EXIT_BAD_INPUT)

    out_dir = Path(args.out) if args.out else Path(cfg.outputs) / cfg.name
    experiment_runner.write_outputs(result, out_dir)
    _print_summary(result.summary)
    if not result.monotonicity.monotone_on_range:
        print(f"warning: protocol is not increasing on the state range (witness {result.monotonicity.witness})")
    print(f"outputs: {out_dir}")
    return TERMINATION_EXIT[result.trajectory.terminated_by]


def cmd_compare(args) -> int:
    sim_args = _sim_overrides(args)
    try:
        if args.preset:
            cfg_a, cfg_b = config_loader.load_compare_preset(args.preset, sim_args)
        elif len(args.configs) == 2:
            cfg_a = config_loader.load(args.configs[0], sim_args)
            cfg_b = config_loader.load(args.configs[1], sim_args)
        else:
            return _fail("compare needs --preset or exactly two config files", EXIT_BAD_INPUT)
        result_a, result_b = asyncio.run(experiment_runner.run_pair(cfg_a, cfg_b))
        comparison = experiment_runner.compare(result_a, result_b, args.eps)
    except INPUT_ERRORS as e:
        return _fail(str(e), EXIT_BAD_INPUT)
    except NotStronglyConnected as e:
        return _fail(str(e), EXIT_NOT_SC)
    except Incomparable as e:
        return _fail(str(e), EXIT_INCOMPARABLE)
    except ConsensusError as e:
        return _fail(str(e), EXIT_BAD_INPUT)

    out_dir = Path(args.out) if args.out else Path(settings.OUTPUT_DIR) / f"compare_{cfg_a.name}_{cfg_b.name}"
    experiment_runner.write_outputs(result_a, out_dir, prefix="a_")
    experiment_runner.write_outputs(result_b, out_dir, prefix="b_")
    export_service.write_json(comparison, out_dir / "comparison.json")
    if cfg_a.plot or cfg_b.plot:
        plotting_service.plot_comparison(result_a.trajectory, result_b.trajectory, out_dir / "comparison.svg")

    print(export_service.format_key_values(comparison), end="")
    print(f"outputs: {out_dir}")
    return EXIT_OK


def cmd_export_graph(args) -> int:
    try:
        g = graph_reader.read(args.graph, args.format)
    except GraphParseError as e:
        return _fail(str(e), EXIT_BAD_INPUT)
    graph_writer.write(g, args.out)
    print(f"wrote {args.out} (n={g.n})")
    return EXIT_OK


def _add_sim_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dt", type=float, help="integration step")
    parser.add_argument("--t-max", dest="t_max", type=float, help="time horizon")
    parser.add_argument("--tol", type=float, help="consensus tolerance on max(x) - min(x)")
    parser.add_argument("--record-every", dest="record_every", type=int, help="steps between recorded samples")
    parser.add_argument("--integrator", choices=["rk4", "euler"])
    parser.add_argument("--plot", action="store_true", help="write SVG plots")
    parser.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlconsensus", description=settings.PROJECT_NAME)
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check-graph", help="connectivity verdict and left eigenvector")
    check.add_argument("graph")
    check.add_argument("--format", choices=["auto", "matrix", "edges"], default="auto")
    check.set_defaults(handler=cmd_check_graph)

    simulate = sub.add_parser("simulate", help="run one consensus simulation")
    source = simulate.add_mutually_exclusive_group()
    source.add_argument("--config", help="flat key = value config file")
    source.add_argument("--preset", help="bundled preset name, e.g. example1_case1")
    simulate.add_argument("--graph", help="graph file")
    simulate.add_argument("--format", choices=["auto", "matrix", "edges"])
    simulate.add_argument("--protocol", help="linear:<a> | linsin:<a> | piecewise | table:<path>")
    simulate.add_argument("--x0", help="comma-separated initial values")
    simulate.add_argument("--unchecked", action="store_true", help="skip the strong-connectivity requirement")
    _add_sim_flags(simulate)
    simulate.set_defaults(handler=cmd_simulate)

    compare = sub.add_parser("compare", help="race two protocols from the same start")
    compare.add_argument("configs", nargs="*", help="two config files")
    compare.add_argument("--preset", help="bundled comparison, e.g. example2")
    compare.add_argument("--eps", type=float, default=1e-3, help="disagreement threshold for the race")
    _add_sim_flags(compare)
    compare.set_defaults(handler=cmd_compare)

    export = sub.add_parser("export-graph", help="rewrite a graph in canonical matrix format")
    export.add_argument("graph")
    export.add_argument("out")
    export.add_argument("--format", choices=["auto", "matrix", "edges"], default="auto")
    export.set_defaults(handler=cmd_export_graph)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logger.debug(f"Command: {args.command}")
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
