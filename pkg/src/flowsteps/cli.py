"""Command line surface.

Exit codes: 0 success (all steps passed), 1 a scenario failed, 2 scenarios
pending or ambiguous with none failed, 3 usage/IO/parse errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .errors import FlowstepsError
from .gwt import generate_step_skeletons, parse_feature, render_feature, render_skeletons
from .mapping import feature_to_pn, pn_to_scenarios, scenarios_to_feature
from .pnml import parse_pnml, to_pnml
from .runtime import StepStatus
from .server import ServerConfig, serve
from .session import run_all_scenarios

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PENDING = 2
EXIT_ERROR = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="flowsteps", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a feature file and print its AST as JSON")
    p.add_argument("feature", help="path to a .feature file")

    p = sub.add_parser("gen-steps", help="print step definition skeletons for a feature")
    p.add_argument("feature", help="path to a .feature file")

    p = sub.add_parser("pn2gwt", help="print the feature text equivalent to a net")
    p.add_argument("pnml", help="path to a .pnml file")
    p.add_argument("--loop-bound", type=int, default=2,
                   help="max firings per transition in one scenario (default 2)")
    p.add_argument("--max-scenarios", type=int, default=256,
                   help="abort if more scenarios exist (default 256)")

    p = sub.add_parser("gwt2pn", help="print the PNML net equivalent to a feature")
    p.add_argument("feature", help="path to a .feature file")

    p = sub.add_parser("run", help="run every scenario of a net against a sut fixture")
    p.add_argument("pnml", help="path to a .pnml file")
    p.add_argument("--bindings", help="bindings manifest (JSON)")
    p.add_argument("--sut", help="sut fixture (JSON)")
    p.add_argument("--json", action="store_true", help="print the batch report as JSON")
    p.add_argument("--loop-bound", type=int, default=2)
    p.add_argument("--max-scenarios", type=int, default=256)

    p = sub.add_parser("serve", help="serve the HTTP API")
    p.add_argument("--config", help="server config file (JSON)")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--fixtures", help="fixtures directory (overrides config)")
    return parser


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _cmd_parse(args) -> int:
    ast = parse_feature(_read(args.feature))
    print(json.dumps(dataclasses.asdict(ast), indent=2))
    return EXIT_OK


def _cmd_gen_steps(args) -> int:
    ast = parse_feature(_read(args.feature))
    print(render_skeletons(generate_step_skeletons(ast)), end="")
    return EXIT_OK


def _cmd_pn2gwt(args) -> int:
    net = parse_pnml(_read(args.pnml))
    traces = pn_to_scenarios(
        net, loop_bound=args.loop_bound, max_scenarios=args.max_scenarios
    )
    ast = scenarios_to_feature(traces, net, name=net.id)
    print(render_feature(ast), end="")
    return EXIT_OK


def _cmd_gwt2pn(args) -> int:
    ast = parse_feature(_read(args.feature))
    print(to_pnml(feature_to_pn(ast)), end="")
    return EXIT_OK


def _cmd_run(args) -> int:
    net = parse_pnml(_read(args.pnml))
    manifest = _read(args.bindings) if args.bindings else None
    sut_fixture = _read(args.sut) if args.sut else None
    report = run_all_scenarios(
        net, manifest, sut_fixture,
        loop_bound=args.loop_bound, max_scenarios=args.max_scenarios,
    )
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        for run in report.scenarios:
            print(f"{run.status.value.upper():>9}  {run.name}")
            for firing in run.reports:
                for result in firing.step_results:
                    if result.status is not StepStatus.PASSED:
                        print(f"           - {result.status.value}: "
                              f"{result.step_text}")
                        if result.message:
                            print(f"             {result.message}")
        summary = report.summary
        print(
            f"scenarios: {summary['passed']} passed, {summary['failed']} failed, "
            f"{summary['pending']} pending, {summary['ambiguous']} ambiguous"
        )
    summary = report.summary
    if summary["failed"]:
        return EXIT_FAILED
    if summary["pending"] or summary["ambiguous"]:
        return EXIT_PENDING
    return EXIT_OK


def _cmd_serve(args) -> int:
    if args.config:
        config = ServerConfig.from_file(args.config)
    else:
        if not args.fixtures:
            raise _UsageError("serve needs --config or --fixtures")
        config = ServerConfig(fixtures_dir=args.fixtures)
    if args.fixtures:
        config.fixtures_dir = args.fixtures
    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port
    serve(config)
    return EXIT_OK


_COMMANDS = {
    "parse": _cmd_parse,
    "gen-steps": _cmd_gen_steps,
    "pn2gwt": _cmd_pn2gwt,
    "gwt2pn": _cmd_gwt2pn,
    "run": _cmd_run,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (FlowstepsError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


cli_main = main


if __name__ == "__main__":
    sys.exit(main())
