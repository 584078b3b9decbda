"""Command line: serve the toy-portfolio host, run a pipeline search, report.

Exit codes for `run`: 0 solution found, 3 no solution, 4 configuration error.
Environment defaults for `serve`: SVCOMPOSE_BIND, SVCOMPOSE_PORT,
SVCOMPOSE_STORE.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .automl.learners import build_registry
from .automl.runner import ConfigError, RunConfig, run_automl_search
from .runtime.server import ServiceHost

EXIT_OK = 0
EXIT_NO_SOLUTION = 3
EXIT_CONFIG = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="svcompose",
                                     description="HTN-based service composition over HTTP hosts")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="start a service host with the toy learner portfolio")
    serve.add_argument("--port", type=int, default=int(os.environ.get("SVCOMPOSE_PORT", "8080")))
    serve.add_argument("--bind", default=os.environ.get("SVCOMPOSE_BIND", "127.0.0.1"))
    serve.add_argument("--store", default=os.environ.get("SVCOMPOSE_STORE", "./svc-store"))
    serve.add_argument("--disable", action="append", default=[], metavar="CLASS",
                       help="register CLASS but refuse calls to it (403)")

    run = sub.add_parser("run", help="search for the best pipeline composition")
    run.add_argument("--dataset", required=True)
    run.add_argument("--timeout", type=float, default=60.0, metavar="S")
    run.add_argument("--eval-timeout", type=float, default=30.0, metavar="S")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--k", type=int, default=3, help="random completions per node evaluation")
    run.add_argument("--endpoint", action="append", default=[], metavar="URL",
                     help="host endpoint; first is primary, second secondary (repeatable)")
    run.add_argument("--portfolio", choices=["all", "a", "b"], default="all")
    run.add_argument("--trace", default=None, metavar="FILE",
                     help="write the candidate-evaluation trace (JSON lines)")

    report = sub.add_parser("report", help="print the best-so-far curve from a trace file")
    report.add_argument("--trace", required=True, metavar="FILE")
    report.add_argument("--direction", choices=["max", "min"], default="max")
    return parser


def _cmd_serve(args) -> int:
    registry = build_registry(disabled=set(args.disable))
    host = ServiceHost(registry, args.store, port=args.port, bind=args.bind)
    print(f"serving {len(registry.names())} classes on {host.base_url} (store: {args.store})",
          flush=True)
    try:
        host.serve_forever()
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = RunConfig(
        dataset=args.dataset,
        endpoints=tuple(args.endpoint),
        portfolio=args.portfolio,
        timeout_s=args.timeout,
        eval_timeout_s=args.eval_timeout,
        seed=args.seed,
        completions_per_node=args.k,
        trace_path=args.trace,
    )
    try:
        outcome = run_automl_search(cfg)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    stats = outcome.result.stats
    print(f"nodes expanded: {stats.nodes_expanded}, evaluations: {stats.evaluations_run}, "
          f"timed out: {stats.evaluations_timed_out}")
    if not outcome.found:
        print("no solution found")
        return EXIT_NO_SOLUTION
    print(f"best score (accuracy): {outcome.result.best_score:.4f}")
    print(f"validation 0-1 loss:   {outcome.report.zero_one_loss:.4f}")
    print("composition:")
    print(json.dumps(outcome.composition, indent=2))
    return EXIT_OK


def _cmd_report(args) -> int:
    best = None
    better = (lambda a, b: a > b) if args.direction == "max" else (lambda a, b: a < b)
    t0 = None
    rows = 0
    try:
        fh = open(args.trace)
    except OSError as err:
        print(f"configuration error: cannot read trace: {err}", file=sys.stderr)
        return EXIT_CONFIG
    with fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if t0 is None:
                t0 = rec["ts"]
            if rec.get("score") is None:
                continue
            rows += 1
            if best is None or better(rec["score"], best):
                best = rec["score"]
                print(f"t={rec['ts'] - t0:8.3f}s  score={best:.6f}  plan={'; '.join(rec['plan'])}")
    if rows == 0:
        print("trace contains no scored evaluations")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "serve":
        return _cmd_serve(args)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_report(args)


if __name__ == "__main__":
    sys.exit(main())
