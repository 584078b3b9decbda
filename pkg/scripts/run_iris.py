"""Desk-scale experiment: pipeline search on iris over several seeds.

Starts a local host with the toy portfolio, runs the composition search once
per seed, and prints the chosen pipeline with its validation loss. Add a
second endpoint (e.g. the TypeScript host from frontend/) to widen the
classifier portfolio:

    python scripts/run_iris.py --seeds 5
    python scripts/run_iris.py --endpoint http://127.0.0.1:8081 --portfolio all
"""

import argparse
import tempfile
from pathlib import Path

from svcompose.automl.learners import build_registry
from svcompose.automl.runner import RunConfig, run_automl_search
from svcompose.runtime.server import ServiceHost

DATA = Path(__file__).resolve().parent.parent / "data"


def pipeline_of(composition: dict) -> str:
    created = [s["service"] for s in composition["steps"] if s["operation"] == "new"]
    pre = next((n for n in created if n in ("scaler", "varsel")), "identity")
    clf = next(n for n in created if n not in ("scaler", "varsel", "pipeline"))
    return f"{pre} -> {clf}"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dataset", default=str(DATA / "iris.csv"))
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--timeout", type=float, default=60.0)
    parser.add_argument("--k", type=int, default=3)
    parser.add_argument("--portfolio", choices=["all", "a", "b"], default="a")
    parser.add_argument("--endpoint", action="append", default=[],
                        help="extra endpoints appended after the local host")
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as store:
        host = ServiceHost(build_registry(), store, port=0)
        host.start()
        endpoints = (host.base_url, *args.endpoint)
        losses = []
        try:
            for seed in range(args.seeds):
                cfg = RunConfig(dataset=args.dataset, endpoints=endpoints,
                                portfolio=args.portfolio, timeout_s=args.timeout,
                                eval_timeout_s=30.0, seed=seed,
                                completions_per_node=args.k)
                outcome = run_automl_search(cfg)
                if not outcome.found:
                    print(f"seed {seed}: no solution within {args.timeout}s")
                    continue
                losses.append(outcome.report.zero_one_loss)
                print(f"seed {seed}: loss {outcome.report.zero_one_loss:.4f}  "
                      f"pipeline {pipeline_of(outcome.composition)}  "
                      f"({outcome.result.stats.nodes_expanded} nodes, "
                      f"{outcome.result.stats.evaluations_run} evaluations)")
        finally:
            host.stop()
        if losses:
            print(f"mean loss over {len(losses)} runs: {sum(losses) / len(losses):.4f}")


if __name__ == "__main__":
    main()
