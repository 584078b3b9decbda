"""End-to-end pipeline search: build the domain, search, report.

The run wires together translation, the random-completion evaluator over the
execution-based benchmark, and anytime best-first search; it returns the best
composition found with its validation loss, or a no-solution outcome.
"""

from __future__ import annotations

import contextlib
import time
from dataclasses import dataclass
from typing import Optional

from ..runtime.client import ServiceClient
from ..search import SearchConfig, SearchResult, SearchStats, run_search
from ..services import (
    ObjectiveRef,
    inject_into_template,
    objective_wrapper,
    plan_to_composition,
    translate_to_htn,
)
from .data import SplitSpec, load_dataset
from .domain import EmptyPortfolio, PORTFOLIOS, build_service_domain, query_input_values
from .objective import ObjectiveReport, make_benchmark_loss


class ConfigError(Exception):
    """Bad run configuration: unusable dataset, endpoints, or flags."""


@dataclass
class RunConfig:
    dataset: str
    endpoints: tuple[str, ...]
    portfolio: str = "all"
    timeout_s: float = 60.0
    eval_timeout_s: float = 30.0
    seed: int = 0
    completions_per_node: int = 3
    trace_path: Optional[str] = None


@dataclass
class RunOutcome:
    result: SearchResult
    report: Optional[ObjectiveReport] = None
    composition: Optional[dict] = None

    @property
    def found(self) -> bool:
        return self.result.best_plan is not None


def probe_endpoints(endpoints: tuple[str, ...], client: Optional[ServiceClient] = None) -> None:
    client = client or ServiceClient()
    if not endpoints:
        raise ConfigError("at least one host endpoint is required")
    for url in endpoints:
        if not client.reachable(url):
            raise ConfigError(f"endpoint is not reachable: {url}")


def run_automl_search(cfg: RunConfig, client: Optional[ServiceClient] = None) -> RunOutcome:
    if cfg.portfolio not in PORTFOLIOS:
        raise ConfigError(f"portfolio must be one of {PORTFOLIOS}, got {cfg.portfolio!r}")
    client = client or ServiceClient()
    probe_endpoints(cfg.endpoints, client)
    try:
        ds = load_dataset(cfg.dataset)
    except Exception as err:
        raise ConfigError(f"cannot load dataset {cfg.dataset}: {err}")

    primary = cfg.endpoints[0]
    secondary = cfg.endpoints[1] if len(cfg.endpoints) > 1 else None
    spec = SplitSpec(seed=cfg.seed)
    query_inputs = query_input_values(primary)
    objective_ref = ObjectiveRef.of("zero_one_benchmark", {
        "dataset": cfg.dataset,
        "train_fraction": spec.train_fraction,
        "seed": cfg.seed,
        "query_inputs": {name: h.url for name, h in query_inputs.items()},
    })

    try:
        domain = build_service_domain(primary, secondary, cfg.portfolio, objective=objective_ref)
    except EmptyPortfolio:
        return RunOutcome(SearchResult(None, None, [], SearchStats()))

    problem = translate_to_htn(domain.services, domain.macros, domain.query, domain.theory)
    loss_fn = make_benchmark_loss(ds, spec, query_inputs, client)

    def benchmark(deployable, deadline=None):
        return 1.0 - loss_fn(deployable, deadline)

    hard_deadline = time.monotonic() + cfg.timeout_s if cfg.timeout_s else None
    objective = objective_wrapper(benchmark, problem, domain.services, domain.template,
                                  per_eval_timeout_s=cfg.eval_timeout_s,
                                  hard_deadline=hard_deadline)
    search_cfg = SearchConfig(
        direction="maximize",
        overall_timeout_s=cfg.timeout_s,
        per_eval_timeout_s=cfg.eval_timeout_s,
        completions_per_node=cfg.completions_per_node,
        seed=cfg.seed,
    )

    with contextlib.ExitStack() as stack:
        trace_sink = None
        if cfg.trace_path:
            trace_sink = stack.enter_context(open(cfg.trace_path, "w"))
        result, _ = run_search(problem, objective, search_cfg, trace_sink=trace_sink)

    if result.best_plan is None:
        return RunOutcome(result)

    composition = plan_to_composition(result.best_plan, problem, domain.services)
    deployable = inject_into_template(domain.template, composition)
    t0 = time.monotonic()
    final_loss = loss_fn(deployable, None)
    report = ObjectiveReport(
        zero_one_loss=final_loss,
        train_duration_s=time.monotonic() - t0,
        composition=deployable.constructor.to_wire(),
    )
    return RunOutcome(result, report, composition.to_wire())
