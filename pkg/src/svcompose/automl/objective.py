"""The execution-based objective: deploy, train, predict, score.

Each candidate evaluation deploys fresh service instances (never reused across
candidates), trains on the 70% part, predicts the 30% validation part, and
scores 1 - zeroOneLoss (the search maximizes accuracy; reports show loss).
The same split is used for every candidate within a run. The loss path is
exposed separately so reported losses are the exact misclassified/total ratio,
not 1 - (1 - loss) with its last-bit rounding.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

from ..runtime.client import ServiceClient, execute_choreography
from ..runtime.errors import ClientError, ServiceError
from ..runtime.payload import Handle
from ..search import EvaluationFailure
from ..services import DeployableService, ObjectiveFn, register_objective
from .data import Dataset, SplitSpec, load_dataset, stratified_split
from .reference import zero_one_loss


@dataclass
class ObjectiveReport:
    zero_one_loss: float
    train_duration_s: float
    composition: dict  # wire form of the evaluated constructor composition


def _remaining(deadline: Optional[float]) -> Optional[float]:
    if deadline is None:
        return None
    left = deadline - time.monotonic()
    if left <= 0:
        raise EvaluationFailure(timed_out=True)
    return left


def make_pipeline_executor(ds: Dataset, spec: SplitSpec, query_inputs: dict,
                           client: Optional[ServiceClient] = None,
                           ) -> Callable[[DeployableService, Optional[float]], list]:
    """Deploy a pipeline via choreography, train, and return its validation
    predictions. The split is computed once and shared by every candidate."""
    client = client or ServiceClient()
    train, validation = stratified_split(ds, spec)

    def execute(deployable: DeployableService, deadline: Optional[float] = None) -> list:
        template = deployable.template
        try:
            if deployable.constructor.steps:
                handle = execute_choreography(
                    deployable.constructor.to_wire(), query_inputs, client,
                    timeout_s=_remaining(deadline))
                if not isinstance(handle, Handle):
                    raise EvaluationFailure("constructor did not return the instance handle")
            else:
                handle = client.create(template.endpoint, template.name,
                                       timeout_s=_remaining(deadline))
            execute_choreography(
                template.fixed_operation("train").to_wire(),
                {"self": handle, "features": train.features, "labels": train.labels},
                client, timeout_s=_remaining(deadline))
            predicted = execute_choreography(
                template.fixed_operation("predict").to_wire(),
                {"self": handle, "features": validation.features},
                client, timeout_s=_remaining(deadline))
        except (ServiceError, ClientError) as err:
            raise EvaluationFailure(f"benchmark execution failed: {err}")
        if not isinstance(predicted, list):
            raise EvaluationFailure(f"predict returned {type(predicted).__name__}, expected labels")
        return predicted

    execute.validation_labels = validation.labels
    return execute


def make_benchmark_loss(ds: Dataset, spec: SplitSpec, query_inputs: dict,
                        client: Optional[ServiceClient] = None,
                        ) -> Callable[[DeployableService, Optional[float]], float]:
    """Exact validation 0-1 loss of a deployed pipeline."""
    execute = make_pipeline_executor(ds, spec, query_inputs, client)

    def loss(deployable: DeployableService, deadline: Optional[float] = None) -> float:
        return zero_one_loss(execute(deployable, deadline), execute.validation_labels)

    return loss


def make_benchmark_objective(ds: Dataset, spec: SplitSpec, query_inputs: dict,
                             client: Optional[ServiceClient] = None) -> ObjectiveFn:
    """The score the search maximizes: validation accuracy."""
    loss = make_benchmark_loss(ds, spec, query_inputs, client)

    def run(deployable: DeployableService, deadline: Optional[float] = None) -> float:
        return 1.0 - loss(deployable, deadline)

    return run


def benchmark_report(deployable: DeployableService, ds: Dataset, spec: SplitSpec,
                     query_inputs: dict, client: Optional[ServiceClient] = None,
                     deadline: Optional[float] = None) -> ObjectiveReport:
    """Execute the pipeline once more and report its exact loss."""
    t0 = time.monotonic()
    loss = make_benchmark_loss(ds, spec, query_inputs, client)(deployable, deadline)
    return ObjectiveReport(
        zero_one_loss=loss,
        train_duration_s=time.monotonic() - t0,
        composition=deployable.constructor.to_wire(),
    )


def _registry_factory(config) -> ObjectiveFn:
    ds = load_dataset(config["dataset"])
    spec = SplitSpec(train_fraction=config.get("train_fraction", 0.70),
                     seed=config.get("seed", 0))
    query_inputs = {
        name: Handle(url) for name, url in dict(config.get("query_inputs", {})).items()
    }
    return make_benchmark_objective(ds, spec, query_inputs)


register_objective("zero_one_benchmark", _registry_factory)
