"""Service composition: the problem model and its translation to HTN.

Services follow a class/instance model: a constructor (the distinguished
operation ``new``) creates a stateful instance and returns its handle, and
instance-bound operations consume that handle as a distinguished first input.
Translation treats every operation as static with the handle as an ordinary
input, which is what lets a vanilla HTN planner compose instance operations.

A solution plan converts back into a Composition (sequence of invocations with
input bindings); injecting that composition into a service template's
constructor slot yields a deployable composed service whose fixed operations
(e.g. train/predict) delegate to whatever the constructor configured.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import Callable, Mapping, Optional

from .htn import Effect, HTNProblem, Method, Operator, Task, TaskNetwork, validate_plan
from .logic import TRUE, Formula, State, Theory
from .runtime.errors import ClientError, ServiceError
from .search import EvaluationFailure, Plan

HANDLE_VAR = "?handle"
CONSTRUCTOR_NAME = "new"


class TranslationError(Exception):
    """A service/macro/query reference could not be resolved."""


class ConversionError(Exception):
    """A plan could not be converted into a composition (translator bug)."""


class InjectionError(Exception):
    """A constructor composition does not cover the template's fields."""


@dataclass(frozen=True)
class ServiceOperation:
    name: str
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    precondition: Formula = TRUE
    add_effects: tuple[Effect, ...] = ()
    del_effects: tuple[Effect, ...] = ()
    static: bool = True

    def __post_init__(self):
        if len(self.outputs) > 1:
            raise TranslationError(f"operation {self.name}: at most one output is supported on the wire")
        if self.static:
            if HANDLE_VAR in self.inputs:
                raise TranslationError(f"operation {self.name}: static operations must not take {HANDLE_VAR}")
        elif not self.inputs or self.inputs[0] != HANDLE_VAR:
            raise TranslationError(f"operation {self.name}: instance operations take {HANDLE_VAR} first")
        if self.name == CONSTRUCTOR_NAME and not self.outputs:
            raise TranslationError("a constructor must output the new instance handle")

    @property
    def is_constructor(self) -> bool:
        return self.name == CONSTRUCTOR_NAME


@dataclass(frozen=True)
class ServiceDescriptor:
    name: str
    endpoint: str
    operations: tuple[ServiceOperation, ...] = ()

    def __post_init__(self):
        if "." in self.name or "/" in self.name:
            raise TranslationError(f"service name may not contain '.' or '/': {self.name!r}")
        names = [op.name for op in self.operations]
        if len(set(names)) != len(names):
            raise TranslationError(f"service {self.name}: duplicate operation names")

    @property
    def has_constructor(self) -> bool:
        return any(op.is_constructor for op in self.operations)

    def operation(self, name: str) -> Optional[ServiceOperation]:
        for op in self.operations:
            if op.name == name:
                return op
        return None


def qualified_name(service: str, operation: str) -> str:
    return f"{service}.{operation}"


def split_qualified(name: str) -> tuple[str, str]:
    service, _, operation = name.partition(".")
    if not service or not operation:
        raise ConversionError(f"not a qualified operation name: {name!r}")
    return service, operation


@dataclass(frozen=True)
class Macro:
    """A sequential process template; the composition-side analogue of a method.

    Body calls name either qualified service operations (primitive) or tasks
    refined by other macros. Alternatives are expressed as multiple macros
    refining the same task.
    """

    name: str
    task: Task
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    precondition: Formula = TRUE
    network: TaskNetwork = ()

    def __post_init__(self):
        if not self.network:
            raise TranslationError(f"macro {self.name}: body must be non-empty")


@dataclass(frozen=True)
class ObjectiveRef:
    name: str
    config: tuple = ()  # sorted (key, value) pairs; see objective_config()

    @classmethod
    def of(cls, name: str, config: Mapping | None = None) -> "ObjectiveRef":
        return cls(name, tuple(sorted((config or {}).items())))

    def config_dict(self) -> dict:
        return dict(self.config)


@dataclass(frozen=True)
class ServiceQuery:
    network: TaskNetwork
    initial_facts: State
    objective: ObjectiveRef


# ---------------------------------------------------------------------------
# Compositions


@dataclass(frozen=True)
class QueryInput:
    name: str

    def to_wire(self) -> dict:
        return {"input": self.name}


@dataclass(frozen=True)
class StepOutput:
    step: int
    output: str

    def to_wire(self) -> dict:
        return {"from": self.step, "output": self.output}


Source = QueryInput | StepOutput


def source_from_wire(doc: dict) -> Source:
    if "input" in doc:
        return QueryInput(doc["input"])
    if "from" in doc:
        return StepOutput(doc["from"], doc.get("output", ""))
    raise ConversionError(f"malformed binding source: {doc!r}")


@dataclass(frozen=True)
class CompositionStep:
    service: str
    operation: str
    endpoint: str
    inputs: tuple[tuple[str, Source], ...] = ()
    output: Optional[str] = None

    def to_wire(self) -> dict:
        return {
            "service": self.service,
            "operation": self.operation,
            "endpoint": self.endpoint,
            "inputs": {name: src.to_wire() for name, src in self.inputs},
            "output": self.output,
        }


@dataclass(frozen=True)
class Composition:
    steps: tuple[CompositionStep, ...] = ()

    def __post_init__(self):
        for i, step in enumerate(self.steps):
            for name, src in step.inputs:
                if isinstance(src, StepOutput):
                    if not (0 <= src.step < i):
                        raise ConversionError(
                            f"step {i} input {name} references step {src.step}, which does not precede it")
                    if self.steps[src.step].output != src.output:
                        raise ConversionError(
                            f"step {i} input {name} references missing output {src.output!r} of step {src.step}")

    def to_wire(self) -> dict:
        return {"steps": [s.to_wire() for s in self.steps]}

    def canonical(self) -> str:
        return json.dumps(self.to_wire(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_wire(cls, doc: dict) -> "Composition":
        steps = []
        for s in doc.get("steps", []):
            inputs = tuple((name, source_from_wire(src)) for name, src in s.get("inputs", {}).items())
            steps.append(CompositionStep(s["service"], s["operation"], s["endpoint"], inputs, s.get("output")))
        return cls(tuple(steps))


# ---------------------------------------------------------------------------
# Templates


@dataclass(frozen=True)
class ServiceTemplate:
    """A composed-service skeleton: fixed operations plus an empty constructor.

    ``instance_fields`` maps each field the constructor must configure to the
    setter operation that configures it. Fixed operations are pre-written
    compositions over the deployed instance (bound to the query input
    ``self``) and the operation's own arguments.
    """

    name: str
    endpoint: str
    instance_fields: tuple[tuple[str, str], ...] = ()
    fixed_operations: tuple[tuple[str, Composition], ...] = ()

    def fixed_operation(self, name: str) -> Composition:
        for op_name, comp in self.fixed_operations:
            if op_name == name:
                return comp
        raise KeyError(name)


@dataclass(frozen=True)
class DeployableService:
    """A template whose constructor slot has been filled: ready to register."""

    template: ServiceTemplate
    constructor: Composition


@dataclass(frozen=True)
class ServiceDomain:
    """Everything a composition problem needs: services, macros, query, template."""

    services: tuple[ServiceDescriptor, ...]
    macros: tuple[Macro, ...]
    query: ServiceQuery
    template: Optional[ServiceTemplate] = None
    theory: Theory = Theory.empty()

    def service(self, name: str) -> Optional[ServiceDescriptor]:
        for s in self.services:
            if s.name == name:
                return s
        return None


# ---------------------------------------------------------------------------
# Objective registry


ObjectiveFn = Callable[[DeployableService, Optional[float]], float]

OBJECTIVES: dict[str, Callable[[Mapping], ObjectiveFn]] = {}


def register_objective(name: str, factory: Callable[[Mapping], ObjectiveFn]) -> None:
    OBJECTIVES[name] = factory


def resolve_objective(ref: ObjectiveRef) -> ObjectiveFn:
    factory = OBJECTIVES.get(ref.name)
    if factory is None:
        raise TranslationError(
            f"unknown objective {ref.name!r}; registered: {sorted(OBJECTIVES)}")
    return factory(ref.config_dict())


# ---------------------------------------------------------------------------
# Translation to HTN


def translate_to_htn(services: tuple[ServiceDescriptor, ...], macros: tuple[Macro, ...],
                     query: ServiceQuery, theory: Theory = Theory.empty()) -> HTNProblem:
    """One operator per service operation, one method per macro.

    Instance operations keep their handle as a plain input ("as if they were
    static"); constructors output a fresh handle constant, which later
    instance operations consume — the handle used is exactly the one the
    constructor returned.
    """
    operators = []
    op_names = set()
    for svc in services:
        for op in svc.operations:
            operators.append(Operator(
                name=qualified_name(svc.name, op.name),
                inputs=op.inputs,
                outputs=op.outputs,
                precondition=op.precondition,
                add_effects=op.add_effects,
                del_effects=op.del_effects,
            ))
            op_names.add(operators[-1].name)

    macro_tasks = {m.task.name for m in macros}
    for m in macros:
        for t in m.network:
            if t.name not in op_names and t.name not in macro_tasks:
                raise TranslationError(f"macro {m.name} calls unknown operation or macro task: {t.name}")
    for t in query.network:
        if t.name not in op_names and t.name not in macro_tasks:
            raise TranslationError(f"query network names unknown operation or macro task: {t.name}")

    methods = tuple(
        Method(m.name, m.task, m.inputs, m.outputs, m.precondition, m.network) for m in macros
    )
    return HTNProblem(
        operators=tuple(operators),
        methods=methods,
        initial_state=query.initial_facts,
        initial_network=query.network,
        theory=theory,
    )


# ---------------------------------------------------------------------------
# Plans -> compositions


def _wire_name(param: str) -> str:
    return param.lstrip("?")


def plan_to_composition(plan: Plan, problem: HTNProblem,
                        services: tuple[ServiceDescriptor, ...]) -> Composition:
    """Convert a validated plan into a composition.

    Input constants map back to their sources: constants present in the
    initial state are query inputs; fresh constants are outputs of the step
    that produced them.
    """
    check = validate_plan(problem, plan)
    if not check:
        raise ConversionError(f"plan is not valid: {check.reason}")
    registry = {s.name: s for s in services}
    sources: dict[str, Source] = {c: QueryInput(c) for c in problem.initial_state.constants}
    steps = []
    for i, action in enumerate(plan):
        svc_name, op_name = split_qualified(action.name)
        svc = registry.get(svc_name)
        op = svc.operation(op_name) if svc else None
        if op is None:
            raise ConversionError(f"plan action {action.name} is not a known service operation")
        inputs = []
        for param, constant in zip(op.inputs, action.input_constants):
            src = sources.get(constant)
            if src is None:
                raise ConversionError(f"step {i}: constant {constant!r} has no source")
            inputs.append((_wire_name(param), src))
        output = None
        for param, constant in zip(op.outputs, action.output_constants):
            output = _wire_name(param)
            sources[constant] = StepOutput(i, output)
        steps.append(CompositionStep(svc.name, op.name, svc.endpoint, tuple(inputs), output))
    return Composition(tuple(steps))


# ---------------------------------------------------------------------------
# Template injection


def inject_into_template(template: ServiceTemplate, constructor: Composition) -> DeployableService:
    """Fill the template's constructor slot, checking field coverage.

    The constructor must configure every declared instance field via its
    setter, and (when non-empty) must end on the template service so that
    executing it yields the deployed instance's handle.
    """
    for field_name, setter in template.instance_fields:
        covered = any(
            step.service == template.name and step.operation == setter
            for step in constructor.steps
        )
        if not covered:
            raise InjectionError(f"constructor does not configure field {field_name!r}")
    if constructor.steps and constructor.steps[-1].service != template.name:
        raise InjectionError(
            f"constructor must end on the template service {template.name!r} "
            "so its result is the instance handle")
    return DeployableService(template, constructor)


# ---------------------------------------------------------------------------
# The objective wrapper


def objective_wrapper(objective: ObjectiveFn, problem: HTNProblem,
                      services: tuple[ServiceDescriptor, ...], template: ServiceTemplate,
                      per_eval_timeout_s: Optional[float] = None,
                      hard_deadline: Optional[float] = None) -> Callable[[Plan], float]:
    """Bridge plan syntax to service invocation syntax.

    The returned evaluator converts a plan to a composition, injects it into
    the template, and hands the deployable service to the objective routine,
    enforcing the per-evaluation timeout (capped by the run's hard deadline,
    so a single in-flight evaluation cannot blow the overall budget).
    Execution failures become EvaluationFailure signals (discarded samples),
    never crashes.
    """

    def evaluate(plan: Plan) -> float:
        deadline = time.monotonic() + per_eval_timeout_s if per_eval_timeout_s else None
        if hard_deadline is not None:
            deadline = hard_deadline if deadline is None else min(deadline, hard_deadline)
        composition = plan_to_composition(plan, problem, services)
        try:
            deployable = inject_into_template(template, composition)
        except InjectionError as err:
            raise EvaluationFailure(str(err))
        try:
            score = objective(deployable, deadline)
        except EvaluationFailure:
            raise
        except (ServiceError, ClientError, OSError) as err:
            raise EvaluationFailure(f"execution failed: {err}")
        if deadline is not None and time.monotonic() > deadline:
            raise EvaluationFailure(timed_out=True)
        return score

    return evaluate
