"""The pipeline-composition domain: services, macros, query, and template.

The search composes a pipeline constructor: create a pipeline instance, pick
and attach exactly one preprocessor (``identity`` covers the no-preprocessing
case), pick and attach exactly one classifier. Alternatives are separate
macros refining the same task, so the goal space factorizes into
(#preprocessor choices) x (#classifier choices).

Classifiers are split into two portfolio sets: set A lives on the primary
host, set B on the secondary host (a second, protocol-compatible runtime).
"""

from __future__ import annotations

from typing import Optional

from ..htn import Effect, Task
from ..logic import Literal, State, Term, Theory, parse_formula
from ..runtime.payload import Handle
from ..services import (
    Composition,
    CompositionStep,
    Macro,
    ObjectiveRef,
    QueryInput,
    ServiceDescriptor,
    ServiceDomain,
    ServiceOperation,
    ServiceQuery,
    ServiceTemplate,
)

PORTFOLIOS = ("all", "a", "b")

STATEFUL_PREPROCESSORS = ("scaler", "varsel")
SET_A_CLASSIFIERS = ("majority", "knn1", "stump")
SET_B_CLASSIFIERS = ("gnb", "knn3")

IDENTITY_CONSTANT = "identity"


class EmptyPortfolio(Exception):
    """The portfolio filter left no classifiers, so no pipeline can exist."""


def _lit(text: str) -> Literal:
    from ..logic import parse_literal

    return parse_literal(text)


def _preprocessor_service(name: str, endpoint: str) -> ServiceDescriptor:
    return ServiceDescriptor(name, endpoint, (
        ServiceOperation("new", outputs=("?handle",),
                         add_effects=(Effect(parse_formula("(and)"), (_lit(f"(preprocessor ?handle)"),)),)),
        ServiceOperation("fit", inputs=("?handle", "?features"), static=False),
        ServiceOperation("transform", inputs=("?handle", "?features"), outputs=("?result",), static=False),
    ))


def _classifier_service(name: str, endpoint: str) -> ServiceDescriptor:
    return ServiceDescriptor(name, endpoint, (
        ServiceOperation("new", outputs=("?handle",),
                         add_effects=(Effect(parse_formula("(and)"), (_lit(f"(classifier ?handle)"),)),)),
        ServiceOperation("train", inputs=("?handle", "?features", "?labels"), static=False),
        ServiceOperation("predict", inputs=("?handle", "?features"), outputs=("?predictions",), static=False),
    ))


def _pipeline_service(endpoint: str) -> ServiceDescriptor:
    configured = parse_formula("(and (pipelineInstance ?handle) (hasPreprocessor ?handle) (hasClassifier ?handle))")
    return ServiceDescriptor("pipeline", endpoint, (
        ServiceOperation("new", outputs=("?handle",),
                         add_effects=(Effect(parse_formula("(and)"), (_lit("(pipelineInstance ?handle)"),)),)),
        ServiceOperation("setPreprocessor", inputs=("?handle", "?p"), static=False,
                         precondition=parse_formula("(pipelineInstance ?handle)"),
                         add_effects=(Effect(parse_formula("(and)"), (_lit("(hasPreprocessor ?handle)"),)),)),
        ServiceOperation("setClassifier", inputs=("?handle", "?c"), static=False,
                         precondition=parse_formula("(pipelineInstance ?handle)"),
                         add_effects=(Effect(parse_formula("(and)"), (_lit("(hasClassifier ?handle)"),)),)),
        ServiceOperation("train", inputs=("?handle", "?features", "?labels"), static=False,
                         precondition=configured),
        ServiceOperation("predict", inputs=("?handle", "?features"), outputs=("?predictions",),
                         static=False, precondition=configured),
    ))


def _identity_service(endpoint: str) -> ServiceDescriptor:
    return ServiceDescriptor("identity", endpoint, (
        ServiceOperation("transform", inputs=("?features",), outputs=("?result",)),
    ))


def _preprocessor_macro(name: str) -> Macro:
    return Macro(
        name=f"use_{name}",
        task=Task("choosePreprocessor", (Term("?pl"),)),
        inputs=("?pl",),
        outputs=("?p",),
        precondition=parse_formula("(pipelineInstance ?pl)"),
        network=(
            Task(f"{name}.new", (Term("?p"),)),
            Task("pipeline.setPreprocessor", (Term("?pl"), Term("?p"))),
        ),
    )


def _identity_macro() -> Macro:
    return Macro(
        name="use_identity",
        task=Task("choosePreprocessor", (Term("?pl"),)),
        inputs=("?pl",),
        precondition=parse_formula("(pipelineInstance ?pl)"),
        network=(
            Task("pipeline.setPreprocessor", (Term("?pl"), Term(IDENTITY_CONSTANT))),
        ),
    )


def _classifier_macro(name: str) -> Macro:
    return Macro(
        name=f"use_{name}",
        task=Task("chooseClassifier", (Term("?pl"),)),
        inputs=("?pl",),
        outputs=("?c",),
        precondition=parse_formula("(pipelineInstance ?pl)"),
        network=(
            Task(f"{name}.new", (Term("?c"),)),
            Task("pipeline.setClassifier", (Term("?pl"), Term("?c"))),
        ),
    )


def _setup_macro() -> Macro:
    return Macro(
        name="configure_pipeline",
        task=Task("buildPipeline"),
        outputs=("?pl",),
        network=(
            Task("pipeline.new", (Term("?pl"),)),
            Task("choosePreprocessor", (Term("?pl"),)),
            Task("chooseClassifier", (Term("?pl"),)),
        ),
    )


def classifier_sets(portfolio: str, secondary_endpoint: Optional[str]) -> list[tuple[str, str]]:
    """(classifier name, hosting endpoint key) pairs for a portfolio filter."""
    if portfolio not in PORTFOLIOS:
        raise ValueError(f"portfolio must be one of {PORTFOLIOS}")
    pairs: list[tuple[str, str]] = []
    if portfolio in ("all", "a"):
        pairs.extend((name, "primary") for name in SET_A_CLASSIFIERS)
    if portfolio in ("all", "b") and secondary_endpoint:
        pairs.extend((name, "secondary") for name in SET_B_CLASSIFIERS)
    return pairs


def build_service_domain(primary_endpoint: str, secondary_endpoint: Optional[str] = None,
                         portfolio: str = "all",
                         objective: Optional[ObjectiveRef] = None) -> ServiceDomain:
    classifiers = classifier_sets(portfolio, secondary_endpoint)
    if not classifiers:
        raise EmptyPortfolio(f"portfolio {portfolio!r} selects no classifiers")

    services = [_pipeline_service(primary_endpoint)]
    services += [_preprocessor_service(n, primary_endpoint) for n in STATEFUL_PREPROCESSORS]
    services.append(_identity_service(primary_endpoint))
    for name, where in classifiers:
        endpoint = primary_endpoint if where == "primary" else secondary_endpoint
        services.append(_classifier_service(name, endpoint))

    macros = [_setup_macro()]
    macros += [_preprocessor_macro(n) for n in STATEFUL_PREPROCESSORS]
    macros.append(_identity_macro())
    macros += [_classifier_macro(name) for name, _ in classifiers]

    query = ServiceQuery(
        network=(Task("buildPipeline"),),
        initial_facts=State.of(
            literals=[_lit(f"(staticPreprocessor {IDENTITY_CONSTANT})")],
            constants=[IDENTITY_CONSTANT],
        ),
        objective=objective or ObjectiveRef.of("zero_one_benchmark"),
    )

    template = ServiceTemplate(
        name="pipeline",
        endpoint=primary_endpoint,
        instance_fields=(("preprocessor", "setPreprocessor"), ("classifier", "setClassifier")),
        fixed_operations=(
            ("train", Composition((CompositionStep(
                "pipeline", "train", primary_endpoint,
                inputs=(("handle", QueryInput("self")),
                        ("features", QueryInput("features")),
                        ("labels", QueryInput("labels"))),
            ),))),
            ("predict", Composition((CompositionStep(
                "pipeline", "predict", primary_endpoint,
                inputs=(("handle", QueryInput("self")),
                        ("features", QueryInput("features"))),
                output="predictions",
            ),))),
        ),
    )

    return ServiceDomain(
        services=tuple(services),
        macros=tuple(macros),
        query=query,
        template=template,
        theory=Theory.empty(),
    )


def query_input_values(primary_endpoint: str) -> dict:
    """Runtime values for the query's declared constants."""
    return {IDENTITY_CONSTANT: Handle(f"{primary_endpoint.rstrip('/')}/identity")}


def preprocessor_names() -> tuple[str, ...]:
    return STATEFUL_PREPROCESSORS + (IDENTITY_CONSTANT,)
