"""Loading and dumping the JSON domain-definition files.

Two flavors share one format: a plain HTN domain (operators, methods, initial
state, initial network, theory enablement) and a service domain, which extends
it with service endpoints, macros, the query, and the template section.
Formulas, literals, and tasks are written in the prefix grammar, e.g.
``(and (p ?x) (not (q ?x a)))`` and ``(setPreprocessor ?pl ?p)``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

from .htn import Effect, HTNProblem, Method, Operator, Task
from .logic import (
    DomainError,
    Literal,
    State,
    Theory,
    format_formula,
    format_literal,
    parse_formula,
    parse_literal,
)
from .services import (
    Composition,
    Macro,
    ObjectiveRef,
    OBJECTIVES,
    ServiceDescriptor,
    ServiceDomain,
    ServiceOperation,
    ServiceQuery,
    ServiceTemplate,
    TranslationError,
)


def _load_doc(source) -> dict:
    if isinstance(source, Mapping):
        return dict(source)
    text = Path(source).read_text()
    return json.loads(text)


# ---------------------------------------------------------------------------
# Shared pieces


def parse_task(text: str) -> Task:
    lit = parse_literal(text)
    if not lit.positive:
        raise DomainError(f"a task cannot be negated: {text!r}")
    return Task(lit.predicate, lit.args)


def format_task(task: Task) -> str:
    return format_literal(Literal(task.name, task.args))


def _effects_from_doc(items) -> tuple[Effect, ...]:
    out = []
    for item in items or []:
        condition = parse_formula(item.get("when", "(and)"))
        literals = tuple(parse_literal(s) for s in item.get("literals", []))
        out.append(Effect(condition, literals))
    return tuple(out)


def _effects_to_doc(effects: tuple[Effect, ...]) -> list:
    return [
        {"when": format_formula(e.condition), "literals": [format_literal(l) for l in e.literals]}
        for e in effects
    ]


def _state_from_doc(doc) -> State:
    doc = doc or {}
    literals = [parse_literal(s) for s in doc.get("literals", [])]
    return State.of(literals, doc.get("constants", []))


def _state_to_doc(state: State) -> dict:
    return {
        "literals": sorted(format_literal(l) for l in state.literals),
        "constants": sorted(state.constants),
    }


def _theory_from_doc(doc) -> Theory:
    return Theory(tuple(doc or ()))


def _operator_fields(doc: dict) -> dict:
    return dict(
        inputs=tuple(doc.get("inputs", [])),
        outputs=tuple(doc.get("outputs", [])),
        precondition=parse_formula(doc.get("precondition", "(and)")),
        add_effects=_effects_from_doc(doc.get("add")),
        del_effects=_effects_from_doc(doc.get("del")),
    )


def _operator_fields_to_doc(op) -> dict:
    return {
        "inputs": list(op.inputs),
        "outputs": list(op.outputs),
        "precondition": format_formula(op.precondition),
        "add": _effects_to_doc(op.add_effects),
        "del": _effects_to_doc(op.del_effects),
    }


def _method_from_doc(doc: dict) -> Method:
    return Method(
        name=doc["name"],
        task=parse_task(doc["task"]),
        inputs=tuple(doc.get("inputs", [])),
        outputs=tuple(doc.get("outputs", [])),
        precondition=parse_formula(doc.get("precondition", "(and)")),
        network=tuple(parse_task(s) for s in doc.get("network", [])),
    )


def _method_to_doc(m) -> dict:
    return {
        "name": m.name,
        "task": format_task(m.task),
        "inputs": list(m.inputs),
        "outputs": list(m.outputs),
        "precondition": format_formula(m.precondition),
        "network": [format_task(t) for t in m.network],
    }


# ---------------------------------------------------------------------------
# HTN domain files


def load_htn_problem(source) -> HTNProblem:
    doc = _load_doc(source)
    operators = tuple(
        Operator(name=o["name"], **_operator_fields(o)) for o in doc.get("operators", [])
    )
    methods = tuple(_method_from_doc(m) for m in doc.get("methods", []))
    return HTNProblem(
        operators=operators,
        methods=methods,
        initial_state=_state_from_doc(doc.get("initial_state")),
        initial_network=tuple(parse_task(s) for s in doc.get("initial_network", [])),
        theory=_theory_from_doc(doc.get("theory")),
    )


def dump_htn_problem(problem: HTNProblem) -> dict:
    return {
        "operators": [{"name": o.name, **_operator_fields_to_doc(o)} for o in problem.operators],
        "methods": [_method_to_doc(m) for m in problem.methods],
        "initial_state": _state_to_doc(problem.initial_state),
        "initial_network": [format_task(t) for t in problem.initial_network],
        "theory": list(problem.theory.predicates),
    }


# ---------------------------------------------------------------------------
# Service domain files


def load_service_domain(source) -> ServiceDomain:
    doc = _load_doc(source)
    services = []
    for s in doc.get("services", []):
        operations = tuple(
            ServiceOperation(name=o["name"], static=o.get("static", True), **_operator_fields(o))
            for o in s.get("operations", [])
        )
        services.append(ServiceDescriptor(s["name"], s["endpoint"], operations))
    macros = tuple(
        Macro(
            name=m["name"],
            task=parse_task(m["task"]),
            inputs=tuple(m.get("inputs", [])),
            outputs=tuple(m.get("outputs", [])),
            precondition=parse_formula(m.get("precondition", "(and)")),
            network=tuple(parse_task(s) for s in m.get("network", [])),
        )
        for m in doc.get("macros", [])
    )
    qdoc = doc.get("query") or {}
    objective_doc = qdoc.get("objective") or {}
    objective = ObjectiveRef.of(objective_doc.get("name", ""), objective_doc.get("config"))
    if objective.name not in OBJECTIVES:
        raise TranslationError(
            f"query objective {objective.name!r} is not resolvable; registered: {sorted(OBJECTIVES)}")
    query = ServiceQuery(
        network=tuple(parse_task(s) for s in qdoc.get("network", [])),
        initial_facts=_state_from_doc(qdoc.get("facts")),
        objective=objective,
    )
    template = None
    tdoc = doc.get("template")
    if tdoc:
        template = ServiceTemplate(
            name=tdoc["name"],
            endpoint=tdoc["endpoint"],
            instance_fields=tuple((f, s) for f, s in tdoc.get("fields", [])),
            fixed_operations=tuple(
                (name, Composition.from_wire(comp))
                for name, comp in (tdoc.get("operations") or {}).items()
            ),
        )
    return ServiceDomain(
        services=tuple(services),
        macros=macros,
        query=query,
        template=template,
        theory=_theory_from_doc(doc.get("theory")),
    )


def dump_service_domain(domain: ServiceDomain) -> dict:
    doc: dict = {
        "services": [
            {
                "name": s.name,
                "endpoint": s.endpoint,
                "operations": [
                    {"name": op.name, "static": op.static, **_operator_fields_to_doc(op)}
                    for op in s.operations
                ],
            }
            for s in domain.services
        ],
        "macros": [_method_to_doc(m) for m in domain.macros],
        "query": {
            "network": [format_task(t) for t in domain.query.network],
            "facts": _state_to_doc(domain.query.initial_facts),
            "objective": {"name": domain.query.objective.name,
                          "config": domain.query.objective.config_dict()},
        },
        "theory": list(domain.theory.predicates),
    }
    if domain.template is not None:
        doc["template"] = {
            "name": domain.template.name,
            "endpoint": domain.template.endpoint,
            "fields": [list(pair) for pair in domain.template.instance_fields],
            "operations": {name: comp.to_wire() for name, comp in domain.template.fixed_operations},
        }
    return doc
