import json
from pathlib import Path

import pytest

import svcompose.automl  # registers the benchmark objective
from svcompose.automl.domain import build_service_domain
from svcompose.domainfile import (
    dump_htn_problem,
    dump_service_domain,
    format_task,
    load_htn_problem,
    load_service_domain,
    parse_task,
)
from svcompose.htn import Task
from svcompose.logic import DomainError, Term
from svcompose.search import enumerate_goal_plans
from svcompose.services import ObjectiveRef, TranslationError, translate_to_htn

from toys import random_toy_domain

DATA = Path(__file__).resolve().parent.parent / "data"


HTN_DOC = {
    "operators": [
        {"name": "mk", "outputs": ["?x"],
         "add": [{"literals": ["(made ?x)"]}]},
        {"name": "use", "inputs": ["?x"], "precondition": "(made ?x)"},
    ],
    "methods": [
        {"name": "m", "task": "(go)", "outputs": ["?v"],
         "network": ["(mk ?v)", "(use ?v)"]},
    ],
    "initial_state": {"literals": ["(p a)", "(not (q b))"], "constants": ["a", "b"]},
    "initial_network": ["(go)"],
    "theory": ["lt", "le"],
}


class TestTaskGrammar:
    def test_round_trip(self):
        for text in ["(go)", "(setPreprocessor ?pl ?p)", "(use a ?x)"]:
            assert format_task(parse_task(text)) == text

    def test_parse(self):
        assert parse_task("(f ?x a)") == Task("f", (Term("?x"), Term("a")))

    def test_negated_task_rejected(self):
        with pytest.raises(DomainError):
            parse_task("(not (go))")


class TestHtnFiles:
    def test_load_and_solve(self):
        problem = load_htn_problem(HTN_DOC)
        assert len(problem.operators) == 2
        assert problem.theory.predicates == ("lt", "le")
        (plan,) = enumerate_goal_plans(problem)
        assert [a.name for a in plan] == ["mk", "use"]

    def test_round_trip_stable(self):
        problem = load_htn_problem(HTN_DOC)
        doc = dump_htn_problem(problem)
        assert dump_htn_problem(load_htn_problem(doc)) == doc

    def test_round_trip_on_generated_domains(self):
        for seed in range(3):
            problem, plans = random_toy_domain(seed, max_goal_plans=60)
            doc = dump_htn_problem(problem)
            reloaded = load_htn_problem(doc)
            reloaded_plans = enumerate_goal_plans(reloaded)
            assert len(reloaded_plans) == len(plans)

    def test_file_path_loading(self, tmp_path):
        path = tmp_path / "domain.json"
        path.write_text(json.dumps(HTN_DOC))
        assert len(load_htn_problem(path).operators) == 2

    def test_unknown_theory_predicate(self):
        doc = dict(HTN_DOC, theory=["gt"])
        with pytest.raises(DomainError):
            load_htn_problem(doc)


class TestServiceFiles:
    def test_reference_automl_file_loads(self):
        domain = load_service_domain(DATA / "automl_services.json")
        assert {s.name for s in domain.services} >= {"pipeline", "scaler", "knn1", "gnb"}
        assert domain.template is not None
        assert domain.query.objective.name == "zero_one_benchmark"
        problem = translate_to_htn(domain.services, domain.macros, domain.query, domain.theory)
        assert len(enumerate_goal_plans(problem)) == 15  # 3 preprocessors x 5 classifiers

    def test_round_trip_equals_builder(self):
        domain = build_service_domain("http://h:1", "http://h:2", portfolio="all")
        doc = dump_service_domain(domain)
        reloaded = load_service_domain(doc)
        assert dump_service_domain(reloaded) == doc
        assert reloaded.template.instance_fields == domain.template.instance_fields

    def test_unresolvable_objective_rejected(self):
        domain = build_service_domain("http://h:1", portfolio="a",
                                      objective=ObjectiveRef.of("nonexistent_objective"))
        doc = dump_service_domain(domain)
        with pytest.raises(TranslationError):
            load_service_domain(doc)
