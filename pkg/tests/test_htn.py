import itertools

import pytest

from svcompose.htn import (
    Action,
    Effect,
    HTNProblem,
    Method,
    Operator,
    SearchNode,
    Task,
    action_applicable,
    apply_action,
    initial_node,
    is_goal,
    plan_key,
    replay_state,
    successors,
    validate_plan,
)
from svcompose.logic import (
    TRUE,
    DomainError,
    Literal,
    State,
    Substitution,
    Term,
    Theory,
    parse_formula,
    parse_literal,
)

from toys import expansion_nodes, random_toy_domain

T = Theory.empty()


def lit(text):
    return parse_literal(text)


class TestActionSemantics:
    def test_fresh_output_applicable(self):
        op = Operator("mk", outputs=("?x",))
        action = Action(op, Substitution({"?x": "c17"}))
        assert action_applicable(State.of(constants=["a"]), T, action)

    def test_existing_output_blocks(self):
        # an action whose output constant is already known cannot apply
        op = Operator("mk", outputs=("?x",))
        action = Action(op, Substitution({"?x": "c17"}))
        assert not action_applicable(State.of(constants=["c17"]), T, action)

    def test_matches_definitional_oracle(self):
        op = Operator("go", inputs=("?a",), outputs=("?b",),
                      precondition=parse_formula("(at ?a)"))
        constants = ["x", "y", "z"]
        state = State.of([lit("(at x)"), lit("(at y)")], constants)
        for a, b in itertools.product(constants + ["fresh"], repeat=2):
            try:
                action = Action(op, Substitution({"?a": a, "?b": b}))
            except DomainError:
                continue
            from svcompose.logic import satisfies

            oracle = (
                satisfies(state, T, parse_formula(f"(at {a})"))
                and b not in state.constants
            )
            assert action_applicable(state, T, action) == oracle

    def test_empty_effects_register_outputs_only(self):
        op = Operator("mk", outputs=("?x",))
        state = State.of([lit("(p a)")])
        out = apply_action(state, T, Action(op, Substitution({"?x": "c1"})))
        assert out.literals == state.literals
        assert "c1" in out.constants

    def test_conditional_add_effect(self):
        op = Operator("step", add_effects=(Effect(parse_formula("(p a)"), (lit("(q b)"),)),))
        action = Action(op, Substitution())
        with_p = apply_action(State.of([lit("(p a)")]), T, action)
        assert lit("(q b)") in with_p.literals
        without_p = apply_action(State.of([lit("(r c)")]), T, action)
        assert lit("(q b)") not in without_p.literals

    def test_two_phase_semantics(self):
        # delete p(a) while an add conditioned on p(a) fires: the condition is
        # read from the pre-application state, so both effects land.
        op = Operator(
            "swap",
            add_effects=(Effect(parse_formula("(p a)"), (lit("(q b)"),)),),
            del_effects=(Effect(TRUE, (lit("(p a)"),)),),
        )
        pre = State.of([lit("(p a)")])
        adds = [lit("(q b)")] if True else []
        expected = (pre.literals - {lit("(p a)")}) | set(adds)
        out = apply_action(pre, T, Action(op, Substitution()))
        assert out.literals == frozenset(expected)

    def test_action_invariants(self):
        op = Operator("mk2", outputs=("?x", "?y"))
        with pytest.raises(DomainError):
            Action(op, Substitution({"?x": "c1", "?y": "c1"}))
        op2 = Operator("cp", inputs=("?a",), outputs=("?b",))
        with pytest.raises(DomainError):
            Action(op2, Substitution({"?a": "c1", "?b": "c1"}))
        with pytest.raises(DomainError):
            Action(op2, Substitution({"?a": "c1"}))


class TestOperatorValidation:
    def test_precondition_variables_must_be_inputs(self):
        with pytest.raises(DomainError):
            Operator("bad", inputs=("?a",), precondition=parse_formula("(p ?b)"))

    def test_effect_variables_must_be_declared(self):
        with pytest.raises(DomainError):
            Operator("bad", add_effects=(Effect(TRUE, (Literal("p", (Term("?z"),)),)),))

    def test_inputs_outputs_disjoint(self):
        with pytest.raises(DomainError):
            Operator("bad", inputs=("?a",), outputs=("?a",))


def two_method_problem():
    op_a = Operator("a")
    op_b = Operator("b")
    op_c = Operator("c")
    methods = (
        Method("m1", Task("t"), network=(Task("a"), Task("b"))),
        Method("m2", Task("t"), network=(Task("c"),)),
    )
    return HTNProblem((op_a, op_b, op_c), methods, State.of(), (Task("t"), Task("a")))


class TestSuccessors:
    def test_goal_node_rejected(self):
        problem = two_method_problem()
        goal = SearchNode((), problem.initial_state)
        with pytest.raises(ValueError):
            successors(goal, problem)

    def test_two_methods_two_children_in_declaration_order(self):
        problem = two_method_problem()
        kids = successors(initial_node(problem), problem)
        assert len(kids) == 2
        assert [k.remaining[0].name for k in kids] == ["a", "c"]

    def test_refinement_replaces_task_in_place(self):
        # remaining [t, a]: decomposing t splices its refinement before a
        problem = two_method_problem()
        kids = successors(initial_node(problem), problem)
        assert [t.name for t in kids[0].remaining] == ["a", "b", "a"]
        assert [t.name for t in kids[1].remaining] == ["c", "a"]

    def test_primitive_consumed_into_plan(self):
        problem = two_method_problem()
        node = successors(initial_node(problem), problem)[1]  # remaining [c, a]
        child = successors(node, problem)[0]
        assert [t.name for t in child.remaining] == ["a"]
        assert [a.name for a in child.plan] == ["c"]

    def test_dead_end_yields_empty_list(self):
        gate = Operator("gate", precondition=parse_formula("(open)"))
        problem = HTNProblem((gate,), (), State.of(), (Task("gate"),))
        assert successors(initial_node(problem), problem) == []

    def test_unknown_task_name_is_domain_error(self):
        problem = two_method_problem()
        node = SearchNode((Task("nosuch"),), problem.initial_state)
        with pytest.raises(DomainError):
            successors(node, problem)

    def test_input_enumeration_is_lexicographic(self):
        pick = Operator("pick", inputs=("?x",), precondition=parse_formula("(item ?x)"))
        state = State.of([lit("(item b)"), lit("(item a)"), lit("(item c)")])
        problem = HTNProblem((pick,), (), state, (Task("pick", (Term("?w"),)),))
        kids = successors(initial_node(problem), problem)
        assert [k.plan[0].input_constants[0] for k in kids] == ["a", "b", "c"]
        # the chosen constant is recorded in the binding context
        assert [k.bindings.get("?w") for k in kids] == ["a", "b", "c"]

    def test_primitive_matches_brute_force_grounder(self):
        pick = Operator("pair", inputs=("?x", "?y"),
                        precondition=parse_formula("(and (item ?x) (not (item ?y)))"))
        state = State.of([lit("(item a)"), lit("(item b)"), lit("(not (item c))")])
        problem = HTNProblem((pick,), (), state,
                             (Task("pair", (Term("?u"), Term("?v"))),))
        kids = successors(initial_node(problem), problem)
        got = {(k.plan[0].input_constants) for k in kids}
        oracle = set()
        for x, y in itertools.product(sorted(state.constants), repeat=2):
            action = Action(pick, Substitution({"?x": x, "?y": y}))
            if action_applicable(state, T, action):
                oracle.add((x, y))
        assert got == oracle
        assert got == {("a", "c"), ("b", "c")}

    def test_method_instantiation_matches_brute_force(self):
        use = Operator("use", inputs=("?x",))
        m = Method("choose", Task("go"), inputs=("?x",),
                   precondition=parse_formula("(item ?x)"),
                   network=(Task("use", (Term("?x"),)),))
        state = State.of([lit("(item a)"), lit("(item b)"), lit("(other z)")])
        problem = HTNProblem((use,), (m,), state, (Task("go"),))
        kids = successors(initial_node(problem), problem)
        got = {k.remaining[0].args[0].name for k in kids}
        from svcompose.logic import satisfies

        oracle = {
            c for c in state.constants
            if satisfies(state, T, parse_formula(f"(item {c})"))
        }
        assert got == oracle == {"a", "b"}

    def test_method_outputs_take_fresh_constants(self):
        mk = Operator("mk", outputs=("?h",))
        use = Operator("use2", inputs=("?h",))
        m = Method("build", Task("go"), outputs=("?h",),
                   network=(Task("mk", (Term("?h"),)), Task("use2", (Term("?h"),))))
        problem = HTNProblem((mk, use), (m,), State.of(constants=["a"]), (Task("go"),))
        (child,) = successors(initial_node(problem), problem)
        names = [t.args[0].name for t in child.remaining]
        assert names == ["_c0", "_c0"]
        assert child.fresh_counter == 1


class TestOnToyDomains:
    @pytest.mark.parametrize("seed", range(6))
    def test_generator_validator_agreement(self, seed):
        problem, plans = random_toy_domain(seed)
        for node in expansion_nodes(problem):
            assert validate_plan(problem, node.plan)

    @pytest.mark.parametrize("seed", range(6))
    def test_fresh_output_constants_never_collide(self, seed):
        problem, plans = random_toy_domain(seed)
        for plan in plans:
            seen = set(problem.initial_state.constants)
            for action in plan:
                for c in action.output_constants:
                    assert c not in seen
                    seen.add(c)

    @pytest.mark.parametrize("seed", range(6))
    def test_node_states_replay_from_s0(self, seed):
        problem, _ = random_toy_domain(seed)
        for node in expansion_nodes(problem):
            assert replay_state(problem, node.plan) == node.state

    @pytest.mark.parametrize("seed", range(4))
    def test_expansion_is_deterministic(self, seed):
        problem, _ = random_toy_domain(seed)
        first = [plan_key(n.plan) + "|" + str(len(n.remaining)) for n in expansion_nodes(problem)]
        second = [plan_key(n.plan) + "|" + str(len(n.remaining)) for n in expansion_nodes(problem)]
        assert first == second

    def test_goal_iff_no_tasks_remain(self):
        problem, _ = random_toy_domain(1)
        for node in expansion_nodes(problem):
            assert is_goal(node) == (len(node.remaining) == 0)


class TestValidatePlan:
    def test_empty_plan(self):
        problem = two_method_problem()
        assert validate_plan(problem, ())

    def test_goal_plans_validate(self):
        problem, plans = random_toy_domain(2)
        for plan in plans:
            assert validate_plan(problem, plan)

    def test_failure_reports_index(self):
        gate = Operator("gate", precondition=parse_formula("(open)"))
        unlock = Operator("unlock", add_effects=(Effect(TRUE, (lit("(open)"),)),))
        problem = HTNProblem((gate, unlock), (), State.of(), (Task("unlock"), Task("gate")))
        bad = (Action(gate, Substitution()), Action(unlock, Substitution()))
        check = validate_plan(problem, bad)
        assert not check
        assert check.failed_at == 0
        good = (Action(unlock, Substitution()), Action(gate, Substitution()))
        assert validate_plan(problem, good)


class TestProblemValidation:
    def test_primitive_and_method_name_clash(self):
        with pytest.raises(DomainError):
            HTNProblem((Operator("t"),), (Method("m", Task("t"), network=(Task("t"),)),),
                       State.of(), (Task("t"),))

    def test_unresolvable_network_task(self):
        with pytest.raises(DomainError):
            HTNProblem((Operator("a"),), (), State.of(), (Task("ghost"),))

    def test_task_arity_consistency(self):
        with pytest.raises(DomainError):
            HTNProblem((Operator("a", inputs=("?x",)),), (), State.of(), (Task("a"),))

    def test_unreachable_method_warns(self):
        with pytest.warns(UserWarning):
            HTNProblem((Operator("a"),),
                       (Method("m", Task("unused"), network=(Task("a"),)),),
                       State.of(), (Task("a"),))

    def test_predicate_arity_fixed_by_first_use(self):
        with pytest.raises(DomainError):
            HTNProblem(
                (Operator("a", precondition=parse_formula("(p x)")),
                 Operator("b", precondition=parse_formula("(p x y)")),),
                (), State.of(), (Task("a"),))
