"""HTN domain model and forward decomposition.

Operators are primitive steps with conditional add/delete effects; methods
decompose complex tasks into task networks (kept totally ordered — the planner
always refines the first unresolved task, and only sequential compositions are
supported downstream). Successor generation resolves primitive tasks eagerly
into the plan prefix, so a node is a goal exactly when no tasks remain.

Fresh objects created by operator or method outputs are named ``_c<k>`` from a
per-node counter, which keeps expansions reproducible. Variable names starting
with ``?_`` are reserved for internal renaming.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

from .logic import (
    TRUE,
    DomainError,
    Formula,
    Literal,
    StateConsistencyError,
    State,
    Substitution,
    Term,
    Theory,
    apply_substitution,
    formula_literals,
    free_variables,
    satisfies,
)

FRESH_PREFIX = "_c"
RESERVED_VAR_PREFIX = "?_"


def _check_param_names(owner: str, names: Iterable[str]) -> None:
    for v in names:
        if not v.startswith("?"):
            raise DomainError(f"{owner}: parameter {v!r} is not a variable")
        if v.startswith(RESERVED_VAR_PREFIX):
            raise DomainError(f"{owner}: variable prefix '?_' is reserved: {v!r}")


@dataclass(frozen=True)
class Effect:
    """One conditional effect: literals applied when the condition holds."""

    condition: Formula
    literals: tuple[Literal, ...]


def _ground_effects(effects: tuple[Effect, ...], sub: Substitution) -> tuple[Effect, ...]:
    return tuple(
        Effect(apply_substitution(e.condition, sub), tuple(sub.apply_literal(l) for l in e.literals))
        for e in effects
    )


@dataclass(frozen=True)
class Operator:
    name: str
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    precondition: Formula = TRUE
    add_effects: tuple[Effect, ...] = ()
    del_effects: tuple[Effect, ...] = ()

    def __post_init__(self):
        _check_param_names(f"operator {self.name}", itertools.chain(self.inputs, self.outputs))
        declared = set(self.inputs) | set(self.outputs)
        if set(self.inputs) & set(self.outputs):
            raise DomainError(f"operator {self.name}: inputs and outputs overlap")
        bad = free_variables(self.precondition) - set(self.inputs)
        if bad:
            raise DomainError(f"operator {self.name}: precondition uses non-input variables {sorted(bad)}")
        for eff in itertools.chain(self.add_effects, self.del_effects):
            used = set(free_variables(eff.condition))
            for lit in eff.literals:
                used |= {a.name for a in lit.args if a.is_var}
            if used - declared:
                raise DomainError(f"operator {self.name}: effect uses undeclared variables {sorted(used - declared)}")

    @property
    def params(self) -> tuple[str, ...]:
        return self.inputs + self.outputs


@dataclass(frozen=True)
class Action:
    """An operator with every parameter replaced by a constant."""

    operator: Operator
    grounding: Substitution

    def __post_init__(self):
        missing = [p for p in self.operator.params if p not in self.grounding]
        if missing:
            raise DomainError(f"action {self.operator.name}: unbound parameters {missing}")
        outs = self.output_constants
        if len(set(outs)) != len(outs):
            raise DomainError(f"action {self.operator.name}: duplicate output constants {outs}")
        if set(outs) & set(self.input_constants):
            raise DomainError(f"action {self.operator.name}: output constants collide with inputs")

    @property
    def name(self) -> str:
        return self.operator.name

    @property
    def input_constants(self) -> tuple[str, ...]:
        return tuple(self.grounding.get(p) for p in self.operator.inputs)

    @property
    def output_constants(self) -> tuple[str, ...]:
        return tuple(self.grounding.get(p) for p in self.operator.outputs)

    def ground_precondition(self) -> Formula:
        return apply_substitution(self.operator.precondition, self.grounding)

    def ground_add_effects(self) -> tuple[Effect, ...]:
        return _ground_effects(self.operator.add_effects, self.grounding)

    def ground_del_effects(self) -> tuple[Effect, ...]:
        return _ground_effects(self.operator.del_effects, self.grounding)

    def __str__(self) -> str:
        ins = ",".join(self.input_constants)
        outs = ",".join(self.output_constants)
        return f"{self.name}({ins}->{outs})" if outs else f"{self.name}({ins})"


def plan_key(plan: Iterable[Action]) -> str:
    """Canonical serialization of a plan; used for caching and logging."""
    return ";".join(str(a) for a in plan)


@dataclass(frozen=True)
class Task:
    name: str
    args: tuple[Term, ...] = ()

    def __str__(self) -> str:
        inner = self.name if not self.args else f"{self.name} " + " ".join(a.name for a in self.args)
        return f"({inner})"


TaskNetwork = tuple[Task, ...]


@dataclass(frozen=True)
class Method:
    name: str
    task: Task
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    precondition: Formula = TRUE
    network: TaskNetwork = ()

    def __post_init__(self):
        _check_param_names(f"method {self.name}", itertools.chain(self.inputs, self.outputs))
        bad = free_variables(self.precondition) - set(self.inputs)
        if bad:
            raise DomainError(f"method {self.name}: precondition uses non-input variables {sorted(bad)}")
        scope = set(self.inputs) | set(self.outputs) | {a.name for a in self.task.args if a.is_var}
        for t in self.network:
            for a in t.args:
                if a.is_var and a.name not in scope:
                    raise DomainError(f"method {self.name}: network variable {a.name} not in scope")


@dataclass(frozen=True)
class HTNProblem:
    operators: tuple[Operator, ...]
    methods: tuple[Method, ...]
    initial_state: State
    initial_network: TaskNetwork
    theory: Theory = Theory.empty()

    def __post_init__(self):
        names = [o.name for o in self.operators]
        if len(set(names)) != len(names):
            raise DomainError("duplicate operator names")
        mnames = [m.name for m in self.methods]
        if len(set(mnames)) != len(mnames):
            raise DomainError("duplicate method names")
        overlap = set(names) & {m.task.name for m in self.methods}
        if overlap:
            raise DomainError(f"task names both primitive and method-refined: {sorted(overlap)}")
        self._validate_tasks()
        self._validate_predicates()

    @cached_property
    def operator_by_name(self) -> dict[str, Operator]:
        return {o.name: o for o in self.operators}

    @cached_property
    def methods_by_task(self) -> dict[str, tuple[Method, ...]]:
        out: dict[str, list[Method]] = {}
        for m in self.methods:
            out.setdefault(m.task.name, []).append(m)
        return {k: tuple(v) for k, v in out.items()}

    def is_primitive(self, task_name: str) -> bool:
        return task_name in self.operator_by_name

    def _task_arity(self, name: str) -> Optional[int]:
        op = self.operator_by_name.get(name)
        if op is not None:
            return len(op.params)
        methods = self.methods_by_task.get(name)
        if methods:
            return len(methods[0].task.args)
        return None

    def _validate_tasks(self) -> None:
        for m in self.methods:
            arity = len(m.task.args)
            for other in self.methods_by_task[m.task.name]:
                if len(other.task.args) != arity:
                    raise DomainError(f"task {m.task.name}: methods disagree on arity")
        used_names = set()
        for t in itertools.chain(self.initial_network, *(m.network for m in self.methods)):
            used_names.add(t.name)
            expected = self._task_arity(t.name)
            if expected is None:
                raise DomainError(f"unresolvable task name: {t.name}")
            if len(t.args) != expected:
                raise DomainError(f"task {t.name} used with arity {len(t.args)}, declared {expected}")
            for a in t.args:
                if a.is_var and a.name.startswith(RESERVED_VAR_PREFIX):
                    raise DomainError(f"task {t.name}: variable prefix '?_' is reserved: {a.name!r}")
        unreachable = {m.task.name for m in self.methods} - used_names - {t.name for t in self.initial_network}
        if unreachable:
            warnings.warn(f"methods for tasks never referenced: {sorted(unreachable)}", stacklevel=2)

    def _validate_predicates(self) -> None:
        arities: dict[str, int] = dict(self.initial_state.predicate_arities)
        formulas: list[Formula] = [o.precondition for o in self.operators]
        formulas += [m.precondition for m in self.methods]
        literals: list[Literal] = []
        for o in self.operators:
            for eff in itertools.chain(o.add_effects, o.del_effects):
                formulas.append(eff.condition)
                literals.extend(eff.literals)
        for f in formulas:
            literals.extend(formula_literals(f))
        for lit in literals:
            if self.theory.interprets(lit.predicate):
                if lit.arity != self.theory.arity(lit.predicate):
                    raise DomainError(f"theory predicate {lit.predicate} used with arity {lit.arity}")
                continue
            known = arities.setdefault(lit.predicate, lit.arity)
            if known != lit.arity:
                raise DomainError(f"predicate {lit.predicate} used with arities {known} and {lit.arity}")


@dataclass(frozen=True)
class SearchNode:
    remaining: TaskNetwork
    state: State
    plan: tuple[Action, ...] = ()
    bindings: Substitution = Substitution.EMPTY
    fresh_counter: int = 0


def initial_node(problem: HTNProblem) -> SearchNode:
    return SearchNode(problem.initial_network, problem.initial_state)


def is_goal(node: SearchNode) -> bool:
    return not node.remaining


# ---------------------------------------------------------------------------
# Action semantics


def action_applicable(state: State, theory: Theory, action: Action) -> bool:
    """Precondition holds and no output constant already exists in the state."""
    for c in action.output_constants:
        if c in state.constants:
            return False
    return satisfies(state, theory, action.ground_precondition())


def apply_action(state: State, theory: Theory, action: Action) -> State:
    """Two-phase application: all effect conditions are read from the pre-state."""
    adds: list[Literal] = []
    dels: list[Literal] = []
    for eff in action.ground_del_effects():
        if satisfies(state, theory, eff.condition):
            dels.extend(eff.literals)
    for eff in action.ground_add_effects():
        if satisfies(state, theory, eff.condition):
            adds.extend(eff.literals)
    result = state.remove_literals(dels).add_literals(adds)
    return result.with_constants(action.output_constants)


# ---------------------------------------------------------------------------
# Successor generation (forward decomposition)


def _classify_vars(params: tuple[str, ...], args: tuple[Term, ...], outputs: set[str]):
    """Group unbound argument variables by role, preserving first-use order.

    A variable tied to any output position takes a fresh constant; otherwise it
    is enumerated over the state's constants. A variable spanning both an input
    and an output position cannot be grounded consistently (outputs must be
    fresh, distinct from inputs), which poisons the whole grounding.
    """
    roles: dict[str, set[str]] = {}
    for param, arg in zip(params, args):
        if arg.is_var:
            roles.setdefault(arg.name, set()).add("out" if param in outputs else "in")
    enum_vars: list[str] = []
    fresh_vars: list[str] = []
    for param, arg in zip(params, args):
        if not arg.is_var or arg.name in enum_vars or arg.name in fresh_vars:
            continue
        r = roles[arg.name]
        if r == {"in", "out"}:
            return None, None
        (fresh_vars if "out" in r else enum_vars).append(arg.name)
    return enum_vars, fresh_vars


def _groundings(node: SearchNode, params: tuple[str, ...], args: tuple[Term, ...], outputs: set[str]):
    """Yield (param->constant map, arg-var->constant assignment, counter), in
    deterministic order: lexicographic over enumerated constants."""
    enum_vars, fresh_vars = _classify_vars(params, args, outputs)
    if enum_vars is None:
        return
    candidates = sorted(node.state.constants)
    for combo in itertools.product(candidates, repeat=len(enum_vars)):
        assign = dict(zip(enum_vars, combo))
        counter = node.fresh_counter
        for v in fresh_vars:
            assign[v] = f"{FRESH_PREFIX}{counter}"
            counter += 1
        grounding = {p: (assign[a.name] if a.is_var else a.name) for p, a in zip(params, args)}
        yield grounding, assign, counter


def _primitive_successors(node: SearchNode, problem: HTNProblem, op: Operator, args: tuple[Term, ...],
                          rest: TaskNetwork) -> list[SearchNode]:
    children = []
    for grounding, assign, counter in _groundings(node, op.params, args, set(op.outputs)):
        try:
            action = Action(op, Substitution(grounding))
        except DomainError:
            continue  # e.g. one constant tied to two output parameters
        if not action_applicable(node.state, problem.theory, action):
            continue
        try:
            new_state = apply_action(node.state, problem.theory, action)
        except StateConsistencyError:
            continue  # contradictory effects make this grounding a dead end
        children.append(
            SearchNode(
                remaining=rest,
                state=new_state,
                plan=node.plan + (action,),
                bindings=node.bindings.extended(assign),
                fresh_counter=counter,
            )
        )
    return children


def _unify_pattern(pattern: Task, args: tuple[Term, ...]):
    """Match method pattern args against (binding-resolved) task args.

    Returns (pattern-var -> Term mapping, context-var -> constant bindings
    forced by constant pattern args), or None if the match fails.
    """
    mapping: dict[str, Term] = {}
    forced: dict[str, str] = {}
    for parg, arg in zip(pattern.args, args):
        if parg.is_var:
            prev = mapping.get(parg.name)
            if prev is not None and prev != arg:
                return None
            mapping[parg.name] = arg
        elif not arg.is_var:
            if parg.name != arg.name:
                return None
        else:
            prev = forced.get(arg.name)
            if prev is not None and prev != parg.name:
                return None
            forced[arg.name] = parg.name
    return mapping, forced


def _method_successors(node: SearchNode, problem: HTNProblem, method: Method, args: tuple[Term, ...],
                       rest: TaskNetwork) -> list[SearchNode]:
    unified = _unify_pattern(method.task, args)
    if unified is None:
        return []
    mapping, forced = unified
    if forced:
        forced_sub = Substitution(forced)
        mapping = {v: forced_sub.apply_term(t) for v, t in mapping.items()}

    # Present the method's parameters as one pseudo-task so the shared grounding
    # machinery enumerates free inputs and mints fresh constants for outputs.
    # Local variables are renamed to reserved '?_m<i>' names, so a method
    # variable can never capture an identically named context variable.
    pattern_vars = [a.name for a in method.task.args if a.is_var]
    local_vars: list[str] = []
    for v in itertools.chain(method.inputs, method.outputs, pattern_vars):
        if v not in local_vars:
            local_vars.append(v)
    rename = {v: f"{RESERVED_VAR_PREFIX}m{i}" for i, v in enumerate(local_vars)}
    params = tuple(rename[v] for v in local_vars)
    pseudo_args = tuple(mapping.get(v, Term(rename[v])) for v in local_vars)
    outputs = {rename[v] for v in method.outputs}

    try:
        base_bindings = node.bindings.extended(forced) if forced else node.bindings
    except DomainError:
        return []
    children = []
    for grounding, assign, counter in _groundings(node, params, pseudo_args, outputs):
        sub = Substitution({v: grounding[rename[v]] for v in local_vars})
        # Method applicability mirrors action applicability: precondition holds
        # and no output constant is already contained in the state.
        if any(sub.get(v) in node.state.constants for v in method.outputs):
            continue
        if not satisfies(node.state, problem.theory, apply_substitution(method.precondition, sub)):
            continue
        refinement = tuple(Task(t.name, tuple(sub.apply_term(a) for a in t.args)) for t in method.network)
        context = {v: c for v, c in assign.items() if not v.startswith(RESERVED_VAR_PREFIX)}
        try:
            bindings = base_bindings.extended(context) if context else base_bindings
        except DomainError:
            continue
        children.append(
            SearchNode(
                remaining=refinement + rest,
                state=node.state,
                plan=node.plan,
                bindings=bindings,
                fresh_counter=counter,
            )
        )
    return children


def successors(node: SearchNode, problem: HTNProblem) -> list[SearchNode]:
    """Expand the first remaining task; deterministic order.

    Primitive tasks yield one child per applicable grounding of the matching
    operator (lexicographic over enumerated constants); complex tasks yield one
    child per applicable method instantiation, methods in declaration order.
    A resolvable task with no applicable refinement is a dead end and yields no
    children; an unknown task name is a domain error.
    """
    if is_goal(node):
        raise ValueError("successors() called on a goal node")
    task = node.remaining[0]
    rest = node.remaining[1:]
    args = tuple(node.bindings.apply_term(a) for a in task.args)
    if problem.is_primitive(task.name):
        op = problem.operator_by_name[task.name]
        if len(args) != len(op.params):
            raise DomainError(f"task {task.name} has {len(args)} args, operator takes {len(op.params)}")
        return _primitive_successors(node, problem, op, args, rest)
    methods = problem.methods_by_task.get(task.name)
    if not methods:
        raise DomainError(f"unresolvable task name: {task.name}")
    children = []
    for m in methods:
        children.extend(_method_successors(node, problem, m, args, rest))
    return children


# ---------------------------------------------------------------------------
# Plan validation


@dataclass(frozen=True)
class PlanValidation:
    ok: bool
    failed_at: Optional[int] = None
    reason: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok


def validate_plan(problem: HTNProblem, plan: Iterable[Action]) -> PlanValidation:
    """Check each action is applicable in, and applied to, the running state."""
    state = problem.initial_state
    for i, action in enumerate(plan):
        if not action_applicable(state, problem.theory, action):
            return PlanValidation(False, i, f"action {action} not applicable at step {i}")
        try:
            state = apply_action(state, problem.theory, action)
        except StateConsistencyError as exc:
            return PlanValidation(False, i, f"action {action} produced a contradiction: {exc}")
    return PlanValidation(True)


def replay_state(problem: HTNProblem, plan: Iterable[Action]) -> State:
    """Replay a plan from s0; used by debug checks on SearchNode consistency."""
    state = problem.initial_state
    for action in plan:
        state = apply_action(state, problem.theory, action)
    return state
