"""Logical substrate: terms, literals, formulas, states, theories, substitutions.

States are open-world sets of ground literals: a positive literal is satisfied
only if it is present, a negated literal only if the explicit negative literal
is present. Absence satisfies neither. Quantifiers range over the (finite) set
of constants registered in a state. Interpreted predicates are decided by a
Theory and ignore state membership entirely.

Variables are identifiers carrying a leading ``?`` marker; everything else is
a constant. All values in this module are immutable and hashable.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Mapping, Union

VARIABLE_MARKER = "?"

# Connective names reserved by the formula grammar.
RESERVED_WORDS = frozenset({"and", "or", "not", "exists"})


class DomainError(Exception):
    """Structural problem in a domain: bad arity, unbound variable, unknown name."""


class TheoryError(Exception):
    """An interpreted predicate could not be evaluated on the given arguments."""


class StateConsistencyError(Exception):
    """A state mutation would introduce p and (not p) simultaneously."""


def is_variable(name: str) -> bool:
    return name.startswith(VARIABLE_MARKER)


@dataclass(frozen=True)
class Term:
    """A constant or variable; variables carry the leading ``?`` marker."""

    name: str

    def __post_init__(self):
        if not self.name or self.name == VARIABLE_MARKER:
            raise DomainError(f"empty term name: {self.name!r}")

    @property
    def is_var(self) -> bool:
        return is_variable(self.name)

    @property
    def kind(self) -> str:
        return "variable" if self.is_var else "constant"

    def __str__(self) -> str:
        return self.name


def var(name: str) -> Term:
    t = Term(name)
    if not t.is_var:
        raise DomainError(f"not a variable name: {name!r}")
    return t


def const(name: str) -> Term:
    t = Term(name)
    if t.is_var:
        raise DomainError(f"not a constant name: {name!r}")
    return t


@dataclass(frozen=True)
class Literal:
    predicate: str
    args: tuple[Term, ...] = ()
    positive: bool = True

    def __post_init__(self):
        if not self.predicate:
            raise DomainError("empty predicate name")
        if self.predicate in RESERVED_WORDS:
            raise DomainError(f"reserved word used as predicate: {self.predicate}")

    @property
    def is_ground(self) -> bool:
        return all(not a.is_var for a in self.args)

    @property
    def arity(self) -> int:
        return len(self.args)

    def negated(self) -> "Literal":
        return Literal(self.predicate, self.args, not self.positive)

    def __str__(self) -> str:
        inner = self.predicate if not self.args else f"{self.predicate} " + " ".join(map(str, self.args))
        s = f"({inner})"
        return s if self.positive else f"(not {s})"


# ---------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class Lit:
    literal: Literal


@dataclass(frozen=True)
class And:
    parts: tuple = ()


@dataclass(frozen=True)
class Or:
    parts: tuple = ()


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    variable: str
    body: "Formula"

    def __post_init__(self):
        if not is_variable(self.variable):
            raise DomainError(f"exists binds a non-variable: {self.variable!r}")


Formula = Union[Lit, And, Or, Not, Exists]

TRUE = And(())
FALSE = Or(())


def free_variables(formula: Formula) -> frozenset[str]:
    if isinstance(formula, Lit):
        return frozenset(a.name for a in formula.literal.args if a.is_var)
    if isinstance(formula, (And, Or)):
        out: frozenset[str] = frozenset()
        for p in formula.parts:
            out |= free_variables(p)
        return out
    if isinstance(formula, Not):
        return free_variables(formula.body)
    if isinstance(formula, Exists):
        return free_variables(formula.body) - {formula.variable}
    raise TypeError(f"not a formula: {formula!r}")


def formula_literals(formula: Formula) -> Iterable[Literal]:
    """All literal occurrences, used for arity auditing at domain load."""
    if isinstance(formula, Lit):
        yield formula.literal
    elif isinstance(formula, (And, Or)):
        for p in formula.parts:
            yield from formula_literals(p)
    elif isinstance(formula, Not):
        yield from formula_literals(formula.body)
    elif isinstance(formula, Exists):
        yield from formula_literals(formula.body)


# ---------------------------------------------------------------------------
# Substitutions


class Substitution:
    """Immutable map from variable names to constant names.

    Idempotent by construction: values are constants, never variables, so
    applying a substitution twice equals applying it once.
    """

    __slots__ = ("_map", "_hash")

    def __init__(self, bindings: Mapping[str, str] | None = None):
        m = dict(bindings or {})
        for v, c in m.items():
            if not is_variable(v):
                raise DomainError(f"substitution key is not a variable: {v!r}")
            if is_variable(c):
                raise DomainError(f"substitution value is not a constant: {c!r}")
        object.__setattr__(self, "_map", m)
        object.__setattr__(self, "_hash", hash(frozenset(m.items())))

    EMPTY: "Substitution"

    def get(self, name: str, default: str | None = None) -> str | None:
        return self._map.get(name, default)

    def items(self):
        return self._map.items()

    def keys(self):
        return self._map.keys()

    def __contains__(self, name: str) -> bool:
        return name in self._map

    def __len__(self) -> int:
        return len(self._map)

    def __eq__(self, other) -> bool:
        return isinstance(other, Substitution) and self._map == other._map

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{v}->{c}" for v, c in sorted(self._map.items()))
        return f"Substitution({inner})"

    def extended(self, more: Mapping[str, str]) -> "Substitution":
        for v, c in more.items():
            old = self._map.get(v)
            if old is not None and old != c:
                raise DomainError(f"conflicting binding for {v}: {old} vs {c}")
        merged = dict(self._map)
        merged.update(more)
        return Substitution(merged)

    def apply_term(self, t: Term) -> Term:
        if t.is_var:
            c = self._map.get(t.name)
            if c is not None:
                return Term(c)
        return t

    def apply_literal(self, lit: Literal) -> Literal:
        return Literal(lit.predicate, tuple(self.apply_term(a) for a in lit.args), lit.positive)

    def without(self, names: Iterable[str]) -> "Substitution":
        drop = set(names)
        return Substitution({v: c for v, c in self._map.items() if v not in drop})


Substitution.EMPTY = Substitution()


def apply_substitution(formula: Formula, sub: Substitution) -> Formula:
    """Replace free variables; quantifier-bound occurrences are untouched."""
    if isinstance(formula, Lit):
        return Lit(sub.apply_literal(formula.literal))
    if isinstance(formula, And):
        return And(tuple(apply_substitution(p, sub) for p in formula.parts))
    if isinstance(formula, Or):
        return Or(tuple(apply_substitution(p, sub) for p in formula.parts))
    if isinstance(formula, Not):
        return Not(apply_substitution(formula.body, sub))
    if isinstance(formula, Exists):
        return Exists(formula.variable, apply_substitution(formula.body, sub.without([formula.variable])))
    raise TypeError(f"not a formula: {formula!r}")


# ---------------------------------------------------------------------------
# Theory


def _int_arg(name: str) -> int:
    if name.startswith("n"):
        body = name[1:]
        if body.lstrip("-").isdigit():
            return int(body)
    raise TheoryError(f"not an integer constant (expected n<k>): {name!r}")


def _member(element: str, collection: str) -> bool:
    # collections are constants whose name joins elements with '+', e.g. a+b+c
    return element in collection.split("+")


_BUILTIN_PREDICATES: dict[str, tuple[int, Callable[..., bool]]] = {
    "lt": (2, lambda a, b: _int_arg(a) < _int_arg(b)),
    "le": (2, lambda a, b: _int_arg(a) <= _int_arg(b)),
    "eq": (2, lambda a, b: _int_arg(a) == _int_arg(b)),
    "member": (2, _member),
}


@dataclass(frozen=True)
class Theory:
    """Interpreted predicates with total, deterministic decision procedures.

    Builtins: integer comparison `lt`/`le`/`eq` over constants named `n<k>`,
    and `member` over collection constants whose name joins elements with `+`.
    """

    predicates: tuple[str, ...] = ()

    def __post_init__(self):
        for name in self.predicates:
            if name not in _BUILTIN_PREDICATES:
                raise DomainError(f"unknown theory predicate: {name!r}")

    @classmethod
    def empty(cls) -> "Theory":
        return cls(())

    @classmethod
    def default(cls) -> "Theory":
        return cls(tuple(sorted(_BUILTIN_PREDICATES)))

    def interprets(self, predicate: str) -> bool:
        return predicate in self.predicates

    def arity(self, predicate: str) -> int:
        return _BUILTIN_PREDICATES[predicate][0]

    def evaluate(self, predicate: str, args: tuple[str, ...]) -> bool:
        arity, fn = _BUILTIN_PREDICATES[predicate]
        if len(args) != arity:
            raise DomainError(f"theory predicate {predicate} expects {arity} args, got {len(args)}")
        try:
            return bool(fn(*args))
        except TheoryError:
            raise
        except Exception as exc:  # decision procedures must be total; surface clearly
            raise TheoryError(f"evaluation of {predicate}{args} failed: {exc}") from exc


# ---------------------------------------------------------------------------
# State


@dataclass(frozen=True)
class State:
    literals: frozenset = frozenset()
    constants: frozenset = frozenset()

    def __post_init__(self):
        seen: dict[tuple, bool] = {}
        for lit in self.literals:
            if not lit.is_ground:
                raise DomainError(f"state literal is not ground: {lit}")
            key = (lit.predicate, lit.args)
            if key in seen and seen[key] != lit.positive:
                raise StateConsistencyError(f"contradictory literals for {lit.predicate}{lit.args}")
            seen[key] = lit.positive

    @classmethod
    def of(cls, literals: Iterable[Literal] = (), constants: Iterable[str] = ()) -> "State":
        lits = frozenset(literals)
        consts = set(constants)
        for lit in lits:
            consts.update(a.name for a in lit.args)
        return cls(lits, frozenset(consts))

    @cached_property
    def _index(self) -> frozenset:
        return self.literals  # membership by full (predicate, args, sign) identity

    @cached_property
    def predicate_arities(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for lit in self.literals:
            prev = out.setdefault(lit.predicate, lit.arity)
            if prev != lit.arity:
                raise DomainError(f"inconsistent arity for {lit.predicate}: {prev} vs {lit.arity}")
        return out

    def holds(self, lit: Literal) -> bool:
        return lit in self._index

    def add_literals(self, lits: Iterable[Literal]) -> "State":
        new = frozenset(lits)
        for lit in new:
            if not lit.is_ground:
                raise DomainError(f"cannot add non-ground literal: {lit}")
        merged = self.literals | new
        consts = set(self.constants)
        for lit in new:
            consts.update(a.name for a in lit.args)
        return State(merged, frozenset(consts))

    def remove_literals(self, lits: Iterable[Literal]) -> "State":
        return State(self.literals - frozenset(lits), self.constants)

    def with_constants(self, names: Iterable[str]) -> "State":
        return State(self.literals, self.constants | frozenset(names))


# ---------------------------------------------------------------------------
# Satisfaction


def _check_arity(state: State, theory: Theory, lit: Literal) -> None:
    if theory.interprets(lit.predicate):
        if lit.arity != theory.arity(lit.predicate):
            raise DomainError(
                f"theory predicate {lit.predicate} expects {theory.arity(lit.predicate)} args, got {lit.arity}"
            )
        return
    known = state.predicate_arities.get(lit.predicate)
    if known is not None and known != lit.arity:
        raise DomainError(f"predicate {lit.predicate} used with arity {lit.arity}, state fixes {known}")


def _eval_literal(state: State, theory: Theory, lit: Literal) -> bool:
    if not lit.is_ground:
        raise DomainError(f"satisfaction query on non-ground literal: {lit}")
    _check_arity(state, theory, lit)
    if theory.interprets(lit.predicate):
        value = theory.evaluate(lit.predicate, tuple(a.name for a in lit.args))
        return value if lit.positive else not value
    # Open world: a signed literal holds only if explicitly present with that sign.
    return state.holds(lit)


def satisfies(state: State, theory: Theory, formula: Formula) -> bool:
    """Decide a ground formula against a state under a theory.

    Negation is pushed inward (De Morgan / quantifier duality); at the literal
    level a negation holds only via an explicit negative literal, matching the
    open-world reading. Existentials ground over state.constants.
    """
    if isinstance(formula, Lit):
        return _eval_literal(state, theory, formula.literal)
    if isinstance(formula, And):
        return all(satisfies(state, theory, p) for p in formula.parts)
    if isinstance(formula, Or):
        return any(satisfies(state, theory, p) for p in formula.parts)
    if isinstance(formula, Exists):
        if free_variables(formula):
            raise DomainError(f"satisfaction query on open formula: {format_formula(formula)}")
        for c in sorted(state.constants):
            if satisfies(state, theory, apply_substitution(formula.body, Substitution({formula.variable: c}))):
                return True
        return False
    if isinstance(formula, Not):
        inner = formula.body
        if isinstance(inner, Lit):
            return _eval_literal(state, theory, inner.literal.negated())
        if isinstance(inner, Not):
            return satisfies(state, theory, inner.body)
        if isinstance(inner, And):
            return any(satisfies(state, theory, Not(p)) for p in inner.parts)
        if isinstance(inner, Or):
            return all(satisfies(state, theory, Not(p)) for p in inner.parts)
        if isinstance(inner, Exists):
            for c in sorted(state.constants):
                body = apply_substitution(inner.body, Substitution({inner.variable: c}))
                if not satisfies(state, theory, Not(body)):
                    return False
            return True
    raise TypeError(f"not a formula: {formula!r}")


# ---------------------------------------------------------------------------
# Textual grammar: prefix notation, e.g. (and (p ?x) (not (q ?x a)))


def _tokenize(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _read(tokens: list[str], pos: int):
    if pos >= len(tokens):
        raise DomainError("unexpected end of formula text")
    tok = tokens[pos]
    if tok == ")":
        raise DomainError("unexpected ')'")
    if tok != "(":
        return tok, pos + 1
    items = []
    pos += 1
    while pos < len(tokens) and tokens[pos] != ")":
        item, pos = _read(tokens, pos)
        items.append(item)
    if pos >= len(tokens):
        raise DomainError("unbalanced '(' in formula text")
    return items, pos + 1


def _sexpr(text: str):
    tokens = _tokenize(text)
    expr, pos = _read(tokens, 0)
    if pos != len(tokens):
        raise DomainError(f"trailing tokens in formula text: {text!r}")
    return expr


def _formula_from_sexpr(expr) -> Formula:
    if isinstance(expr, str):
        raise DomainError(f"bare atom is not a formula: {expr!r}")
    if not expr:
        return TRUE
    head = expr[0]
    if head == "and":
        return And(tuple(_formula_from_sexpr(e) for e in expr[1:]))
    if head == "or":
        return Or(tuple(_formula_from_sexpr(e) for e in expr[1:]))
    if head == "not":
        if len(expr) != 2:
            raise DomainError("'not' takes exactly one formula")
        return Not(_formula_from_sexpr(expr[1]))
    if head == "exists":
        if len(expr) != 3 or not isinstance(expr[1], list) or not expr[1]:
            raise DomainError("'exists' takes a (?var ...) list and a body")
        body = _formula_from_sexpr(expr[2])
        for v in reversed(expr[1]):
            if not isinstance(v, str) or not is_variable(v):
                raise DomainError(f"exists binds a non-variable: {v!r}")
            body = Exists(v, body)
        return body
    if not isinstance(head, str):
        raise DomainError(f"formula head must be an atom: {head!r}")
    args = []
    for a in expr[1:]:
        if not isinstance(a, str):
            raise DomainError(f"literal argument must be an atom: {a!r}")
        args.append(Term(a))
    return Lit(Literal(head, tuple(args)))


def parse_formula(text: str) -> Formula:
    return _formula_from_sexpr(_sexpr(text))


def parse_literal(text: str) -> Literal:
    """Parse a (possibly negated) literal, e.g. ``(p a)`` or ``(not (p a))``."""
    f = parse_formula(text)
    if isinstance(f, Lit):
        return f.literal
    if isinstance(f, Not) and isinstance(f.body, Lit):
        return f.body.literal.negated()
    raise DomainError(f"not a literal: {text!r}")


def format_formula(formula: Formula) -> str:
    if isinstance(formula, Lit):
        lit = formula.literal
        core = lit.predicate if not lit.args else f"{lit.predicate} " + " ".join(a.name for a in lit.args)
        s = f"({core})"
        return s if lit.positive else f"(not {s})"
    if isinstance(formula, And):
        return "(and" + "".join(" " + format_formula(p) for p in formula.parts) + ")"
    if isinstance(formula, Or):
        return "(or" + "".join(" " + format_formula(p) for p in formula.parts) + ")"
    if isinstance(formula, Not):
        return f"(not {format_formula(formula.body)})"
    if isinstance(formula, Exists):
        return f"(exists ({formula.variable}) {format_formula(formula.body)})"
    raise TypeError(f"not a formula: {formula!r}")


def format_literal(lit: Literal) -> str:
    return format_formula(Lit(lit))
