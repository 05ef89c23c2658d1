"""Translation of numeric preprocessor conditions into propositional formulas.

Every value ``v`` of a bounded feature ``F`` becomes a pseudo-variable
``F=v``; ``defined(F)`` is a pseudo-variable of its own. Relational
sub-expressions over bounded features are expanded by enumerating the joint
range of the features involved. Unbounded features (no declared range) only
contribute their definedness.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from .logic import FALSE, TRUE, And, AxiomSet, Formula, Not, Var, conj, disj
from .ppparse.expr import (
    RELATIONAL,
    Binary,
    BoolConst,
    Defined,
    Expr,
    Ident,
    Num,
    Opaque,
    Unary,
    defined_names,
    identifiers,
    opaque_for,
    render,
)
from .varmodel import FeatureModel, defined_var, value_var

Number = Union[int, float]
DEFAULT_EXPANSION_LIMIT = 4096

UNDEF = object()


class UnknownFeature(KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"identifier {self.name!r} is neither a feature nor a known constant"


class DivisionByZero(ArithmeticError):
    def __init__(self, expr: Expr):
        super().__init__(f"division by zero in {render(expr)}")
        self.expr = expr


class _NotNumeric(Exception):
    """Evaluation hit an operation undefined for the operand types."""


def c_binop(op: str, a: Number, b: Number) -> Number:
    """C preprocessor semantics for one binary operator on numbers."""
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op in ("/", "%"):
        if b == 0:
            raise ZeroDivisionError
        if isinstance(a, int) and isinstance(b, int):
            q = abs(a) // abs(b)
            q = q if (a >= 0) == (b >= 0) else -q
            return q if op == "/" else a - b * q
        if op == "%":
            raise _NotNumeric(op)
        return a / b
    if op in ("<<", ">>", "&", "|", "^"):
        if not (isinstance(a, int) and isinstance(b, int)):
            raise _NotNumeric(op)
        if op == "<<":
            if b < 0:
                raise _NotNumeric(op)
            return a << b
        if op == ">>":
            if b < 0:
                raise _NotNumeric(op)
            return a >> b
        return {"&": a & b, "|": a | b, "^": a ^ b}[op]
    if op == "==":
        return int(a == b)
    if op == "!=":
        return int(a != b)
    if op == "<":
        return int(a < b)
    if op == "<=":
        return int(a <= b)
    if op == ">":
        return int(a > b)
    if op == ">=":
        return int(a >= b)
    if op == "&&":
        return int(bool(a) and bool(b))
    if op == "||":
        return int(bool(a) or bool(b))
    raise _NotNumeric(op)


def c_unop(op: str, a: Number) -> Number:
    if op == "!":
        return int(not a)
    if op == "-":
        return -a
    if op == "+":
        return a
    if op == "~":
        if not isinstance(a, int):
            raise _NotNumeric(op)
        return ~a
    raise _NotNumeric(op)


# -- constant folding -------------------------------------------------------


def fold_constants(
    e: Expr, constants: Mapping[str, Number], problems: Optional[list] = None
) -> Expr:
    """Substitute known constants and evaluate fully-constant sub-expressions.

    Relational and logical results become ``BoolConst``; arithmetic results
    become ``Num``. A division by zero turns the offending sub-expression into
    an opaque variable and is appended to *problems* (if given).
    """

    def value_of(x: Expr) -> Optional[Number]:
        if isinstance(x, Num):
            return x.value
        if isinstance(x, BoolConst):
            return int(x.value)
        return None

    def as_node(op: str, v: Number) -> Expr:
        if op in RELATIONAL or op in ("&&", "||", "!"):
            return BoolConst(bool(v))
        return Num(v)

    def go(x: Expr) -> Expr:
        if isinstance(x, Ident):
            if x.name in constants:
                return Num(constants[x.name])
            return x
        if isinstance(x, Defined):
            return BoolConst(True) if x.name in constants else x
        if isinstance(x, Unary):
            inner = go(x.operand)
            v = value_of(inner)
            if v is not None:
                try:
                    return as_node(x.op, c_unop(x.op, v))
                except _NotNumeric:
                    pass
            return x if inner is x.operand else Unary(x.op, inner)
        if isinstance(x, Binary):
            left, right = go(x.left), go(x.right)
            a, b = value_of(left), value_of(right)
            if a is not None and b is not None:
                try:
                    return as_node(x.op, c_binop(x.op, a, b))
                except ZeroDivisionError:
                    bad = Binary(x.op, left, right)
                    err = DivisionByZero(bad)
                    if problems is not None:
                        problems.append(err)
                    return opaque_for(render(bad))
                except _NotNumeric:
                    pass
            if left is x.left and right is x.right:
                return x
            return Binary(x.op, left, right)
        return x

    return go(e)


# -- translation ------------------------------------------------------------


@dataclass
class TranslationResult:
    formula: Formula
    used_pseudo_variables: frozenset[str]
    degraded_nodes: int = 0
    unknown: frozenset[str] = frozenset()
    problems: list = field(default_factory=list)


class Translator:
    """Stateless-per-call translator bound to one feature model and mode.

    Atom translations are memoised, so one instance should be reused for a
    whole product.
    """

    def __init__(
        self,
        model: FeatureModel,
        undefined_as_zero: bool = False,
        expansion_limit: int = DEFAULT_EXPANSION_LIMIT,
        strict: bool = False,
    ):
        self.model = model
        self.undefined_as_zero = undefined_as_zero
        self.expansion_limit = expansion_limit
        self.strict = strict
        self._atoms: dict[Expr, tuple[Formula, int]] = {}

    def translate(self, e: Expr) -> TranslationResult:
        problems: list = []
        folded = fold_constants(e, self.model.constants, problems)
        stats = {"degraded": len(problems), "unknown": set()}
        formula = self._bool(folded, stats)
        return TranslationResult(
            formula=formula,
            used_pseudo_variables=formula.variables(),
            degraded_nodes=stats["degraded"],
            unknown=frozenset(stats["unknown"]),
            problems=problems,
        )

    def _check_known(self, name: str, stats: dict) -> None:
        if name in self.model.features or name in self.model.constants:
            return
        if self.strict:
            raise UnknownFeature(name)
        stats["unknown"].add(name)

    def _bool(self, e: Expr, stats: dict) -> Formula:
        if isinstance(e, BoolConst):
            return TRUE if e.value else FALSE
        if isinstance(e, Opaque):
            return Var(e.name)
        if isinstance(e, Defined):
            if e.name in self.model.constants:
                return TRUE
            self._check_known(e.name, stats)
            return Var(defined_var(e.name))
        if isinstance(e, Num):
            return TRUE if e.value != 0 else FALSE
        if isinstance(e, Unary) and e.op == "!":
            return Not(self._bool(e.operand, stats))
        if isinstance(e, Binary) and e.op in ("&&", "||"):
            left, right = self._bool(e.left, stats), self._bool(e.right, stats)
            return conj([left, right]) if e.op == "&&" else disj([left, right])
        return self._atom(e, stats)

    def _atom(self, e: Expr, stats: dict) -> Formula:
        """A numeric-valued or relational sub-expression, read as ``!= 0``."""
        names = sorted(set(identifiers(e)) | set(defined_names(e)))
        for n in names:
            self._check_known(n, stats)
        hit = self._atoms.get(e)
        if hit is None:
            hit = self._atoms[e] = self._expand(e)
        formula, degraded = hit
        stats["degraded"] += degraded
        return formula

    def _expand(self, e: Expr) -> tuple[Formula, int]:
        opaque = sorted({n.name for n in _walk(e) if isinstance(n, Opaque)})
        if opaque:
            # already counted when the opaque variable was introduced
            return conj([Var(o) for o in opaque]), 0
        numeric = set(identifiers(e))
        only_defined = set(defined_names(e)) - numeric
        names = sorted(numeric | only_defined)
        if not names:
            try:
                return (TRUE if _eval(e, {}) else FALSE), 0
            except (_NotNumeric, ZeroDivisionError):
                return FALSE, 1
        feats = [self.model.features.get(n) for n in names]
        if any(f is None or not f.bounded for f in feats):
            degraded = int(any(f is not None and f.bounded for f in feats))
            return conj([Var(defined_var(n)) for n in names]), degraded

        axes = []
        for f in feats:
            states: list = list(f.values)
            if self.undefined_as_zero or f.name in only_defined:
                states.append(UNDEF)
            axes.append(states)
        total = math.prod(len(a) for a in axes)
        if total > self.expansion_limit:
            return conj([Var(defined_var(n)) for n in names]), 1

        terms = []
        for combo in itertools.product(*axes):
            env = dict(zip(names, combo))
            if not self.undefined_as_zero and any(env[n] is UNDEF for n in numeric):
                continue
            try:
                ok = _eval(e, env, self.undefined_as_zero)
            except (_NotNumeric, ZeroDivisionError):
                ok = False
            if ok:
                terms.append(conj([_state_literal(n, s) for n, s in env.items()]))
        return disj(terms), 0


def _state_literal(feature: str, state) -> Formula:
    if state is UNDEF:
        return Not(Var(defined_var(feature)))
    return Var(value_var(feature, state))


def _walk(e: Expr):
    yield e
    if isinstance(e, Unary):
        yield from _walk(e.operand)
    elif isinstance(e, Binary):
        yield from _walk(e.left)
        yield from _walk(e.right)


def _eval(e: Expr, env: dict, undefined_as_zero: bool = False) -> Number:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, BoolConst):
        return int(e.value)
    if isinstance(e, Ident):
        v = env[e.name]
        if v is UNDEF:
            if undefined_as_zero:
                return 0
            raise _NotNumeric(e.name)
        return v
    if isinstance(e, Defined):
        return int(env[e.name] is not UNDEF)
    if isinstance(e, Unary):
        return c_unop(e.op, _eval(e.operand, env, undefined_as_zero))
    if isinstance(e, Binary):
        if e.op in ("&&", "||"):
            left = _eval(e.left, env, undefined_as_zero)
            if e.op == "&&" and not left:
                return 0
            if e.op == "||" and left:
                return 1
            return int(bool(_eval(e.right, env, undefined_as_zero)))
        return c_binop(
            e.op,
            _eval(e.left, env, undefined_as_zero),
            _eval(e.right, env, undefined_as_zero),
        )
    raise _NotNumeric(type(e).__name__)


def translate(
    e: Expr,
    model: FeatureModel,
    undefined_as_zero: bool = False,
    expansion_limit: int = DEFAULT_EXPANSION_LIMIT,
    strict: bool = False,
) -> TranslationResult:
    """One-shot translation; use :class:`Translator` for many expressions."""
    return Translator(model, undefined_as_zero, expansion_limit, strict).translate(e)


def domain_axioms(model: FeatureModel, features=None) -> AxiomSet:
    """At-most-one value per bounded feature, and ``defined(F)`` iff some value is held."""
    axioms: list[Formula] = []
    for f in model.bounded():
        if features is not None and f.name not in features:
            continue
        axioms.extend(feature_axioms(f.name, f.values))
    return AxiomSet(axioms)


def feature_axioms(name: str, values) -> list[Formula]:
    vals = [Var(value_var(name, v)) for v in values]
    at_most_one = conj([Not(And([a, b])) for a, b in itertools.combinations(vals, 2)])
    d = Var(defined_var(name))
    some = disj(vals)
    definedness = And([disj([Not(d), some]), disj([d, Not(some)])])
    return [at_most_one, definedness]
