"""Preprocessor condition expressions: AST, parser and C-like rendering."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Iterator, Union


class ConditionParseError(ValueError):
    def __init__(self, text: str, position: int, message: str = "malformed condition"):
        super().__init__(f"{message} at offset {position} in {text!r}")
        self.text = text
        self.position = position
        self.message = message


@dataclass(frozen=True)
class Num:
    value: Union[int, float]


@dataclass(frozen=True)
class Ident:
    name: str


@dataclass(frozen=True)
class Defined:
    name: str


@dataclass(frozen=True)
class BoolConst:
    """Result of folding a fully-constant Boolean sub-expression."""

    value: bool


@dataclass(frozen=True)
class Opaque:
    """Stand-in for a condition that could not be parsed or evaluated."""

    name: str
    text: str = ""


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Ident, Defined, BoolConst, Opaque, Unary, Binary]

TRUE_EXPR = BoolConst(True)

RELATIONAL = frozenset({"==", "!=", "<", "<=", ">", ">="})
LOGICAL = frozenset({"&&", "||"})
ARITHMETIC = frozenset({"+", "-", "*", "/", "%", "<<", ">>", "&", "|", "^"})

# binding power per binary operator, C precedence
PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "|": 3,
    "^": 4,
    "&": 5,
    "==": 6,
    "!=": 6,
    "<": 7,
    "<=": 7,
    ">": 7,
    ">=": 7,
    "<<": 8,
    ">>": 8,
    "+": 9,
    "-": 9,
    "*": 10,
    "/": 10,
    "%": 10,
}
_UNARY_POWER = 11

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>(?:0[xX][0-9a-fA-F]+|(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)[uUlLfF]*)
      | (?P<ident>[A-Za-z_]\w*)
      | (?P<op>&&|\|\||==|!=|<=|>=|<<|>>|[-+*/%<>&|^!~()])
    )""",
    re.VERBOSE,
)


def opaque_for(text: str) -> Opaque:
    """Deterministic opaque variable for an unparsable condition text."""
    digest = hashlib.sha1(" ".join(text.split()).encode("utf-8", "surrogateescape")).hexdigest()[:10]
    return Opaque(f"__opaque_{digest}", text)


def parse_number(text: str) -> Union[int, float]:
    raw = text.rstrip("uUlLfF") if not text.lower().startswith("0x") else text.rstrip("uUlL")
    if raw.lower().startswith("0x"):
        return int(raw, 16)
    if re.fullmatch(r"\d+", raw):
        if len(raw) > 1 and raw.startswith("0"):
            return int(raw, 8)
        return int(raw)
    return float(raw)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    end = len(text.rstrip())
    while pos < end:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ConditionParseError(text, pos, "unexpected character")
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return out


def parse_condition(text: str) -> Expr:
    """Parse the condition part of ``#if``/``#elif`` with C operator precedence."""
    tokens = _tokenize(text)
    if not tokens:
        raise ConditionParseError(text, 0, "empty condition")
    pos = 0

    def peek(offset: int = 0):
        i = pos + offset
        return tokens[i] if i < len(tokens) else (None, None, len(text))

    def fail(msg: str):
        raise ConditionParseError(text, peek()[2], msg)

    def expect(tok: str) -> None:
        nonlocal pos
        if peek()[1] != tok:
            fail(f"expected {tok!r}")
        pos += 1

    def primary() -> Expr:
        nonlocal pos
        kind, tok, _ = peek()
        if kind is None:
            fail("unexpected end of condition")
        if kind == "num":
            pos += 1
            try:
                return Num(parse_number(tok))
            except ValueError:
                fail(f"bad number {tok!r}")
        if kind == "ident":
            pos += 1
            if tok == "defined":
                if peek()[1] == "(":
                    pos += 1
                    k, name, _ = peek()
                    if k != "ident":
                        fail("expected identifier after defined(")
                    pos += 1
                    expect(")")
                    return Defined(name)
                k, name, _ = peek()
                if k != "ident":
                    fail("expected identifier after defined")
                pos += 1
                return Defined(name)
            return Ident(tok)
        if tok == "(":
            pos += 1
            inner = expression(0)
            expect(")")
            return inner
        if tok in ("!", "-", "+", "~"):
            pos += 1
            return Unary(tok, expression(_UNARY_POWER))
        fail(f"unexpected token {tok!r}")

    def expression(min_power: int) -> Expr:
        nonlocal pos
        left = primary()
        while True:
            kind, tok, _ = peek()
            if kind != "op" or tok not in PRECEDENCE:
                return left
            power = PRECEDENCE[tok]
            if power <= min_power:
                return left
            pos += 1
            left = Binary(tok, left, expression(power))

    result = expression(0)
    if pos != len(tokens):
        fail(f"unexpected token {peek()[1]!r}")
    return result


def ifdef_condition(name: str, negated: bool) -> Expr:
    """``#ifdef X`` / ``#ifndef X``."""
    if not re.fullmatch(r"[A-Za-z_]\w*", name):
        raise ConditionParseError(name, 0, "expected a macro name")
    d = Defined(name)
    return Unary("!", d) if negated else d


def negate_expr(e: Expr) -> Expr:
    if isinstance(e, Unary) and e.op == "!":
        return e.operand
    if isinstance(e, BoolConst):
        return BoolConst(not e.value)
    return Unary("!", e)


def conjoin(parts: list[Expr]) -> Expr:
    """Left-folded ``&&`` chain; empty -> TRUE."""
    parts = [p for p in parts if p != TRUE_EXPR]
    if not parts:
        return TRUE_EXPR
    out = parts[0]
    for p in parts[1:]:
        out = Binary("&&", out, p)
    return out


def is_boolean_valued(e: Expr) -> bool:
    if isinstance(e, (Defined, BoolConst, Opaque)):
        return True
    if isinstance(e, Unary):
        return e.op == "!"
    if isinstance(e, Binary):
        return e.op in RELATIONAL or e.op in LOGICAL
    return False


def identifiers(e: Expr) -> Iterator[str]:
    """Names used as values (not under ``defined``)."""
    if isinstance(e, Ident):
        yield e.name
    elif isinstance(e, Unary):
        yield from identifiers(e.operand)
    elif isinstance(e, Binary):
        yield from identifiers(e.left)
        yield from identifiers(e.right)


def defined_names(e: Expr) -> Iterator[str]:
    if isinstance(e, Defined):
        yield e.name
    elif isinstance(e, Unary):
        yield from defined_names(e.operand)
    elif isinstance(e, Binary):
        yield from defined_names(e.left)
        yield from defined_names(e.right)


def format_number(v: Union[int, float]) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def render(e: Expr, parent_power: int = 0) -> str:
    """C-like text with only the parentheses precedence requires."""
    if isinstance(e, Num):
        return format_number(e.value)
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, Defined):
        return f"defined({e.name})"
    if isinstance(e, BoolConst):
        return "1" if e.value else "0"
    if isinstance(e, Opaque):
        return e.name
    if isinstance(e, Unary):
        inner = render(e.operand, _UNARY_POWER)
        text = f"{e.op}{inner}"
        return f"({text})" if parent_power > _UNARY_POWER else text
    if isinstance(e, Binary):
        p = PRECEDENCE[e.op]
        text = f"{render(e.left, p - 1)} {e.op} {render(e.right, p)}"
        return f"({text})" if p <= parent_power else text
    raise TypeError(f"not a condition expression: {e!r}")
