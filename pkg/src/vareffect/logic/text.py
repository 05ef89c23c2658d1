"""Text form of formulas: ``!``, ``&&``, ``^``, ``||`` (tightest first), parentheses,
``true``/``false`` and verbatim variable tokens such as ``VAR1=2`` or
``defined(VAR3)``."""

from __future__ import annotations

import re

from .formula import FALSE, TRUE, Formula, Not, Var, Xor, conj, disj


class FormulaSyntaxError(ValueError):
    def __init__(self, text: str, position: int, message: str):
        super().__init__(f"{message} at offset {position} in {text!r}")
        self.text = text
        self.position = position


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<op>&&|\|\||[!^()])
      | (?P<var>defined\(\s*[A-Za-z_]\w*\s*\)
               |[A-Za-z_][\w.]*(?:=[-+]?[\w.+-]+)?)
    )""",
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    end = len(text.rstrip())
    while pos < end:
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(text, pos, "unexpected character")
        if m.group("op"):
            tokens.append(("op", m.group("op"), m.start("op")))
        else:
            tok = re.sub(r"\s+", "", m.group("var"))
            tokens.append(("var", tok, m.start("var")))
        pos = m.end()
    return tokens


def parse_formula(text: str) -> Formula:
    """Parse the text form produced by ``str(formula)``."""
    tokens = _tokenize(text)
    pos = 0

    def peek() -> str | None:
        return tokens[pos][1] if pos < len(tokens) else None

    def fail(msg: str):
        offset = tokens[pos][2] if pos < len(tokens) else len(text)
        raise FormulaSyntaxError(text, offset, msg)

    def parse_or() -> Formula:
        nonlocal pos
        items = [parse_xor()]
        while peek() == "||":
            pos += 1
            items.append(parse_xor())
        return disj(items)

    def parse_xor() -> Formula:
        nonlocal pos
        left = parse_and()
        while peek() == "^":
            pos += 1
            left = Xor(left, parse_and())
        return left

    def parse_and() -> Formula:
        nonlocal pos
        items = [parse_unary()]
        while peek() == "&&":
            pos += 1
            items.append(parse_unary())
        return conj(items)

    def parse_unary() -> Formula:
        nonlocal pos
        if pos >= len(tokens):
            fail("unexpected end of input")
        kind, tok, _ = tokens[pos]
        if tok == "!":
            pos += 1
            return Not(parse_unary())
        if tok == "(":
            pos += 1
            inner = parse_or()
            if peek() != ")":
                fail("expected ')'")
            pos += 1
            return inner
        if kind == "var":
            pos += 1
            if tok == "true":
                return TRUE
            if tok == "false":
                return FALSE
            return Var(tok)
        fail(f"unexpected token {tok!r}")

    if not tokens:
        raise FormulaSyntaxError(text, 0, "empty formula")
    result = parse_or()
    if pos != len(tokens):
        fail("trailing input")
    return result


def format_formula(f: Formula) -> str:
    return f.key
