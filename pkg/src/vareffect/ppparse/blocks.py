"""Block-based extraction of ``#if`` structure from C sources.

No macro expansion, no ``#include`` following: each conditional directive
becomes a block, and ordinary lines are attributed to the innermost block.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

from .expr import (
    TRUE_EXPR,
    ConditionParseError,
    Expr,
    conjoin,
    ifdef_condition,
    negate_expr,
    opaque_for,
    parse_condition,
    render,
)

IF, IFDEF, IFNDEF, ELIF, ELSE = "IF", "IFDEF", "IFNDEF", "ELIF", "ELSE"

_DIRECTIVE = re.compile(r"^\s*#\s*([A-Za-z_]\w*)\b(.*)$", re.DOTALL)


class UnbalancedDirectives(ValueError):
    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


@dataclass
class CodeBlock:
    path: str
    start: int
    end: int
    kind: str
    text: str
    expr: Optional[Expr]
    condition: Expr
    children: list["CodeBlock"] = field(default_factory=list)
    error_only: bool = False
    degraded: bool = False
    # bookkeeping while scanning
    _content: bool = field(default=False, repr=False, compare=False)
    _errors: bool = field(default=False, repr=False, compare=False)

    def walk(self) -> Iterator["CodeBlock"]:
        yield self
        for c in self.children:
            yield from c.walk()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "start": self.start,
            "end": self.end,
            "text": self.text,
            "expr": render(self.expr) if self.expr is not None else None,
            "condition": render(self.condition),
            "error_only": self.error_only,
            "degraded": self.degraded,
            "children": [c.to_dict() for c in self.children],
        }


@dataclass
class BlockTree:
    path: str
    blocks: list[CodeBlock] = field(default_factory=list)
    top_level_content: bool = False
    degraded: list[tuple[int, str, str]] = field(default_factory=list)

    def walk(self) -> Iterator[CodeBlock]:
        for b in self.blocks:
            yield from b.walk()

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "top_level_content": self.top_level_content,
            "degraded": [{"line": ln, "text": t, "error": e} for ln, t, e in self.degraded],
            "blocks": [b.to_dict() for b in self.blocks],
        }


def _logical_lines(text: str) -> Iterator[tuple[int, str]]:
    """Yield (first physical line number, spliced line with comments removed).

    Comments are replaced by a single space; a block comment that spans lines
    swallows those lines, so directives inside comments are never seen.
    """
    lines = text.splitlines()
    i = 0
    in_comment = False
    while i < len(lines):
        start = i + 1
        buf = lines[i]
        while buf.endswith("\\") and i + 1 < len(lines):
            i += 1
            buf = buf[:-1] + lines[i]
        i += 1
        out = []
        j = 0
        in_string: Optional[str] = None
        while j < len(buf):
            if in_comment:
                k = buf.find("*/", j)
                if k < 0:
                    j = len(buf)
                else:
                    in_comment = False
                    out.append(" ")
                    j = k + 2
                continue
            ch = buf[j]
            if in_string:
                out.append(ch)
                if ch == "\\" and j + 1 < len(buf):
                    out.append(buf[j + 1])
                    j += 2
                    continue
                if ch == in_string:
                    in_string = None
                j += 1
                continue
            if buf.startswith("/*", j):
                in_comment = True
                j += 2
                continue
            if buf.startswith("//", j):
                break
            if ch in "\"'":
                in_string = ch
            out.append(ch)
            j += 1
        yield start, "".join(out)


class _Group:
    """One ``#if ... #endif`` group being scanned."""

    def __init__(self, parent_children: list[CodeBlock]):
        self.siblings = parent_children
        self.branches: list[CodeBlock] = []
        self.own: list[Expr] = []
        self.closed_else = False


def _condition_for(kind: str, arg: str, tree: BlockTree, line: int) -> tuple[Expr, bool]:
    try:
        if kind in (IFDEF, IFNDEF):
            words = arg.split()
            return ifdef_condition(words[0] if words else "", kind == IFNDEF), False
        return parse_condition(arg), False
    except ConditionParseError as err:
        tree.degraded.append((line, arg.strip(), str(err)))
        return opaque_for(arg), True


def scan_blocks(source: str | bytes, path: str = "<string>") -> BlockTree:
    """Extract the conditional-compilation block tree of one source file."""
    if isinstance(source, bytes):
        source = source.decode("latin-1")
    tree = BlockTree(path)
    stack: list[_Group] = []

    def current_children() -> list[CodeBlock]:
        return stack[-1].branches[-1].children if stack else tree.blocks

    def close_branch(line: int) -> None:
        group = stack[-1]
        branch = group.branches[-1]
        branch.end = line
        has_error = branch._errors or any(c._errors for c in branch.children)
        branch.error_only = (
            not branch._content
            and has_error
            and all(c.error_only for c in branch.children)
        )
        # propagate to the enclosing branch so a parent knows it contains errors
        branch._errors = has_error

    def open_branch(kind: str, arg: str, line: int) -> None:
        group = stack[-1]
        if kind == ELSE:
            own, degraded = None, False
            effective = conjoin([negate_expr(e) for e in group.own])
        else:
            own, degraded = _condition_for(kind, arg, tree, line)
            effective = conjoin([negate_expr(e) for e in group.own] + [own])
            group.own.append(own)
        block = CodeBlock(
            path=path,
            start=line,
            end=line,
            kind=kind,
            text=arg.strip(),
            expr=own,
            condition=effective,
            degraded=degraded,
        )
        group.branches.append(block)
        group.siblings.append(block)

    for line_no, line in _logical_lines(source):
        m = _DIRECTIVE.match(line)
        if m is None:
            if line.strip():
                if stack:
                    stack[-1].branches[-1]._content = True
                else:
                    tree.top_level_content = True
            continue
        name, arg = m.group(1), m.group(2)
        if name in ("if", "ifdef", "ifndef"):
            kind = {"if": IF, "ifdef": IFDEF, "ifndef": IFNDEF}[name]
            stack.append(_Group(current_children()))
            open_branch(kind, arg, line_no)
        elif name in ("elif", "else"):
            if not stack:
                raise UnbalancedDirectives(path, line_no, f"#{name} without #if")
            if stack[-1].closed_else:
                raise UnbalancedDirectives(path, line_no, f"#{name} after #else")
            close_branch(line_no - 1)
            if name == "else":
                stack[-1].closed_else = True
                open_branch(ELSE, "", line_no)
            else:
                open_branch(ELIF, arg, line_no)
        elif name == "endif":
            if not stack:
                raise UnbalancedDirectives(path, line_no, "#endif without #if")
            close_branch(line_no)
            stack.pop()
        elif name == "error":
            if stack:
                stack[-1].branches[-1]._errors = True
            else:
                tree.top_level_content = True
        else:
            # any other directive (#define, #include, ...) is ordinary content
            if stack:
                stack[-1].branches[-1]._content = True
            else:
                tree.top_level_content = True
    if stack:
        opener = stack[-1].branches[0]
        raise UnbalancedDirectives(path, opener.start, "missing #endif")
    return tree


def strip_consistency_checks(tree: BlockTree) -> BlockTree:
    """Drop every block consisting only of ``#error`` directives (at any depth)."""

    def keep(blocks: list[CodeBlock]) -> list[CodeBlock]:
        return [replace(b, children=keep(b.children)) for b in blocks if not b.error_only]

    return replace(tree, blocks=keep(tree.blocks))


def block_presence_conditions(tree: BlockTree) -> list[tuple[Optional[CodeBlock], Expr]]:
    """Pair every block with the conjunction of its own and its ancestors' branch conditions.

    Code outside any block is represented by a ``(None, TRUE)`` entry when the
    file has such content.
    """
    out: list[tuple[Optional[CodeBlock], Expr]] = []
    if tree.top_level_content:
        out.append((None, TRUE_EXPR))

    def visit(blocks: list[CodeBlock], outer: list[Expr]) -> None:
        for b in blocks:
            parts = outer + [b.condition]
            out.append((b, conjoin(parts)))
            visit(b.children, parts)

    visit(tree.blocks, [])
    return out
