"""Conditional-compilation structure of C sources."""

from .blocks import (
    ELIF,
    ELSE,
    IF,
    IFDEF,
    IFNDEF,
    BlockTree,
    CodeBlock,
    UnbalancedDirectives,
    block_presence_conditions,
    scan_blocks,
    strip_consistency_checks,
)
from .expr import (
    TRUE_EXPR,
    Binary,
    BoolConst,
    ConditionParseError,
    Defined,
    Expr,
    Ident,
    Num,
    Opaque,
    Unary,
    conjoin,
    opaque_for,
    parse_condition,
    render,
)

__all__ = [
    "ELIF",
    "ELSE",
    "IF",
    "IFDEF",
    "IFNDEF",
    "TRUE_EXPR",
    "Binary",
    "BlockTree",
    "BoolConst",
    "CodeBlock",
    "ConditionParseError",
    "Defined",
    "Expr",
    "Ident",
    "Num",
    "Opaque",
    "UnbalancedDirectives",
    "Unary",
    "block_presence_conditions",
    "conjoin",
    "opaque_for",
    "parse_condition",
    "render",
    "scan_blocks",
    "strip_consistency_checks",
]
