"""File-level inclusion conditions and auxiliary presence conditions.

``build_map.csv`` maps path globs to preprocessor-style conditions (first
matching row wins, unmatched files are always included).
``aux_conditions.txt`` carries extra presence conditions, already in formula
syntax, from extractors other than the C scanner.
"""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .logic import Formula, FormulaSyntaxError, Var, parse_formula, substitute_many
from .ppparse.expr import TRUE_EXPR, ConditionParseError, Expr, format_number, opaque_for, parse_condition
from .varmodel import FeatureModel, parse_pseudo

log = logging.getLogger(__name__)


class BuildMapError(ValueError):
    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


def glob_to_regex(pattern: str) -> re.Pattern:
    """``*`` and ``?`` stay within one path segment, ``**`` spans segments."""
    out = []
    i = 0
    while i < len(pattern):
        c = pattern[i]
        if pattern.startswith("**/", i):
            out.append("(?:.*/)?")
            i += 3
        elif pattern.startswith("**", i):
            out.append(".*")
            i += 2
        elif c == "*":
            out.append("[^/]*")
            i += 1
        elif c == "?":
            out.append("[^/]")
            i += 1
        else:
            out.append(re.escape(c))
            i += 1
    return re.compile("".join(out) + r"\Z")


@dataclass(frozen=True)
class BuildRule:
    pattern: str
    condition: Expr
    line: int = 0
    degraded: bool = False
    regex: re.Pattern = field(default=None, compare=False, repr=False)

    def matches(self, path: str) -> bool:
        return self.regex.match(path) is not None


@dataclass(frozen=True)
class BuildMap:
    rules: tuple[BuildRule, ...] = ()
    default_condition: Expr = TRUE_EXPR

    @property
    def degraded(self) -> list[BuildRule]:
        return [r for r in self.rules if r.degraded]


def _normalize(path: Union[str, Path]) -> str:
    p = str(path).replace("\\", "/")
    while p.startswith("./"):
        p = p[2:]
    return p


def load_build_map(path: Union[str, Path, None], strict: bool = False) -> BuildMap:
    """Read ``pattern,condition`` rows; unparsable conditions become opaque variables."""
    if path is None:
        return BuildMap()
    path = str(path)
    rules = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return BuildMap()
        if [h.strip().lower() for h in header[:2]] != ["pattern", "condition"]:
            raise BuildMapError(path, 1, "expected header 'pattern,condition'")
        for row in reader:
            line = reader.line_num
            if not row or not "".join(row).strip():
                continue
            if len(row) != 2:
                # an unquoted comma inside the condition
                row = [row[0], ",".join(row[1:])]
            pattern, text = row[0].strip(), row[1].strip()
            if not pattern:
                raise BuildMapError(path, line, "empty pattern")
            degraded = False
            try:
                cond = parse_condition(text)
            except ConditionParseError as err:
                if strict:
                    raise BuildMapError(path, line, str(err)) from err
                log.warning("%s:%d: %s", path, line, err)
                cond, degraded = opaque_for(text), True
            rules.append(BuildRule(pattern, cond, line, degraded, glob_to_regex(_normalize(pattern))))
    return BuildMap(tuple(rules))


def file_condition(build_map: BuildMap, path: Union[str, Path]) -> Expr:
    """Condition of the first rule whose glob matches *path*, else TRUE."""
    p = _normalize(path)
    for rule in build_map.rules:
        if rule.matches(p):
            return rule.condition
    return build_map.default_condition


@dataclass(frozen=True)
class AuxCondition:
    feature: str
    formula: Formula
    tag: str
    line: int = 0
    degraded: bool = False


def _opaque_var(token: str) -> Var:
    return Var(opaque_for(token).name)


def validate_pseudo_variables(f: Formula, model: FeatureModel) -> tuple[Formula, list[str]]:
    """Replace variables that are not pseudo-variables of declared features by opaque ones."""
    bad = {}
    for name in f.variables():
        parsed = parse_pseudo(name)
        if parsed is None:
            if not name.startswith("__opaque_"):
                bad[name] = _opaque_var(name)
            continue
        feat = model.features.get(parsed[0])
        if feat is None:
            bad[name] = _opaque_var(name)
        elif parsed[1] is not None and parsed[1] not in {format_number(v) for v in feat.values}:
            bad[name] = _opaque_var(name)
    return (substitute_many(f, bad) if bad else f), sorted(bad)


def load_aux_conditions(
    path: Union[str, Path, None], model: FeatureModel, strict: bool = False
) -> list[AuxCondition]:
    """Read ``feature<TAB>formula<TAB>tag`` lines; ``#`` starts a comment line."""
    if path is None:
        return []
    path = str(path)
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                if strict:
                    raise BuildMapError(path, line_no, "expected feature<TAB>formula<TAB>tag")
                log.warning("%s:%d: malformed auxiliary condition line", path, line_no)
                out.append(AuxCondition("", _opaque_var(line), "", line_no, True))
                continue
            feature, text, tag = (p.strip() for p in parts)
            try:
                formula = parse_formula(text)
            except FormulaSyntaxError as err:
                if strict:
                    raise BuildMapError(path, line_no, str(err)) from err
                log.warning("%s:%d: %s", path, line_no, err)
                out.append(AuxCondition(feature, _opaque_var(text), tag, line_no, True))
                continue
            formula, bad = validate_pseudo_variables(formula, model)
            if bad and strict:
                raise BuildMapError(path, line_no, f"unknown pseudo-variables: {', '.join(bad)}")
            if feature and feature not in model.features:
                if strict:
                    raise BuildMapError(path, line_no, f"unknown feature {feature!r}")
                log.warning("%s:%d: unknown feature %r", path, line_no, feature)
            out.append(AuxCondition(feature, formula, tag, line_no, bool(bad)))
    return out
