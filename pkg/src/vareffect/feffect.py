"""Presence-condition collection, feature effects and per-product classification.

The effect of a pseudo-variable ``p`` is the disjunction, over every presence
condition mentioning ``p``, of ``PC[p:=true] xor PC[p:=false]``: the condition
under which choosing ``p`` changes whether some artifact is compiled.
"""

from __future__ import annotations

import enum
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .buildmodel import AuxCondition, BuildMap, file_condition
from .logic import (
    FALSE,
    TRUE,
    And,
    AxiomSet,
    Formula,
    Not,
    Or,
    Var,
    Xor,
    conj,
    disj,
    eliminate_xor,
    is_satisfiable,
    is_tautology,
    negate,
    simplify,
    substitute,
)
from .numtrans import DEFAULT_EXPANSION_LIMIT, Translator, domain_axioms
from .ppparse import (
    UnbalancedDirectives,
    block_presence_conditions,
    conjoin,
    render,
    scan_blocks,
    strip_consistency_checks,
)
from .varmodel import FeatureModel, apply_legacy, parse_pseudo

log = logging.getLogger(__name__)

DEFAULT_EXTENSIONS = (".c", ".h")


class Category(str, enum.Enum):
    INDEPENDENT = "INDEPENDENT"
    DEPENDENT = "DEPENDENT"

    def __str__(self) -> str:
        return self.value


class UnusedFeature(KeyError):
    def __init__(self, feature: str):
        super().__init__(feature)
        self.feature = feature

    def __str__(self) -> str:
        return f"feature {self.feature!r} is not used in any presence condition"


class StrictModeError(ValueError):
    """A degraded input that strict mode refuses to approximate."""


class PCIndex:
    """Presence conditions keyed by the pseudo-variables they mention.

    Only pseudo-variables of declared features are keys; opaque variables and
    definedness of unknown macros stay inside the formulas as free variables.
    """

    def __init__(self, model: FeatureModel):
        self.model = model
        self._by_var: dict[str, dict[str, Formula]] = {}
        self._by_feature: dict[str, set[str]] = {}
        self._all: set[str] = set()

    def add(self, pc: Formula) -> bool:
        """Register *pc*; returns False if it was already present."""
        if pc.key in self._all:
            return False
        self._all.add(pc.key)
        for var in pc.variables():
            parsed = parse_pseudo(var)
            if parsed is None or parsed[0] not in self.model.features:
                continue
            self._by_var.setdefault(var, {})[pc.key] = pc
            self._by_feature.setdefault(parsed[0], set()).add(var)
        return True

    def extend(self, pcs: Iterable[Formula]) -> None:
        for pc in pcs:
            self.add(pc)

    def pcs(self, var: str) -> list[Formula]:
        bucket = self._by_var.get(var, {})
        return [bucket[k] for k in sorted(bucket)]

    def variables(self, feature: str) -> list[str]:
        return sorted(self._by_feature.get(feature, ()))

    def features(self) -> list[str]:
        return sorted(self._by_feature)

    def pc_count(self, feature: str) -> int:
        keys: set[str] = set()
        for var in self._by_feature.get(feature, ()):
            keys.update(self._by_var[var])
        return len(keys)

    def __len__(self) -> int:
        return len(self._all)


def _literal(p: str, pc: Formula) -> Formula:
    """Simplified ``pc[p:=true] xor pc[p:=false]``."""
    target = Var(p)
    if pc == target or pc == Not(target):
        return TRUE
    if isinstance(pc, (And, Or)) and target in pc.children:
        rest = [c for c in pc.children if c != target]
        if not any(p in c.variables() for c in rest):
            # p && R toggles exactly when R holds; p || R exactly when R does not
            r = conj(rest) if isinstance(pc, And) else disj(rest)
            return r if isinstance(pc, And) else negate(r)
    return simplify(Xor(substitute(pc, p, True), substitute(pc, p, False)))


def feature_effect(p: str, pcs: Iterable[Formula], simplified: bool = True) -> Formula:
    """Condition under which the value of *p* changes some presence condition."""
    literals = []
    for pc in pcs:
        if simplified:
            lit = _literal(p, pc)
            if lit == TRUE:
                return TRUE
            if lit != FALSE:
                literals.append(lit)
        else:
            literals.append(Xor(substitute(pc, p, True), substitute(pc, p, False)))
    out = eliminate_xor(disj(literals))
    return simplify(out) if simplified else out


class EffectCache:
    """Memo of per-pseudo-variable effects keyed by the exact set of presence conditions."""

    def __init__(self, simplified: bool = True):
        self.simplified = simplified
        self._memo: dict[tuple, Formula] = {}

    def effect(self, p: str, pcs: Sequence[Formula]) -> Formula:
        key = (p, tuple(pc.key for pc in pcs))
        hit = self._memo.get(key)
        if hit is None:
            hit = self._memo[key] = feature_effect(p, pcs, self.simplified)
        return hit


def feature_level_effect(
    feature: str,
    index: PCIndex,
    value_effects: Optional[dict[str, Formula]] = None,
    simplified: bool = True,
) -> Formula:
    """Disjunction of the effects of every observed pseudo-variable of *feature*."""
    variables = index.variables(feature)
    if not variables:
        raise UnusedFeature(feature)
    if value_effects is None:
        value_effects = {v: feature_effect(v, index.pcs(v), simplified) for v in variables}
    out = disj([value_effects[v] for v in variables])
    return simplify(out) if simplified else out


def classify_formula(effect: Formula, axioms: Optional[AxiomSet] = None) -> Category:
    return Category.INDEPENDENT if is_tautology(effect, axioms) else Category.DEPENDENT


@dataclass
class FeatureEffectRecord:
    feature: str
    category: Category
    effect: Formula
    value_effects: dict[str, Formula]
    pc_count: int
    product: str = ""

    @property
    def pseudo_variables(self) -> list[str]:
        return sorted(self.value_effects)


def classify(
    feature: str,
    index: PCIndex,
    axioms: Optional[AxiomSet],
    product: str = "",
    simplified: bool = True,
    cache: Optional[EffectCache] = None,
) -> FeatureEffectRecord:
    cache = cache or EffectCache(simplified)
    values = {v: cache.effect(v, index.pcs(v)) for v in index.variables(feature)}
    effect = feature_level_effect(feature, index, values, simplified)
    return FeatureEffectRecord(
        feature=feature,
        category=classify_formula(effect, axioms),
        effect=effect,
        value_effects=values,
        pc_count=index.pc_count(feature),
        product=product,
    )


def classify_all(
    index: PCIndex,
    axioms: Optional[AxiomSet],
    product: str = "",
    simplified: bool = True,
    cache: Optional[EffectCache] = None,
) -> list[FeatureEffectRecord]:
    cache = cache or EffectCache(simplified)
    return [classify(f, index, axioms, product, simplified, cache) for f in index.features()]


# -- collection -------------------------------------------------------------


@dataclass
class Issue:
    """One log-worthy event; ``code`` is a short stable identifier."""

    level: str
    code: str
    message: str


@dataclass
class FileResult:
    path: str
    pcs: list[Formula] = field(default_factory=list)
    blocks: int = 0
    dead: int = 0
    degraded: int = 0
    unknown: set[str] = field(default_factory=set)
    issues: list[Issue] = field(default_factory=list)
    failed: bool = False


class FileAnalyzer:
    """Turns one source file into translated, simplified, satisfiable presence conditions."""

    def __init__(
        self,
        model: FeatureModel,
        build_map: BuildMap,
        undefined_as_zero: bool = False,
        expansion_limit: int = DEFAULT_EXPANSION_LIMIT,
        strict: bool = False,
        simplified: bool = True,
    ):
        self.model = model
        self.build_map = build_map
        self.strict = strict
        self.simplified = simplified
        self.translator = Translator(model, undefined_as_zero, expansion_limit, strict)
        self.axioms = domain_axioms(model)
        self._sat: dict[str, bool] = {}

    def satisfiable(self, f: Formula) -> bool:
        hit = self._sat.get(f.key)
        if hit is None:
            hit = self._sat[f.key] = is_satisfiable(f, self.axioms)
        return hit

    def analyze(self, rel_path: str, source: bytes) -> FileResult:
        result = FileResult(rel_path)
        try:
            tree = scan_blocks(source, rel_path)
        except UnbalancedDirectives as err:
            if self.strict:
                raise
            result.failed = True
            result.issues.append(Issue("ERROR", "unbalanced", str(err)))
            return result
        if tree.degraded and self.strict:
            line, text, err = tree.degraded[0]
            raise StrictModeError(f"{rel_path}:{line}: unparsable condition {text!r}: {err}")
        for line, text, err in tree.degraded:
            result.issues.append(Issue("WARNING", "degraded-condition", f"{rel_path}:{line}: {text!r}: {err}"))
        result.degraded += len(tree.degraded)
        tree = strip_consistency_checks(tree)
        fcond = file_condition(self.build_map, rel_path)
        seen: set[str] = set()
        for block, expr in block_presence_conditions(tree):
            where = f"{rel_path}:{block.start if block else 1}"
            if block is not None:
                result.blocks += 1
            tr = self.translator.translate(conjoin([fcond, expr]))
            result.unknown |= tr.unknown
            result.degraded += tr.degraded_nodes
            for problem in tr.problems:
                result.issues.append(Issue("WARNING", "division-by-zero", f"{where}: {problem}"))
            pc = simplify(tr.formula) if self.simplified else tr.formula
            if pc.key in seen:
                continue
            seen.add(pc.key)
            if not self.satisfiable(pc):
                result.dead += 1
                result.issues.append(Issue("INFO", "dead-block", f"{where}: {render(expr)}"))
                continue
            result.pcs.append(pc)
        return result


def source_files(root: Union[str, Path], extensions: Sequence[str] = DEFAULT_EXTENSIONS) -> list[str]:
    """Relative POSIX paths of all matching files below *root*, sorted."""
    root = Path(root)
    exts = tuple(e.lower() for e in extensions)
    out = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in filenames:
            if name.lower().endswith(exts):
                out.append(Path(dirpath, name).relative_to(root).as_posix())
    return sorted(out)


_worker: Optional[FileAnalyzer] = None


def _init_worker(analyzer: FileAnalyzer) -> None:
    global _worker
    _worker = analyzer


def _run_file(job: tuple[str, str]) -> FileResult:
    root, rel = job
    return _worker.analyze(rel, Path(root, rel).read_bytes())


@dataclass
class Collection:
    """Per-product presence conditions before legacy substitution."""

    pcs: list[Formula]
    files: int = 0
    blocks: int = 0
    dead: int = 0
    degraded: int = 0
    failed_files: int = 0
    unknown: set[str] = field(default_factory=set)
    issues: list[Issue] = field(default_factory=list)


def collect_pcs(
    root: Union[str, Path],
    analyzer: FileAnalyzer,
    aux: Sequence[AuxCondition] = (),
    extensions: Sequence[str] = DEFAULT_EXTENSIONS,
    jobs: int = 1,
) -> Collection:
    """Scan every source file under *root* and gather its presence conditions.

    Results are merged in path order, so the outcome does not depend on *jobs*.
    """
    files = source_files(root, extensions)
    if jobs > 1 and len(files) > 1:
        with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(analyzer,)) as pool:
            results = list(pool.map(_run_file, [(str(root), f) for f in files], chunksize=16))
    else:
        results = [analyzer.analyze(f, Path(root, f).read_bytes()) for f in files]

    out = Collection(pcs=[], files=len(files))
    seen: set[str] = set()
    for r in results:
        out.blocks += r.blocks
        out.dead += r.dead
        out.degraded += r.degraded
        out.failed_files += r.failed
        out.unknown |= r.unknown
        out.issues.extend(r.issues)
        for pc in r.pcs:
            if pc.key not in seen:
                seen.add(pc.key)
                out.pcs.append(pc)
    for entry in aux:
        if entry.degraded:
            out.degraded += 1
            out.issues.append(Issue("WARNING", "degraded-aux", f"aux line {entry.line}: {entry.tag}"))
        pc = simplify(entry.formula) if analyzer.simplified else entry.formula
        if not analyzer.satisfiable(pc):
            out.dead += 1
            out.issues.append(Issue("INFO", "dead-aux", f"aux line {entry.line}: {pc.key}"))
            continue
        if pc.key not in seen:
            seen.add(pc.key)
            out.pcs.append(pc)
    for name in sorted(out.unknown):
        out.issues.append(Issue("WARNING", "unknown-identifier", name))
    return out


def build_index(
    pcs: Iterable[Formula],
    model: FeatureModel,
    legacy: bool = True,
    axioms: Optional[AxiomSet] = None,
    simplified: bool = True,
) -> tuple[PCIndex, int]:
    """Index *pcs*, substituting legacy features first; returns the index and newly dead PCs."""
    index = PCIndex(model)
    dead = 0
    has_legacy = legacy and bool(model.legacy_features())
    for pc in pcs:
        if has_legacy:
            new = apply_legacy(pc, model, simplified)
            if new is not pc and new.key != pc.key:
                if new == FALSE or (new != TRUE and not is_satisfiable(new, axioms)):
                    dead += 1
                    continue
            pc = new
        index.add(pc)
    return index, dead


@dataclass
class LegacyStats:
    """Comparison of one product analysed without and with legacy substitution."""

    features: int
    removed: int
    dependent_to_independent: int
    independent_both: int
    effect_simplified: int

    def as_dict(self) -> dict:
        def pct(n: int) -> float:
            return round(100.0 * n / self.features, 1) if self.features else 0.0

        return {
            "features_without_legacy": self.features,
            "removed_as_legacy": self.removed,
            "dependent_to_independent": self.dependent_to_independent,
            "independent_in_both": self.independent_both,
            "effect_simplified": self.effect_simplified,
            "removed_as_legacy_pct": pct(self.removed),
            "dependent_to_independent_pct": pct(self.dependent_to_independent),
            "independent_in_both_pct": pct(self.independent_both),
            "effect_simplified_pct": pct(self.effect_simplified),
        }


def legacy_stats(
    without: Sequence[FeatureEffectRecord], with_legacy: Sequence[FeatureEffectRecord]
) -> LegacyStats:
    after = {r.feature: r for r in with_legacy}
    removed = d2i = both = simplified = 0
    for r in without:
        a = after.get(r.feature)
        if a is None:
            removed += 1
        elif r.category is Category.DEPENDENT and a.category is Category.INDEPENDENT:
            d2i += 1
        elif r.category is Category.INDEPENDENT and a.category is Category.INDEPENDENT:
            both += 1
        elif a.category is Category.DEPENDENT and a.effect.key != r.effect.key:
            simplified += 1
    return LegacyStats(len(without), removed, d2i, both, simplified)
