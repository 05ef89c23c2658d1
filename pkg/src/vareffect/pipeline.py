"""Per-product analysis run and its result files.

Each analysed product yields ``<id>.csv`` (one row per feature),
``<id>.json`` (everything, including per-value effects and the value domain,
which ``aggregate`` reads back) and ``<id>.log``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from .buildmodel import AuxCondition, BuildMap, load_aux_conditions, load_build_map
from .feffect import (
    DEFAULT_EXTENSIONS,
    Category,
    EffectCache,
    FeatureEffectRecord,
    FileAnalyzer,
    Issue,
    LegacyStats,
    build_index,
    classify_all,
    collect_pcs,
    legacy_stats,
)
from .logic import format_formula
from .numtrans import DEFAULT_EXPANSION_LIMIT
from .varmodel import FeatureModel, load_feature_model

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
RESULT_COLUMNS = ["feature", "category", "effect_formula", "pseudo_variables", "pc_count"]


class ResultFileError(ValueError):
    pass


def default_jobs() -> int:
    env = os.environ.get("VAREFFECT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"VAREFFECT_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


@dataclass
class AnalysisConfig:
    features: Path
    constants: Optional[Path] = None
    build_map: Optional[Path] = None
    aux: Optional[Path] = None
    undefined_as_zero: bool = False
    strict: bool = False
    simplify: bool = True
    expansion_limit: int = DEFAULT_EXPANSION_LIMIT
    extensions: tuple[str, ...] = DEFAULT_EXTENSIONS
    jobs: int = 1

    def settings(self) -> dict:
        return {
            "undefined_as_zero": self.undefined_as_zero,
            "strict": self.strict,
            "simplify": self.simplify,
            "expansion_limit": self.expansion_limit,
            "extensions": list(self.extensions),
        }


@dataclass
class Inputs:
    model: FeatureModel
    build_map: BuildMap
    aux: list[AuxCondition]

    @classmethod
    def load(cls, config: AnalysisConfig) -> "Inputs":
        model = load_feature_model(config.features, config.constants)
        build_map = load_build_map(config.build_map, config.strict)
        aux = load_aux_conditions(config.aux, model, config.strict)
        return cls(model, build_map, aux)


@dataclass
class ProductResult:
    product: str
    records: list[FeatureEffectRecord]
    summary: dict
    legacy: LegacyStats
    domain: dict[str, list]
    settings: dict
    issues: list[Issue] = field(default_factory=list)

    def categories(self) -> dict[str, str]:
        return {r.feature: str(r.category) for r in self.records}


def analyze_product(
    root: Union[str, Path], product: str, config: AnalysisConfig, inputs: Optional[Inputs] = None
) -> ProductResult:
    inputs = inputs or Inputs.load(config)
    model = inputs.model
    analyzer = FileAnalyzer(
        model,
        inputs.build_map,
        undefined_as_zero=config.undefined_as_zero,
        expansion_limit=config.expansion_limit,
        strict=config.strict,
        simplified=config.simplify,
    )
    coll = collect_pcs(root, analyzer, inputs.aux, config.extensions, config.jobs)
    issues = list(coll.issues)
    for rule in inputs.build_map.degraded:
        issues.append(Issue("WARNING", "degraded-build-rule", f"build map line {rule.line}: {rule.pattern}"))
    if coll.files == 0:
        issues.append(Issue("WARNING", "empty-product", f"no source files under {root}"))

    index, legacy_dead = build_index(coll.pcs, model, True, analyzer.axioms, config.simplify)
    cache = EffectCache(config.simplify)
    records = classify_all(index, analyzer.axioms, product, config.simplify, cache)
    if model.legacy_features():
        raw, _ = build_index(coll.pcs, model, False, analyzer.axioms, config.simplify)
        stats = legacy_stats(classify_all(raw, analyzer.axioms, product, config.simplify, cache), records)
    else:
        stats = legacy_stats(records, records)
    for key, value in stats.as_dict().items():
        issues.append(Issue("INFO", "legacy-" + key.replace("_", "-"), str(value)))

    dependent = sum(r.category is Category.DEPENDENT for r in records)
    summary = {
        "files": coll.files,
        "failed_files": coll.failed_files,
        "blocks": coll.blocks,
        "presence_conditions": len(index),
        "dead_presence_conditions": coll.dead + legacy_dead,
        "degraded": coll.degraded,
        "unknown_identifiers": sorted(coll.unknown),
        "features": len(records),
        "independent": len(records) - dependent,
        "dependent": dependent,
    }
    domain = {f.name: list(f.values) for f in model.bounded()}
    return ProductResult(product, records, summary, stats, domain, config.settings(), issues)


def result_csv(result: ProductResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for r in result.records:
        writer.writerow([r.feature, str(r.category), format_formula(r.effect), ";".join(r.pseudo_variables), r.pc_count])
    return buf.getvalue()


def result_json(result: ProductResult) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "product": result.product,
        "settings": result.settings,
        "summary": result.summary,
        "legacy": result.legacy.as_dict(),
        "domain": result.domain,
        "features": [
            {
                "feature": r.feature,
                "category": str(r.category),
                "effect": format_formula(r.effect),
                "pseudo_variables": r.pseudo_variables,
                "pc_count": r.pc_count,
                "value_effects": {v: format_formula(f) for v, f in sorted(r.value_effects.items())},
            }
            for r in result.records
        ],
    }


def format_issues(issues: Sequence[Issue]) -> str:
    return "".join(f"{i.level}\t{i.code}\t{i.message}\n" for i in issues)


def write_result(result: ProductResult, out_dir: Union[str, Path]) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / f"{result.product}.csv", out / f"{result.product}.json", out / f"{result.product}.log"]
    paths[0].write_text(result_csv(result), encoding="utf-8")
    paths[1].write_text(json.dumps(result_json(result), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths[2].write_text(format_issues(result.issues), encoding="utf-8")
    return paths


def load_result(path: Union[str, Path]) -> dict:
    """Read a result JSON file, rejecting unknown schema versions."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as err:
        raise ResultFileError(f"{path}: {err}") from err
    if not isinstance(data, dict) or "schema_version" not in data:
        raise ResultFileError(f"{path}: not a result file (no schema_version)")
    if data["schema_version"] != SCHEMA_VERSION:
        raise ResultFileError(f"{path}: unsupported schema version {data['schema_version']!r}")
    for key in ("product", "features", "domain"):
        if key not in data:
            raise ResultFileError(f"{path}: missing {key!r}")
    return data
