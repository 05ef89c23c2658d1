"""Cross-product aggregation of feature categories.

A feature keeps its category when every product that uses it agrees and
becomes MIXED otherwise. A feature seen in a single product is never MIXED.
All percentages are relative to the number of distinct features over every
analysed product (the reference count), also for cluster views.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .logic import Formula, equivalent, parse_formula
from .numtrans import domain_axioms
from .varmodel import FeatureDef, FeatureModel, Kind

INDEPENDENT = "INDEPENDENT"
DEPENDENT = "DEPENDENT"
MIXED = "MIXED"
CATEGORIES = (INDEPENDENT, DEPENDENT, MIXED)

# product id -> feature -> INDEPENDENT | DEPENDENT
Categories = Mapping[str, Mapping[str, str]]


class UnknownProductId(KeyError):
    def __init__(self, product: str):
        super().__init__(product)
        self.product = product

    def __str__(self) -> str:
        return f"unknown product id {self.product!r}"


class AggregateInputError(ValueError):
    pass


@dataclass
class FeatureAggregate:
    feature: str
    per_product: dict[str, str]
    category: str
    effects_agree: Optional[bool] = None

    @property
    def occurrences(self) -> int:
        return len(self.per_product)


@dataclass
class AggregateReport:
    products: list[str]
    features: dict[str, FeatureAggregate]
    reference_count: int

    def counts(self) -> dict[str, int]:
        out = dict.fromkeys(CATEGORIES, 0)
        for fa in self.features.values():
            out[fa.category] += 1
        return out

    def categories(self) -> dict[str, str]:
        return {name: fa.category for name, fa in self.features.items()}


def _combine(per_product: Mapping[str, str]) -> str:
    cats = set(per_product.values())
    return cats.pop() if len(cats) == 1 else MIXED


def aggregate_categories(records: Categories, reference_count: Optional[int] = None) -> AggregateReport:
    if not records:
        raise AggregateInputError("at least one product is required")
    products = sorted(records)
    per_feature: dict[str, dict[str, str]] = {}
    for product in products:
        for feature, category in records[product].items():
            if category not in (INDEPENDENT, DEPENDENT):
                raise AggregateInputError(f"{product}: bad category {category!r} for {feature}")
            per_feature.setdefault(feature, {})[product] = category
    features = {
        name: FeatureAggregate(name, dict(sorted(pp.items())), _combine(pp))
        for name, pp in sorted(per_feature.items())
    }
    ref = len(features) if reference_count is None else reference_count
    return AggregateReport(products, features, ref)


def reference_count(records: Categories) -> int:
    """Distinct features used in any product; a feature counts once."""
    return len({f for cats in records.values() for f in cats})


def cluster_aggregate(records: Categories, cluster: Iterable[str]) -> AggregateReport:
    """Aggregate over a subset of products, normalised against the global reference count."""
    members = sorted(set(cluster))
    if not members:
        raise AggregateInputError("empty cluster")
    for p in members:
        if p not in records:
            raise UnknownProductId(p)
    return aggregate_categories({p: records[p] for p in members}, reference_count(records))


def pct(n: int, ref: int) -> float:
    return round(100.0 * n / ref, 1) if ref else 0.0


def occurrence_grouping(report: AggregateReport) -> dict[int, dict[str, int]]:
    """Feature counts by (number of products using it, aggregate category)."""
    table = {k: dict.fromkeys(CATEGORIES, 0) for k in range(1, len(report.products) + 1)}
    for fa in report.features.values():
        table[fa.occurrences][fa.category] += 1
    return table


def occurrence_rows(report: AggregateReport, confidential: bool = False) -> list[dict]:
    rows = []
    for k, cells in occurrence_grouping(report).items():
        for cat in CATEGORIES:
            row = {"occurrences": k, "category": cat, "percent": pct(cells[cat], report.reference_count)}
            if not confidential:
                row["count"] = cells[cat]
            rows.append(row)
    return rows


def product_rows(records: Categories, ref: int, confidential: bool = False) -> list[dict]:
    """Per-product use of the feature set and its dependent share."""
    rows = []
    for product in sorted(records):
        cats = records[product]
        used = len(cats)
        dep = sum(c == DEPENDENT for c in cats.values())
        row = {
            "product": product,
            "features_pct": pct(used, ref),
            "independent_pct": pct(used - dep, ref),
            "dependent_pct": pct(dep, ref),
            "dependent_relative_pct": pct(dep, used),
        }
        if not confidential:
            row.update(features=used, independent=used - dep, dependent=dep)
        rows.append(row)
    return rows


def normalize_report(report: AggregateReport, name: str = "all", confidential: bool = False) -> dict:
    """Percentages of the reference count; absolute numbers only when not confidential."""
    counts = report.counts()
    used = len(report.features)
    row = {
        "cluster": name,
        "products": ";".join(report.products),
        "features_pct": pct(used, report.reference_count),
    }
    for cat in CATEGORIES:
        row[cat.lower() + "_pct"] = pct(counts[cat], report.reference_count)
    if not confidential:
        row["features"] = used
        row["reference_count"] = report.reference_count
        for cat in CATEGORIES:
            row[cat.lower()] = counts[cat]
    return row


def check_effect_agreement(
    report: AggregateReport, effects: Mapping[str, Mapping[str, Formula]], model: FeatureModel
) -> None:
    """Mark consistently dependent features whose effect formulas are equivalent everywhere."""
    axioms = domain_axioms(model)
    for fa in report.features.values():
        if fa.category != DEPENDENT or fa.occurrences < 2:
            continue
        formulas = [effects[p][fa.feature] for p in fa.per_product]
        unique = list({f.key: f for f in formulas}.values())
        fa.effects_agree = all(equivalent(a, b, axioms) for a, b in itertools.combinations(unique, 2))


# -- result files ------------------------------------------------------------


@dataclass
class LoadedResults:
    categories: dict[str, dict[str, str]]
    effects: dict[str, dict[str, Formula]]
    model: FeatureModel
    domain_conflicts: list[str] = field(default_factory=list)


def from_results(results: Sequence[dict]) -> LoadedResults:
    """Combine parsed per-product result documents."""
    versions = {r["schema_version"] for r in results}
    if len(versions) != 1:
        raise AggregateInputError(f"mixed result schema versions: {sorted(versions)}")
    categories: dict[str, dict[str, str]] = {}
    effects: dict[str, dict[str, Formula]] = {}
    domain: dict[str, tuple] = {}
    conflicts = []
    for r in results:
        product = r["product"]
        if product in categories:
            raise AggregateInputError(f"duplicate product id {product!r}")
        categories[product] = {f["feature"]: f["category"] for f in r["features"]}
        effects[product] = {f["feature"]: parse_formula(f["effect"]) for f in r["features"]}
        for name, values in r["domain"].items():
            values = tuple(values)
            if domain.setdefault(name, values) != values:
                conflicts.append(name)
    model = FeatureModel(
        {n: FeatureDef(n, Kind.ENUM, v) for n, v in domain.items() if n not in conflicts}
    )
    return LoadedResults(categories, effects, model, sorted(set(conflicts)))


def load_clusters(path: Union[str, Path]) -> dict[str, list[str]]:
    """Read ``cluster,product`` rows."""
    clusters: dict[str, list[str]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not {"cluster", "product"} <= set(reader.fieldnames or ()):
            raise AggregateInputError(f"{path}: expected columns cluster,product")
        for row in reader:
            cluster, product = (row["cluster"] or "").strip(), (row["product"] or "").strip()
            if cluster and product:
                clusters.setdefault(cluster, []).append(product)
    return {k: sorted(set(v)) for k, v in sorted(clusters.items())}


def _csv(rows: list[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _columns(rows: list[dict]) -> list[str]:
    return list(rows[0]) if rows else []


def feature_rows(report: AggregateReport) -> list[dict]:
    rows = []
    for fa in report.features.values():
        agree = "" if fa.effects_agree is None else ("yes" if fa.effects_agree else "no")
        rows.append(
            {
                "feature": fa.feature,
                "category": fa.category,
                "occurrences": fa.occurrences,
                "independent_in": ";".join(p for p, c in fa.per_product.items() if c == INDEPENDENT),
                "dependent_in": ";".join(p for p, c in fa.per_product.items() if c == DEPENDENT),
                "effects_agree": agree,
            }
        )
    return rows


def write_aggregate(
    loaded: LoadedResults,
    out_dir: Union[str, Path],
    clusters: Optional[Mapping[str, Sequence[str]]] = None,
    confidential: bool = False,
) -> dict:
    """Write aggregate.csv, clusters.csv, occurrence.csv, products.csv and aggregate.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = aggregate_categories(loaded.categories)
    check_effect_agreement(report, loaded.effects, loaded.model)

    cluster_reports = {"all": report}
    for name, members in (clusters or {}).items():
        if name == "all":
            raise AggregateInputError("cluster name 'all' is reserved")
        cluster_reports[name] = cluster_aggregate(loaded.categories, members)
    cluster_rows = [normalize_report(r, n, confidential) for n, r in cluster_reports.items()]
    occ = occurrence_rows(report, confidential)
    prod = product_rows(loaded.categories, report.reference_count, confidential)
    feats = feature_rows(report)

    feature_cols = ["feature", "category", "occurrences", "independent_in", "dependent_in", "effects_agree"]
    (out / "aggregate.csv").write_text(_csv(feats, feature_cols), encoding="utf-8")
    (out / "clusters.csv").write_text(_csv(cluster_rows, _columns(cluster_rows)), encoding="utf-8")
    (out / "occurrence.csv").write_text(_csv(occ, _columns(occ)), encoding="utf-8")
    (out / "products.csv").write_text(_csv(prod, _columns(prod)), encoding="utf-8")

    bundle = {
        "products": report.products,
        "confidential": confidential,
        "clusters": {
            name: {
                "summary": row,
                "features": {f: fa.category for f, fa in cluster_reports[name].features.items()},
            }
            for name, row in zip(cluster_reports, cluster_rows)
        },
        "occurrence": occ,
        "per_product": prod,
        "features": feats,
        "domain_conflicts": loaded.domain_conflicts,
    }
    if not confidential:
        bundle["reference_count"] = report.reference_count
    (out / "aggregate.json").write_text(json.dumps(bundle, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return bundle
