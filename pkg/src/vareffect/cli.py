"""Command-line entry point: ``vareffect analyze``, ``vareffect aggregate``, ``vareffect blocks``."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .aggregate import AggregateInputError, UnknownProductId, from_results, load_clusters, write_aggregate
from .buildmodel import BuildMapError
from .feffect import DEFAULT_EXTENSIONS, StrictModeError
from .numtrans import DEFAULT_EXPANSION_LIMIT, UnknownFeature
from .pipeline import (
    AnalysisConfig,
    Inputs,
    ResultFileError,
    analyze_product,
    default_jobs,
    format_issues,
    load_result,
    write_result,
)
from .ppparse import UnbalancedDirectives, scan_blocks
from .varmodel import FeatureModelError

CONFIG_ERRORS = (FeatureModelError, BuildMapError, OSError, ValueError)


class TabFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        code = getattr(record, "code", record.name.rsplit(".", 1)[-1])
        return f"{record.levelname}\t{code}\t{record.getMessage()}"


def _setup_logging(verbose: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(TabFormatter())
    root = logging.getLogger("vareffect")
    root.handlers[:] = [handler]
    root.setLevel(logging.INFO if verbose else logging.WARNING)


def _fail(code: str, message: str) -> None:
    click.echo(f"ERROR\t{code}\t{message}", err=True)
    sys.exit(2)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log informational messages.")
@click.version_option(package_name="artifact")
def main(verbose: bool) -> None:
    """Feature-effect analysis of C product checkouts."""
    _setup_logging(verbose)


def _product_ids(roots: tuple[Path, ...]) -> list[str]:
    ids = [r.resolve().name or "product" for r in roots]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        _fail("config", f"product directories share a name: {', '.join(dupes)}")
    return ids


@main.command()
@click.option("--product", "products", multiple=True, required=True,
              type=click.Path(exists=True, file_okay=False, path_type=Path),
              help="Product checkout root; repeat for several products.")
@click.option("--features", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--constants", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--build-map", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--aux", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Additional presence conditions, one per line.")
@click.option("--cpp-undefined-as-zero", is_flag=True,
              help="Read undefined features as 0, like the C preprocessor.")
@click.option("--strict", is_flag=True, help="Abort on any input that would otherwise be approximated.")
@click.option("--no-simplify", is_flag=True, help="Emit presence conditions and effects unsimplified.")
@click.option("--expansion-limit", type=click.IntRange(min=1), default=DEFAULT_EXPANSION_LIMIT, show_default=True)
@click.option("--ext", "extensions", multiple=True, help="Source file extension (default: .c, .h).")
@click.option("--jobs", type=click.IntRange(min=1), default=None,
              help="Worker processes (default: VAREFFECT_THREADS or CPU count).")
@click.option("--out", required=True, type=click.Path(file_okay=False, path_type=Path))
def analyze(products, features, constants, build_map, aux, cpp_undefined_as_zero, strict, no_simplify,
            expansion_limit, extensions, jobs, out) -> None:
    """Classify every feature used in each product as INDEPENDENT or DEPENDENT."""
    try:
        jobs = jobs or default_jobs()
    except ValueError as err:
        _fail("config", str(err))
    config = AnalysisConfig(
        features=features,
        constants=constants,
        build_map=build_map,
        aux=aux,
        undefined_as_zero=cpp_undefined_as_zero,
        strict=strict,
        simplify=not no_simplify,
        expansion_limit=expansion_limit,
        extensions=tuple(e if e.startswith(".") else "." + e for e in extensions) or DEFAULT_EXTENSIONS,
        jobs=jobs,
    )
    ids = _product_ids(products)
    try:
        inputs = Inputs.load(config)
    except CONFIG_ERRORS as err:
        _fail("config", str(err))
    for root, product in zip(products, ids):
        try:
            result = analyze_product(root, product, config, inputs)
        except (StrictModeError, UnknownFeature, UnbalancedDirectives) as err:
            _fail("strict", f"{product}: {err}")
        write_result(result, out)
        for issue in result.issues:
            if issue.level in ("WARNING", "ERROR"):
                click.echo(format_issues([issue]), err=True, nl=False)
        s = result.summary
        click.echo(
            f"{product}: {s['features']} features ({s['independent']} independent, "
            f"{s['dependent']} dependent) from {s['files']} files"
        )


@main.command("aggregate")
@click.option("--in", "inputs", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Per-product result JSON; repeat for each product.")
@click.option("--clusters", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="CSV with columns cluster,product.")
@click.option("--confidential", is_flag=True, help="Suppress absolute counts; report percentages only.")
@click.option("--out", required=True, type=click.Path(file_okay=False, path_type=Path))
def aggregate_cmd(inputs, clusters, confidential, out) -> None:
    """Combine per-product results into consistent and MIXED categories."""
    if len(inputs) < 2:
        _fail("config", "aggregate needs at least two result files")
    try:
        loaded = from_results([load_result(p) for p in inputs])
        cluster_spec = load_clusters(clusters) if clusters else None
        bundle = write_aggregate(loaded, out, cluster_spec, confidential)
    except (ResultFileError, AggregateInputError, UnknownProductId, OSError) as err:
        _fail("input", str(err))
    for name in loaded.domain_conflicts:
        click.echo(f"WARNING\tdomain-conflict\t{name}: value ranges differ between results", err=True)
    summary = bundle["clusters"]["all"]["summary"]
    click.echo(
        f"{len(bundle['products'])} products: {summary['independent_pct']}% independent, "
        f"{summary['dependent_pct']}% dependent, {summary['mixed_pct']}% mixed"
    )


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def blocks(file: Path) -> None:
    """Print the conditional block structure of FILE as JSON."""
    try:
        tree = scan_blocks(file.read_bytes(), str(file))
    except UnbalancedDirectives as err:
        _fail("unbalanced", str(err))
    click.echo(json.dumps(tree.to_dict(), indent=2))


if __name__ == "__main__":
    main()
