"""Operator command line: run pipeline stages, tune rules, evaluate, serve.

Exit codes: 0 ok, 1 runtime failure (machine-readable JSON on stderr),
2 usage or config error.
"""

from __future__ import annotations

import json
import logging
import sys
from datetime import date
from functools import wraps
from pathlib import Path

import click

from .config import ConfigError, adapter_by_name, api_config, build_runtime, load_config
from .clustering import ThresholdRules
from .ingestion import Blocklist
from .pipeline import (
    QA_NLI,
    evaluate_clustering,
    evaluate_extraction,
    run_cluster,
    run_ingest,
    run_process,
    tune_rules,
)
from .store import COLLECTIONS

log = logging.getLogger(__name__)


def _fail(error: Exception) -> None:
    payload = {"error": type(error).__name__, "message": str(error)}
    click.echo(json.dumps(payload), err=True)
    sys.exit(1)


def runtime_command(fn):
    """Load config + runtime, turn runtime failures into exit code 1."""

    @wraps(fn)
    @click.pass_context
    def wrapper(ctx, *args, **kwargs):
        try:
            cfg = load_config(ctx.obj["config_path"])
            runtime = build_runtime(cfg)
        except ConfigError as exc:
            raise click.UsageError(str(exc))
        try:
            return fn(cfg, runtime, *args, **kwargs)
        except click.ClickException:
            raise
        except ConfigError as exc:
            raise click.UsageError(str(exc))
        except Exception as exc:  # noqa: BLE001 - boundary: report and exit 1
            _fail(exc)

    return wrapper


@click.group()
@click.option(
    "--config",
    "-c",
    "config_path",
    default="episurv.yaml",
    show_default=True,
    help="Path to the YAML config.",
)
@click.option("--verbose", "-v", is_flag=True, help="Enable debug logging.")
@click.pass_context
def main(ctx, config_path: str, verbose: bool) -> None:
    """Event-based disease surveillance pipeline."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING)
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path


@main.command()
@click.option("--source", required=True, help="Name of a configured source adapter.")
@click.option("--blocklist", "blocklist_path", required=True, type=click.Path(exists=True))
@click.option("--window-hours", type=float, default=72.0, show_default=True,
              help="Recency window; widen it when replaying historical fixtures.")
@click.option("--now", "now_iso", default=None,
              help="Override the reference time (RFC-3339) for reproducible backfills.")
@runtime_command
def ingest(cfg, runtime, source: str, blocklist_path: str, window_hours: float,
           now_iso: str | None) -> None:
    """Pull, filter and store articles from one source."""
    from datetime import timedelta

    from .models import parse_timestamp

    adapter = adapter_by_name(cfg, source)
    report = run_ingest(
        runtime, adapter, Blocklist.from_file(blocklist_path),
        window=timedelta(hours=window_hours),
        now=parse_timestamp(now_iso) if now_iso else None,
    )
    click.echo(json.dumps({"stored": report.stored}))


@main.command()
@click.option("--date", "day", required=True, type=click.DateTime(["%Y-%m-%d"]))
@click.option(
    "--extractor",
    type=click.Choice([QA_NLI, "llm"]),
    default=QA_NLI,
    show_default=True,
)
@runtime_command
def process(cfg, runtime, day, extractor: str) -> None:
    """Classify, translate, gate, extract and map one day's articles."""
    report = run_process(runtime, day.date(), extractor=extractor)
    click.echo(
        json.dumps(
            {
                "date": report.day.isoformat(),
                "articles": report.articles,
                "relevant": report.relevant,
                "gated": report.gated,
                "quarantined": report.quarantined,
                "raw_events": report.raw_events,
                "mapped_events": report.mapped_events,
                "dropped_international": report.dropped_international,
                "parse_failures": report.parse_failures,
            }
        )
    )


@main.command()
@click.option("--date", "day", required=True, type=click.DateTime(["%Y-%m-%d"]))
@click.option("--rules", "rules_path", type=click.Path(exists=True), default=None)
@runtime_command
def cluster(cfg, runtime, day, rules_path: str | None) -> None:
    """(Re-)cluster one day's mapped events."""
    rules = ThresholdRules.from_file(rules_path) if rules_path else None
    clusters = run_cluster(runtime, day.date(), rules)
    click.echo(json.dumps({"date": day.date().isoformat(), "clusters": len(clusters)}))


@main.command("tune-rules")
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--grid", "grid_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), default=None)
@runtime_command
def tune_rules_cmd(cfg, runtime, gold_path: str, grid_path: str, out_path: str | None) -> None:
    """Grid-search the threshold ladder maximizing mean ARI on gold clusters."""
    grid = json.loads(Path(grid_path).read_text(encoding="utf-8"))
    best, score = tune_rules(runtime, gold_path, grid)
    payload = {"mean_ari": score, **best.to_dict()}
    rendered = json.dumps(payload, indent=2)
    if out_path:
        Path(out_path).write_text(rendered + "\n", encoding="utf-8")
    click.echo(rendered)


@main.group()
def evaluate() -> None:
    """Metric reports against gold data."""


@evaluate.command("extraction")
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@runtime_command
def evaluate_extraction_cmd(cfg, runtime, gold_path: str) -> None:
    report = evaluate_extraction(runtime, gold_path)
    click.echo(json.dumps(report.to_json_dict(), indent=2))
    e, d, l = report.event, report.disease, report.location
    click.echo(
        "\n"
        f"{'':<14}{'P':>8}{'R':>8}{'F1':>8}\n"
        f"{'event':<14}{e.precision:>8.3f}{e.recall:>8.3f}{e.f1:>8.3f}\n"
        f"{'disease':<14}{d.precision:>8.3f}{d.recall:>8.3f}{d.f1:>8.3f}\n"
        f"{'location':<14}{l.precision:>8.3f}{l.recall:>8.3f}{l.f1:>8.3f}\n"
        f"exact match accuracy: {report.exact_match_accuracy:.3f}\n"
        f"detection rate:       {report.detection_rate:.3f}",
        err=True,
    )


@evaluate.command("clustering")
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@runtime_command
def evaluate_clustering_cmd(cfg, runtime, gold_path: str) -> None:
    reports = evaluate_clustering(runtime.store, gold_path)
    click.echo(json.dumps([r.to_json_dict() for r in reports], indent=2))
    if reports:
        header = f"{'date':<12}{'events':>8}{'clusters':>10}{'ARI':>8}{'NMI':>8}{'V':>8}"
        lines = [header]
        for r in reports:
            lines.append(
                f"{r.day.isoformat():<12}{r.events:>8}{r.clusters:>10}"
                f"{r.ari:>8.3f}{r.nmi:>8.3f}{r.v:>8.3f}"
            )
        mean = lambda xs: sum(xs) / len(xs)  # noqa: E731
        lines.append(
            f"{'mean':<12}{'':>8}{'':>10}"
            f"{mean([r.ari for r in reports]):>8.3f}"
            f"{mean([r.nmi for r in reports]):>8.3f}"
            f"{mean([r.v for r in reports]):>8.3f}"
        )
        click.echo("\n".join(lines), err=True)


@main.group()
def synonyms() -> None:
    """Manage the disease synonym table."""


@synonyms.command("promote")
@click.argument("surface")
@runtime_command
def synonyms_promote(cfg, runtime, surface: str) -> None:
    """Promote a pending LLM-proposed synonym into the active table."""
    try:
        canonical = runtime.synonyms.promote(surface)
    except KeyError as exc:
        raise click.UsageError(str(exc))
    runtime.synonyms.save(
        cfg.resolve(cfg.reference["synonyms"]),
        cfg.resolve(cfg.reference["pending_synonyms"])
        if cfg.reference.get("pending_synonyms")
        else None,
    )
    click.echo(json.dumps({"surface": surface, "canonical": canonical}))


@main.command()
@click.argument("collection", type=click.Choice(COLLECTIONS))
@runtime_command
def export(cfg, runtime, collection: str) -> None:
    """Dump a collection's current state as NDJSON on stdout."""
    click.echo(runtime.store.export_collection(collection), nl=False)


@main.command("import")
@click.argument("collection", type=click.Choice(COLLECTIONS))
@click.argument("path", type=click.Path(exists=True))
@runtime_command
def import_(cfg, runtime, collection: str, path: str) -> None:
    """Load an exported NDJSON file back into the store."""
    count = runtime.store.import_collection(
        collection, Path(path).read_text(encoding="utf-8")
    )
    click.echo(json.dumps({"imported": count}))


@main.command()
@click.option("--open-mode", is_flag=True, help="Serve without an auth token.")
@runtime_command
def serve(cfg, runtime, open_mode: bool) -> None:
    """Start the review API service."""
    import uvicorn

    from .api import create_app

    api_cfg = api_config(cfg)
    if open_mode:
        api_cfg.open_mode = True
    app = create_app(runtime, api_cfg)
    uvicorn.run(app, host=api_cfg.host, port=api_cfg.port, log_level="info")


if __name__ == "__main__":
    main()
