"""Operator entry point: seeds, pipeline, reports, predictions, API server.

Exit codes are uniform across subcommands: 0 success, 1 runtime failure,
2 usage or input error. `pipeline run` and `serve` take a lock file beside
the snapshot so they never race each other on the same graph.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
from filelock import FileLock, Timeout

from . import analytics
from .clients import (
    FixtureFetcher,
    FixtureManifest,
    FixtureSearchClient,
    GazetteerRecognizer,
    HttpFetcher,
    LlmRecognizer,
    RemoteSearchClient,
)
from .errors import SeedFormatError, SnapshotFormatError, SupplierGraphError
from .graph import SupplierGraph, load_snapshot
from .matching import DEFAULT_MATCH_THRESHOLD
from .pipeline import load_seed_registry, run_pipeline
from .prediction import predict_suppliers
from .service import ServiceConfig, create_app
from .store import IntermediateStore, Stage

EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_graph(snapshot: Path) -> SupplierGraph:
    try:
        return load_snapshot(snapshot)
    except FileNotFoundError:
        _fail(EXIT_USAGE, f"snapshot not found: {snapshot}")
    except SnapshotFormatError as exc:
        _fail(EXIT_USAGE, str(exc))


def _emit(rows, fmt: str):
    if fmt == "json":
        click.echo(json.dumps(analytics.rows_to_dicts(rows), indent=2))
    elif fmt == "csv":
        click.echo(analytics.to_csv_text(rows), nl=False)
    else:
        click.echo(analytics.to_table_text(rows))


format_option = click.option(
    "--format", "fmt", type=click.Choice(["table", "csv", "json"]),
    default="table", show_default=True, help="Output format.")


@click.group()
@click.version_option(package_name="suppliergraph")
def main():
    """Supply-chain-transparency platform tools."""


# -- seed -------------------------------------------------------------------


@main.group()
def seed():
    """Seed registry operations."""


@seed.command("load")
@click.option("--file", "csv_path", required=True, type=click.Path(path_type=Path),
              help="Seed CSV (id,name,ticker,market_cap_usd,industry,country,continent,website,email).")
@click.option("--snapshot", required=True, type=click.Path(path_type=Path),
              help="Graph snapshot to write.")
def seed_load(csv_path: Path, snapshot: Path):
    """Load a seed company CSV into a fresh graph snapshot."""
    try:
        result = load_seed_registry(csv_path)
    except FileNotFoundError:
        _fail(EXIT_USAGE, f"seed file not found: {csv_path}")
    except SeedFormatError as exc:
        _fail(EXIT_USAGE, str(exc))
    try:
        result.graph.save_snapshot(snapshot)
    except OSError as exc:
        _fail(EXIT_RUNTIME, f"cannot write snapshot: {exc}")
    click.echo(f"{len(result.graph)} companies loaded "
               f"({result.rows} rows, {result.merged} merged) -> {snapshot}")


# -- pipeline ----------------------------------------------------------------


@main.group()
def pipeline():
    """Collection pipeline operations."""


@pipeline.command("run")
@click.option("--snapshot", required=True, type=click.Path(path_type=Path))
@click.option("--fixtures", "fixtures_path", type=click.Path(path_type=Path),
              help="Fixture manifest JSON; without it remote clients are used.")
@click.option("--store", "store_dir", type=click.Path(path_type=Path), default=Path("store"),
              show_default=True, help="Intermediate store directory.")
@click.option("--max-results", default=5, show_default=True)
@click.option("--threshold", default=DEFAULT_MATCH_THRESHOLD, show_default=True,
              help="Fuzzy match threshold for mention validation.")
@click.option("--force", is_flag=True, help="Recompute stages marked done.")
def pipeline_run(snapshot: Path, fixtures_path, store_dir: Path,
                 max_results: int, threshold: float, force: bool):
    """Run the nine-stage pipeline over every company in the snapshot."""
    graph = _load_graph(snapshot)

    if fixtures_path is not None:
        try:
            manifest = FixtureManifest.load(fixtures_path)
        except (OSError, json.JSONDecodeError) as exc:
            _fail(EXIT_USAGE, f"cannot read fixture manifest: {exc}")
        search_client = FixtureSearchClient(manifest)
        fetcher = FixtureFetcher(manifest)
    else:
        search_key = os.environ.get("SEARCH_API_KEY")
        search_endpoint = os.environ.get("SEARCH_API_ENDPOINT", "")
        if not search_key or not search_endpoint:
            _fail(EXIT_USAGE,
                  "no --fixtures manifest and SEARCH_API_KEY/SEARCH_API_ENDPOINT unset; "
                  "fixture mode needs a manifest")
        search_client = RemoteSearchClient(endpoint=search_endpoint, api_key=search_key)
        fetcher = HttpFetcher()

    llm_key = os.environ.get("LLM_API_KEY")
    if llm_key:
        recognizer = LlmRecognizer(api_key=llm_key)
        click.echo("entity recognizer: remote language model")
    else:
        recognizer = GazetteerRecognizer.from_graph(graph)
        click.echo("notice: LLM_API_KEY unset, using the deterministic "
                   "gazetteer recognizer over registry names")

    lock = FileLock(str(snapshot) + ".lock")
    try:
        with lock.acquire(timeout=0):
            try:
                report = run_pipeline(
                    graph, IntermediateStore(store_dir), search_client, fetcher,
                    recognizer, max_results=max_results, matcher_threshold=threshold,
                    snapshot_path=snapshot, force=force)
            except OSError as exc:
                _fail(EXIT_RUNTIME, f"pipeline failed: {exc}")
    except Timeout:
        _fail(EXIT_RUNTIME, f"another run holds the lock on {snapshot}")

    click.echo(report.summary_line())
    if report.all_stages_skipped:
        click.echo("all stages skipped (store already complete)")
    failed = {cid: statuses for cid, statuses in report.per_company.items()
              if "failed" in statuses.values()}
    if failed:
        click.echo(f"warning: {len(failed)} companies had failed stages", err=True)


# -- reports -----------------------------------------------------------------


@main.group()
def report():
    """Analytics reports over a snapshot."""


@report.command("transparency")
@click.option("--snapshot", required=True, type=click.Path(path_type=Path))
@click.option("--by", "group_by", type=click.Choice(["continent", "industry", "none"]),
              default="continent", show_default=True)
@format_option
def report_transparency(snapshot: Path, group_by: str, fmt: str):
    """Share of companies with at least one extracted supplier, by group."""
    graph = _load_graph(snapshot)
    _emit(analytics.transparency_report(graph, group_by=group_by), fmt)


@report.command("coverage")
@click.option("--snapshot", required=True, type=click.Path(path_type=Path))
@click.option("--truth", "truth_path", required=True, type=click.Path(path_type=Path),
              help="Ground-truth manifest {company_id: {list_url, suppliers}}.")
@click.option("--store", "store_dir", type=click.Path(path_type=Path),
              help="Intermediate store; enables the recognizer-seen column.")
@format_option
def report_coverage(snapshot: Path, truth_path: Path, store_dir, fmt: str):
    """Pipeline output compared against manually checked supplier lists."""
    graph = _load_graph(snapshot)
    try:
        ground_truth = json.loads(Path(truth_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        _fail(EXIT_USAGE, f"cannot read ground truth: {exc}")

    mentions_by_company = None
    if store_dir is not None:
        store = IntermediateStore(store_dir)
        mentions_by_company = {}
        for company_id in ground_truth:
            payload = store.read_if_done(company_id, Stage.RECOGNIZE) or []
            mentions_by_company[company_id] = [
                name for doc in payload for name in doc["mentions"]]
    try:
        rows = analytics.coverage_report(graph, ground_truth, mentions_by_company)
    except SupplierGraphError as exc:
        _fail(EXIT_USAGE, str(exc))
    _emit(rows, fmt)


# -- prediction ----------------------------------------------------------------


@main.command("predict")
@click.option("--snapshot", required=True, type=click.Path(path_type=Path))
@click.option("--company", "company_id", required=True)
@click.option("-k", default=5, show_default=True)
@click.option("--only-if-empty", is_flag=True,
              help="Skip companies that already have extracted or manual suppliers.")
@format_option
def predict(snapshot: Path, company_id: str, k: int, only_if_empty: bool, fmt: str):
    """Rank potential suppliers from the company's industry/region group."""
    graph = _load_graph(snapshot)
    try:
        links = predict_suppliers(graph, company_id, k=k, only_if_empty=only_if_empty)
    except SupplierGraphError as exc:
        _fail(EXIT_USAGE, str(exc))

    rows = [{"supplier": l.supplier, "support": l.support, "confidence": l.confidence}
            for l in links]
    if fmt == "json":
        click.echo(json.dumps(rows, indent=2))
    elif fmt == "csv":
        click.echo("supplier,support,confidence")
        for row in rows:
            click.echo(f"{row['supplier']},{row['support']},{row['confidence']}")
    else:
        for row in rows:
            click.echo(f"{row['supplier']}  support={row['support']}  "
                       f"confidence={row['confidence']:.2f}")


# -- serve ---------------------------------------------------------------------


def load_service_settings(config_path, env=None) -> dict:
    """Service settings from an optional JSON file plus environment overrides.

    Recognized keys: port, host, snapshot, state, token_ttl_hours, smtp,
    expose_outbox. Environment variables use the SUPPLIERGRAPH_ prefix.
    """
    env = env if env is not None else os.environ
    settings: dict = {}
    if config_path:
        settings.update(json.loads(Path(config_path).read_text(encoding="utf-8")))
    for key in ("port", "host", "snapshot", "state"):
        value = env.get(f"SUPPLIERGRAPH_{key.upper()}")
        if value:
            settings[key] = int(value) if key == "port" else value
    return settings


@main.command("serve")
@click.option("--snapshot", type=click.Path(path_type=Path))
@click.option("--port", type=int, default=None)
@click.option("--host", default=None)
@click.option("--config", "config_path", type=click.Path(path_type=Path),
              help="Service config JSON; flags and environment override it.")
@click.option("--state", "state_path", type=click.Path(path_type=Path),
              help="Collaboration state file (claims, tokens, outbox).")
@click.option("--ui", "ui_dir", type=click.Path(path_type=Path),
              help="Serve the built web UI (frontend/dist) from this directory.")
@click.option("--dev-outbox", is_flag=True,
              help="Expose GET /api/outbox for development and tests.")
def serve(snapshot, port, host, config_path, state_path, ui_dir, dev_outbox):
    """Serve the collaboration API (and optionally the web UI) over a snapshot."""
    try:
        settings = load_service_settings(config_path)
    except (OSError, json.JSONDecodeError) as exc:
        _fail(EXIT_USAGE, f"cannot read config: {exc}")

    snapshot = snapshot or (Path(settings["snapshot"]) if settings.get("snapshot") else None)
    if snapshot is None:
        _fail(EXIT_USAGE, "a snapshot is required (--snapshot or config)")
    port = port if port is not None else int(settings.get("port", 8080))
    host = host or settings.get("host", "127.0.0.1")
    state_path = state_path or (Path(settings["state"]) if settings.get("state") else None)

    ui_dir = ui_dir or (Path(settings["ui"]) if settings.get("ui") else None)
    if ui_dir is not None and not Path(ui_dir).is_dir():
        _fail(EXIT_USAGE, f"UI directory not found: {ui_dir} (run `npm run build` first)")

    graph = _load_graph(snapshot)
    config = ServiceConfig(
        snapshot_path=snapshot,
        state_path=state_path,
        expose_outbox=dev_outbox or bool(settings.get("expose_outbox")),
        smtp=settings.get("smtp"),
        static_dir=ui_dir,
    )
    app = create_app(graph, config)

    lock = FileLock(str(snapshot) + ".lock")
    try:
        with lock.acquire(timeout=0):
            import uvicorn

            click.echo(f"serving {len(graph)} companies on http://{host}:{port}")
            uvicorn.run(app, host=host, port=port, log_level="warning")
    except Timeout:
        _fail(EXIT_RUNTIME, f"another run holds the lock on {snapshot}")


if __name__ == "__main__":
    main()
