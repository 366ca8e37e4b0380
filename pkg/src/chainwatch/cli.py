"""Command line interface.

Resource options (gazetteer, lexicon, catalogs) default to the bundled
fixtures, so a run against the sample graph works out of the box:

    chainwatch run --graph src/chainwatch/data/mini_mb.json \\
        --article src/chainwatch/data/case_study_article.txt \\
        --focal "Mercedes-Benz Group AG" --backend rule --auto-approve
"""

from __future__ import annotations

import json
import os
import sys
from importlib import resources
from pathlib import Path

import click

from .decisions import Action, ActionItem, Verdict, render_plan
from .enrichment import load_catalog
from .evaluation import aggregate, evaluate_run, format_summary_table, load_scenarios
from .extraction import load_gazetteer, load_type_lexicon, model_backend_from_env, rule_backend
from .graph import load_graph
from .pipeline import (
    ENV_STORE,
    PipelineConfig,
    RunStore,
    export_viz,
    run_pipeline,
)
from .sourcing import load_alternatives_catalog


def _data_path(name: str) -> str:
    return str(resources.files("chainwatch").joinpath("data", name))


def _default_store() -> str:
    return os.environ.get(ENV_STORE, "./runs")


_RESOURCE_OPTIONS = [
    click.option(
        "--gazetteer",
        default=lambda: _data_path("gazetteer.json"),
        show_default="bundled",
        help="Gazetteer file {term, kind, canonical}.",
    ),
    click.option(
        "--type-lexicon",
        default=lambda: _data_path("type_lexicon.json"),
        show_default="bundled",
        help="Disruption type lexicon {keyword, type, priority}.",
    ),
    click.option(
        "--product-catalog",
        default=lambda: _data_path("product_catalog.json"),
        show_default="bundled",
        help="Product catalog {supplier, customer?, product}.",
    ),
    click.option(
        "--alternatives-catalog",
        default=lambda: _data_path("alternatives_catalog.json"),
        show_default="bundled",
        help="Alternative supplier catalog {product, name, country, industry}.",
    ),
    click.option("--max-tier", default=4, show_default=True),
    click.option("--validation-depth", default=3, show_default=True),
]


def _with_resources(fn):
    for option in reversed(_RESOURCE_OPTIONS):
        fn = option(fn)
    return fn


def _build_config(
    backend: str,
    gazetteer: str,
    type_lexicon: str,
    product_catalog: str,
    alternatives_catalog: str,
    max_tier: int,
    validation_depth: int,
    auto_approve: bool,
    graph_path: str | None,
) -> PipelineConfig:
    if backend == "rule":
        extraction = rule_backend(load_gazetteer(gazetteer), load_type_lexicon(type_lexicon))
    else:
        extraction = model_backend_from_env()
    return PipelineConfig(
        extraction_backend=extraction,
        product_catalog=load_catalog(product_catalog),
        sourcing_backend=load_alternatives_catalog(alternatives_catalog),
        max_tier=max_tier,
        validation_depth=validation_depth,
        auto_approve=auto_approve,
        resources={
            "graph": str(Path(graph_path).resolve()) if graph_path else None,
            "gazetteer": str(Path(gazetteer).resolve()),
            "type_lexicon": str(Path(type_lexicon).resolve()),
            "product_catalog": str(Path(product_catalog).resolve()),
            "alternatives_catalog": str(Path(alternatives_catalog).resolve()),
            "backend": backend,
        },
    )


def _config_from_record(record) -> tuple:
    """Rebuild graph and config from the resource paths stored on a run."""
    paths = record.config.get("resources", {})
    graph_path = paths.get("graph")
    if not graph_path or not Path(graph_path).exists():
        raise click.ClickException(
            f"run {record.run_id} does not carry a reachable graph path; "
            "re-run with --graph pointing at the original file"
        )
    graph = load_graph(graph_path)
    config = _build_config(
        backend="rule",
        gazetteer=paths.get("gazetteer", _data_path("gazetteer.json")),
        type_lexicon=paths.get("type_lexicon", _data_path("type_lexicon.json")),
        product_catalog=paths.get("product_catalog", _data_path("product_catalog.json")),
        alternatives_catalog=paths.get(
            "alternatives_catalog", _data_path("alternatives_catalog.json")
        ),
        max_tier=record.config.get("max_tier", 4),
        validation_depth=record.config.get("validation_depth", 3),
        auto_approve=False,
        graph_path=graph_path,
    )
    return graph, config


@click.group()
def main():
    """Supply chain disruption monitoring over multi-tier supplier graphs."""


@main.command("ingest-graph")
@click.argument("file", type=click.Path(exists=True))
def ingest_graph(file):
    """Validate a graph document and print its shape."""
    try:
        graph = load_graph(file)
    except Exception as exc:
        raise click.ClickException(str(exc))
    focal = f", focal={graph.focal}" if graph.focal else ""
    click.echo(f"ok: {len(graph)} companies, {len(graph.edges)} edges{focal}")


@main.command("run")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--article", "article_path", required=True, type=click.Path(exists=True))
@click.option("--focal", required=True)
@click.option("--backend", type=click.Choice(["rule", "model"]), default="rule", show_default=True)
@click.option("--auto-approve", is_flag=True, default=False)
@click.option("--store", default=_default_store, show_default="./runs")
@_with_resources
def run_cmd(
    graph_path,
    article_path,
    focal,
    backend,
    auto_approve,
    store,
    gazetteer,
    type_lexicon,
    product_catalog,
    alternatives_catalog,
    max_tier,
    validation_depth,
):
    """Execute the pipeline on one article and persist the run."""
    graph = load_graph(graph_path)
    config = _build_config(
        backend,
        gazetteer,
        type_lexicon,
        product_catalog,
        alternatives_catalog,
        max_tier,
        validation_depth,
        auto_approve,
        graph_path,
    )
    article = Path(article_path).read_text(encoding="utf-8")
    try:
        record = run_pipeline(article, focal, graph, config, article_ref=str(article_path))
    except Exception as exc:
        raise click.ClickException(str(exc))
    RunStore(store).save(record)

    click.echo(f"run_id: {record.run_id}")
    for stage in ("stage1", "stage2", "stage3", "stage5", "stage6", "stage7"):
        status = record.status.get(stage)
        if status is None:
            continue
        reason = f" ({status.reason})" if status.reason else ""
        click.echo(f"  {stage}: {status.state}{reason}")
    if record.plan is not None:
        click.echo("")
        click.echo(render_plan(record.plan))


@main.command("eval")
@click.option("--scenarios", "scenarios_dir", required=True, type=click.Path(exists=True))
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None, help="Write detailed JSON report here.")
@_with_resources
def eval_cmd(
    scenarios_dir,
    graph_path,
    out,
    gazetteer,
    type_lexicon,
    product_catalog,
    alternatives_catalog,
    max_tier,
    validation_depth,
):
    """Run every scenario with the rule backend and score it against gold."""
    graph = load_graph(graph_path)
    config = _build_config(
        "rule",
        gazetteer,
        type_lexicon,
        product_catalog,
        alternatives_catalog,
        max_tier,
        validation_depth,
        auto_approve=True,
        graph_path=graph_path,
    )
    evaluations = []
    for scenario in load_scenarios(scenarios_dir):
        record = run_pipeline(
            scenario.article, scenario.focal, graph, config, article_ref=f"scenario:{scenario.id}"
        )
        evaluations.append(evaluate_run(record, scenario, graph))
    suite = aggregate(evaluations)
    click.echo(format_summary_table(suite))
    if out:
        Path(out).write_text(
            json.dumps(suite.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
        )
        click.echo(f"detailed report written to {out}")


@main.command("review")
@click.argument("run_id")
@click.option("--verdict", required=True, type=click.Choice(["approve", "revise", "override"]))
@click.option("--reviewer", default="cli", show_default=True)
@click.option("--edits", "edits_path", type=click.Path(exists=True), default=None,
              help="JSON file: list of edits (revise) or items (override).")
@click.option("--store", default=_default_store, show_default="./runs")
def review_cmd(run_id, verdict, reviewer, edits_path, store):
    """Apply a reviewer verdict; approvals resume the sourcing stage."""
    run_store = RunStore(store)
    record = run_store.load(run_id)
    graph, config = _config_from_record(record)

    if verdict == "approve":
        v = Verdict.approve()
    elif verdict == "revise":
        if not edits_path:
            raise click.ClickException("revise requires --edits")
        v = Verdict.revise(json.loads(Path(edits_path).read_text(encoding="utf-8")))
    else:
        if not edits_path:
            raise click.ClickException("override requires --edits (replacement items)")
        raw_items = json.loads(Path(edits_path).read_text(encoding="utf-8"))
        v = Verdict.override(
            [
                ActionItem(
                    supplier=i["supplier"],
                    action=Action(i["action"]),
                    justification=i.get("justification", ""),
                )
                for i in raw_items
            ]
        )
    try:
        record = run_store.submit_review(run_id, v, reviewer, graph, config)
    except Exception as exc:
        raise click.ClickException(str(exc))
    click.echo(f"review_state: {record.plan.review_state.value}")
    status = record.status.get("stage7")
    if status is not None:
        reason = f" ({status.reason})" if status.reason else ""
        click.echo(f"stage7: {status.state}{reason}")


@main.command("export-viz")
@click.argument("run_id")
@click.option("--out", required=True, type=click.Path())
@click.option("--store", default=_default_store, show_default="./runs")
def export_viz_cmd(run_id, out, store):
    """Write the run's visualization document to a file."""
    run_store = RunStore(store)
    record = run_store.load(run_id)
    graph, _ = _config_from_record(record)
    try:
        doc = export_viz(record, graph)
    except Exception as exc:
        raise click.ClickException(str(exc))
    Path(out).write_text(json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8")
    click.echo(f"viz document written to {out}")


@main.command("serve")
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--store", default=_default_store, show_default="./runs")
@click.option("--graph", "graph_path", type=click.Path(exists=True),
              default=lambda: _data_path("mini_mb.json"), show_default="bundled mini_mb")
@click.option("--backend", type=click.Choice(["rule", "model"]), default="rule", show_default=True)
@_with_resources
def serve_cmd(
    port,
    host,
    store,
    graph_path,
    backend,
    gazetteer,
    type_lexicon,
    product_catalog,
    alternatives_catalog,
    max_tier,
    validation_depth,
):
    """Start the HTTP service (and static dashboard, when built)."""
    import uvicorn

    from .service import create_app

    graph = load_graph(graph_path)
    config = _build_config(
        backend,
        gazetteer,
        type_lexicon,
        product_catalog,
        alternatives_catalog,
        max_tier,
        validation_depth,
        auto_approve=False,
        graph_path=graph_path,
    )
    app = create_app(graph, config, RunStore(store))
    _mount_dashboard(app)
    uvicorn.run(app, host=host, port=port, log_level="warning")


def _mount_dashboard(app) -> None:
    """Serve frontend/dist at /ui when a built dashboard sits next to the repo."""
    for base in (Path.cwd(), Path.cwd().parent):
        dist = base / "frontend" / "dist"
        if (dist / "index.html").exists():
            from fastapi.staticfiles import StaticFiles

            app.mount("/ui", StaticFiles(directory=str(dist), html=True), name="ui")
            return


if __name__ == "__main__":
    sys.exit(main())
