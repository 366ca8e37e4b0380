"""HTTP service over the pipeline: create runs, review plans, export viz.

The service owns one loaded graph, one pipeline configuration, and one run
store. Domain errors map to machine-readable ``{code, message}`` bodies;
review verdicts are serialized per run by the store, so racing reviewers
cannot double-apply.
"""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .decisions import (
    Action,
    ActionItem,
    DecisionError,
    InvalidTransitionError,
    Verdict,
)
from .graph import SupplyGraph, UnknownCompanyError
from .pipeline import (
    CorruptRecordError,
    PipelineConfig,
    PipelineError,
    RunNotFoundError,
    RunStore,
    UnresolvableFocalError,
    export_viz,
    run_pipeline,
)


class RunRequest(BaseModel):
    article: str
    focal: str
    article_ref: str = "<inline>"
    auto_approve: bool | None = None


class ItemBody(BaseModel):
    supplier: str
    action: str
    justification: str = ""


class ReviewRequest(BaseModel):
    verdict: str = Field(pattern="^(approve|revise|override)$")
    reviewer: str = "api"
    edits: list[dict] | None = None
    items: list[ItemBody] | None = None


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def create_app(graph: SupplyGraph, config: PipelineConfig, store: RunStore) -> FastAPI:
    app = FastAPI(title="chainwatch", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.graph = graph
    app.state.config = config
    app.state.store = store

    @app.exception_handler(RunNotFoundError)
    async def _not_found(request, exc):
        return _error(404, "run_not_found", str(exc))

    @app.exception_handler(InvalidTransitionError)
    async def _conflict(request, exc):
        return _error(409, "invalid_transition", str(exc))

    @app.exception_handler(CorruptRecordError)
    async def _corrupt(request, exc):
        return _error(500, "corrupt_record", str(exc))

    @app.exception_handler(DecisionError)
    async def _decision(request, exc):
        return _error(400, "invalid_verdict", str(exc))

    @app.exception_handler(PipelineError)
    async def _pipeline(request, exc):
        return _error(409, "review_unavailable", str(exc))

    @app.get("/health")
    def health():
        return {"status": "ok", "graph_companies": len(graph)}

    @app.post("/runs", status_code=201)
    def create_run(body: RunRequest):
        run_config = config
        if body.auto_approve is not None and body.auto_approve != config.auto_approve:
            import dataclasses

            run_config = dataclasses.replace(config, auto_approve=body.auto_approve)
        try:
            record = run_pipeline(
                body.article, body.focal, graph, run_config, article_ref=body.article_ref
            )
        except UnresolvableFocalError as exc:
            return _error(400, "unresolvable_focal", str(exc))
        except UnknownCompanyError as exc:
            return _error(400, "unknown_company", str(exc))
        store.save(record)
        return {"run_id": record.run_id}

    @app.get("/runs")
    def list_runs():
        return {"runs": store.list_ids()}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        return store.load(run_id).to_dict()

    @app.post("/runs/{run_id}/review")
    def review_run(run_id: str, body: ReviewRequest):
        verdict = _to_verdict(body)
        record = store.submit_review(run_id, verdict, body.reviewer, graph, config)
        return record.to_dict()

    @app.get("/runs/{run_id}/viz")
    def get_viz(run_id: str):
        record = store.load(run_id)
        try:
            return export_viz(record, graph)
        except Exception as exc:
            return _error(400, "viz_unavailable", str(exc))

    return app


def _to_verdict(body: ReviewRequest) -> Verdict:
    if body.verdict == "approve":
        return Verdict.approve()
    if body.verdict == "revise":
        if not body.edits:
            raise DecisionError("revise verdict requires non-empty edits")
        return Verdict.revise(body.edits)
    if not body.items:
        raise DecisionError("override verdict requires replacement items")
    try:
        items = tuple(
            ActionItem(
                supplier=i.supplier,
                action=Action(i.action),
                justification=i.justification,
            )
            for i in body.items
        )
    except ValueError as exc:
        raise DecisionError(f"unknown action in override items: {exc}") from exc
    return Verdict.override(items)
