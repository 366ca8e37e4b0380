"""Staged pipeline execution, run persistence, and visualization export.

Stages run strictly in order: detection (1), path mapping (2), enrichment
(3), risk scoring (5), action planning (6), and sourcing (7) - stage 4 of
the message flow is the visualization export, produced on demand rather
than as a pipeline stage. A stage failure marks everything later as
skipped and the record is still persisted; sourcing only ever runs once a
plan has been approved (or overridden) and contains a Replace action.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping

from .decisions import (
    ActionPlan,
    Action,
    InvalidTransitionError,
    ReviewState,
    Verdict,
    decide,
    review,
)
from .enrichment import ProductCatalog, SearchBackend, UNKNOWN_PRODUCT, enrich_paths
from .extraction import (
    DisruptionReport,
    ExtractionBackend,
    extract_report,
    validate_report,
)
from .graph import (
    DisruptedPath,
    DisruptionCriteria,
    SupplyGraph,
    disrupted_paths,
    resolve_entity,
)
from .risk import (
    DEFAULT_MAX_TIER,
    DEFAULT_THRESHOLDS,
    DEFAULT_WEIGHTS,
    RiskAssessment,
    RiskThresholds,
    RiskWeights,
    assess,
)
from .sourcing import (
    CandidateSupplier,
    DEFAULT_VALIDATION_DEPTH,
    SourcingBackend,
    find_alternatives,
    validate_candidate,
)

logger = logging.getLogger(__name__)

ENV_STORE = "CHAINWATCH_STORE"

STAGES = ("stage1", "stage2", "stage3", "stage5", "stage6", "stage7")


class PipelineError(Exception):
    pass


class UnresolvableFocalError(PipelineError):
    pass


class RunNotFoundError(PipelineError):
    def __init__(self, run_id: str):
        super().__init__(f"no run with id {run_id!r}")
        self.run_id = run_id


class CorruptRecordError(PipelineError):
    pass


class VizExportError(PipelineError):
    pass


class StageState:
    SUCCEEDED = "Succeeded"
    FAILED = "Failed"
    SKIPPED = "Skipped"


@dataclass(frozen=True)
class StageStatus:
    state: str
    reason: str | None = None

    def to_dict(self) -> dict:
        return {"state": self.state, "reason": self.reason}


@dataclass(frozen=True)
class SourcingResult:
    """Replacement search outcome for one Replace-actioned supplier."""

    supplier: str
    product: str
    candidates: tuple[CandidateSupplier, ...]
    note: str | None = None

    def to_dict(self) -> dict:
        return {
            "supplier": self.supplier,
            "product": self.product,
            "candidates": [c.to_dict() for c in self.candidates],
            "note": self.note,
        }


@dataclass
class PipelineConfig:
    """Everything a run needs beyond the graph and the article.

    ``resources`` records the file paths behind the configured backends so
    a persisted run can be resumed (review -> sourcing) in a later process.
    """

    extraction_backend: ExtractionBackend
    product_catalog: ProductCatalog = field(default_factory=ProductCatalog.empty)
    search_backend: SearchBackend | None = None
    sourcing_backend: SourcingBackend | None = None
    narrative_backend: object | None = None
    max_tier: int = DEFAULT_MAX_TIER
    weights: RiskWeights = DEFAULT_WEIGHTS
    thresholds: RiskThresholds = DEFAULT_THRESHOLDS
    validation_depth: int = DEFAULT_VALIDATION_DEPTH
    auto_approve: bool = False
    resources: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.max_tier < 1:
            raise PipelineError("max_tier must be >= 1")
        if self.validation_depth < 1:
            raise PipelineError("validation_depth must be >= 1")

    def describe(self) -> dict:
        return {
            "backend": self.extraction_backend.name,
            "max_tier": self.max_tier,
            "weights": {
                "breadth": self.weights.breadth,
                "dependency": self.weights.dependency,
                "criticality": self.weights.criticality,
                "centrality": self.weights.centrality,
                "depth": self.weights.depth,
            },
            "thresholds": {"high": self.thresholds.high, "medium": self.thresholds.medium},
            "validation_depth": self.validation_depth,
            "auto_approve": self.auto_approve,
            "resources": dict(self.resources),
        }


@dataclass
class RunRecord:
    """Persisted end-to-end execution of the pipeline for one article."""

    run_id: str
    focal: str
    article_ref: str
    created: str
    config: dict
    report: DisruptionReport | None = None
    paths: list[DisruptedPath] | None = None
    enriched: list[DisruptedPath] | None = None
    assessment: RiskAssessment | None = None
    plan: ActionPlan | None = None
    sourcing: tuple[SourcingResult, ...] | None = None
    status: dict[str, StageStatus] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "focal": self.focal,
            "article_ref": self.article_ref,
            "created": self.created,
            "config": self.config,
            "stages": {
                "o1_report": self.report.to_dict() if self.report else None,
                "o2_paths": [p.to_dict() for p in self.paths] if self.paths is not None else None,
                "o3_enriched": [p.to_dict() for p in self.enriched]
                if self.enriched is not None
                else None,
                "o5_assessment": self.assessment.to_dict() if self.assessment else None,
                "o6_plan": self.plan.to_dict() if self.plan else None,
                "o7_sourcing": [r.to_dict() for r in self.sourcing]
                if self.sourcing is not None
                else None,
            },
            "status": {k: v.to_dict() for k, v in self.status.items()},
            "timings": self.timings,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "RunRecord":
        from .risk import RiskComponents, RiskLevel, SupplierRisk

        stages = doc["stages"]
        report = None
        if stages.get("o1_report") is not None:
            report = validate_report(stages["o1_report"])

        def paths_from(key):
            raw = stages.get(key)
            if raw is None:
                return None
            return [DisruptedPath.from_dict(p) for p in raw]

        assessment = None
        if stages.get("o5_assessment") is not None:
            raw = stages["o5_assessment"]
            assessment = RiskAssessment(
                suppliers=tuple(
                    SupplierRisk(
                        supplier=s["supplier"],
                        components=RiskComponents(**s["components"]),
                        score=s["score"],
                        level=RiskLevel(s["level"]),
                    )
                    for s in raw["suppliers"]
                ),
                run_id=raw.get("run_id"),
            )

        plan = None
        if stages.get("o6_plan") is not None:
            plan = ActionPlan.from_dict(stages["o6_plan"])

        sourcing = None
        if stages.get("o7_sourcing") is not None:
            from .sourcing import CandidateSource, ValidationStatus

            sourcing = tuple(
                SourcingResult(
                    supplier=r["supplier"],
                    product=r["product"],
                    candidates=tuple(
                        CandidateSupplier(
                            name=c["name"],
                            country=c["country"],
                            industry=c["industry"],
                            source=CandidateSource(c["source"]),
                            validation=ValidationStatus(c["validation"]),
                            exposure_evidence=tuple(
                                DisruptedPath.from_dict(p) for p in c["exposure_evidence"]
                            ),
                            note=c.get("note"),
                        )
                        for c in r["candidates"]
                    ),
                    note=r.get("note"),
                )
                for r in raw_list(stages["o7_sourcing"])
            )

        record = cls(
            run_id=doc["run_id"],
            focal=doc["focal"],
            article_ref=doc["article_ref"],
            created=doc["created"],
            config=dict(doc.get("config", {})),
            report=report,
            paths=paths_from("o2_paths"),
            enriched=paths_from("o3_enriched"),
            assessment=assessment,
            plan=plan,
            sourcing=sourcing,
            status={
                k: StageStatus(state=v["state"], reason=v.get("reason"))
                for k, v in doc.get("status", {}).items()
            },
            timings=dict(doc.get("timings", {})),
            warnings=list(doc.get("warnings", [])),
        )
        record.validate()
        return record

    def validate(self) -> None:
        """Stage-order and review-gating invariants, checked on load."""
        chain = [
            ("stage1", self.report is not None),
            ("stage2", self.paths is not None),
            ("stage3", self.enriched is not None),
            ("stage5", self.assessment is not None),
            ("stage6", self.plan is not None),
            ("stage7", self.sourcing is not None),
        ]
        for i, (stage, present) in enumerate(chain):
            if not present:
                continue
            for earlier, _ in chain[:i]:
                status = self.status.get(earlier)
                if status is None or status.state != StageState.SUCCEEDED:
                    raise CorruptRecordError(
                        f"run {self.run_id}: {stage} output present but {earlier} did not succeed"
                    )
        if self.sourcing is not None:
            if self.plan is None or self.plan.review_state not in (
                ReviewState.APPROVED,
                ReviewState.OVERRIDDEN,
            ):
                raise CorruptRecordError(
                    f"run {self.run_id}: sourcing output present without an approved plan"
                )
            if not any(i.action is Action.REPLACE for i in self.plan.items):
                raise CorruptRecordError(
                    f"run {self.run_id}: sourcing output present without a Replace action"
                )


def raw_list(value) -> list:
    if not isinstance(value, list):
        raise CorruptRecordError("expected a list")
    return value


def new_run_id(now: datetime | None = None) -> str:
    stamp = (now or datetime.now(timezone.utc)).strftime("%Y%m%dT%H%M%S%f")
    return f"{stamp}-{uuid.uuid4().hex[:8]}"


def build_criteria(
    report: DisruptionReport, graph: SupplyGraph, warnings: list[str] | None = None
) -> DisruptionCriteria:
    """Turn report entities into traversal criteria.

    Company mentions are resolved to canonical ids; anything that fails to
    resolve is dropped with a warning, since it cannot exist on any path.
    """
    companies = set()
    for mention in report.companies:
        resolution = resolve_entity(mention, graph)
        if resolution.matched:
            companies.add(resolution.company)
        elif warnings is not None:
            warnings.append(f"company {mention!r} not found in graph; ignored")
    return DisruptionCriteria(
        countries=frozenset(report.countries),
        industries=frozenset(report.industries),
        companies=frozenset(companies),
    )


def run_pipeline(
    article: str,
    focal: str,
    graph: SupplyGraph,
    config: PipelineConfig,
    article_ref: str = "<inline>",
) -> RunRecord:
    """Execute stages 1..6 (and 7 when auto-approved) for one article.

    Any stage failure is recorded on the run, later stages are marked
    skipped, and the record is returned rather than raised away.
    """
    focal_id = _resolve_focal(focal, graph)
    record = RunRecord(
        run_id=new_run_id(),
        focal=focal_id,
        article_ref=article_ref,
        created=datetime.now(timezone.utc).isoformat(),
        config=config.describe(),
    )

    if not _step(record, "stage1", lambda: _stage1(record, article, focal, config)):
        return _skip_rest(record, "stage2")
    if not _step(record, "stage2", lambda: _stage2(record, graph, config)):
        return _skip_rest(record, "stage3")
    if not _step(record, "stage3", lambda: _stage3(record, config)):
        return _skip_rest(record, "stage5")
    if not _step(record, "stage5", lambda: _stage5(record, graph, config)):
        return _skip_rest(record, "stage6")
    if not _step(record, "stage6", lambda: _stage6(record, config)):
        return _skip_rest(record, "stage7")
    _run_sourcing_if_ready(record, graph, config)
    return record


def _resolve_focal(focal: str, graph: SupplyGraph) -> str:
    if focal in graph:
        return focal
    resolution = resolve_entity(focal, graph)
    if not resolution.matched:
        raise UnresolvableFocalError(
            f"focal {focal!r} not found in graph; closest: "
            + ", ".join(cid for cid, _ in resolution.candidates)
        )
    return resolution.company


def _step(record: RunRecord, stage: str, fn) -> bool:
    start = time.perf_counter()
    try:
        fn()
        record.status[stage] = StageStatus(StageState.SUCCEEDED)
        return True
    except Exception as exc:
        logger.warning("run %s: %s failed: %s", record.run_id, stage, exc)
        record.status[stage] = StageStatus(StageState.FAILED, reason=str(exc))
        return False
    finally:
        record.timings[stage] = time.perf_counter() - start


def _skip_rest(record: RunRecord, first_skipped: str) -> RunRecord:
    skipping = False
    for stage in STAGES:
        if stage == first_skipped:
            skipping = True
        if skipping:
            record.status[stage] = StageStatus(StageState.SKIPPED, reason="upstream failure")
    return record


def _stage1(record: RunRecord, article: str, focal: str, config: PipelineConfig) -> None:
    record.report = extract_report(article, focal, config.extraction_backend)


def _stage2(record: RunRecord, graph: SupplyGraph, config: PipelineConfig) -> None:
    criteria = build_criteria(record.report, graph, record.warnings)
    record.paths = disrupted_paths(graph, record.focal, criteria, max_tier=config.max_tier)


def _stage3(record: RunRecord, config: PipelineConfig) -> None:
    record.enriched = enrich_paths(
        record.paths, config.product_catalog, config.search_backend, record.warnings
    )


def _stage5(record: RunRecord, graph: SupplyGraph, config: PipelineConfig) -> None:
    record.assessment = assess(
        graph,
        record.focal,
        record.enriched,
        max_tier=config.max_tier,
        weights=config.weights,
        thresholds=config.thresholds,
        run_id=record.run_id,
    )


def _stage6(record: RunRecord, config: PipelineConfig) -> None:
    plan = decide(record.assessment, record.report, config.narrative_backend)
    if config.auto_approve:
        plan = review(plan, Verdict.approve(), reviewer="auto-approve")
    record.plan = plan


def _run_sourcing_if_ready(
    record: RunRecord, graph: SupplyGraph, config: PipelineConfig
) -> None:
    """Stage 7, gated on review state and the presence of Replace items."""
    plan = record.plan
    if plan is None or plan.review_state not in (ReviewState.APPROVED, ReviewState.OVERRIDDEN):
        record.status["stage7"] = StageStatus(StageState.SKIPPED, reason="awaiting review")
        return
    replace_items = [i for i in plan.items if i.action is Action.REPLACE]
    if not replace_items:
        record.status["stage7"] = StageStatus(StageState.SKIPPED, reason="no replace items")
        return

    def run() -> None:
        criteria = build_criteria(record.report, graph, None)
        results = []
        for item in replace_items:
            product = _product_for(record, item.supplier)
            candidates = find_alternatives(
                product, item.supplier, config.sourcing_backend, graph
            )
            validated = tuple(
                validate_candidate(graph, c, criteria, depth=config.validation_depth)
                for c in candidates
            )
            results.append(
                SourcingResult(
                    supplier=item.supplier,
                    product=product,
                    candidates=validated,
                    note=None if validated else "no alternatives found",
                )
            )
        record.sourcing = tuple(results)

    _step(record, "stage7", run)


def _product_for(record: RunRecord, supplier: str) -> str:
    """Product the supplier ships to the focal firm, from enriched paths."""
    for path in record.enriched or ():
        if len(path.nodes) > 1 and path.nodes[1].company == supplier and path.products:
            return path.products[0]
    return UNKNOWN_PRODUCT


def apply_review(
    record: RunRecord,
    verdict: Verdict,
    reviewer: str,
    graph: SupplyGraph,
    config: PipelineConfig,
) -> RunRecord:
    """Apply a reviewer verdict to a persisted run and resume sourcing.

    Raises :class:`InvalidTransitionError` when the plan is not pending,
    which is how the second of two racing verdicts loses.
    """
    if record.plan is None:
        raise PipelineError(f"run {record.run_id} has no plan to review")
    record.plan = review(record.plan, verdict, reviewer)
    if record.plan.review_state in (ReviewState.APPROVED, ReviewState.OVERRIDDEN):
        _run_sourcing_if_ready(record, graph, config)
    return record


class RunStore:
    """Append-only directory of one JSON document per run.

    Writes are atomic (write-then-rename); review transitions are
    serialized per run id, so the first of two conflicting verdicts wins
    and the second sees an invalid transition.
    """

    def __init__(self, directory: str | os.PathLike):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _path(self, run_id: str) -> Path:
        return self.directory / f"{run_id}.json"

    def _lock(self, run_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(run_id, threading.Lock())

    def save(self, record: RunRecord) -> None:
        payload = json.dumps(record.to_dict(), sort_keys=True, indent=2)
        tmp = self._path(record.run_id).with_suffix(".tmp")
        tmp.write_text(payload, encoding="utf-8")
        os.replace(tmp, self._path(record.run_id))

    def load(self, run_id: str) -> RunRecord:
        path = self._path(run_id)
        if not path.exists():
            raise RunNotFoundError(run_id)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
            return RunRecord.from_dict(doc)
        except CorruptRecordError:
            raise
        except Exception as exc:
            raise CorruptRecordError(f"run {run_id}: unreadable record ({exc})") from exc

    def list_ids(self) -> list[str]:
        """Run ids, newest first (ids sort by creation time)."""
        return sorted((p.stem for p in self.directory.glob("*.json")), reverse=True)

    def submit_review(
        self,
        run_id: str,
        verdict: Verdict,
        reviewer: str,
        graph: SupplyGraph,
        config: PipelineConfig,
    ) -> RunRecord:
        with self._lock(run_id):
            record = self.load(run_id)
            record = apply_review(record, verdict, reviewer, graph, config)
            self.save(record)
            return record


def export_viz(record: RunRecord, graph: SupplyGraph) -> dict:
    """Renderer-agnostic graph document for a run's disrupted subnetwork.

    Nodes carry tier, company metadata, and (for assessed Tier-1
    suppliers) risk level and score; edges point supplier -> customer and
    carry the enriched product when known. Ordering is deterministic, so
    exporting twice yields byte-identical documents.
    """
    paths = record.enriched if record.enriched is not None else record.paths
    if not paths:
        raise VizExportError(f"run {record.run_id} has no disrupted paths to export")

    risk_by_supplier = {}
    if record.assessment is not None:
        risk_by_supplier = {
            s.supplier: (s.level.value, round(s.score, 6))
            for s in record.assessment.suppliers
        }

    nodes: dict[str, dict] = {}
    edges: dict[tuple[str, str], dict] = {}
    for path in paths:
        for tier, node in enumerate(path.nodes):
            entry = nodes.setdefault(
                node.company,
                {
                    "id": node.company,
                    "label": graph.record(node.company).name
                    if node.company in graph
                    else node.company,
                    "country": node.country,
                    "industry": node.industry,
                    "tier": tier,
                },
            )
            entry["tier"] = min(entry["tier"], tier)
            if node.company in risk_by_supplier:
                level, score = risk_by_supplier[node.company]
                entry["risk_level"] = level
                entry["risk_score"] = score
        for i in range(len(path.nodes) - 1):
            key = (path.nodes[i + 1].company, path.nodes[i].company)
            edge = edges.setdefault(key, {"from": key[0], "to": key[1]})
            if path.products is not None and path.products[i] != UNKNOWN_PRODUCT:
                edge.setdefault("product", path.products[i])

    return {
        "run_id": record.run_id,
        "focal": record.focal,
        "nodes": sorted(nodes.values(), key=lambda n: (n["tier"], n["id"])),
        "edges": [edges[key] for key in sorted(edges)],
    }
