"""Action planning and the human review gate.

Risk levels map one-to-one onto actions (HIGH -> Replace, MEDIUM ->
IncreaseMonitoring, LOW -> StandardOperations). A generated plan starts in
PendingReview and accepts exactly one of three verdicts: approve freezes
it, revise edits items and leaves it pending again, override replaces the
items wholesale. Every accepted verdict appends an audit entry.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Callable, Mapping, Sequence

from .extraction import DisruptionReport
from .risk import RiskAssessment, RiskLevel


class DecisionError(Exception):
    pass


class InvalidTransitionError(DecisionError):
    def __init__(self, state: "ReviewState", verdict: str):
        super().__init__(f"verdict {verdict!r} not allowed in state {state.value}")
        self.state = state
        self.verdict = verdict


class Action(Enum):
    REPLACE = "Replace"
    INCREASE_MONITORING = "IncreaseMonitoring"
    STANDARD_OPERATIONS = "StandardOperations"


ACTION_FOR_LEVEL = {
    RiskLevel.HIGH: Action.REPLACE,
    RiskLevel.MEDIUM: Action.INCREASE_MONITORING,
    RiskLevel.LOW: Action.STANDARD_OPERATIONS,
}


class ReviewState(Enum):
    PENDING_REVIEW = "PendingReview"
    APPROVED = "Approved"
    REVISED = "Revised"
    OVERRIDDEN = "Overridden"


@dataclass(frozen=True)
class ActionItem:
    supplier: str
    action: Action
    justification: str
    due: str | None = None

    def to_dict(self) -> dict:
        return {
            "supplier": self.supplier,
            "action": self.action.value,
            "justification": self.justification,
            "due": self.due,
        }


@dataclass(frozen=True)
class AuditEntry:
    timestamp: str
    reviewer: str
    verdict: str
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "reviewer": self.reviewer,
            "verdict": self.verdict,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class ActionPlan:
    """One item per assessed supplier plus three narrative sections."""

    items: tuple[ActionItem, ...]
    disruption_summary: str
    network_impact_analysis: str
    replacement_recommendations: str
    review_state: ReviewState = ReviewState.PENDING_REVIEW
    audit: tuple[AuditEntry, ...] = ()

    def to_dict(self) -> dict:
        return {
            "items": [item.to_dict() for item in self.items],
            "narrative": {
                "disruption_summary": self.disruption_summary,
                "network_impact_analysis": self.network_impact_analysis,
                "replacement_recommendations": self.replacement_recommendations,
            },
            "review_state": self.review_state.value,
            "audit": [entry.to_dict() for entry in self.audit],
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "ActionPlan":
        return cls(
            items=tuple(
                ActionItem(
                    supplier=i["supplier"],
                    action=Action(i["action"]),
                    justification=i["justification"],
                    due=i.get("due"),
                )
                for i in raw["items"]
            ),
            disruption_summary=raw["narrative"]["disruption_summary"],
            network_impact_analysis=raw["narrative"]["network_impact_analysis"],
            replacement_recommendations=raw["narrative"]["replacement_recommendations"],
            review_state=ReviewState(raw["review_state"]),
            audit=tuple(
                AuditEntry(
                    timestamp=a["timestamp"],
                    reviewer=a["reviewer"],
                    verdict=a["verdict"],
                    detail=a.get("detail", ""),
                )
                for a in raw.get("audit", [])
            ),
        )


NarrativeBackend = Callable[[DisruptionReport, RiskAssessment], dict]


def decide(
    assessment: RiskAssessment,
    report: DisruptionReport,
    narrative_backend: NarrativeBackend | None = None,
) -> ActionPlan:
    """Derive a pending action plan from an assessment.

    Actions follow levels deterministically; narrative sections come from
    the backend when configured, otherwise from templates filled with the
    structured data, so no model is ever required.
    """
    items = []
    for entry in assessment.suppliers:
        c = entry.components
        justification = (
            f"Composite risk {entry.score:.6f} ({entry.level.value}): "
            f"breadth {c.exposure_breadth:.6f}, dependency {c.dependency_ratio:.6f}, "
            f"criticality {c.downstream_criticality:.6f}, "
            f"centrality {c.supplier_centrality:.6f}, depth {c.exposure_depth:.6f}."
        )
        items.append(
            ActionItem(
                supplier=entry.supplier,
                action=ACTION_FOR_LEVEL[entry.level],
                justification=justification,
            )
        )

    if narrative_backend is not None:
        sections = narrative_backend(report, assessment)
    else:
        sections = _template_narrative(report, assessment)

    return ActionPlan(
        items=tuple(items),
        disruption_summary=sections["disruption_summary"],
        network_impact_analysis=sections["network_impact_analysis"],
        replacement_recommendations=sections["replacement_recommendations"],
    )


def _template_narrative(report: DisruptionReport, assessment: RiskAssessment) -> dict:
    entities = []
    if report.countries:
        entities.append("countries " + ", ".join(report.countries))
    if report.industries:
        entities.append("industries " + ", ".join(report.industries))
    if report.companies:
        entities.append("companies " + ", ".join(report.companies))
    scope = "; ".join(entities) if entities else "no affected entities"

    if assessment.suppliers:
        top = assessment.suppliers[0]
        by_level = {level: 0 for level in RiskLevel}
        for s in assessment.suppliers:
            by_level[s.level] += 1
        impact = (
            f"{len(assessment.suppliers)} Tier-1 supplier(s) exposed "
            f"({by_level[RiskLevel.HIGH]} HIGH, {by_level[RiskLevel.MEDIUM]} MEDIUM, "
            f"{by_level[RiskLevel.LOW]} LOW). Highest risk: {top.supplier} "
            f"at {top.score:.6f}."
        )
        replacements = [s.supplier for s in assessment.suppliers if s.level is RiskLevel.HIGH]
        if replacements:
            recommendation = (
                "Initiate replacement sourcing for: "
                + ", ".join(replacements)
                + ". Validate every candidate's upstream chain against the active disruption before onboarding."
            )
        else:
            recommendation = "No supplier requires replacement; monitor MEDIUM-risk suppliers."
    else:
        impact = "No Tier-1 supplier is exposed through the monitored network."
        recommendation = "No action required; maintain standard operations."

    summary = report.summary or f"{report.disruption_type.value} disruption affecting {scope}."
    return {
        "disruption_summary": summary,
        "network_impact_analysis": impact,
        "replacement_recommendations": recommendation,
    }


@dataclass(frozen=True)
class Verdict:
    """Reviewer decision: approve, revise(edits), or override(items)."""

    kind: str  # approve | revise | override
    edits: tuple[Mapping, ...] = ()
    items: tuple[ActionItem, ...] = ()

    @classmethod
    def approve(cls) -> "Verdict":
        return cls(kind="approve")

    @classmethod
    def revise(cls, edits: Sequence[Mapping]) -> "Verdict":
        return cls(kind="revise", edits=tuple(edits))

    @classmethod
    def override(cls, items: Sequence[ActionItem]) -> "Verdict":
        return cls(kind="override", items=tuple(items))


def review(
    plan: ActionPlan,
    verdict: Verdict,
    reviewer: str,
    now: Callable[[], str] | None = None,
) -> ActionPlan:
    """Apply one reviewer verdict and return the updated plan.

    Only PendingReview plans accept verdicts. Revised plans re-enter
    PendingReview with their edits applied; override replaces the item
    list wholesale and records the prior actions in the audit trail.
    """
    stamp = now() if now else datetime.now(timezone.utc).isoformat()
    if plan.review_state is not ReviewState.PENDING_REVIEW:
        raise InvalidTransitionError(plan.review_state, verdict.kind)

    if verdict.kind == "approve":
        entry = AuditEntry(stamp, reviewer, "approve")
        return replace(plan, review_state=ReviewState.APPROVED, audit=plan.audit + (entry,))

    if verdict.kind == "revise":
        items = _apply_edits(plan.items, verdict.edits)
        entry = AuditEntry(
            stamp, reviewer, "revise", detail=f"{len(verdict.edits)} item edit(s)"
        )
        return replace(
            plan,
            items=items,
            review_state=ReviewState.PENDING_REVIEW,
            audit=plan.audit + (entry,),
        )

    if verdict.kind == "override":
        prior = "; ".join(f"{i.supplier}: {i.action.value}" for i in plan.items)
        entry = AuditEntry(
            stamp, reviewer, "override", detail=f"prior actions: {prior or 'none'}"
        )
        return replace(
            plan,
            items=verdict.items,
            review_state=ReviewState.OVERRIDDEN,
            audit=plan.audit + (entry,),
        )

    raise DecisionError(f"unknown verdict kind {verdict.kind!r}")


def _apply_edits(
    items: tuple[ActionItem, ...], edits: Sequence[Mapping]
) -> tuple[ActionItem, ...]:
    by_supplier = {item.supplier: item for item in items}
    for edit in edits:
        try:
            supplier = edit["supplier"]
        except (KeyError, TypeError):
            raise DecisionError(f"malformed edit (needs 'supplier'): {edit!r}") from None
        if supplier not in by_supplier:
            raise DecisionError(f"edit targets unknown supplier {supplier!r}")
        item = by_supplier[supplier]
        if "action" in edit:
            try:
                item = replace(item, action=Action(edit["action"]))
            except ValueError:
                raise DecisionError(f"unknown action {edit['action']!r}") from None
        if "justification" in edit:
            item = replace(item, justification=str(edit["justification"]))
        by_supplier[supplier] = item
    return tuple(by_supplier[item.supplier] for item in items)


def render_plan(plan: ActionPlan) -> str:
    """Deterministic human-readable report for a plan."""
    lines = [
        "SUPPLY CHAIN DISRUPTION ACTION PLAN",
        f"Review state: {plan.review_state.value}",
        "",
        "## Disruption Summary",
        plan.disruption_summary,
        "",
        "## Network Impact Analysis",
        plan.network_impact_analysis,
        "",
        "## Replacement Recommendations",
        plan.replacement_recommendations,
        "",
        "## Actions",
    ]
    if not plan.items:
        lines.append("No exposed Tier-1 suppliers; no actions required.")
    else:
        lines.append(f"{'supplier':40} {'action':22} justification")
        for item in plan.items:
            lines.append(f"{item.supplier:40} {item.action.value:22} {item.justification}")
    if plan.audit:
        lines.append("")
        lines.append("## Review Audit")
        for entry in plan.audit:
            lines.append(
                f"{entry.timestamp}  {entry.reviewer}  {entry.verdict}  {entry.detail}"
            )
    return "\n".join(lines) + "\n"
