"""Scoring pipeline outputs against ground truth.

Four matchers cover the four evaluated stages: entity extraction
(normalized exact match per entity kind), disrupted paths (order-
insensitive Jaccard set matching at a 0.9 threshold, greedy one-to-one),
risk (supplier name plus score within a 0.1 tolerance), and decisions
(supplier addressed with the expected action). Precision, recall, and F1
follow the usual definitions, with F1 = 0 when P + R = 0; per-scenario
values are macro-aggregated as mean and sample standard deviation.

A stage where both prediction and gold are empty counts as a perfect
rejection (P = R = F1 = 1) and is flagged as vacuous so it can be told
apart from a genuinely scored stage.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Mapping, Sequence

from .graph import SupplyGraph, resolve_entity
from .text import normalize

PATH_JACCARD_THRESHOLD = 0.9
RISK_TOLERANCE = 0.1

ENTITY_KINDS = ("countries", "industries", "companies")

RUBRIC_WEIGHTS: Mapping[str, Mapping[str, float]] = {
    "disruption_summary": {"completeness": 0.4, "clarity": 0.3, "relevance": 0.3},
    "network_impact_analysis": {"completeness": 0.4, "accuracy": 0.4, "insightfulness": 0.2},
    "replacement_recommendations": {"completeness": 0.4, "accuracy": 0.4, "actionability": 0.2},
}


class EvaluationError(Exception):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if self.tp < 0 or self.fp < 0 or self.fn < 0:
            raise EvaluationError("confusion counts must be non-negative")

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn}


@dataclass(frozen=True)
class MetricSet:
    precision: float
    recall: float
    f1: float
    vacuous: bool = False

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "vacuous": self.vacuous,
        }


def metrics_from_counts(counts: ConfusionCounts) -> MetricSet:
    """P/R/F1 from counts; empty-vs-empty is a flagged perfect rejection."""
    if counts.tp == 0 and counts.fp == 0 and counts.fn == 0:
        return MetricSet(1.0, 1.0, 1.0, vacuous=True)
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 0.0
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return MetricSet(precision, recall, f1)


def _mean_metrics(values: Sequence[MetricSet]) -> MetricSet:
    n = len(values)
    return MetricSet(
        precision=sum(v.precision for v in values) / n,
        recall=sum(v.recall for v in values) / n,
        f1=sum(v.f1 for v in values) / n,
        vacuous=all(v.vacuous for v in values),
    )


# --------------------------------------------------------------------------
# Entity matcher
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EntityEvaluation:
    per_kind: Mapping[str, tuple[ConfusionCounts, MetricSet]]
    metrics: MetricSet  # arithmetic mean across the three kinds

    def to_dict(self) -> dict:
        return {
            "per_kind": {
                kind: {"counts": c.to_dict(), "metrics": m.to_dict()}
                for kind, (c, m) in self.per_kind.items()
            },
            "metrics": self.metrics.to_dict(),
        }


def entity_confusion(
    predicted: Mapping[str, Sequence[str]], gold: Mapping[str, Sequence[str]]
) -> EntityEvaluation:
    """Exact-match confusion per entity kind, averaged across kinds.

    Both sides pass through the shared normalization pipeline, so spelling
    variants of the same entity match and anything else is counted fully:
    predicted-only entities are false positives, gold-only are misses.
    """
    per_kind = {}
    for kind in ENTITY_KINDS:
        pred = {normalize(v) for v in predicted.get(kind, ()) if normalize(v)}
        want = {normalize(v) for v in gold.get(kind, ()) if normalize(v)}
        counts = ConfusionCounts(
            tp=len(pred & want), fp=len(pred - want), fn=len(want - pred)
        )
        per_kind[kind] = (counts, metrics_from_counts(counts))
    return EntityEvaluation(
        per_kind=per_kind,
        metrics=_mean_metrics([m for _, m in per_kind.values()]),
    )


# --------------------------------------------------------------------------
# Path matcher
# --------------------------------------------------------------------------

Triple = tuple[str, str, str]


def _path_key(path: Sequence[Sequence[str]]) -> frozenset[Triple]:
    return frozenset(
        (normalize(n[0]), normalize(n[1]), normalize(n[2])) for n in path
    )


def _jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def match_path_set(
    predicted: Sequence[Sequence[Sequence[str]]],
    gold: Sequence[Sequence[Sequence[str]]],
    threshold: float = PATH_JACCARD_THRESHOLD,
) -> tuple[ConfusionCounts, MetricSet]:
    """Greedy one-to-one matching of one bucket of paths.

    Each path is reduced to its set of (company, country, industry)
    triples; pairs match when Jaccard similarity reaches the threshold.
    Pairs are claimed in descending similarity order, so a near-duplicate
    cannot steal a better partner's match.
    """
    if not (0.0 < threshold <= 1.0):
        raise EvaluationError(f"threshold must be in (0, 1], got {threshold}")

    pred_keys = [_path_key(p) for p in predicted]
    gold_keys = [_path_key(g) for g in gold]
    pairs = sorted(
        (
            (-_jaccard(pk, gk), i, j)
            for i, pk in enumerate(pred_keys)
            for j, gk in enumerate(gold_keys)
        ),
    )
    matched_pred: set[int] = set()
    matched_gold: set[int] = set()
    tp = 0
    for neg_sim, i, j in pairs:
        if -neg_sim < threshold:
            break
        if i in matched_pred or j in matched_gold:
            continue
        matched_pred.add(i)
        matched_gold.add(j)
        tp += 1
    counts = ConfusionCounts(
        tp=tp, fp=len(pred_keys) - tp, fn=len(gold_keys) - tp
    )
    return counts, metrics_from_counts(counts)


@dataclass(frozen=True)
class PathEvaluation:
    per_tier: Mapping[int, tuple[ConfusionCounts, MetricSet]]
    metrics: MetricSet  # unweighted mean across tiers
    pooled: MetricSet  # metrics over summed counts, for reference

    def to_dict(self) -> dict:
        return {
            "per_tier": {
                str(t): {"counts": c.to_dict(), "metrics": m.to_dict()}
                for t, (c, m) in sorted(self.per_tier.items())
            },
            "metrics": self.metrics.to_dict(),
            "pooled": self.pooled.to_dict(),
        }


def match_paths(
    predicted_by_tier: Mapping[int, Sequence],
    gold_by_tier: Mapping[int, Sequence],
    threshold: float = PATH_JACCARD_THRESHOLD,
) -> PathEvaluation:
    """Per-tier path matching with an unweighted tier average.

    Tiers present on either side are scored; when neither side has any
    path at all the result is a single vacuous perfect score. The pooled
    variant aggregates counts over all tiers before computing metrics and
    is reported alongside the tier mean.
    """
    tiers = sorted(set(predicted_by_tier) | set(gold_by_tier))
    per_tier = {}
    total = ConfusionCounts()
    for tier in tiers:
        counts, metrics = match_path_set(
            predicted_by_tier.get(tier, ()), gold_by_tier.get(tier, ()), threshold
        )
        per_tier[tier] = (counts, metrics)
        total = total + counts
    if not tiers:
        vacuous = metrics_from_counts(ConfusionCounts())
        return PathEvaluation(per_tier={}, metrics=vacuous, pooled=vacuous)
    return PathEvaluation(
        per_tier=per_tier,
        metrics=_mean_metrics([m for _, m in per_tier.values()]),
        pooled=metrics_from_counts(total),
    )


# --------------------------------------------------------------------------
# Risk and decision matchers
# --------------------------------------------------------------------------


def match_risk(
    predicted: Mapping[str, float],
    gold: Mapping[str, float],
    tolerance: float = RISK_TOLERANCE,
) -> tuple[ConfusionCounts, MetricSet]:
    """Supplier identification with score agreement inside the tolerance.

    A predicted supplier whose name matches gold counts as a hit only when
    the scores agree within the tolerance; a name hit with a score outside
    it is a false positive. Only suppliers missing from the prediction are
    false negatives.
    """
    pred = {normalize(k): v for k, v in predicted.items()}
    want = {normalize(k): v for k, v in gold.items()}
    tp = fp = 0
    for name, score in pred.items():
        if name in want and abs(score - want[name]) <= tolerance:
            tp += 1
        else:
            fp += 1
    fn = sum(1 for name in want if name not in pred)
    counts = ConfusionCounts(tp=tp, fp=fp, fn=fn)
    return counts, metrics_from_counts(counts)


def match_decisions(
    predicted: Mapping[str, str], gold: Mapping[str, str]
) -> tuple[ConfusionCounts, MetricSet]:
    """Supplier addressed with the expected action.

    Wrong action counts as a false positive (the supplier was addressed,
    incorrectly); an unaddressed gold supplier is a miss.
    """
    pred = {normalize(k): v for k, v in predicted.items()}
    want = {normalize(k): v for k, v in gold.items()}
    tp = fp = 0
    for name, action in pred.items():
        if name in want and action == want[name]:
            tp += 1
        else:
            fp += 1
    fn = sum(1 for name in want if name not in pred)
    counts = ConfusionCounts(tp=tp, fp=fp, fn=fn)
    return counts, metrics_from_counts(counts)


# --------------------------------------------------------------------------
# Macro aggregation and rubric arithmetic
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MacroStat:
    mean: float
    std: float


@dataclass(frozen=True)
class MacroSummary:
    precision: MacroStat
    recall: MacroStat
    f1: MacroStat
    n: int
    single_sample: bool  # std reported as 0 because N < 2

    def to_dict(self) -> dict:
        return {
            "precision": {"mean": self.precision.mean, "std": self.precision.std},
            "recall": {"mean": self.recall.mean, "std": self.recall.std},
            "f1": {"mean": self.f1.mean, "std": self.f1.std},
            "n": self.n,
            "single_sample": self.single_sample,
        }


def macro(values: Sequence[MetricSet]) -> MacroSummary:
    """Mean and sample standard deviation (N-1) per metric across scenarios."""
    if not values:
        raise EvaluationError("macro aggregation over an empty list")
    n = len(values)

    def stat(xs: list[float]) -> MacroStat:
        mean = sum(xs) / n
        if n < 2:
            return MacroStat(mean=mean, std=0.0)
        var = sum((x - mean) ** 2 for x in xs) / (n - 1)
        return MacroStat(mean=mean, std=math.sqrt(var))

    return MacroSummary(
        precision=stat([v.precision for v in values]),
        recall=stat([v.recall for v in values]),
        f1=stat([v.f1 for v in values]),
        n=n,
        single_sample=n < 2,
    )


def rubric_weighted_mean(section: str, scores: Mapping[str, float]) -> float:
    """Weighted mean of one narrative section's criterion scores.

    Sections and weights: disruption_summary (completeness 0.4, clarity
    0.3, relevance 0.3), network_impact_analysis (completeness 0.4,
    accuracy 0.4, insightfulness 0.2), replacement_recommendations
    (completeness 0.4, accuracy 0.4, actionability 0.2).
    """
    try:
        weights = RUBRIC_WEIGHTS[section]
    except KeyError:
        raise EvaluationError(
            f"unknown rubric section {section!r}; expected one of {sorted(RUBRIC_WEIGHTS)}"
        ) from None
    for criterion in weights:
        if criterion not in scores:
            raise EvaluationError(f"missing criterion {criterion!r} for {section!r}")
        if not (0.0 <= scores[criterion] <= 1.0):
            raise EvaluationError(
                f"criterion {criterion!r} score out of [0, 1]: {scores[criterion]}"
            )
    return sum(weight * scores[criterion] for criterion, weight in weights.items())


# --------------------------------------------------------------------------
# Scenario cases and whole-run evaluation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioCase:
    """One labelled disruption scenario: article in, expected outputs out."""

    id: str
    focal: str
    article: str
    expected_positive: bool
    gold_type: str
    gold_countries: tuple[str, ...]
    gold_industries: tuple[str, ...]
    gold_companies: tuple[str, ...]
    gold_paths: Mapping[int, tuple]  # tier -> list of [ [company, country, industry], ... ]
    gold_risk: Mapping[str, float]
    gold_decisions: Mapping[str, str]

    @property
    def gold_entities(self) -> dict[str, tuple[str, ...]]:
        return {
            "countries": self.gold_countries,
            "industries": self.gold_industries,
            "companies": self.gold_companies,
        }


def load_scenario(source: str | os.PathLike | IO[str]) -> ScenarioCase:
    if hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    try:
        gold = doc["gold"]
        case = ScenarioCase(
            id=doc["id"],
            focal=doc["focal"],
            article=doc["article"],
            expected_positive=bool(doc["expected_positive"]),
            gold_type=gold["disruption_type"],
            gold_countries=tuple(gold["countries"]),
            gold_industries=tuple(gold["industries"]),
            gold_companies=tuple(gold["companies"]),
            gold_paths={int(t): tuple(paths) for t, paths in gold.get("paths", {}).items()},
            gold_risk=dict(gold.get("risk", {})),
            gold_decisions=dict(gold.get("decisions", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise EvaluationError(f"scenario document malformed: {exc!r}") from exc
    if not case.expected_positive and any(case.gold_paths.values()):
        raise EvaluationError(
            f"scenario {case.id}: expected_positive is false but gold paths exist"
        )
    return case


def load_scenarios(directory: str | os.PathLike) -> list[ScenarioCase]:
    files = sorted(Path(directory).glob("*.json"))
    if not files:
        raise EvaluationError(f"no scenario files in {directory}")
    return [load_scenario(f) for f in files]


@dataclass(frozen=True)
class RunEvaluation:
    scenario_id: str
    extraction: EntityEvaluation
    paths: PathEvaluation
    risk_counts: ConfusionCounts
    risk_metrics: MetricSet
    decision_counts: ConfusionCounts
    decision_metrics: MetricSet
    type_match: bool

    def stage_metrics(self) -> dict[str, MetricSet]:
        return {
            "extraction": self.extraction.metrics,
            "paths": self.paths.metrics,
            "risk": self.risk_metrics,
            "decisions": self.decision_metrics,
        }

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario_id,
            "type_match": self.type_match,
            "extraction": self.extraction.to_dict(),
            "paths": self.paths.to_dict(),
            "risk": {
                "counts": self.risk_counts.to_dict(),
                "metrics": self.risk_metrics.to_dict(),
            },
            "decisions": {
                "counts": self.decision_counts.to_dict(),
                "metrics": self.decision_metrics.to_dict(),
            },
        }


def evaluate_run(run, scenario: ScenarioCase, graph: SupplyGraph) -> RunEvaluation:
    """Score one pipeline run against its scenario's gold data.

    Failed or skipped stages contribute empty predictions, so they lose
    recall against non-empty gold instead of crashing the evaluation
    (errors cascade, they do not hide). Decision metrics compare the plan
    items as generated; evaluation runs use auto-approve, which never
    edits items.
    """
    resolution = resolve_entity(scenario.focal, graph)
    if not resolution.matched or resolution.company != run.focal:
        raise EvaluationError(
            f"scenario {scenario.id} focal {scenario.focal!r} does not match run focal {run.focal!r}"
        )

    def name_of(company_id: str) -> str:
        return graph.record(company_id).name if company_id in graph else company_id

    report = run.report
    predicted_entities = (
        {
            "countries": report.countries,
            "industries": report.industries,
            "companies": report.companies,
        }
        if report is not None
        else {"countries": (), "industries": (), "companies": ()}
    )
    extraction_eval = entity_confusion(predicted_entities, scenario.gold_entities)
    type_match = (
        report is not None and report.disruption_type.value == scenario.gold_type
    )

    predicted_by_tier: dict[int, list] = {}
    for path in run.paths or ():
        triples = [
            [name_of(n.company), n.country, n.industry] for n in path.nodes
        ]
        predicted_by_tier.setdefault(path.disrupted_tier, []).append(triples)
    path_eval = match_paths(predicted_by_tier, scenario.gold_paths)

    predicted_risk = (
        {name_of(s.supplier): s.score for s in run.assessment.suppliers}
        if run.assessment is not None
        else {}
    )
    risk_counts, risk_metrics = match_risk(predicted_risk, scenario.gold_risk)

    predicted_decisions = (
        {name_of(i.supplier): i.action.value for i in run.plan.items}
        if run.plan is not None
        else {}
    )
    decision_counts, decision_metrics = match_decisions(
        predicted_decisions, scenario.gold_decisions
    )

    return RunEvaluation(
        scenario_id=scenario.id,
        extraction=extraction_eval,
        paths=path_eval,
        risk_counts=risk_counts,
        risk_metrics=risk_metrics,
        decision_counts=decision_counts,
        decision_metrics=decision_metrics,
        type_match=type_match,
    )


STAGE_LABELS = {
    "extraction": "Disruption Monitoring",
    "paths": "Graph Query",
    "risk": "Risk Scoring",
    "decisions": "Decision Policy",
}


@dataclass(frozen=True)
class SuiteEvaluation:
    runs: tuple[RunEvaluation, ...]
    per_stage: Mapping[str, MacroSummary]

    def to_dict(self) -> dict:
        return {
            "runs": [r.to_dict() for r in self.runs],
            "per_stage": {k: v.to_dict() for k, v in self.per_stage.items()},
        }


def aggregate(evaluations: Sequence[RunEvaluation]) -> SuiteEvaluation:
    """Macro-average each stage's metrics across scenario evaluations."""
    per_stage = {}
    for stage in STAGE_LABELS:
        per_stage[stage] = macro([e.stage_metrics()[stage] for e in evaluations])
    return SuiteEvaluation(runs=tuple(evaluations), per_stage=per_stage)


def format_summary_table(suite: SuiteEvaluation) -> str:
    """Fixed-width per-stage summary: precision, recall, F1 as mean +/- std."""
    lines = [
        f"{'Stage':24} {'Precision':>19} {'Recall':>19} {'F1 Score':>19}",
    ]
    for stage, label in STAGE_LABELS.items():
        s = suite.per_stage[stage]
        lines.append(
            f"{label:24}"
            f" {s.precision.mean:.3f} +/- {s.precision.std:.3f}"
            f" {s.recall.mean:.3f} +/- {s.recall.std:.3f}"
            f" {s.f1.mean:.3f} +/- {s.f1.std:.3f}"
        )
    lines.append(f"(N = {suite.per_stage['extraction'].n} scenarios)")
    return "\n".join(lines)
