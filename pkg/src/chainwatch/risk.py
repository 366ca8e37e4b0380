"""Tier-1 supplier risk scoring.

For every Tier-1 supplier touched by a disruption, five bounded component
metrics are combined into a weighted composite:

    score = 0.35 * exposure_breadth
          + 0.25 * dependency_ratio
          + 0.20 * downstream_criticality
          + 0.10 * supplier_centrality
          + 0.10 * exposure_depth

Levels: HIGH at score >= 0.6, MEDIUM in [0.45, 0.6), LOW below 0.45.
All inputs are immutable, so per-supplier computations are independent
and the final ordering makes results canonical.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from .graph import (
    CentralityTable,
    DisruptedPath,
    SupplyGraph,
    UnknownCompanyError,
    annotate_tiers,
    centrality,
    downstream_set,
)

TOP_N = 10
DEFAULT_MAX_TIER = 4


class RiskError(Exception):
    pass


@dataclass(frozen=True)
class RiskWeights:
    breadth: float = 0.35
    dependency: float = 0.25
    criticality: float = 0.20
    centrality: float = 0.10
    depth: float = 0.10

    def __post_init__(self):
        total = self.breadth + self.dependency + self.criticality + self.centrality + self.depth
        if abs(total - 1.0) > 1e-9:
            raise RiskError(f"risk weights must sum to 1, got {total}")


@dataclass(frozen=True)
class RiskThresholds:
    high: float = 0.60
    medium: float = 0.45

    def __post_init__(self):
        if not (0.0 <= self.medium < self.high <= 1.0):
            raise RiskError("thresholds must satisfy 0 <= medium < high <= 1")


DEFAULT_WEIGHTS = RiskWeights()
DEFAULT_THRESHOLDS = RiskThresholds()


class RiskLevel(Enum):
    HIGH = "HIGH"
    MEDIUM = "MEDIUM"
    LOW = "LOW"


@dataclass(frozen=True)
class RiskComponents:
    """Per-supplier component metrics, each in [0, 1]."""

    exposure_depth: float
    exposure_breadth: float
    dependency_ratio: float
    downstream_criticality: float
    supplier_centrality: float

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if not (0.0 <= value <= 1.0):
                raise RiskError(f"component {name} out of [0, 1]: {value}")

    def as_dict(self) -> dict[str, float]:
        return {
            "exposure_depth": self.exposure_depth,
            "exposure_breadth": self.exposure_breadth,
            "dependency_ratio": self.dependency_ratio,
            "downstream_criticality": self.downstream_criticality,
            "supplier_centrality": self.supplier_centrality,
        }


@dataclass(frozen=True)
class SupplierRisk:
    supplier: str
    components: RiskComponents
    score: float
    level: RiskLevel

    def to_dict(self) -> dict:
        return {
            "supplier": self.supplier,
            "score": round(self.score, 6),
            "level": self.level.value,
            "components": {k: round(v, 6) for k, v in self.components.as_dict().items()},
        }


@dataclass(frozen=True)
class RiskAssessment:
    """Top suppliers by composite score, at most ten, highest first."""

    suppliers: tuple[SupplierRisk, ...]
    run_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "suppliers": [s.to_dict() for s in self.suppliers],
            "run_id": self.run_id,
        }


def composite_score(
    components: RiskComponents, weights: RiskWeights = DEFAULT_WEIGHTS
) -> float:
    """Exact weighted sum of the five components."""
    return (
        weights.breadth * components.exposure_breadth
        + weights.dependency * components.dependency_ratio
        + weights.criticality * components.downstream_criticality
        + weights.centrality * components.supplier_centrality
        + weights.depth * components.exposure_depth
    )


def assign_level(
    score: float, thresholds: RiskThresholds = DEFAULT_THRESHOLDS
) -> RiskLevel:
    if not (0.0 <= score <= 1.0):
        raise RiskError(f"score out of [0, 1]: {score}")
    if score >= thresholds.high:
        return RiskLevel.HIGH
    if score >= thresholds.medium:
        return RiskLevel.MEDIUM
    return RiskLevel.LOW


def compute_components(
    graph: SupplyGraph,
    tier_map: Mapping[str, int],
    centrality_table: CentralityTable,
    paths: Sequence[DisruptedPath],
    supplier: str,
    max_tier: int = DEFAULT_MAX_TIER,
) -> RiskComponents:
    """Component metrics for one Tier-1 supplier.

    The supplier's subtree is everything reachable through its own
    supplier chain; disrupted companies are the endpoints of ``paths``.
    A supplier that is itself disrupted takes breadth = dependency = 1.
    Criticality looks only at disrupted companies strictly below the
    supplier and reads centrality from the full network.
    """
    if tier_map.get(supplier) != 1:
        raise RiskError(f"supplier {supplier!r} is not Tier-1 for this focal firm")

    disrupted = {p.nodes[-1].company for p in paths}
    subtree = downstream_set(graph, supplier)
    self_disrupted = supplier in disrupted
    disrupted_below = sorted(d for d in subtree if d in disrupted)

    disrupted_tiers = [tier_map[d] for d in disrupted_below if d in tier_map]
    if self_disrupted:
        disrupted_tiers.append(tier_map[supplier])
    exposure_depth = (max(disrupted_tiers) / max_tier) if disrupted_tiers else 0.0

    if self_disrupted:
        breadth = 1.0
        dependency = 1.0
    elif not subtree:
        breadth = 0.0
        dependency = 0.0
    else:
        total_weight = sum(1.0 / depth for depth in subtree.values())
        hit_weight = sum(1.0 / subtree[d] for d in disrupted_below)
        breadth = hit_weight / total_weight
        dependency = len(disrupted_below) / len(subtree)

    criticality = 0.0
    for d in disrupted_below:
        criticality = max(
            criticality, centrality_table.degree[d], centrality_table.pagerank[d]
        )

    return RiskComponents(
        exposure_depth=exposure_depth,
        exposure_breadth=breadth,
        dependency_ratio=dependency,
        downstream_criticality=criticality,
        supplier_centrality=centrality_table.degree[supplier],
    )


def assess(
    graph: SupplyGraph,
    focal: str,
    paths: Sequence[DisruptedPath],
    max_tier: int = DEFAULT_MAX_TIER,
    weights: RiskWeights = DEFAULT_WEIGHTS,
    thresholds: RiskThresholds = DEFAULT_THRESHOLDS,
    run_id: str | None = None,
) -> RiskAssessment:
    """Score every Tier-1 supplier sitting on a disrupted path.

    Paths start at the focal firm, so the Tier-1 ancestor of each
    disrupted company is the path's second node. Results are sorted by
    descending score with ascending id as tie-break and truncated to the
    ten riskiest.
    """
    if focal not in graph:
        raise UnknownCompanyError(focal)
    if not paths:
        return RiskAssessment(suppliers=(), run_id=run_id)

    tier_map = annotate_tiers(graph, focal)
    table = centrality(graph)
    tier1 = sorted({p.nodes[1].company for p in paths if len(p.nodes) > 1})

    scored = []
    for supplier in tier1:
        components = compute_components(graph, tier_map, table, paths, supplier, max_tier)
        score = composite_score(components, weights)
        scored.append(
            SupplierRisk(
                supplier=supplier,
                components=components,
                score=score,
                level=assign_level(score, thresholds),
            )
        )
    scored.sort(key=lambda s: (-s.score, s.supplier))
    return RiskAssessment(suppliers=tuple(scored[:TOP_N]), run_id=run_id)
