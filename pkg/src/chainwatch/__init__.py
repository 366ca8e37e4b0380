"""chainwatch: supply chain disruption monitoring over multi-tier supplier graphs.

Pipeline: detect a disruption in article text, map it onto the supplier
network, enrich the exposed chains with products, score Tier-1 supplier
risk, derive a reviewable action plan, and validate replacement suppliers.
Every numeric stage is deterministic; model and search backends are
optional plug-ins.
"""

from .graph import (
    CentralityTable,
    CompanyRecord,
    DisruptedPath,
    DisruptionCriteria,
    PathNode,
    Resolution,
    SupplyEdge,
    SupplyGraph,
    annotate_tiers,
    build_graph,
    centrality,
    disrupted_paths,
    downstream_set,
    load_graph,
    resolve_entity,
)
from .extraction import (
    DisruptionReport,
    DisruptionType,
    ExtractionBackend,
    extract_report,
    rule_backend,
    validate_report,
)
from .enrichment import ProductCatalog, SearchBackend, enrich_paths
from .risk import (
    RiskAssessment,
    RiskComponents,
    RiskLevel,
    RiskThresholds,
    RiskWeights,
    SupplierRisk,
    assess,
    assign_level,
    composite_score,
    compute_components,
)
from .decisions import (
    Action,
    ActionItem,
    ActionPlan,
    ReviewState,
    Verdict,
    decide,
    render_plan,
    review,
)
from .sourcing import (
    CandidateSupplier,
    ValidationStatus,
    find_alternatives,
    validate_candidate,
)
from .evaluation import (
    ConfusionCounts,
    MetricSet,
    ScenarioCase,
    entity_confusion,
    evaluate_run,
    macro,
    match_decisions,
    match_paths,
    match_risk,
    rubric_weighted_mean,
)
from .pipeline import (
    PipelineConfig,
    RunRecord,
    RunStore,
    export_viz,
    run_pipeline,
)

__version__ = "0.1.0"
