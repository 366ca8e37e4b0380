// Payload shapes mirroring the monitoring service API. The dashboard never
// computes risk itself; every number shown here arrived in one of these.

export type RiskLevel = 'HIGH' | 'MEDIUM' | 'LOW';
export type ReviewStateName = 'PendingReview' | 'Approved' | 'Revised' | 'Overridden';
export type ActionName = 'Replace' | 'IncreaseMonitoring' | 'StandardOperations';

export interface VizNode {
  id: string;
  label: string;
  country: string;
  industry: string;
  tier: number;
  risk_level?: RiskLevel;
  risk_score?: number;
}

export interface VizEdge {
  from: string;
  to: string;
  product?: string;
}

export interface VizDocument {
  run_id?: string;
  focal: string;
  nodes: VizNode[];
  edges: VizEdge[];
}

export interface DisruptionReport {
  disruption_type: string;
  countries: string[];
  industries: string[];
  companies: string[];
  summary: string;
  diagnostic_questions: string[];
}

export interface SupplierRisk {
  supplier: string;
  score: number;
  level: RiskLevel;
  components: Record<string, number>;
}

export interface ActionItem {
  supplier: string;
  action: ActionName;
  justification: string;
  due?: string | null;
}

export interface AuditEntry {
  timestamp: string;
  reviewer: string;
  verdict: string;
  detail: string;
}

export interface ActionPlan {
  items: ActionItem[];
  narrative: {
    disruption_summary: string;
    network_impact_analysis: string;
    replacement_recommendations: string;
  };
  review_state: ReviewStateName;
  audit: AuditEntry[];
}

export interface CandidateSupplier {
  name: string;
  country: string;
  industry: string;
  source: string;
  validation: 'Unchecked' | 'DisruptionFree' | 'Exposed';
  note?: string | null;
}

export interface SourcingResult {
  supplier: string;
  product: string;
  candidates: CandidateSupplier[];
  note?: string | null;
}

export interface StageStatus {
  state: 'Succeeded' | 'Failed' | 'Skipped';
  reason?: string | null;
}

export interface RunRecord {
  run_id: string;
  focal: string;
  article_ref: string;
  created: string;
  stages: {
    o1_report: DisruptionReport | null;
    o2_paths: unknown[] | null;
    o3_enriched: unknown[] | null;
    o5_assessment: { suppliers: SupplierRisk[] } | null;
    o6_plan: ActionPlan | null;
    o7_sourcing: SourcingResult[] | null;
  };
  status: Record<string, StageStatus>;
  warnings: string[];
}

export interface ApiError {
  code: string;
  message: string;
}

export interface ReviewBody {
  verdict: 'approve' | 'revise' | 'override';
  reviewer: string;
  edits?: Array<Record<string, string>>;
  items?: Array<{ supplier: string; action: string; justification: string }>;
}
