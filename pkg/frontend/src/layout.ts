// Tiered column layout for the disruption network: the focal firm sits in
// the leftmost column and each supplier tier gets its own column to the
// right, so tier depth reads directly off the page. Pure geometry, no DOM.

import type { RiskLevel, VizDocument, VizNode } from './types.js';

export const COLUMN_WIDTH = 220;
export const ROW_HEIGHT = 90;
export const MARGIN_X = 70;
export const MARGIN_Y = 60;
export const NODE_RADIUS = 22;

export const RISK_COLORS: Record<RiskLevel, string> = {
  HIGH: '#d64550',
  MEDIUM: '#e8a33d',
  LOW: '#3f9d63',
};
export const UNSCORED_COLOR = '#9aa3ad';

export function riskColor(node: Pick<VizNode, 'risk_level'>): string {
  return node.risk_level ? RISK_COLORS[node.risk_level] : UNSCORED_COLOR;
}

export interface PlacedNode {
  node: VizNode;
  x: number;
  y: number;
  color: string;
}

export interface PlacedEdge {
  from: PlacedNode;
  to: PlacedNode;
  product?: string;
}

export interface NetworkLayout {
  tiers: number[];
  nodes: PlacedNode[];
  edges: PlacedEdge[];
  width: number;
  height: number;
}

export function computeLayout(doc: VizDocument): NetworkLayout {
  const tiers = [...new Set(doc.nodes.map((n) => n.tier))].sort((a, b) => a - b);
  const columnOf = new Map(tiers.map((tier, column) => [tier, column]));

  const byTier = new Map<number, VizNode[]>();
  for (const node of doc.nodes) {
    const bucket = byTier.get(node.tier) ?? [];
    bucket.push(node);
    byTier.set(node.tier, bucket);
  }

  const placed = new Map<string, PlacedNode>();
  let deepestColumn = 0;
  for (const [tier, bucket] of byTier) {
    bucket.sort((a, b) => a.id.localeCompare(b.id));
    const column = columnOf.get(tier)!;
    deepestColumn = Math.max(deepestColumn, bucket.length);
    bucket.forEach((node, row) => {
      placed.set(node.id, {
        node,
        x: MARGIN_X + column * COLUMN_WIDTH,
        y: MARGIN_Y + row * ROW_HEIGHT,
        color: riskColor(node),
      });
    });
  }

  const edges = doc.edges
    .filter((e) => placed.has(e.from) && placed.has(e.to))
    .map((e) => ({
      from: placed.get(e.from)!,
      to: placed.get(e.to)!,
      product: e.product,
    }));

  return {
    tiers,
    nodes: [...placed.values()],
    edges,
    width: MARGIN_X * 2 + Math.max(tiers.length - 1, 0) * COLUMN_WIDTH + COLUMN_WIDTH,
    height: MARGIN_Y * 2 + Math.max(deepestColumn - 1, 0) * ROW_HEIGHT + ROW_HEIGHT,
  };
}

export function nodeTooltip(node: VizNode): string {
  const lines = [node.label, `Country: ${node.country}`, `Industry: ${node.industry}`];
  if (node.risk_level !== undefined && node.risk_score !== undefined) {
    lines.push(`Risk: ${node.risk_score.toFixed(6)} (${node.risk_level})`);
  }
  return lines.join('\n');
}
