// SVG rendering of the tiered network layout, with pan (drag) and zoom
// (wheel) over the viewBox. Tooltips ride on <title> elements so they work
// without any listener plumbing.

import { computeLayout, NODE_RADIUS, nodeTooltip } from './layout.js';
import type { VizDocument } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

export class MalformedVizDocument extends Error {}

function checkShape(doc: VizDocument): void {
  if (!doc || !Array.isArray(doc.nodes) || !Array.isArray(doc.edges)) {
    throw new MalformedVizDocument('viz document must carry nodes[] and edges[]');
  }
  for (const node of doc.nodes) {
    if (typeof node.id !== 'string' || typeof node.tier !== 'number') {
      throw new MalformedVizDocument(`malformed node: ${JSON.stringify(node)}`);
    }
  }
}

export function renderNetwork(container: HTMLElement, doc: VizDocument): SVGSVGElement {
  checkShape(doc);
  container.replaceChildren();

  if (doc.nodes.length === 0) {
    const empty = document.createElement('p');
    empty.className = 'empty-state';
    empty.textContent = 'No exposure: this run found no disrupted supplier paths.';
    container.appendChild(empty);
    return el('svg', {});
  }

  const layout = computeLayout(doc);
  const svg = el('svg', {
    class: 'network',
    viewBox: `0 0 ${layout.width} ${layout.height}`,
    preserveAspectRatio: 'xMidYMid meet',
  });

  for (const edge of layout.edges) {
    const group = el('g', { class: 'edge' });
    const line = el('line', {
      x1: String(edge.from.x),
      y1: String(edge.from.y),
      x2: String(edge.to.x),
      y2: String(edge.to.y),
      stroke: '#6b7280',
      'stroke-width': '1.5',
      'marker-end': 'url(#arrow)',
    });
    if (edge.product) {
      const title = el('title', {});
      title.textContent = `${edge.product}`;
      line.appendChild(title);
      const label = el('text', {
        class: 'edge-label',
        x: String((edge.from.x + edge.to.x) / 2),
        y: String((edge.from.y + edge.to.y) / 2 - 6),
        'text-anchor': 'middle',
      });
      label.textContent = edge.product;
      group.appendChild(label);
    }
    group.insertBefore(line, group.firstChild);
    svg.appendChild(group);
  }

  const defs = el('defs', {});
  const marker = el('marker', {
    id: 'arrow',
    viewBox: '0 0 10 10',
    refX: '24',
    refY: '5',
    markerWidth: '7',
    markerHeight: '7',
    orient: 'auto-start-reverse',
  });
  marker.appendChild(el('path', { d: 'M 0 0 L 10 5 L 0 10 z', fill: '#6b7280' }));
  defs.appendChild(marker);
  svg.insertBefore(defs, svg.firstChild);

  for (const placed of layout.nodes) {
    const group = el('g', { class: 'node', 'data-id': placed.node.id });
    const circle = el('circle', {
      cx: String(placed.x),
      cy: String(placed.y),
      r: String(NODE_RADIUS),
      fill: placed.color,
      stroke: '#1f2937',
      'stroke-width': '1',
    });
    const title = el('title', {});
    title.textContent = nodeTooltip(placed.node);
    circle.appendChild(title);
    const label = el('text', {
      class: 'node-label',
      x: String(placed.x),
      y: String(placed.y + NODE_RADIUS + 14),
      'text-anchor': 'middle',
    });
    label.textContent = placed.node.label;
    const tierTag = el('text', {
      class: 'tier-tag',
      x: String(placed.x),
      y: String(placed.y + 4),
      'text-anchor': 'middle',
      fill: '#ffffff',
    });
    tierTag.textContent = `T${placed.node.tier}`;
    group.append(circle, tierTag, label);
    svg.appendChild(group);
  }

  attachPanZoom(svg, layout.width, layout.height);
  container.appendChild(svg);
  return svg;
}

function attachPanZoom(svg: SVGSVGElement, width: number, height: number): void {
  let view = { x: 0, y: 0, w: width, h: height };
  const apply = () => svg.setAttribute('viewBox', `${view.x} ${view.y} ${view.w} ${view.h}`);

  svg.addEventListener('wheel', (event) => {
    event.preventDefault();
    const factor = event.deltaY > 0 ? 1.15 : 1 / 1.15;
    const w = Math.min(Math.max(view.w * factor, width / 8), width * 4);
    const h = (w / view.w) * view.h;
    view = { x: view.x + (view.w - w) / 2, y: view.y + (view.h - h) / 2, w, h };
    apply();
  });

  let dragging: { x: number; y: number } | null = null;
  svg.addEventListener('pointerdown', (event) => {
    dragging = { x: event.clientX, y: event.clientY };
  });
  svg.addEventListener('pointermove', (event) => {
    if (!dragging) return;
    const scale = view.w / (svg.clientWidth || width);
    view.x -= (event.clientX - dragging.x) * scale;
    view.y -= (event.clientY - dragging.y) * scale;
    dragging = { x: event.clientX, y: event.clientY };
    apply();
  });
  const stop = () => {
    dragging = null;
  };
  svg.addEventListener('pointerup', stop);
  svg.addEventListener('pointerleave', stop);
}
