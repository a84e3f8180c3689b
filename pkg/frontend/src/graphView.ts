// Force-layout network centered on one company. Edge styling encodes the
// relation origin (solid extracted, dashed predicted, bold manual) and
// review state (confirmed accent, rejected hidden unless toggled).

import type { CompanyDetail, RelationRow } from "./api.js";
import { runLayout, DEFAULT_OPTIONS, type LayoutEdge } from "./layout.js";

export const MAX_VISIBLE_NODES = 300;

const SVG_NS = "http://www.w3.org/2000/svg";

export interface GraphViewOptions {
  onNavigate?: (companyId: string) => void;
  showRejected?: boolean;
}

export function edgeClass(row: RelationRow): string {
  return `edge origin-${row.origin} review-${row.review}`;
}

export function visibleRows(rows: RelationRow[], showRejected: boolean): RelationRow[] {
  return rows.filter((row) => showRejected || row.review !== "rejected");
}

export function renderGraphView(
  container: HTMLElement,
  company: CompanyDetail,
  rows: RelationRow[],
  options: GraphViewOptions = {},
): SVGSVGElement {
  const shown = visibleRows(rows, options.showRejected ?? false);
  const supplierIds = [...new Set(shown.map((row) => row.supplier))];
  const ids = [company.id, ...supplierIds].slice(0, MAX_VISIBLE_NODES);
  const idSet = new Set(ids);
  const edges: LayoutEdge[] = shown
    .filter((row) => idSet.has(row.supplier))
    .map((row) => ({ source: company.id, target: row.supplier }));

  const nodes = runLayout(ids, company.id, edges);
  const byId = new Map(nodes.map((n) => [n.id, n]));
  const names = new Map(shown.map((row) => [row.supplier, row.supplier_name]));

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${DEFAULT_OPTIONS.width} ${DEFAULT_OPTIONS.height}`);
  svg.setAttribute("class", "network-graph");
  svg.dataset.company = company.id;

  for (const row of shown) {
    const source = byId.get(company.id);
    const target = byId.get(row.supplier);
    if (!source || !target) continue;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(source.x));
    line.setAttribute("y1", String(source.y));
    line.setAttribute("x2", String(target.x));
    line.setAttribute("y2", String(target.y));
    line.setAttribute("class", edgeClass(row));
    line.dataset.supplier = row.supplier;
    line.dataset.origin = row.origin;
    line.dataset.review = row.review;
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent =
      `${company.legal_name} -> ${row.supplier_name} ` +
      `(${row.origin}, ${row.review}, confidence ${row.confidence})`;
    line.appendChild(title);
    svg.appendChild(line);
  }

  for (const node of nodes) {
    const group = document.createElementNS(SVG_NS, "g");
    const isCenter = node.id === company.id;
    group.setAttribute("class", isCenter ? "node node-center" : "node");
    group.dataset.id = node.id;

    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(node.x));
    circle.setAttribute("cy", String(node.y));
    circle.setAttribute("r", isCenter ? "14" : "9");
    group.appendChild(circle);

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(node.x));
    label.setAttribute("y", String(node.y - (isCenter ? 20 : 14)));
    label.textContent = isCenter ? company.legal_name : (names.get(node.id) ?? node.id);
    group.appendChild(label);

    if (!isCenter && options.onNavigate) {
      group.addEventListener("click", () => options.onNavigate?.(node.id));
    }
    svg.appendChild(group);
  }

  if (shown.length === 0) {
    const hint = document.createElementNS(SVG_NS, "text");
    hint.setAttribute("x", String(DEFAULT_OPTIONS.width / 2));
    hint.setAttribute("y", String(DEFAULT_OPTIONS.height / 2 + 40));
    hint.setAttribute("class", "empty-hint");
    hint.textContent = "No supplier relations yet. Sign in to add the first one.";
    svg.appendChild(hint);
  }

  container.replaceChildren(svg);
  return svg;
}
