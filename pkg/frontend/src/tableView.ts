// Supplier table: source and confidence columns, sortable headers,
// provenance links for extracted rows, review controls for signed-in
// representatives. Values render exactly as the API returned them.

import type { RelationRow } from "./api.js";
import type { Session } from "./session.js";

export type SortKey = "supplier_name" | "origin" | "review" | "confidence";

export interface TableViewOptions {
  session?: Session | null;
  sortKey?: SortKey;
  sortDescending?: boolean;
  showRejected?: boolean;
  onSort?: (key: SortKey) => void;
  onReview?: (row: RelationRow, verdict: "confirmed" | "rejected") => void;
}

export function sortRows(
  rows: RelationRow[],
  key: SortKey,
  descending: boolean,
): RelationRow[] {
  const sorted = [...rows].sort((a, b) => {
    const va = a[key];
    const vb = b[key];
    if (typeof va === "number" && typeof vb === "number") return va - vb;
    return String(va).localeCompare(String(vb));
  });
  if (descending) sorted.reverse();
  return sorted;
}

export function canReview(row: RelationRow, session: Session | null | undefined): boolean {
  if (!session || !row.persisted) return false;
  return session.companyId === row.customer || session.companyId === row.supplier;
}

const COLUMNS: Array<[SortKey | null, string]> = [
  ["supplier_name", "Supplier"],
  ["origin", "Source"],
  ["review", "Review"],
  ["confidence", "Confidence"],
  [null, "Provenance"],
  [null, ""],
];

export function renderTableView(
  container: HTMLElement,
  rows: RelationRow[],
  options: TableViewOptions = {},
): HTMLTableElement {
  const key = options.sortKey ?? "confidence";
  const descending = options.sortDescending ?? true;
  const visible = rows.filter((row) => options.showRejected || row.review !== "rejected");
  const sorted = sortRows(visible, key, descending);

  const table = document.createElement("table");
  table.className = "supplier-table";

  const head = table.createTHead().insertRow();
  for (const [sortKey, label] of COLUMNS) {
    const cell = document.createElement("th");
    cell.textContent = label;
    if (sortKey) {
      cell.classList.add("sortable");
      if (sortKey === key) cell.classList.add(descending ? "sorted-desc" : "sorted-asc");
      cell.addEventListener("click", () => options.onSort?.(sortKey));
    }
    head.appendChild(cell);
  }

  const body = table.createTBody();
  for (const row of sorted) {
    const tr = body.insertRow();
    tr.className = `relation-row origin-${row.origin} review-${row.review}`;
    tr.dataset.supplier = row.supplier;
    tr.dataset.origin = row.origin;

    const name = tr.insertCell();
    const link = document.createElement("a");
    link.href = `#/company/${encodeURIComponent(row.supplier)}`;
    link.textContent = row.supplier_name;
    name.appendChild(link);

    const origin = tr.insertCell();
    origin.textContent = row.origin;
    origin.className = "origin-label";

    tr.insertCell().textContent = row.review;
    tr.insertCell().textContent = row.confidence.toFixed(2);

    const provenance = tr.insertCell();
    if (row.provenance.length > 0) {
      for (const ref of row.provenance) {
        const a = document.createElement("a");
        a.href = ref.url;
        a.textContent = new URL(ref.url).hostname;
        a.title = `score ${ref.score}`;
        a.target = "_blank";
        a.rel = "noopener";
        provenance.appendChild(a);
      }
    } else {
      provenance.textContent = "-";
    }

    const actions = tr.insertCell();
    actions.className = "review-controls";
    if (canReview(row, options.session)) {
      for (const verdict of ["confirmed", "rejected"] as const) {
        const button = document.createElement("button");
        button.textContent = verdict === "confirmed" ? "Confirm" : "Reject";
        button.className = `review-${verdict}`;
        button.addEventListener("click", () => options.onReview?.(row, verdict));
        actions.appendChild(button);
      }
    }
  }

  container.replaceChildren(table);
  return table;
}
