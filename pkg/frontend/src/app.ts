// Single-page app: hash routing between the company search and the
// company network view. All state shown on screen is mirrored from API
// responses; review clicks update optimistically and roll back on error.

import { ApiClient, ApiError, type CompanyDetail, type RelationRow } from "./api.js";
import { renderGraphView } from "./graphView.js";
import { renderTableView, type SortKey } from "./tableView.js";
import {
  renderAddSupplierForm,
  renderClaimFlow,
  renderNudgeBanner,
  renderUploadForm,
} from "./forms.js";
import { clearSession, loadSession, type Session } from "./session.js";

export interface AppHandles {
  navigate: (hash: string) => Promise<void>;
  refresh: () => Promise<void>;
  state: CompanyPageState;
}

export interface CompanyPageState {
  company: CompanyDetail | null;
  rows: RelationRow[];
  showRejected: boolean;
  sortKey: SortKey;
  sortDescending: boolean;
  session: Session | null;
}

function section(root: HTMLElement, className: string): HTMLElement {
  const node = document.createElement("section");
  node.className = className;
  root.appendChild(node);
  return node;
}

export function createApp(root: HTMLElement, api: ApiClient): AppHandles {
  root.replaceChildren();
  const header = section(root, "app-header");
  const nudgeSlot = section(root, "nudge-slot");
  const errorSlot = section(root, "error-slot");
  const main = section(root, "app-main");

  const state: CompanyPageState = {
    company: null,
    rows: [],
    showRejected: false,
    sortKey: "confidence",
    sortDescending: true,
    session: loadSession(),
  };
  if (state.session) api.setToken(state.session.token);

  function showError(error: unknown, retry: () => void): void {
    errorSlot.replaceChildren();
    const banner = document.createElement("div");
    banner.className = "error-banner";
    banner.textContent =
      error instanceof ApiError
        ? `API error ${error.status} (${error.code}): ${error.message}`
        : `API unreachable: ${String(error)}`;
    const button = document.createElement("button");
    button.textContent = "Retry";
    button.addEventListener("click", () => {
      errorSlot.replaceChildren();
      retry();
    });
    banner.appendChild(button);
    errorSlot.appendChild(banner);
  }

  function renderHeader(): void {
    header.replaceChildren();
    const title = document.createElement("a");
    title.href = "#/";
    title.className = "app-title";
    title.textContent = "Supplier Relation Platform";
    header.appendChild(title);

    const status = document.createElement("span");
    status.className = "session-status";
    if (state.session) {
      status.textContent = `signed in as ${state.session.companyId}`;
      const logout = document.createElement("button");
      logout.className = "logout";
      logout.textContent = "Log out";
      logout.addEventListener("click", () => {
        clearSession();
        state.session = null;
        api.setToken(null);
        void render();
      });
      header.append(status, logout);
    } else {
      status.textContent = "browsing publicly";
      header.appendChild(status);
    }
  }

  async function renderHome(): Promise<void> {
    main.replaceChildren();
    const search = document.createElement("input");
    search.className = "company-search";
    search.placeholder = "Search companies";
    const results = document.createElement("div");
    results.className = "company-results";
    main.append(search, results);

    async function refreshList(): Promise<void> {
      try {
        const list = await api.listCompanies(search.value, 1, 30);
        const table = document.createElement("table");
        table.className = "company-list";
        for (const company of list.items) {
          const row = table.insertRow();
          const cell = row.insertCell();
          const link = document.createElement("a");
          link.href = `#/company/${encodeURIComponent(company.id)}`;
          link.textContent = company.legal_name;
          cell.appendChild(link);
          row.insertCell().textContent = company.industry ?? "";
          row.insertCell().textContent = company.continent ?? "";
          row.insertCell().textContent = company.transparent ? "transparent" : "";
        }
        results.replaceChildren(table);
      } catch (error) {
        showError(error, () => void refreshList());
      }
    }

    search.addEventListener("input", () => void refreshList());
    await refreshList();
  }

  async function reviewRow(row: RelationRow, verdict: "confirmed" | "rejected"): Promise<void> {
    const previous = row.review;
    row.review = verdict;          // optimistic
    renderCompanyViews();
    try {
      const updated = await api.review(row.customer, row.supplier, row.origin, verdict);
      const index = state.rows.findIndex(
        (r) => r.supplier === row.supplier && r.origin === row.origin,
      );
      if (index >= 0) state.rows[index] = updated;
    } catch (error) {
      row.review = previous;       // roll back
      if (error instanceof ApiError && (error.status === 401 || error.status === 403)) {
        renderClaimPanel();
      } else {
        showError(error, () => void refresh());
      }
    }
    renderCompanyViews();
  }

  let graphSlot: HTMLElement;
  let tableSlot: HTMLElement;
  let formsSlot: HTMLElement;

  function renderCompanyViews(): void {
    if (!state.company) return;
    renderGraphView(graphSlot, state.company, state.rows, {
      showRejected: state.showRejected,
      onNavigate: (id) => {
        window.location.hash = `#/company/${encodeURIComponent(id)}`;
      },
    });
    renderTableView(tableSlot, state.rows, {
      session: state.session,
      sortKey: state.sortKey,
      sortDescending: state.sortDescending,
      showRejected: state.showRejected,
      onSort: (key) => {
        if (state.sortKey === key) state.sortDescending = !state.sortDescending;
        else {
          state.sortKey = key;
          state.sortDescending = key === "confidence";
        }
        renderCompanyViews();
      },
      onReview: (row, verdict) => void reviewRow(row, verdict),
    });
  }

  function renderClaimPanel(): void {
    if (!state.company) return;
    renderClaimFlow(formsSlot, api, state.company.id, (session) => {
      state.session = session;
      renderHeader();
      renderForms();
      renderCompanyViews();
      void renderNudgeBanner(nudgeSlot, api, state.session);
    });
  }

  function renderForms(): void {
    if (!state.company) return;
    formsSlot.replaceChildren();
    const isOwn = state.session?.companyId === state.company.id;
    if (!state.session || !isOwn) {
      renderClaimPanel();
      return;
    }
    const addSlot = document.createElement("div");
    const uploadSlot = document.createElement("div");
    formsSlot.append(addSlot, uploadSlot);
    renderAddSupplierForm(addSlot, api, state.company.id,
      () => void refresh(), renderClaimPanel);
    renderUploadForm(uploadSlot, api, state.company.id,
      () => void refresh(), renderClaimPanel);
  }

  async function renderCompany(companyId: string): Promise<void> {
    main.replaceChildren();
    try {
      const [company, suppliers] = await Promise.all([
        api.companyDetail(companyId),
        api.suppliers(companyId, ["extracted", "manual", "predicted"], true),
      ]);
      state.company = company;
      state.rows = suppliers.items;
    } catch (error) {
      showError(error, () => void renderCompany(companyId));
      return;
    }

    const heading = document.createElement("h2");
    heading.textContent = state.company.legal_name;
    if (state.company.transparent) {
      const badge = document.createElement("span");
      badge.className = "transparent-badge";
      badge.textContent = "transparent";
      heading.appendChild(badge);
    }
    main.appendChild(heading);

    const toggle = document.createElement("label");
    toggle.className = "show-rejected-toggle";
    const checkbox = document.createElement("input");
    checkbox.type = "checkbox";
    checkbox.checked = state.showRejected;
    checkbox.addEventListener("change", () => {
      state.showRejected = checkbox.checked;
      renderCompanyViews();
    });
    toggle.append(checkbox, document.createTextNode(" show rejected relations"));
    main.appendChild(toggle);

    graphSlot = section(main, "graph-slot");
    tableSlot = section(main, "table-slot");
    formsSlot = section(main, "forms-slot");
    renderCompanyViews();
    renderForms();
    void renderNudgeBanner(nudgeSlot, api, state.session);
  }

  let currentHash = "#/";

  async function navigate(hash: string): Promise<void> {
    currentHash = hash || "#/";
    // pick up sessions established since mount (another tab, tests)
    state.session = loadSession();
    api.setToken(state.session?.token ?? null);
    renderHeader();
    const match = /^#\/company\/(.+)$/.exec(currentHash);
    if (match) {
      await renderCompany(decodeURIComponent(match[1]));
    } else {
      state.company = null;
      state.rows = [];
      await renderHome();
    }
  }

  async function refresh(): Promise<void> {
    await navigate(currentHash);
  }

  async function render(): Promise<void> {
    await refresh();
  }

  window.addEventListener("hashchange", () => void navigate(window.location.hash));
  return { navigate, refresh, state };
}

declare global {
  interface Window {
    SUPPLIERGRAPH_API_BASE?: string;
  }
}

export function mount(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  const api = new ApiClient(window.SUPPLIERGRAPH_API_BASE ?? "");
  const app = createApp(root, api);
  void app.navigate(window.location.hash);
}
