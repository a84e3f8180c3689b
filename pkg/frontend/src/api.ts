// Typed client for the platform JSON API. The UI is a pure API client:
// every displayed value comes back from these calls verbatim.

export interface CompanySummary {
  id: string;
  legal_name: string;
  industry: string | null;
  country: string | null;
  continent: string | null;
  transparent: boolean;
}

export interface CompanyList {
  items: CompanySummary[];
  total: number;
  page: number;
  page_size: number;
}

export interface RelationCounts {
  suppliers_extracted: number;
  suppliers_predicted: number;
  suppliers_manual: number;
  customers: number;
}

export interface CompanyDetail extends CompanySummary {
  aliases: string[];
  market_cap_usd: number | null;
  website_domain: string | null;
  contact_email: string | null;
  metadata_source: string;
  relation_counts: RelationCounts;
}

export interface ProvenanceRef {
  url: string;
  score: number;
}

export type OriginKind = "extracted" | "predicted" | "manual";
export type ReviewKind = "unreviewed" | "confirmed" | "rejected";

export interface RelationRow {
  customer: string;
  supplier: string;
  supplier_name: string;
  origin: OriginKind;
  review: ReviewKind;
  confidence: number;
  provenance: ProvenanceRef[];
  persisted: boolean;
}

export interface SupplierRows {
  company: string;
  items: RelationRow[];
}

export interface AddSupplierResult {
  outcome: "matched" | "created";
  relation: RelationRow;
}

export interface UploadRowOutcome {
  row: number;
  name: string;
  outcome: "matched" | "created" | "error";
  error: string | null;
}

export interface Nudge {
  percentage: number;
  message: string;
}

export interface TransparencyRows {
  group_by: string;
  rows: Array<Record<string, unknown>>;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
    private token: string | null = null,
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    rawBody?: string,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    let payload: string | undefined;
    if (rawBody !== undefined) {
      headers["Content-Type"] = "text/csv";
      payload = rawBody;
    } else if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      payload = JSON.stringify(body);
    }
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: payload,
    });
    if (!response.ok) {
      let code = "error";
      let message = `${response.status}`;
      try {
        const detail = (await response.json()) as { code?: string; message?: string };
        code = detail.code ?? code;
        message = detail.message ?? message;
      } catch {
        // non-JSON error body: keep the status text
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  listCompanies(query = "", page = 1, pageSize = 50): Promise<CompanyList> {
    const params = new URLSearchParams({
      q: query,
      page: String(page),
      page_size: String(pageSize),
    });
    return this.request("GET", `/api/companies?${params}`);
  }

  companyDetail(id: string): Promise<CompanyDetail> {
    return this.request("GET", `/api/companies/${encodeURIComponent(id)}`);
  }

  suppliers(
    id: string,
    include: OriginKind[] = ["extracted", "manual"],
    includeRejected = false,
    k = 5,
  ): Promise<SupplierRows> {
    const params = new URLSearchParams({
      include: include.join(","),
      include_rejected: String(includeRejected),
      k: String(k),
    });
    return this.request("GET", `/api/companies/${encodeURIComponent(id)}/suppliers?${params}`);
  }

  claim(companyId: string, email: string): Promise<{ status: string }> {
    return this.request("POST", "/api/auth/claim", { company_id: companyId, email });
  }

  verify(code: string): Promise<{ token: string; company_id: string }> {
    return this.request("POST", "/api/auth/verify", { code });
  }

  addSupplier(companyId: string, supplierName: string): Promise<AddSupplierResult> {
    return this.request("POST", `/api/companies/${encodeURIComponent(companyId)}/suppliers`, {
      supplier_name: supplierName,
    });
  }

  uploadSuppliers(companyId: string, csvBody: string): Promise<{ outcomes: UploadRowOutcome[] }> {
    return this.request(
      "POST",
      `/api/companies/${encodeURIComponent(companyId)}/suppliers/upload`,
      undefined,
      csvBody,
    );
  }

  review(
    customer: string,
    supplier: string,
    origin: OriginKind,
    verdict: "confirmed" | "rejected",
  ): Promise<RelationRow> {
    const path =
      `/api/relations/${encodeURIComponent(customer)}/` +
      `${encodeURIComponent(supplier)}/${origin}/review`;
    return this.request("POST", path, { verdict });
  }

  nudge(companyId: string): Promise<Nudge> {
    return this.request("GET", `/api/companies/${encodeURIComponent(companyId)}/nudge`);
  }

  transparency(by: "continent" | "industry" | "none" = "continent"): Promise<TransparencyRows> {
    return this.request("GET", `/api/analytics/transparency?by=${by}`);
  }
}
