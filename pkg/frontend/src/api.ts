/** Typed client for the comparison service API.
 *
 * The console is a pure API client: every number it displays originates
 * from a response payload. All routes are relative, so the console works
 * served from the same origin as the API.
 */

export interface FileSummary {
  file_id: string;
  filename: string;
  uploaded_at: string;
}

export interface DatasetSummary {
  dataset_id: string;
  name: string;
  status: string;
  documents: number;
  failures: number;
  public: boolean;
}

export interface DatasetUploadResult {
  dataset_id: string;
  name: string;
  status: string;
  documents: number;
  row_errors: [number, string][];
  fetch_failures: [number, string][];
}

export interface CompareParams {
  k: number;
  highlight_threshold: number;
  relevance_gate_threshold: number;
  gate_enabled: boolean;
}

export interface ReportRow {
  rank: number;
  dataset_name: string;
  doc_id: string;
  link: string;
  similarity: number;
}

export interface ReportDataset {
  name: string;
  relevance: number;
  gated: boolean;
}

export interface Report {
  job_id: string;
  file: string;
  params: CompareParams;
  datasets: ReportDataset[];
  results: ReportRow[];
  highlights: { dataset_name: string; doc_id: string }[];
  generated_at: string;
}

export type JobState = "queued" | "running" | "done" | "failed";

export interface JobStatus {
  job_id: string;
  kind: string;
  state: JobState;
  error?: string;
  report?: Report;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

function detailOf(body: unknown): string {
  if (body && typeof body === "object" && "detail" in body) {
    const detail = (body as { detail: unknown }).detail;
    if (typeof detail === "string") return detail;
    if (Array.isArray(detail)) {
      return detail
        .map((e) => (e && typeof e === "object" && "msg" in e ? String(e.msg) : JSON.stringify(e)))
        .join("; ");
    }
  }
  return JSON.stringify(body);
}

export class ApiClient {
  token: string | null = null;

  constructor(private baseUrl = "") {}

  private async request<T>(method: string, path: string, body?: BodyInit, json?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    let payload = body;
    if (json !== undefined) {
      headers["Content-Type"] = "application/json";
      payload = JSON.stringify(json);
    }
    const response = await fetch(this.baseUrl + path, { method, headers, body: payload });
    const text = await response.text();
    const data: unknown = text ? JSON.parse(text) : null;
    if (!response.ok) {
      throw new ApiError(response.status, detailOf(data));
    }
    return data as T;
  }

  async register(username: string, password: string): Promise<void> {
    await this.request("POST", "/api/register", undefined, { username, password });
  }

  async login(username: string, password: string): Promise<void> {
    const out = await this.request<{ token: string }>("POST", "/api/login", undefined, {
      username,
      password,
    });
    this.token = out.token;
  }

  async logout(): Promise<void> {
    await this.request("POST", "/api/logout");
    this.token = null;
  }

  uploadFile(file: File): Promise<{ file_id: string; filename: string; tokens: number }> {
    const form = new FormData();
    form.append("file", file);
    return this.request("POST", "/api/files", form);
  }

  uploadDataset(name: string, csv: File): Promise<DatasetUploadResult> {
    const form = new FormData();
    form.append("csv", csv);
    form.append("name", name);
    return this.request("POST", "/api/datasets", form);
  }

  async listFiles(): Promise<FileSummary[]> {
    const out = await this.request<{ files: FileSummary[] }>("GET", "/api/files");
    return out.files;
  }

  async listDatasets(): Promise<DatasetSummary[]> {
    const out = await this.request<{ datasets: DatasetSummary[] }>("GET", "/api/datasets");
    return out.datasets;
  }

  submitCompare(
    fileId: string,
    datasetIds: string[],
    params?: Partial<CompareParams>,
  ): Promise<{ job_id: string; state: JobState }> {
    return this.request("POST", "/api/compare", undefined, {
      file_id: fileId,
      dataset_ids: datasetIds,
      params: params ?? {},
    });
  }

  getJob(jobId: string): Promise<JobStatus> {
    return this.request("GET", `/api/jobs/${jobId}`);
  }

  getReport(jobId: string): Promise<Report> {
    return this.request("GET", `/api/jobs/${jobId}/report`);
  }
}
