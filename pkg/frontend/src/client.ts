/**
 * Thin typed client over the maintenance API.
 *
 * Distinguishes ApiError (the server answered with an error body) from
 * NetworkError (no usable answer at all) — the offline queue only ever
 * holds submissions that failed with the latter.
 */

import type {
  ApiErrorBody,
  CaptureAccepted,
  CaptureSubmission,
  CompanyEntry,
  ConditionEntry,
  PlateSnapshot,
  TaskCatalogEntry,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export class NetworkError extends Error {
  constructor(cause?: unknown) {
    super(cause instanceof Error ? cause.message : "network failure");
  }
}

async function errorFrom(response: Response): Promise<ApiError> {
  let body: ApiErrorBody = { code: "UNKNOWN", message: `HTTP ${response.status}` };
  try {
    body = (await response.json()) as ApiErrorBody;
  } catch {
    // non-JSON error body; keep the fallback
  }
  return new ApiError(response.status, body.code, body.message);
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (cause) {
      throw new NetworkError(cause);
    }
    if (!response.ok) {
      throw await errorFrom(response);
    }
    return (await response.json()) as T;
  }

  lookupPlate(plateId: string): Promise<PlateSnapshot> {
    return this.request(`/api/v1/plates/${encodeURIComponent(plateId)}`);
  }

  submitCapture(submission: CaptureSubmission): Promise<CaptureAccepted> {
    return this.request("/api/v1/maintenances", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(submission),
    });
  }

  fetchTasks(): Promise<TaskCatalogEntry[]> {
    return this.request("/api/v1/catalog/tasks");
  }

  fetchCompanies(): Promise<CompanyEntry[]> {
    return this.request("/api/v1/catalog/companies");
  }

  fetchConditions(): Promise<ConditionEntry[]> {
    return this.request("/api/v1/catalog/conditions");
  }
}
