import { ConfigDoc, ModelInfo, ScenarioDoc, ScenarioResponse } from "./types.js";

export class ServiceError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

type FetchFn = typeof fetch;

async function parseError(res: Response): Promise<ServiceError> {
  let code = "http_error";
  let message = `request failed (${res.status})`;
  try {
    const body = await res.json();
    if (body && typeof body.code === "string") code = body.code;
    if (body && typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body; keep the generic message
  }
  return new ServiceError(res.status, code, message);
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchFn = (...args) => fetch(...args),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!res.ok) throw await parseError(res);
    return res.json() as Promise<T>;
  }

  health(): Promise<{ status: string }> {
    return this.getJson("/health");
  }

  config(): Promise<ConfigDoc> {
    return this.getJson("/config");
  }

  models(): Promise<ModelInfo[]> {
    return this.getJson("/models");
  }

  scenarioSchema(): Promise<unknown> {
    return this.getJson("/schemas/scenario");
  }

  async evaluateScenario(
    model: string,
    scenario: ScenarioDoc,
    signal?: AbortSignal,
  ): Promise<ScenarioResponse> {
    const res = await this.fetchFn(`${this.baseUrl}/scenarios`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ model, scenario }),
      signal,
    });
    if (!res.ok) throw await parseError(res);
    return res.json() as Promise<ScenarioResponse>;
  }
}
