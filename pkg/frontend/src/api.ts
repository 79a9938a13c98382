/**
 * Thin typed client for the metis gateway REST surface.
 *
 * Every call goes through an injectable fetch so tests can run against a
 * recording fake. Non-2xx responses raise GatewayError carrying the
 * server's error string and any validation issues; a failed connection
 * raises GatewayError with status 0 so the UI can tell "service said no"
 * from "service is down".
 */

import type {
  ControlAction,
  CreateSimulationRequest,
  InjectFireRequest,
  ScenarioDoc,
  SimResults,
  ValidationIssue,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ScenarioSummary {
  id: string;
  name: string;
}

export interface SimulationStatus {
  id: string;
  status: string;
}

export interface ResultsEnvelope {
  id: string;
  status: string;
  results: SimResults;
}

export class GatewayError extends Error {
  status: number;
  issues: ValidationIssue[];

  constructor(status: number, message: string, issues: ValidationIssue[] = []) {
    super(message);
    this.name = "GatewayError";
    this.status = status;
    this.issues = issues;
  }

  /** True when the gateway could not be reached at all. */
  get unreachable(): boolean {
    return this.status === 0;
  }
}

export class GatewayClient {
  readonly baseUrl: string;
  private fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  /** ws:// address of a simulation's frame stream. */
  streamUrl(simId: string): string {
    const ws = this.baseUrl.replace(/^http/, "ws");
    return `${ws}/simulations/${simId}/stream`;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.baseUrl + path, init);
    } catch (e) {
      throw new GatewayError(0, `gateway unreachable: ${e}`);
    }
    if (!resp.ok) {
      let message = `HTTP ${resp.status}`;
      let issues: ValidationIssue[] = [];
      try {
        const body = await resp.json();
        if (typeof body?.error === "string") message = body.error;
        if (Array.isArray(body?.issues)) issues = body.issues;
      } catch {
        // non-JSON error body: keep the status-line message
      }
      throw new GatewayError(resp.status, message, issues);
    }
    return resp;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    return (await this.request(path, init)).json() as Promise<T>;
  }

  private post(path: string, body: unknown): Promise<Response> {
    return this.request(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<{ status: string; version: string }> {
    return this.json("/health");
  }

  listScenarios(): Promise<ScenarioSummary[]> {
    return this.json("/scenarios");
  }

  /** Raw canonical text as stored by the service. */
  async getScenarioText(sid: string): Promise<string> {
    return (await this.request(`/scenarios/${sid}`)).text();
  }

  async getScenario(sid: string): Promise<ScenarioDoc> {
    return JSON.parse(await this.getScenarioText(sid)) as ScenarioDoc;
  }

  async createScenario(doc: ScenarioDoc): Promise<{ id: string }> {
    const resp = await this.post("/scenarios", doc);
    return resp.json();
  }

  async putScenario(sid: string, doc: ScenarioDoc): Promise<{ id: string }> {
    const resp = await this.request(`/scenarios/${sid}`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(doc),
    });
    return resp.json();
  }

  async deleteScenario(sid: string): Promise<void> {
    await this.request(`/scenarios/${sid}`, { method: "DELETE" });
  }

  async validateScenario(sid: string): Promise<ValidationIssue[]> {
    const body = await this.json<{ issues: ValidationIssue[] }>(
      `/scenarios/${sid}/validate`,
      { method: "POST" },
    );
    return body.issues;
  }

  async createSimulation(req: CreateSimulationRequest): Promise<SimulationStatus> {
    const resp = await this.post("/simulations", req);
    return resp.json();
  }

  async control(simId: string, action: ControlAction): Promise<SimulationStatus> {
    const resp = await this.post(`/simulations/${simId}/control`, { action });
    return resp.json();
  }

  async injectFire(
    simId: string,
    req: InjectFireRequest,
  ): Promise<{ effective_tick: number }> {
    const resp = await this.post(`/simulations/${simId}/fires`, req);
    return resp.json();
  }

  results(simId: string): Promise<ResultsEnvelope> {
    return this.json(`/simulations/${simId}/results`);
  }
}
