// Thin client for the rule service. Every call is stateless; the server
// answers 4xx with structured bodies, so non-2xx responses are decoded
// rather than thrown. Only a transport failure rejects.

import { RuleDocument } from "./document";

export interface Diagnostic {
  code: string;
  severity: string;
  path: string;
  message: string;
}

export interface ValidateResponse {
  valid: boolean;
  diagnostics: Diagnostic[];
}

export type GenerateResult =
  | { ok: true; target: string; text: string }
  | { ok: false; diagnostics?: Diagnostic[]; unsupported?: { path: string; message: string }; error?: string };

export interface SimulateEvent {
  type: string;
  ts: number;
  attrs: Record<string, unknown>;
}

export interface OutputRow {
  emitted_at: number;
  values: Record<string, unknown>;
  derived_event_name: string | null;
}

export type SimulateResult =
  | { ok: true; outputs: OutputRow[] }
  | { ok: false; diagnostics?: Diagnostic[]; unsupported?: { path: string; message: string }; streamError?: string; error?: string };

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async post(path: string, body: unknown): Promise<{ status: number; data: any }> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return { status: response.status, data: await response.json() };
  }

  async health(): Promise<boolean> {
    try {
      const response = await this.fetchImpl(this.baseUrl + "/healthz");
      return response.status === 200;
    } catch {
      return false;
    }
  }

  async validateRule(doc: RuleDocument): Promise<ValidateResponse> {
    const { status, data } = await this.post("/api/validate", doc);
    if (status !== 200) {
      return { valid: false, diagnostics: [] };
    }
    return { valid: data.valid, diagnostics: data.diagnostics ?? [] };
  }

  async generate(doc: RuleDocument, target: "epl" | "drl" = "epl"): Promise<GenerateResult> {
    const { status, data } = await this.post(`/api/generate?target=${target}`, doc);
    if (status === 200) {
      return { ok: true, target: data.target, text: data.text };
    }
    return {
      ok: false,
      diagnostics: data.diagnostics,
      unsupported: data.unsupported,
      error: data.error,
    };
  }

  async simulate(doc: RuleDocument, events: SimulateEvent[]): Promise<SimulateResult> {
    const { status, data } = await this.post("/api/simulate", { model: doc, events });
    if (status === 200) {
      return { ok: true, outputs: data.outputs };
    }
    return {
      ok: false,
      diagnostics: data.diagnostics,
      unsupported: data.unsupported,
      streamError: data.stream_error,
      error: data.error,
    };
  }
}
