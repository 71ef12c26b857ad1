// Thin client over the service JSON API. The UI never computes grids itself;
// every number it shows comes from a grid document returned here.

import { GridDocument, OpDescriptor, SchemaDoc, ServiceError } from "./types.js";

export interface ApiClient {
  createSession(dataset: string): Promise<string>;
  getSchema(sessionId: string): Promise<SchemaDoc>;
  getTable(sessionId: string): Promise<GridDocument>;
  applyOp(sessionId: string, op: OpDescriptor): Promise<GridDocument>;
  getSql(sessionId: string): Promise<string>;
}

async function parseError(response: Response): Promise<never> {
  let detail: unknown = null;
  try {
    const body = (await response.json()) as { detail?: unknown };
    detail = body.detail ?? body;
  } catch {
    detail = await response.text().catch(() => response.statusText);
  }
  throw new ServiceError(response.status, detail);
}

export class HttpClient implements ApiClient {
  constructor(private baseUrl: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  async createSession(dataset: string): Promise<string> {
    const body = await this.request<{ session_id: string }>("POST", "/sessions", { dataset });
    return body.session_id;
  }

  getSchema(sessionId: string): Promise<SchemaDoc> {
    return this.request("GET", `/sessions/${sessionId}/schema`);
  }

  getTable(sessionId: string): Promise<GridDocument> {
    return this.request("GET", `/sessions/${sessionId}/table`);
  }

  applyOp(sessionId: string, op: OpDescriptor): Promise<GridDocument> {
    return this.request("POST", `/sessions/${sessionId}/ops`, op);
  }

  async getSql(sessionId: string): Promise<string> {
    const body = await this.request<{ sql: string }>("GET", `/sessions/${sessionId}/sql`);
    return body.sql;
  }
}
