/** Thin HTTP client for the treeplan service. */

import type {
  EditLogEntry,
  EmbeddingSnapshot,
  LossReport,
  SessionConfig,
  SessionStatus,
  SkeletonInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function expectJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      detail = ((await resp.json()) as { detail?: string }).detail ?? detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class TreeplanClient {
  constructor(private baseUrl: string) {}

  async createSession(skeleton: string, format: "swc" | "json",
                      config: SessionConfig = {}): Promise<string> {
    const body = JSON.stringify({ skeleton, format, config });
    const resp = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body,
    });
    const doc = await expectJson<{ sessionId: string }>(resp);
    return doc.sessionId;
  }

  status(id: string): Promise<SessionStatus> {
    return this.get(`/sessions/${id}`);
  }

  embedding(id: string): Promise<EmbeddingSnapshot> {
    return this.get(`/sessions/${id}/embedding`);
  }

  skeleton(id: string): Promise<SkeletonInfo> {
    return this.get(`/sessions/${id}/skeleton`);
  }

  report(id: string): Promise<LossReport> {
    return this.get(`/sessions/${id}/report`);
  }

  async editLog(id: string): Promise<EditLogEntry[]> {
    const doc = await this.get<{ edits: EditLogEntry[] }>(`/sessions/${id}/log`);
    return doc.edits;
  }

  async postEdit(id: string, segmentId: number, anchorNodeId: number,
                 rotationRadians: number): Promise<number> {
    const resp = await fetch(`${this.baseUrl}/sessions/${id}/edits`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ segmentId, anchorNodeId, rotationRadians }),
    });
    const doc = await expectJson<{ jobId: number }>(resp);
    return doc.jobId;
  }

  async postWeights(id: string, wl: number, wa: number,
                    wx: number | string = "auto"): Promise<number> {
    const resp = await fetch(`${this.baseUrl}/sessions/${id}/weights`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ wl, wa, wx }),
    });
    const doc = await expectJson<{ jobId: number }>(resp);
    return doc.jobId;
  }

  /** Poll the session until the current solve commits (or fails). */
  async waitDone(id: string, timeoutMs = 120_000, pollMs = 30): Promise<SessionStatus> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const status = await this.status(id);
      if (status.state === "done") return status;
      if (status.state === "error") {
        throw new ApiError(500, status.error ?? "solve failed");
      }
      if (Date.now() > deadline) throw new ApiError(408, "solve timed out");
      await new Promise((r) => setTimeout(r, pollMs));
    }
  }

  progressSocket(id: string): WebSocket {
    const ws = this.baseUrl.replace(/^http/, "ws");
    return new WebSocket(`${ws}/sessions/${id}/progress`);
  }

  private async get<T>(path: string): Promise<T> {
    return expectJson<T>(await fetch(`${this.baseUrl}${path}`));
  }
}
