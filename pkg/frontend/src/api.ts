/** Typed client for the segmentation server's HTTP API. */

export interface SessionInfo {
  session_id: string;
  width: number;
  height: number;
  n_slices: number;
}

export interface SessionStatus {
  embedding_status: string[];
  features_ready: boolean;
  model_trained: boolean;
}

export interface RleMaskDoc {
  width: number;
  height: number;
  runs: [number, number][];
}

export interface PromptResponse {
  mask: RleMaskDoc;
  scale_rank: number;
  quality: number;
}

export interface TrainResponse {
  trained: boolean;
  train_accuracy: number;
}

export type DeltaRecord =
  | { source: "brush" | "eraser"; path: [number, number][]; radius: number; class_id?: number; slice?: number }
  | { source: "polygon"; vertices: [number, number][]; class_id: number; slice?: number }
  | { source: "smart_mask"; mask: RleMaskDoc; class_id: number; slice?: number }
  | { source: "brush" | "polygon" | "smart_mask" | "eraser"; pixels: [number, number][]; class_id?: number; slice?: number };

export class ApiError extends Error {
  constructor(public status: number, public code: string, detail: string) {
    super(`${code}: ${detail}`);
  }
}

async function check<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let code = "HttpError";
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      code = body.error ?? code;
      detail = body.detail ?? detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, code, detail);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  async createSession(image: Blob | ArrayBuffer, contentType = "application/octet-stream"): Promise<SessionInfo> {
    const resp = await fetch(`${this.baseUrl}/session`, {
      method: "POST",
      headers: { "Content-Type": contentType },
      body: image,
    });
    return check<SessionInfo>(resp);
  }

  async status(sid: string): Promise<SessionStatus> {
    return check(await fetch(`${this.baseUrl}/session/${sid}/status`));
  }

  async waitReady(sid: string, timeoutMs = 60_000, pollMs = 150): Promise<SessionStatus> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const st = await this.status(sid);
      if (st.features_ready && st.embedding_status.every((e) => e === "ready")) return st;
      if (st.embedding_status.some((e) => e === "failed")) return st;
      if (Date.now() > deadline) throw new Error("session never became ready");
      await new Promise((r) => setTimeout(r, pollMs));
    }
  }

  async prompt(sid: string, x: number, y: number, slice: number, scaleIndex: number,
               signal?: AbortSignal): Promise<PromptResponse> {
    const resp = await fetch(`${this.baseUrl}/session/${sid}/prompt`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ x, y, slice, scale_index: scaleIndex }),
      signal,
    });
    return check<PromptResponse>(resp);
  }

  async postLabels(sid: string, deltas: DeltaRecord[]): Promise<{ labelled_pixel_count: number }> {
    const resp = await fetch(`${this.baseUrl}/session/${sid}/labels`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ deltas }),
    });
    return check(resp);
  }

  async train(sid: string, params?: Record<string, number>): Promise<TrainResponse> {
    const resp = await fetch(`${this.baseUrl}/session/${sid}/train`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(params ? { params } : {}),
    });
    return check<TrainResponse>(resp);
  }

  imageUrl(sid: string, slice: number): string {
    return `${this.baseUrl}/session/${sid}/image?slice=${slice}`;
  }

  labelsUrl(sid: string, slice: number): string {
    return `${this.baseUrl}/session/${sid}/labels?slice=${slice}`;
  }

  segmentationUrl(sid: string, slice: number): string {
    return `${this.baseUrl}/session/${sid}/segmentation?slice=${slice}`;
  }

  uncertaintyUrl(sid: string, slice: number): string {
    return `${this.baseUrl}/session/${sid}/uncertainty?slice=${slice}`;
  }

  classifierUrl(sid: string): string {
    return `${this.baseUrl}/session/${sid}/classifier`;
  }

  async uploadClassifier(sid: string, file: Blob | ArrayBuffer): Promise<{ applied: boolean }> {
    const resp = await fetch(this.classifierUrl(sid), { method: "POST", body: file });
    return check(resp);
  }
}
