/** Typed client for the annotation service HTTP/JSON API. */

export interface ItemDescriptor {
  item_id: string;
  utterance_id: string;
  phone_index: number;
  speaker?: string;
  word?: string;
  phone_label?: string;
  target_prompt?: string;
  substitution_prompt?: string;
}

export interface SessionInfo {
  session_id: string;
  annotator_id: string;
  num_items: number;
  num_entries: number;
  num_duplicates: number;
  state: string;
}

export interface NextItem {
  complete: boolean;
  position: number;
  total: number;
  occurrence?: number;
  item?: ItemDescriptor;
  media?: { bundle: string };
  playback_cap?: number;
}

export interface BundleTiming {
  frame_times: number[];
  word_start: number;
  word_end: number;
  phone_start: number;
  phone_end: number;
  duration: number;
}

export interface MediaBundle {
  audio: string;
  spectrogram: string;
  frames: string[];
  timing: BundleTiming;
  target_prompt: string;
  substitution_prompt: string;
  word: string;
  playback_cap: number;
}

export interface RatingPayload {
  item_id: string;
  occurrence: number;
  primary: number;
  secondary: number | null;
  comment: string | null;
  playbacks_used: number;
}

export interface SubmitResult {
  accepted: boolean;
  reason?: string;
  position?: number;
  complete?: boolean;
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class AnnotationApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!resp.ok) {
      throw new ApiError(`GET ${path} failed with ${resp.status}`, resp.status);
    }
    return (await resp.json()) as T;
  }

  async manifest(): Promise<{ items: ItemDescriptor[]; count: number }> {
    return this.getJson("/manifest");
  }

  async createSession(annotatorId: string, seed: number, items: ItemDescriptor[]): Promise<SessionInfo> {
    const resp = await this.fetchFn(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ annotator_id: annotatorId, seed, items }),
    });
    if (!resp.ok) {
      throw new ApiError(`session creation failed with ${resp.status}`, resp.status);
    }
    return (await resp.json()) as SessionInfo;
  }

  async next(sessionId: string): Promise<NextItem> {
    return this.getJson(`/sessions/${sessionId}/next`);
  }

  async bundle(url: string): Promise<MediaBundle> {
    return this.getJson(url);
  }

  /** Returns the parsed body for both accepted and rejected submissions. */
  async submitRating(sessionId: string, payload: RatingPayload): Promise<SubmitResult> {
    const resp = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/ratings`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    const body = (await resp.json()) as SubmitResult;
    if (!resp.ok && body.reason === undefined) {
      throw new ApiError(`rating submission failed with ${resp.status}`, resp.status);
    }
    return body;
  }
}
