// Typed client for the mfrs HTTP API. Every console screen goes
// through this module; nothing else talks to the network.

import type {
  EnrollResponse,
  ErrorBody,
  MemoMeta,
  Person,
  Profile,
  RecognitionOutcome,
  ServiceConfig,
} from "./types.js";
import type { ConsoleSession } from "./session.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public details?: unknown,
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export class MfrsApi {
  private fetchFn: FetchLike;

  constructor(
    private session: ConsoleSession,
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? fetch.bind(globalThis);
  }

  headers(extra: Record<string, string> = {}): Record<string, string> {
    const h: Record<string, string> = { "X-MFRS-Session": this.session.sessionId, ...extra };
    if (this.session.token) h["Authorization"] = `Bearer ${this.session.token}`;
    return h;
  }

  private url(path: string, params: Record<string, string | number | boolean> = {}): string {
    const u = new URL(this.session.baseUrl + path);
    for (const [k, v] of Object.entries(params)) u.searchParams.set(k, String(v));
    return u.toString();
  }

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const response = await this.fetchFn(this.url(path), {
      ...init,
      headers: this.headers((init.headers as Record<string, string>) ?? {}),
    });
    return this.unwrap<T>(response);
  }

  private async unwrap<T>(response: Response): Promise<T> {
    if (response.ok) {
      if (response.status === 204) return undefined as T;
      return (await response.json()) as T;
    }
    let body: ErrorBody = { code: "unknown", message: response.statusText };
    try {
      body = (await response.json()) as ErrorBody;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new ApiError(response.status, body.code, body.message, body.details);
  }

  // --- persons ---

  createPerson(name: string, relationship = "", notes = ""): Promise<Person> {
    return this.request("/api/persons", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ name, relationship, notes }),
    });
  }

  listPersons(): Promise<Person[]> {
    return this.request("/api/persons");
  }

  getPerson(id: number): Promise<Person> {
    return this.request(`/api/persons/${id}`);
  }

  updatePerson(id: number, fields: Partial<Pick<Person, "name" | "relationship" | "notes">>): Promise<Person> {
    return this.request(`/api/persons/${id}`, {
      method: "PATCH",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(fields),
    });
  }

  deletePerson(id: number): Promise<void> {
    return this.request(`/api/persons/${id}`, { method: "DELETE" });
  }

  profile(id: number): Promise<Profile> {
    return this.request(`/api/persons/${id}/profile`);
  }

  // --- enrollment / recognition ---

  async enrollImage(personId: number, image: ArrayBuffer | Uint8Array, overrideFraming = false): Promise<EnrollResponse> {
    const response = await this.fetchFn(
      this.url(`/api/persons/${personId}/images`, { override_framing: overrideFraming }),
      { method: "POST", headers: this.headers(), body: toBodyInit(image) },
    );
    return this.unwrap<EnrollResponse>(response);
  }

  async recognize(image: ArrayBuffer | Uint8Array): Promise<RecognitionOutcome> {
    const response = await this.fetchFn(this.url("/api/recognize"), {
      method: "POST",
      headers: this.headers(),
      body: toBodyInit(image),
    });
    return this.unwrap<RecognitionOutcome>(response);
  }

  // --- memos ---

  async addMemo(wav: ArrayBuffer | Uint8Array, opts: { personId?: number; label?: string } = {}): Promise<MemoMeta> {
    const params: Record<string, string | number> = {};
    if (opts.personId !== undefined) params["person_id"] = opts.personId;
    if (opts.label) params["label"] = opts.label;
    const response = await this.fetchFn(this.url("/api/memos", params), {
      method: "POST",
      headers: this.headers(),
      body: toBodyInit(wav),
    });
    return this.unwrap<MemoMeta>(response);
  }

  listMemos(filter: { personId: number } | { unlinked: true }): Promise<MemoMeta[]> {
    const params: Record<string, string> =
      "personId" in filter ? { person_id: String(filter.personId) } : { unlinked: "true" };
    return this.request(`/api/memos?${new URLSearchParams(params)}`);
  }

  linkMemo(memoId: number, personId: number): Promise<MemoMeta> {
    return this.request(`/api/memos/${memoId}`, {
      method: "PATCH",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ person_id: personId }),
    });
  }

  async memoAudio(memoId: number): Promise<ArrayBuffer> {
    const response = await this.fetchFn(this.url(`/api/memos/${memoId}/audio`), {
      headers: this.headers(),
    });
    if (!response.ok) await this.unwrap(response);
    return response.arrayBuffer();
  }

  memoAudioUrl(memoId: number): string {
    return this.url(`/api/memos/${memoId}/audio`);
  }

  // --- misc ---

  config(): Promise<ServiceConfig> {
    return this.request("/api/config");
  }

  eventsUrl(lastEventId: number, follow = true): string {
    return this.url("/api/events", { last_event_id: lastEventId, follow });
  }
}

function toBodyInit(data: ArrayBuffer | Uint8Array): ArrayBuffer {
  if (data instanceof Uint8Array) {
    return data.buffer.slice(data.byteOffset, data.byteOffset + data.byteLength) as ArrayBuffer;
  }
  return data;
}
