// Per-tab console session. The session header stays constant for the
// tab's lifetime: it is what ties a freshly recorded memo back to the
// enrollment that just happened in this tab.

export interface ConsoleSession {
  baseUrl: string;
  token?: string;
  sessionId: string;
  lastEventId: number;
}

export function newSessionId(): string {
  const bytes = new Uint8Array(8);
  crypto.getRandomValues(bytes);
  return "tab-" + Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}

export function createSession(baseUrl: string, token?: string): ConsoleSession {
  return { baseUrl: baseUrl.replace(/\/+$/, ""), token, sessionId: newSessionId(), lastEventId: 0 };
}
