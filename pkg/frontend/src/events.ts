// Live recognition feed: a server-sent-events reader with resume and
// duplicate suppression. Uses fetch + ReadableStream rather than
// EventSource so the bearer token and session header ride along and
// the module stays testable outside a browser.

import type { RecognitionEvent } from "./types.js";

export interface FeedOptions {
  /** called for every event exactly once, in id order */
  onEvent: (event: RecognitionEvent) => void;
  onStatus?: (status: "connected" | "retrying" | "stopped") => void;
  headers?: Record<string, string>;
  /** reconnect delay in ms */
  retryMs?: number;
  fetchFn?: typeof fetch;
}

export function parseSseChunk(buffer: string): { frames: string[]; rest: string } {
  const parts = buffer.split("\n\n");
  return { frames: parts.slice(0, -1), rest: parts[parts.length - 1] ?? "" };
}

export function dataOf(frame: string): string | null {
  const lines = frame.split("\n").filter((l) => l.startsWith("data: "));
  if (lines.length === 0) return null;
  return lines.map((l) => l.slice("data: ".length)).join("\n");
}

export class EventFeed {
  lastEventId = 0;
  private stopped = false;
  private controller: AbortController | null = null;

  constructor(
    private urlFor: (lastEventId: number) => string,
    private options: FeedOptions,
  ) {}

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
    this.options.onStatus?.("stopped");
  }

  /** Runs until stop(); reconnects from the last seen event id. */
  async run(): Promise<void> {
    const fetchFn = this.options.fetchFn ?? fetch.bind(globalThis);
    while (!this.stopped) {
      this.controller = new AbortController();
      try {
        const response = await fetchFn(this.urlFor(this.lastEventId), {
          headers: this.options.headers ?? {},
          signal: this.controller.signal,
        });
        if (!response.ok || !response.body) throw new Error(`feed HTTP ${response.status}`);
        this.options.onStatus?.("connected");
        await this.consume(response.body);
      } catch {
        if (this.stopped) return;
      }
      if (this.stopped) return;
      this.options.onStatus?.("retrying");
      await delay(this.options.retryMs ?? 1000);
    }
  }

  private async consume(body: ReadableStream<Uint8Array>): Promise<void> {
    const reader = body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) return;
      buffer += decoder.decode(value, { stream: true });
      const { frames, rest } = parseSseChunk(buffer);
      buffer = rest;
      for (const frame of frames) this.deliver(frame);
    }
  }

  private deliver(frame: string): void {
    const data = dataOf(frame);
    if (data === null) return;
    let event: RecognitionEvent;
    try {
      event = JSON.parse(data) as RecognitionEvent;
    } catch {
      return; // skip malformed frames, the stream continues
    }
    // replayed or duplicated ids are dropped: exactly-once per subscriber
    if (event.event_id <= this.lastEventId) return;
    this.lastEventId = event.event_id;
    this.options.onEvent(event);
  }
}

function delay(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
