import { describe, expect, it } from "vitest";

import { EventFeed, dataOf, parseSseChunk } from "../src/events.js";
import type { RecognitionEvent } from "../src/types.js";

function sseBody(ids: number[]): string {
  return ids
    .map((id) =>
      `id: ${id}\ndata: ${JSON.stringify({ event_id: id, outcome: { faces: [], timestamp: "t" } })}\n\n`,
    )
    .join("");
}

function streamOf(text: string): ReadableStream<Uint8Array> {
  const bytes = new TextEncoder().encode(text);
  return new ReadableStream({
    start(controller) {
      // deliver in two chunks to exercise incremental parsing
      const mid = Math.floor(bytes.length / 2);
      controller.enqueue(bytes.slice(0, mid));
      controller.enqueue(bytes.slice(mid));
      controller.close();
    },
  });
}

function scriptedFetch(bodies: string[]): { fetchFn: typeof fetch; urls: string[] } {
  const urls: string[] = [];
  let call = 0;
  const fetchFn = (async (url: RequestInfo | URL) => {
    urls.push(String(url));
    const body = bodies[Math.min(call, bodies.length - 1)];
    call += 1;
    return new Response(streamOf(body ?? ""), { status: 200 });
  }) as typeof fetch;
  return { fetchFn, urls };
}

describe("SSE parsing", () => {
  it("splits complete frames and keeps the remainder", () => {
    const { frames, rest } = parseSseChunk("id: 1\ndata: {}\n\nid: 2\ndata:");
    expect(frames).toEqual(["id: 1\ndata: {}"]);
    expect(rest).toBe("id: 2\ndata:");
  });

  it("extracts the data line", () => {
    expect(dataOf("id: 4\ndata: {\"a\":1}")).toBe('{"a":1}');
    expect(dataOf(": comment only")).toBeNull();
  });
});

describe("EventFeed", () => {
  it("delivers backlog then resumes across reconnect without duplicates", async () => {
    // first connection delivers 1,2 then drops; the server (wrongly)
    // replays 2 on reconnect, and the feed must still deliver each id once
    const { fetchFn, urls } = scriptedFetch([sseBody([1, 2]), sseBody([2, 3])]);
    const seen: number[] = [];
    const feed = new EventFeed((last) => `http://x/api/events?last_event_id=${last}`, {
      fetchFn,
      retryMs: 1,
      onEvent: (e: RecognitionEvent) => {
        seen.push(e.event_id);
        if (e.event_id === 3) feed.stop();
      },
    });
    await feed.run();
    expect(seen).toEqual([1, 2, 3]);
    expect(urls[0]).toContain("last_event_id=0");
    expect(urls[1]).toContain("last_event_id=2"); // resume point
  });

  it("skips malformed frames and keeps reading", async () => {
    const body =
      "id: 1\ndata: {broken json\n\n" + sseBody([2]);
    const { fetchFn } = scriptedFetch([body]);
    const seen: number[] = [];
    const feed = new EventFeed(() => "http://x/api/events", {
      fetchFn,
      retryMs: 1,
      onEvent: (e) => {
        seen.push(e.event_id);
        feed.stop();
      },
    });
    await feed.run();
    expect(seen).toEqual([2]);
  });

  it("reports status transitions", async () => {
    const { fetchFn } = scriptedFetch([sseBody([1])]);
    const statuses: string[] = [];
    const feed = new EventFeed(() => "http://x/api/events", {
      fetchFn,
      retryMs: 1,
      onStatus: (s) => statuses.push(s),
      onEvent: () => feed.stop(),
    });
    await feed.run();
    expect(statuses[0]).toBe("connected");
    expect(statuses[statuses.length - 1]).toBe("stopped");
  });
});
