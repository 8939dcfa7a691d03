// Console flows against a real service process: enroll -> recognize ->
// memo, framing badges, the (config-shortened) association window, and
// event-feed resume. Requires python3 with the engine package
// installed, which is how this repo is developed.

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import net from "node:net";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, MfrsApi } from "../src/api.js";
import { EventFeed } from "../src/events.js";
import { badgesFor, canOverride } from "../src/framing.js";
import { createSession } from "../src/session.js";
import type { FramingReport, RecognitionEvent } from "../src/types.js";
import { encodeWav, floatTo16BitPcm } from "../src/wav.js";

const PYTHON = process.env["MFRS_PYTHON"] ?? "python3";
const WINDOW_S = 2; // association window, shortened via config

let workDir: string;
let server: ChildProcess;
let baseUrl: string;
let api: MfrsApi;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = net.createServer();
    srv.listen(0, "127.0.0.1", () => {
      const port = (srv.address() as net.AddressInfo).port;
      srv.close(() => resolve(port));
    });
    srv.on("error", reject);
  });
}

function fixture(name: string): Uint8Array {
  return new Uint8Array(readFileSync(join(workDir, name)));
}

function sineWav(seconds = 0.3): ArrayBuffer {
  const n = Math.round(seconds * 16000);
  const samples = new Float32Array(n);
  for (let i = 0; i < n; i++) samples[i] = 0.4 * Math.sin((2 * Math.PI * 440 * i) / 16000);
  return encodeWav(floatTo16BitPcm(samples));
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "mfrs-console-e2e-"));
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;

  execFileSync(PYTHON, [
    "-c",
    `
import sys
from pathlib import Path
from mfrs.glyphs import GlyphParams, generate_face_glyph
from mfrs.imaging import encode_pnm, image_from_array
import numpy as np
out = Path(sys.argv[1])
def dump(name, params):
    image, _ = generate_face_glyph(params)
    (out / name).write_bytes(encode_pnm(image))
dump("ana1.pgm", GlyphParams(seed=1, identity_seed=9_000_001))
dump("ana2.pgm", GlyphParams(seed=2, identity_seed=9_000_001))
dump("ana3.pgm", GlyphParams(seed=3, identity_seed=9_000_001))
dump("ben1.pgm", GlyphParams(seed=1, identity_seed=9_000_002))
dump("corner.pgm", GlyphParams(seed=5, identity_seed=9_000_003, canvas=640,
                              scale_range=(0.10, 0.10), offset_range=(-0.37, -0.37)))
blank = image_from_array(np.full((200, 200), 170, dtype=np.uint8))
(out / "blank.pgm").write_bytes(encode_pnm(blank))
(out / "config.yaml").write_text(
    f"data_dir: {out / 'data'}\\nhost: 127.0.0.1\\nport: {sys.argv[2]}\\n"
    f"association_window_s: {sys.argv[3]}\\n")
`,
    workDir,
    String(port),
    String(WINDOW_S),
  ]);

  server = spawn(PYTHON, ["-m", "mfrs.cli", "serve", "--config", join(workDir, "config.yaml")], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  const stderr: string[] = [];
  server.stderr?.on("data", (chunk: Buffer) => stderr.push(chunk.toString()));

  const deadline = Date.now() + 90_000;
  for (;;) {
    if (server.exitCode !== null) {
      throw new Error(`service exited early: ${stderr.join("")}`);
    }
    try {
      const ping = await fetch(`${baseUrl}/api/config`);
      if (ping.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error(`service never came up: ${stderr.join("")}`);
    await sleep(300);
  }
  api = new MfrsApi(createSession(baseUrl));
});

afterAll(() => {
  server?.kill();
  rmSync(workDir, { recursive: true, force: true });
});

describe("console end-to-end", () => {
  it("completes the enroll -> recognize -> memo flow with auto-link", async () => {
    const ana = await api.createPerson("Ana", "daughter", "Brings the crossword.");
    expect(ana.person_id).toBe(1);

    for (const name of ["ana1.pgm", "ana2.pgm"]) {
      const enrolled = await api.enrollImage(ana.person_id, fixture(name));
      expect(enrolled.framing.pass).toBe(true);
      expect(badgesFor(enrolled.framing)[0]?.code).toBe("Pass");
    }

    const outcome = await api.recognize(fixture("ana3.pgm"));
    expect(outcome.faces).toHaveLength(1);
    expect(outcome.faces[0]?.match?.person_id).toBe(ana.person_id);
    expect(outcome.faces[0]?.profile?.presentation_text).toBe(
      "Ana — daughter — Brings the crossword.",
    );

    // memo recorded right after the enrollment: the window is open,
    // so the response the UI renders already shows the linked person
    const memo = await api.addMemo(sineWav(), { label: "met at lunch" });
    expect(memo.person_id).toBe(ana.person_id);
    const profile = await api.profile(ana.person_id);
    expect(profile.memos.map((m) => m.memo_id)).toContain(memo.memo_id);

    const audio = await api.memoAudio(memo.memo_id);
    expect(new TextDecoder().decode(new Uint8Array(audio, 0, 4))).toBe("RIFF");
  });

  it("renders per-reason framing badges for failed captures", async () => {
    const ben = await api.createPerson("Ben", "neighbor");

    const noFace = await api
      .enrollImage(ben.person_id, fixture("blank.pgm"))
      .catch((e) => e as ApiError);
    expect(noFace).toBeInstanceOf(ApiError);
    const noFaceReport = (noFace as ApiError).details as FramingReport;
    expect(badgesFor(noFaceReport).map((b) => b.code)).toEqual(["NoFace"]);
    expect(canOverride(noFaceReport)).toBe(false);

    const corner = await api
      .enrollImage(ben.person_id, fixture("corner.pgm"))
      .catch((e) => e as ApiError);
    expect(corner).toBeInstanceOf(ApiError);
    const cornerReport = (corner as ApiError).details as FramingReport;
    const codes = badgesFor(cornerReport).map((b) => b.code);
    expect(codes).toContain("TooSmall");
    expect(codes).toContain("OffCenter");
    expect(new Set(codes).size).toBe(codes.length); // one badge per reason
    expect(canOverride(cornerReport)).toBe(true);

    const overridden = await api.enrollImage(ben.person_id, fixture("corner.pgm"), true);
    expect(overridden.encoding_id).toBeGreaterThan(0);
  });

  it("keeps a memo outside the shortened window unlinked, then links it manually", async () => {
    await api.enrollImage(1, fixture("ana1.pgm"));
    await sleep((WINDOW_S + 0.5) * 1000);
    const memo = await api.addMemo(sineWav(), { label: "too late" });
    expect(memo.person_id).toBeNull();

    const unlinked = await api.listMemos({ unlinked: true });
    expect(unlinked.map((m) => m.memo_id)).toContain(memo.memo_id);

    const linked = await api.linkMemo(memo.memo_id, 1);
    expect(linked.person_id).toBe(1);
    const mine = await api.listMemos({ personId: 1 });
    expect(mine.map((m) => m.memo_id)).toContain(memo.memo_id);
  });

  it("event feed resumes across reconnect without duplicates", async () => {
    await api.recognize(fixture("ben1.pgm"));
    await api.recognize(fixture("blank.pgm"));

    const seen: number[] = [];
    const first = new EventFeed((last) => api.eventsUrl(last), {
      headers: api.headers(),
      onEvent: (e: RecognitionEvent) => {
        seen.push(e.event_id);
        if (seen.length >= 2) first.stop();
      },
    });
    await first.run();
    expect(seen.length).toBeGreaterThanOrEqual(2);

    // new traffic while disconnected
    await api.recognize(fixture("ana2.pgm"));

    const resumed = new EventFeed((last) => api.eventsUrl(last), {
      headers: api.headers(),
      onEvent: (e: RecognitionEvent) => {
        seen.push(e.event_id);
        resumed.stop();
      },
    });
    resumed.lastEventId = seen[seen.length - 1]!;
    await resumed.run();

    const unique = new Set(seen);
    expect(unique.size).toBe(seen.length); // no duplicates across reconnect
    expect(seen).toEqual([...seen].sort((a, b) => a - b));
  });
});
