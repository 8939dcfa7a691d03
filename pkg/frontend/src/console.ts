// DOM wiring for the four console screens. All state shown on screen
// comes from API responses; this file only moves data between the
// typed client and the page.

import { ApiError, MfrsApi } from "./api.js";
import { EventFeed } from "./events.js";
import { badgesFor, canOverride } from "./framing.js";
import { createSession } from "./session.js";
import type { FramingReport, Person, RecognitionEvent, RecognitionOutcome } from "./types.js";
import { captureToWav } from "./wav.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function banner(message: string, kind: "ok" | "error" = "error"): void {
  const box = el<HTMLDivElement>("banner");
  box.textContent = message;
  box.className = `banner ${kind}`;
  box.hidden = false;
  setTimeout(() => (box.hidden = true), 6000);
}

async function guard<T>(work: () => Promise<T>): Promise<T | undefined> {
  try {
    return await work();
  } catch (err) {
    if (err instanceof ApiError) banner(`${err.code}: ${err.message}`);
    else banner(`server unreachable: ${String(err)}`);
    return undefined;
  }
}

const session = createSession(
  localStorage.getItem("mfrs.base") ?? window.location.origin,
  localStorage.getItem("mfrs.token") ?? undefined,
);
const api = new MfrsApi(session);

// --- enrollment wizard ---

function renderFraming(report: FramingReport): void {
  const holder = el<HTMLDivElement>("framing-badges");
  holder.replaceChildren();
  for (const badge of badgesFor(report)) {
    const chip = document.createElement("span");
    chip.className = `badge ${badge.code === "Pass" ? "pass" : "fail"}`;
    chip.textContent = badge.hint ? `${badge.label} - ${badge.hint}` : badge.label;
    holder.append(chip);
  }
  el<HTMLLabelElement>("override-row").hidden = !canOverride(report);
}

async function enroll(): Promise<void> {
  const name = el<HTMLInputElement>("enroll-name").value.trim();
  const file = el<HTMLInputElement>("enroll-image").files?.[0];
  if (!name || !file) {
    banner("need a name and a capture image");
    return;
  }
  const image = await file.arrayBuffer();
  const override = el<HTMLInputElement>("override-framing").checked;
  try {
    const person = await api.createPerson(
      name,
      el<HTMLInputElement>("enroll-relationship").value.trim(),
      el<HTMLTextAreaElement>("enroll-notes").value,
    );
    const result = await api.enrollImage(person.person_id, image, override);
    renderFraming(result.framing);
    const profile = await api.profile(person.person_id);
    banner(`enrolled ${person.name}: ${profile.encoding_count} capture(s) stored`, "ok");
    void refreshDirectory();
  } catch (err) {
    if (err instanceof ApiError && err.code === "framing_failed") {
      renderFraming(err.details as FramingReport);
      banner("capture rejected, adjust and retake");
    } else if (err instanceof ApiError) {
      banner(`${err.code}: ${err.message}`);
    } else {
      banner(`server unreachable: ${String(err)}`);
    }
  }
}

// --- recognition view ---

function renderOutcome(outcome: RecognitionOutcome): void {
  const holder = el<HTMLDivElement>("recognition-cards");
  holder.replaceChildren();
  if (outcome.faces.length === 0) {
    holder.textContent = "No faces detected.";
    return;
  }
  for (const face of outcome.faces) {
    const card = document.createElement("div");
    card.className = "card";
    if (face.profile && face.match) {
      const title = document.createElement("h3");
      title.textContent = face.profile.presentation_text;
      card.append(title);
      const meta = document.createElement("p");
      meta.textContent = `distance ${face.match.distance.toFixed(3)}`;
      card.append(meta);
      for (const memo of face.profile.memos) {
        const row = document.createElement("div");
        const label = document.createElement("span");
        label.textContent = memo.label || `memo ${memo.memo_id}`;
        const audio = document.createElement("audio");
        audio.controls = true;
        void api.memoAudio(memo.memo_id).then((bytes) => {
          audio.src = URL.createObjectURL(new Blob([bytes], { type: "audio/wav" }));
        });
        row.append(label, audio);
        card.append(row);
      }
    } else {
      const title = document.createElement("h3");
      title.textContent = "Unknown person";
      card.append(title);
      const link = document.createElement("a");
      link.href = "#enroll";
      link.textContent = "Enroll them now";
      card.append(link);
    }
    holder.append(card);
  }
}

async function recognize(): Promise<void> {
  const file = el<HTMLInputElement>("recognize-image").files?.[0];
  if (!file) {
    banner("choose an image first");
    return;
  }
  const image = await file.arrayBuffer();
  const outcome = await guard(() => api.recognize(image));
  if (outcome) renderOutcome(outcome);
}

// --- live feed ---

const feed = new EventFeed((last) => api.eventsUrl(last), {
  headers: api.headers(),
  onEvent: (event: RecognitionEvent) => {
    const list = el<HTMLUListElement>("event-list");
    const item = document.createElement("li");
    const names = event.outcome.faces
      .map((f) => f.profile?.person.name ?? "unknown")
      .join(", ");
    item.textContent = `#${event.event_id} ${event.outcome.timestamp}: ${names || "no faces"}`;
    list.prepend(item);
    session.lastEventId = event.event_id;
  },
  onStatus: (status) => {
    el<HTMLSpanElement>("feed-status").textContent = status;
  },
});

// --- memo recorder ---

let audioContext: AudioContext | null = null;
let capture: { chunks: Float32Array[]; stop: () => void } | null = null;

async function startRecording(): Promise<void> {
  const stream = await navigator.mediaDevices.getUserMedia({ audio: true });
  audioContext = new AudioContext();
  const source = audioContext.createMediaStreamSource(stream);
  const processor = audioContext.createScriptProcessor(4096, 1, 1);
  const chunks: Float32Array[] = [];
  processor.onaudioprocess = (e) => {
    chunks.push(new Float32Array(e.inputBuffer.getChannelData(0)));
  };
  source.connect(processor);
  processor.connect(audioContext.destination);
  capture = {
    chunks,
    stop: () => {
      processor.disconnect();
      source.disconnect();
      stream.getTracks().forEach((t) => t.stop());
    },
  };
  el<HTMLButtonElement>("memo-start").disabled = true;
  el<HTMLButtonElement>("memo-stop").disabled = false;
}

async function stopRecording(): Promise<void> {
  if (!capture || !audioContext) return;
  capture.stop();
  const rate = audioContext.sampleRate;
  const chunks = capture.chunks;
  capture = null;
  el<HTMLButtonElement>("memo-start").disabled = false;
  el<HTMLButtonElement>("memo-stop").disabled = true;
  const total = chunks.reduce((n, c) => n + c.length, 0);
  if (total === 0) {
    banner("nothing recorded");
    return;
  }
  const wav = captureToWav(chunks, rate);
  const label = el<HTMLInputElement>("memo-label").value.trim();
  const memo = await guard(() => api.addMemo(wav, { label }));
  if (!memo) return;
  if (memo.person_id !== null) {
    const person = await guard(() => api.getPerson(memo.person_id!));
    banner(`memo saved and linked to ${person?.name ?? `person ${memo.person_id}`}`, "ok");
  } else {
    banner("memo saved as unlinked; pick a person below", "ok");
    void refreshUnlinked();
  }
}

async function refreshUnlinked(): Promise<void> {
  const memos = (await guard(() => api.listMemos({ unlinked: true }))) ?? [];
  const persons = (await guard(() => api.listPersons())) ?? [];
  const list = el<HTMLUListElement>("unlinked-list");
  list.replaceChildren();
  for (const memo of memos) {
    const item = document.createElement("li");
    item.textContent = `${memo.label || "memo"} (${memo.duration_s.toFixed(1)}s) `;
    const picker = document.createElement("select");
    picker.append(new Option("link to...", ""));
    for (const p of persons) picker.append(new Option(p.name, String(p.person_id)));
    picker.onchange = () => {
      if (!picker.value) return;
      void guard(() => api.linkMemo(memo.memo_id, Number(picker.value))).then(() =>
        refreshUnlinked(),
      );
    };
    item.append(picker);
    list.append(item);
  }
}

// --- person directory ---

async function refreshDirectory(): Promise<void> {
  const persons = (await guard(() => api.listPersons())) ?? [];
  const table = el<HTMLTableSectionElement>("directory-body");
  table.replaceChildren();
  for (const person of persons) {
    table.append(directoryRow(person));
  }
}

function directoryRow(person: Person): HTMLTableRowElement {
  const row = document.createElement("tr");
  const name = document.createElement("td");
  name.textContent = person.name;
  const rel = document.createElement("td");
  rel.textContent = person.relationship;
  const actions = document.createElement("td");
  const edit = document.createElement("button");
  edit.textContent = "Edit notes";
  edit.onclick = () => {
    const notes = prompt(`Notes for ${person.name}:`, person.notes);
    if (notes !== null) {
      void guard(() => api.updatePerson(person.person_id, { notes })).then(() =>
        refreshDirectory(),
      );
    }
  };
  const remove = document.createElement("button");
  remove.textContent = "Delete";
  remove.onclick = () => {
    const sure = confirm(
      `Delete ${person.name}? Their captures and voice memos are removed too.`,
    );
    if (sure) {
      void guard(() => api.deletePerson(person.person_id)).then(() => refreshDirectory());
    }
  };
  actions.append(edit, remove);
  row.append(name, rel, actions);
  return row;
}

// --- boot ---

export function boot(): void {
  el<HTMLButtonElement>("enroll-submit").onclick = () => void enroll();
  el<HTMLButtonElement>("recognize-submit").onclick = () => void recognize();
  el<HTMLButtonElement>("memo-start").onclick = () => void startRecording();
  el<HTMLButtonElement>("memo-stop").onclick = () => void stopRecording();
  void refreshDirectory();
  void refreshUnlinked();
  void feed.run();
}

boot();
