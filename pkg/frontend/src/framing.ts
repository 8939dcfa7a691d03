// Framing-report presentation model: each failure reason renders as a
// distinct badge with a retake hint; only quality failures may be
// waived by the override toggle.

import type { FailureCode, FramingReport } from "./types.js";

export interface Badge {
  code: FailureCode | "Pass";
  label: string;
  hint: string;
  waivable: boolean;
}

const BADGES: Record<FailureCode, Omit<Badge, "code">> = {
  NoFace: { label: "No face found", hint: "Center one face in the frame.", waivable: false },
  MultipleFaces: { label: "Several faces", hint: "Capture one person at a time.", waivable: false },
  TooSmall: { label: "Too far away", hint: "Move closer so the face fills the frame.", waivable: true },
  OffCenter: { label: "Off center", hint: "Keep the face in the middle.", waivable: true },
  Blurry: { label: "Blurry", hint: "Hold still and check the lighting.", waivable: true },
};

export function badgesFor(report: FramingReport): Badge[] {
  if (report.pass) {
    return [{ code: "Pass", label: "Good capture", hint: "", waivable: false }];
  }
  return report.failures.map((code) => ({ code, ...BADGES[code] }));
}

/** True when every failure is quality-only, so the override toggle can help. */
export function canOverride(report: FramingReport): boolean {
  return !report.pass && report.failures.length > 0 && report.failures.every((c) => BADGES[c].waivable);
}
