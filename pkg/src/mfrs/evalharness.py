"""Technical assessment: pair verification and store stress timing.

The pair protocol consumes any image directory plus a text list of
"refA refB same|diff" lines (the layout benchmark face sets are
distributed in), so real datasets drop in unchanged; the glyph
generator supplies a self-contained corpus for desk-scale runs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EvalError, MissingImage, ParseError
from .imaging import load_image
from .recognition import (
    DetectorConfig,
    DetectorModel,
    MatchConfig,
    detect_faces,
    encode_face,
    face_distance,
)
from .rng import SplitMix64, uniform_array
from .store import Store


@dataclass(frozen=True)
class PairEntry:
    ref_a: Path
    ref_b: Path
    same: bool


@dataclass(frozen=True)
class PairList:
    entries: list


def parse_pairs(text: str, image_root) -> PairList:
    """Parse a pair list; '#' lines are comments.

    Every reference must resolve to a file inside image_root.
    """
    root = Path(image_root).resolve()
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3 or parts[2] not in ("same", "diff"):
            raise ParseError(f"line {lineno}: expected 'refA refB same|diff', got {raw!r}")
        resolved = []
        for ref in parts[:2]:
            path = (root / ref).resolve()
            if root not in path.parents and path != root:
                raise MissingImage(f"line {lineno}: {ref!r} escapes the image root")
            if not path.is_file():
                raise MissingImage(f"line {lineno}: {ref!r} not found under {image_root}")
            resolved.append(path)
        entries.append(PairEntry(ref_a=resolved[0], ref_b=resolved[1], same=parts[2] == "same"))
    if not entries:
        raise ParseError("no pairs")
    return PairList(entries=entries)


@dataclass(frozen=True)
class VerificationReport:
    n_pairs: int
    n_skipped: int
    threshold: float
    accuracy: float
    best_threshold: float
    best_accuracy: float
    roc: list  # (threshold, tpr, fpr), thresholds strictly increasing
    mean_same_distance: float
    mean_diff_distance: float

    def to_json(self):
        return {
            "n_pairs": self.n_pairs,
            "n_skipped": self.n_skipped,
            "threshold": self.threshold,
            "accuracy": self.accuracy,
            "best_threshold": self.best_threshold,
            "best_accuracy": self.best_accuracy,
            "roc": [{"threshold": t, "tpr": tpr, "fpr": fpr} for t, tpr, fpr in self.roc],
            "mean_same_distance": self.mean_same_distance,
            "mean_diff_distance": self.mean_diff_distance,
        }


def accuracy_at(distances, labels, threshold) -> float:
    """Fraction of pairs called correctly: same-pairs at distance <=
    threshold plus diff-pairs above it."""
    correct = sum(
        1 for d, same in zip(distances, labels)
        if (d <= threshold) == same
    )
    return correct / len(distances)


def sweep_thresholds(distances, labels):
    """ROC sweep over the observed distances.

    Candidate thresholds are 0 plus every distinct distance, strictly
    increasing. Returns (roc, best_threshold, best_accuracy); the best
    threshold is the smallest maximiser.
    """
    candidates = sorted(set([0.0] + [float(d) for d in distances]))
    n_same = sum(1 for s in labels if s)
    n_diff = len(labels) - n_same
    roc = []
    best_t, best_acc = candidates[0], -1.0
    for t in candidates:
        tp = sum(1 for d, s in zip(distances, labels) if s and d <= t)
        fp = sum(1 for d, s in zip(distances, labels) if not s and d <= t)
        tpr = tp / n_same if n_same else 0.0
        fpr = fp / n_diff if n_diff else 0.0
        roc.append((t, tpr, fpr))
        acc = accuracy_at(distances, labels, t)
        if acc > best_acc:
            best_t, best_acc = t, acc
    return roc, best_t, best_acc


def eval_pairs(pairs: PairList, model: DetectorModel,
               detector_config: DetectorConfig = DetectorConfig(),
               match_config: MatchConfig = MatchConfig()) -> VerificationReport:
    """Verify every pair: encode the best face of each side, threshold
    the distance. Pairs where either side yields no detection are
    counted as skipped and excluded from the rates."""
    distances, labels = [], []
    skipped = 0
    for entry in pairs.entries:
        encs = []
        for ref in (entry.ref_a, entry.ref_b):
            image = load_image(ref)
            boxes = detect_faces(image, model, detector_config)
            if not boxes:
                break
            encs.append(encode_face(image, boxes[0], detector_config))
        if len(encs) != 2:
            skipped += 1
            continue
        distances.append(face_distance(encs[0], encs[1]))
        labels.append(entry.same)
    if not distances:
        raise EvalError(f"all {skipped} pairs skipped, nothing to evaluate")
    roc, best_t, best_acc = sweep_thresholds(distances, labels)
    same_d = [d for d, s in zip(distances, labels) if s]
    diff_d = [d for d, s in zip(distances, labels) if not s]
    return VerificationReport(
        n_pairs=len(distances),
        n_skipped=skipped,
        threshold=match_config.tolerance,
        accuracy=accuracy_at(distances, labels, match_config.tolerance),
        best_threshold=best_t,
        best_accuracy=best_acc,
        roc=roc,
        mean_same_distance=float(np.mean(same_d)) if same_d else float("nan"),
        mean_diff_distance=float(np.mean(diff_d)) if diff_d else float("nan"),
    )


def roc_csv(report: VerificationReport) -> str:
    lines = ["threshold,tpr,fpr"]
    lines += [f"{t},{tpr},{fpr}" for t, tpr, fpr in report.roc]
    return "\n".join(lines) + "\n"


# --- store stress timing ---

@dataclass(frozen=True)
class OpTiming:
    p50_us: float
    p95_us: float
    p99_us: float

    def to_json(self):
        return {"p50_us": self.p50_us, "p95_us": self.p95_us, "p99_us": self.p99_us}


@dataclass(frozen=True)
class DbBenchReport:
    n: int
    insert: OpTiming
    get: OpTiming
    update: OpTiming
    total_s: float

    def to_json(self):
        return {
            "n": self.n,
            "insert": self.insert.to_json(),
            "get": self.get.to_json(),
            "update": self.update.to_json(),
            "total_s": self.total_s,
        }


def nearest_rank(sorted_samples, pct) -> float:
    """Nearest-rank percentile of an ascending sample list."""
    rank = max(1, math.ceil(pct / 100.0 * len(sorted_samples)))
    return sorted_samples[rank - 1]


def _timing(samples_ns) -> OpTiming:
    ordered = sorted(samples_ns)
    return OpTiming(
        p50_us=nearest_rank(ordered, 50) / 1000.0,
        p95_us=nearest_rank(ordered, 95) / 1000.0,
        p99_us=nearest_rank(ordered, 99) / 1000.0,
    )


def bench_db(n: int, store: Store, seed: int = 0xB_EEF, keep_samples: bool = False):
    """Insert n persons (each with one encoding), then n random gets and
    n random updates, timing every operation with the monotonic clock.

    Returns the report, or (report, raw samples dict) when keep_samples
    is set (the acceptance suite recomputes percentiles from the raw
    samples).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = SplitMix64(seed)
    t_start = time.perf_counter()
    inserts, gets, updates = [], [], []
    ids = []
    for i in range(n):
        vec = uniform_array(rng.next_u64(), 128, -1.0, 1.0)
        vec /= np.sqrt((vec * vec).sum())
        t0 = time.perf_counter_ns()
        person = store.create_person(f"person-{i:05d}", "bench", "")
        store.add_encoding(person.person_id, vec)
        inserts.append(time.perf_counter_ns() - t0)
        ids.append(person.person_id)
    for _ in range(n):
        pid = ids[rng.randint(0, n - 1)]
        t0 = time.perf_counter_ns()
        store.get_person(pid)
        gets.append(time.perf_counter_ns() - t0)
    for i in range(n):
        pid = ids[rng.randint(0, n - 1)]
        t0 = time.perf_counter_ns()
        store.update_person(pid, notes=f"visit {i}")
        updates.append(time.perf_counter_ns() - t0)
    report = DbBenchReport(
        n=n,
        insert=_timing(inserts),
        get=_timing(gets),
        update=_timing(updates),
        total_s=time.perf_counter() - t_start,
    )
    if keep_samples:
        return report, {"insert": inserts, "get": gets, "update": updates}
    return report
