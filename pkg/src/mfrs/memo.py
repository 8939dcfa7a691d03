"""Voice memos: capture, noise gating, WAV persistence, association.

The engine accepts exactly one audio contract: mono 16-bit PCM at
16 kHz. Uncompressed WAV keeps fixtures bit-exact; anything else is
rejected at the boundary and the capturing client resamples.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from datetime import datetime, timedelta

import numpy as np
from scipy.signal import lfilter

from .errors import EmptyAudio, WavError

SAMPLE_RATE = 16000
FRAME_SAMPLES = 320  # 20 ms


@dataclass(frozen=True)
class AudioClip:
    """Mono 16-bit PCM at the fixed engine rate."""

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.int16)
        if arr.ndim != 1:
            raise ValueError("clip must be mono (1-D samples)")
        if self.sample_rate != SAMPLE_RATE:
            raise ValueError(f"engine rate is fixed at {SAMPLE_RATE} Hz")
        object.__setattr__(self, "samples", arr)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def __eq__(self, other):
        return (
            isinstance(other, AudioClip)
            and self.sample_rate == other.sample_rate
            and np.array_equal(self.samples, other.samples)
        )


@dataclass(frozen=True)
class GatePolicy:
    """Noise gate parameters.

    The gate threshold is min(floor_ratio * p10, loud_guard * p90) of
    the frame RMS distribution: relative to the noise floor, but capped
    below the loud program level so a clip with no quiet region (pure
    tone) is left alone.
    """

    highpass_hz: float = 100.0
    frame_samples: int = FRAME_SAMPLES
    floor_percentile: float = 10.0
    loud_percentile: float = 90.0
    floor_ratio: float = 2.0
    loud_guard: float = 0.5
    gain: float = 0.1


def _nearest_rank(sorted_values, pct):
    n = len(sorted_values)
    rank = max(1, int(np.ceil(pct / 100.0 * n)))
    return sorted_values[rank - 1]


def noise_gate(clip: AudioClip, policy: GatePolicy = GatePolicy()) -> AudioClip:
    """High-pass then attenuate frames sitting at the noise floor.

    First-order high-pass at policy.highpass_hz, then 20 ms frame RMS
    gating: frames below the gate threshold scale by policy.gain.
    Output length equals input length; an all-zero clip stays all-zero.
    """
    if len(clip.samples) == 0:
        raise EmptyAudio("cannot gate an empty clip")
    x = clip.samples.astype(np.float64)
    rc = 1.0 / (2.0 * np.pi * policy.highpass_hz)
    dt = 1.0 / clip.sample_rate
    a = rc / (rc + dt)
    # y[n] = a * (y[n-1] + x[n] - x[n-1]), zero initial state
    y = lfilter([a, -a], [1.0, -a], x)

    n = len(y)
    step = policy.frame_samples
    bounds = list(range(0, n, step))
    rms = np.array([
        np.sqrt(np.mean(y[s : min(s + step, n)] ** 2)) for s in bounds
    ])
    ordered = np.sort(rms)
    floor = _nearest_rank(ordered, policy.floor_percentile)
    loud = _nearest_rank(ordered, policy.loud_percentile)
    threshold = min(policy.floor_ratio * floor, policy.loud_guard * loud)
    for i, s in enumerate(bounds):
        if rms[i] < threshold:
            y[s : s + step] *= policy.gain
    out = np.clip(np.floor(y + 0.5), -32768, 32767).astype(np.int16)
    return AudioClip(samples=out)


# --- WAV codec ---

_FMT_PCM = 1


def write_wav(clip: AudioClip) -> bytes:
    """Canonical RIFF/WAVE bytes: one 16-byte fmt chunk, one data chunk,
    PCM mono 16-bit little-endian at 16 kHz."""
    data = clip.samples.astype("<i2").tobytes()
    byte_rate = clip.sample_rate * 2
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(data), b"WAVE",
        b"fmt ", 16, _FMT_PCM, 1, clip.sample_rate, byte_rate, 2, 16,
        b"data", len(data),
    )
    return header + data


def read_wav(payload: bytes) -> AudioClip:
    """Decode WAV bytes, skipping unknown chunks.

    Accepts only the engine contract; anything else raises WavError
    ("unsupported" for valid-but-wrong formats, "malformed" for broken
    structure).
    """
    if len(payload) < 12 or payload[0:4] != b"RIFF" or payload[8:12] != b"WAVE":
        raise WavError.malformed("not a RIFF/WAVE payload")
    pos = 12
    fmt = None
    data = None
    while pos + 8 <= len(payload):
        cid, size = struct.unpack_from("<4sI", payload, pos)
        pos += 8
        body = payload[pos : pos + size]
        if len(body) < size:
            raise WavError.malformed(f"chunk {cid!r} truncated: {len(body)} of {size} bytes")
        if cid == b"fmt ":
            if size < 16:
                raise WavError.malformed("fmt chunk shorter than 16 bytes")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            data = body
        pos += size + (size & 1)  # chunks are word-aligned
    if fmt is None or data is None:
        raise WavError.malformed("missing fmt or data chunk")
    format_tag, channels, rate, _, _, bit_depth = fmt
    if format_tag != _FMT_PCM:
        raise WavError.unsupported(f"format tag {format_tag}, only PCM accepted")
    if channels != 1:
        raise WavError.unsupported(f"{channels} channels, only mono accepted")
    if rate != SAMPLE_RATE:
        raise WavError.unsupported(f"{rate} Hz, engine rate is {SAMPLE_RATE}")
    if bit_depth != 16:
        raise WavError.unsupported(f"{bit_depth}-bit samples, only 16-bit accepted")
    if len(data) % 2:
        raise WavError.malformed("odd data chunk size for 16-bit samples")
    samples = np.frombuffer(data, dtype="<i2").astype(np.int16)
    return AudioClip(samples=samples)


# --- capture ---

class SampleStream:
    """Single-consumer source of int16 sample blocks; read_block()
    returns None at the stop signal or end of stream."""

    def read_block(self):
        raise NotImplementedError


class BufferedSampleStream(SampleStream):
    """Test/adapter stream over a sample array, with an optional stop
    signal after a fixed number of delivered samples."""

    def __init__(self, samples, block=1024, stop_after=None):
        self._samples = np.asarray(samples, dtype=np.int16)
        self._block = block
        self._stop_after = stop_after
        self._pos = 0

    def read_block(self):
        limit = len(self._samples) if self._stop_after is None else min(
            len(self._samples), self._stop_after)
        if self._pos >= limit:
            return None
        end = min(self._pos + self._block, limit)
        block = self._samples[self._pos : end]
        self._pos = end
        return block


def record_memo(source: SampleStream, max_duration: float,
                policy: GatePolicy = GatePolicy()) -> AudioClip:
    """Consume a sample stream until stop or max_duration, then gate."""
    limit = int(max_duration * SAMPLE_RATE)
    chunks = []
    total = 0
    while total < limit:
        block = source.read_block()
        if block is None:
            break
        block = np.asarray(block, dtype=np.int16)
        take = min(len(block), limit - total)
        chunks.append(block[:take])
        total += take
    if total == 0:
        raise EmptyAudio("no samples captured")
    return noise_gate(AudioClip(samples=np.concatenate(chunks)), policy)


# --- association ---

@dataclass(frozen=True)
class VoiceMemo:
    """A clip plus its metadata; memo_id is assigned by the store."""

    clip: AudioClip
    created_at: datetime
    label: str = ""
    person_id: int | None = None
    memo_id: int | None = None


@dataclass(frozen=True)
class CaptureContext:
    """Session state carrying the most recent enrollment, so a memo
    recorded right after a capture links to that person."""

    last_enrollment: tuple[int, datetime] | None = None
    association_window_s: float = 120.0

    def __post_init__(self):
        if self.association_window_s <= 0:
            raise ValueError("association window must be positive")


def associate_memo(memo: VoiceMemo, context: CaptureContext, now: datetime) -> VoiceMemo:
    """Auto-link an unlinked memo to the person enrolled within the
    association window. Explicitly linked memos pass through unchanged;
    outside the window the memo stays unlinked for manual linking."""
    if memo.person_id is not None:
        return memo
    if context.last_enrollment is None:
        return memo
    person_id, enrolled_at = context.last_enrollment
    if timedelta(0) <= now - enrolled_at <= timedelta(seconds=context.association_window_s):
        return replace(memo, person_id=person_id)
    return memo
