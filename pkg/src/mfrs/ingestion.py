"""Frame acquisition and capture-quality feedback.

Physical cameras are abstracted as frame sources: a single file, a
directory feed (lexicographic byte order, each file exactly once) or a
pre-loaded sequence of payloads. The framing check tells the operator
whether a capture is usable for enrollment before anything is stored.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from .errors import DecodeError
from .geometry import BoundingBox
from .imaging import Image, crop_gray, laplacian_variance, load_image, to_gray_f64
from .recognition import DetectorConfig, DetectorModel, detect_faces

FRAME_EXTENSIONS = (".pgm", ".ppm", ".pnm", ".png", ".jpg", ".jpeg")

NO_FACE = "NoFace"
MULTIPLE_FACES = "MultipleFaces"
TOO_SMALL = "TooSmall"
OFF_CENTER = "OffCenter"
BLURRY = "Blurry"


@dataclass(frozen=True)
class FramingPolicy:
    """Thresholds for a usable enrollment capture."""

    min_size_ratio: float = 0.20
    max_center_offset: float = 0.25
    min_sharpness: float = 100.0

    # quality failures the enrollment override may waive; face-count
    # failures are never waivable
    WAIVABLE = frozenset({TOO_SMALL, OFF_CENTER, BLURRY})


@dataclass(frozen=True)
class FramingReport:
    passed: bool
    face: BoundingBox | None
    failures: frozenset
    size_ratio: float | None
    center_offset: float | None
    sharpness: float | None

    def to_json(self):
        return {
            "pass": self.passed,
            "face": self.face.to_json() if self.face else None,
            "failures": sorted(self.failures),
            "size_ratio": self.size_ratio,
            "center_offset": self.center_offset,
            "sharpness": self.sharpness,
        }


def framing_check(image: Image, model: DetectorModel, config: DetectorConfig,
                  policy: FramingPolicy = FramingPolicy()) -> FramingReport:
    """Judge a capture: exactly one face, large, centered and sharp.

    Metrics are computed from the best detection whenever one exists,
    even if the report fails for other reasons.
    """
    boxes = detect_faces(image, model, config)
    failures = set()
    if not boxes:
        return FramingReport(passed=False, face=None, failures=frozenset({NO_FACE}),
                             size_ratio=None, center_offset=None, sharpness=None)
    if len(boxes) > 1:
        failures.add(MULTIPLE_FACES)
    face = boxes[0]
    size_ratio = face.height / image.height
    fx, fy = face.center()
    center_offset = max(
        abs(fx - image.width / 2.0) / (image.width / 2.0),
        abs(fy - image.height / 2.0) / (image.height / 2.0),
    )
    sharpness = laplacian_variance(crop_gray(to_gray_f64(image), face))
    if size_ratio < policy.min_size_ratio:
        failures.add(TOO_SMALL)
    if center_offset > policy.max_center_offset:
        failures.add(OFF_CENTER)
    if sharpness < policy.min_sharpness:
        failures.add(BLURRY)
    return FramingReport(passed=not failures, face=face, failures=frozenset(failures),
                         size_ratio=size_ratio, center_offset=center_offset,
                         sharpness=sharpness)


class FrameSource:
    """Single-consumer ordered frame stream. Subclasses fill _payloads
    lazily or eagerly; identifier is a URI-ish label for diagnostics."""

    def __init__(self, identifier):
        self.identifier = identifier
        self.index = 0

    def _next_payload(self):
        raise NotImplementedError

    def next_frame(self) -> Image | None:
        """Next frame, or None at end of stream.

        An unreadable frame raises DecodeError; the stream continues
        with the following frame on the next call.
        """
        payload = self._next_payload()
        if payload is None:
            return None
        self.index += 1
        return load_image(payload)


class FileSource(FrameSource):
    """One file, delivered exactly once."""

    def __init__(self, path):
        super().__init__(str(path))
        self._path = Path(path)
        self._done = False

    def _next_payload(self):
        if self._done:
            return None
        self._done = True
        return self._path.read_bytes()


class DirectorySource(FrameSource):
    """All recognised files in a directory, lexicographic byte order of
    names, snapshot taken at open time."""

    def __init__(self, path, extensions=FRAME_EXTENSIONS):
        super().__init__(str(path))
        names = [
            n for n in os.listdir(path)
            if os.path.isfile(os.path.join(path, n)) and n.lower().endswith(extensions)
        ]
        names.sort(key=os.fsencode)
        self._paths = [Path(path) / n for n in names]
        self._pos = 0

    def _next_payload(self):
        if self._pos >= len(self._paths):
            return None
        p = self._paths[self._pos]
        self._pos += 1
        return p.read_bytes()


class SequenceSource(FrameSource):
    """In-memory sequence of encoded payloads (byte-stream feeds)."""

    def __init__(self, payloads, identifier="memory"):
        super().__init__(identifier)
        self._payloads = list(payloads)
        self._pos = 0

    def _next_payload(self):
        if self._pos >= len(self._payloads):
            return None
        p = self._payloads[self._pos]
        self._pos += 1
        return p


def open_frame_source(path) -> FrameSource:
    p = Path(path)
    if p.is_dir():
        return DirectorySource(p)
    if p.is_file():
        return FileSource(p)
    raise DecodeError(f"no such frame source: {path}")


def next_frame(source: FrameSource) -> Image | None:
    return source.next_frame()
