"""Distance-threshold matching of encodings against an enrolled list."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoder import require_encoding


@dataclass(frozen=True)
class MatchConfig:
    """Euclidean distance at or below ``tolerance`` counts as a match."""

    tolerance: float = 0.6

    def __post_init__(self):
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")


@dataclass(frozen=True)
class MatchResult:
    index: int
    distance: float
    matched: bool


def face_distance(a, b) -> float:
    """Euclidean distance between two encodings."""
    a = require_encoding(a)
    b = require_encoding(b)
    d = a - b
    return float(np.sqrt((d * d).sum()))


def compare_faces(known, candidate, config: MatchConfig = MatchConfig()):
    """Per-known-face boolean matches, order preserved.

    Boundary convention: distance exactly equal to the tolerance is a
    match.
    """
    candidate = require_encoding(candidate)
    return [face_distance(k, candidate) <= config.tolerance for k in known]


def best_match(known, candidate, config: MatchConfig = MatchConfig()):
    """Closest qualifying entry of (person_id, encoding) pairs.

    Returns a MatchResult indexing into ``known``, or None when nothing
    falls within tolerance. Distance ties resolve to the smaller
    person_id.
    """
    if not known:
        return None
    candidate = require_encoding(candidate)
    best = None  # (distance, person_id, index)
    for i, (person_id, enc) in enumerate(known):
        d = face_distance(enc, candidate)
        if d > config.tolerance:
            continue
        if best is None or (d, person_id) < (best[0], best[1]):
            best = (d, person_id, i)
    if best is None:
        return None
    return MatchResult(index=best[2], distance=best[0], matched=True)
