"""Profile assembly and the end-to-end recognize pipeline."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .errors import DegenerateFace
from .geometry import BoundingBox
from .imaging import Image
from .recognition import (
    DetectorConfig,
    DetectorModel,
    MatchConfig,
    MatchResult,
    best_match,
    detect_faces,
    encode_face,
)
from .store import PersonRecord, Store


@dataclass(frozen=True)
class Profile:
    """Everything the console shows for a recognised person."""

    person: PersonRecord
    memos: list
    encoding_count: int
    presentation_text: str

    def to_json(self):
        return {
            "person": self.person.to_json(),
            "memos": [m.to_json() for m in self.memos],
            "encoding_count": self.encoding_count,
            "presentation_text": self.presentation_text,
        }


@dataclass(frozen=True)
class FaceHit:
    box: BoundingBox
    match: MatchResult | None
    person_id: int | None
    profile: Profile | None

    def to_json(self):
        obj = {"box": self.box.to_json(), "match": None, "profile": None}
        if self.match is not None:
            obj["match"] = {
                "person_id": self.person_id,
                "distance": self.match.distance,
                "matched": self.match.matched,
            }
            obj["profile"] = self.profile.to_json()
        return obj


@dataclass(frozen=True)
class RecognitionOutcome:
    """Per-face match decisions in detection order."""

    faces: list
    timestamp: datetime

    def to_json(self):
        return {
            "faces": [f.to_json() for f in self.faces],
            "timestamp": self.timestamp.isoformat(),
        }


def presentation_text(person: PersonRecord) -> str:
    """Canonical display line: "<name> — <relationship>", then the first
    line of the notes when there is one."""
    text = f"{person.name} — {person.relationship}"
    first_line = person.notes.strip().splitlines()[0] if person.notes.strip() else ""
    if first_line:
        text = f"{text} — {first_line}"
    return text


def retrieve_profile(store: Store, person_id: int) -> Profile:
    """Person metadata, memo list (newest first) and encoding count."""
    person = store.get_person(person_id)
    memos = store.memos_for(person_id)
    return Profile(
        person=person,
        memos=memos,
        encoding_count=len(store.encodings_for(person_id)),
        presentation_text=presentation_text(person),
    )


def recognize_and_retrieve(image: Image, model: DetectorModel, store: Store,
                           detector_config: DetectorConfig = DetectorConfig(),
                           match_config: MatchConfig = MatchConfig()) -> RecognitionOutcome:
    """detect -> encode -> nearest enrolled match -> profile, per face.

    Faces whose crop cannot be encoded are reported unmatched. The
    linear scan over all enrolled encodings is fine at desk scale; this
    is where a vector index would slot in.
    """
    known = store.all_encodings()
    hits = []
    for box in detect_faces(image, model, detector_config):
        match = None
        person_id = None
        profile = None
        try:
            candidate = encode_face(image, box, detector_config)
        except DegenerateFace:
            candidate = None
        if candidate is not None:
            match = best_match(known, candidate, match_config)
            if match is not None:
                person_id = known[match.index][0]
                profile = retrieve_profile(store, person_id)
        hits.append(FaceHit(box=box, match=match, person_id=person_id, profile=profile))
    return RecognitionOutcome(faces=hits, timestamp=store.clock())
