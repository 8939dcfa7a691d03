from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from conftest import glyph
from mfrs.errors import NotFound
from mfrs.memo import AudioClip, VoiceMemo
from mfrs.recognition import best_match, detect_faces, encode_face
from mfrs.retrieval import recognize_and_retrieve, retrieve_profile
from mfrs.rng import uniform_array

T0 = datetime(2026, 1, 1, tzinfo=timezone.utc)


def enroll(store, detector_config, identity, jitters, name):
    person = store.create_person(name, "friend")
    for j in jitters:
        image, _ = glyph(identity, j)
        boxes = detect_faces(image, *_model_and_cfg(detector_config))
        store.add_encoding(person.person_id, encode_face(image, boxes[0], detector_config))
    return person


# the module-level model fixture is session scoped; stash it per test via
# a tiny indirection so enroll() can reuse it
_model_ref = {}


def _model_and_cfg(detector_config):
    return _model_ref["m"], detector_config


@pytest.fixture(autouse=True)
def _capture_model(model):
    _model_ref["m"] = model


def make_memo(seed, at, person_id=None):
    samples = np.floor(uniform_array(seed, 300, -2000, 2000)).astype(np.int16)
    return VoiceMemo(clip=AudioClip(samples=samples), created_at=at, person_id=person_id)


def test_profile_format_without_notes(store):
    store.create_person("Ana", "daughter")
    profile = retrieve_profile(store, 1)
    assert profile.presentation_text == "Ana — daughter"
    assert profile.memos == []
    assert profile.encoding_count == 0


def test_profile_includes_first_note_line(store):
    store.create_person("Ben", "neighbor", "Waters the plants.\nHas a dog.")
    profile = retrieve_profile(store, 1)
    assert profile.presentation_text == "Ben — neighbor — Waters the plants."


def test_profile_unknown_person(store):
    with pytest.raises(NotFound):
        retrieve_profile(store, 42)


def test_profile_memos_match_store_ordering(store):
    store.create_person("Ana", "daughter")
    store.add_memo(make_memo(1, T0 + timedelta(seconds=10), person_id=1))
    store.add_memo(make_memo(2, T0 + timedelta(seconds=20), person_id=1))
    profile = retrieve_profile(store, 1)
    assert [m.memo_id for m in profile.memos] == [2, 1]
    assert [m.memo_id for m in profile.memos] == [m.memo_id for m in store.memos_for(1)]


def test_blank_image_yields_no_faces(store, model, detector_config, match_config):
    from mfrs.imaging import image_from_array

    blank = image_from_array(np.full((200, 200), 150, dtype=np.uint8))
    outcome = recognize_and_retrieve(blank, model, store, detector_config, match_config)
    assert outcome.faces == []


def test_enrolled_variant_recognized(store, model, detector_config, match_config):
    person = enroll(store, detector_config, identity=21, jitters=range(4), name="Ana")
    probe, _ = glyph(21, 9)
    outcome = recognize_and_retrieve(probe, model, store, detector_config, match_config)
    assert len(outcome.faces) == 1
    hit = outcome.faces[0]
    assert hit.match is not None
    assert hit.person_id == person.person_id
    assert hit.profile.person.name == "Ana"


def test_unenrolled_glyph_unmatched(store, model, detector_config, match_config):
    enroll(store, detector_config, identity=22, jitters=range(3), name="Ana")
    probe, _ = glyph(23, 0)
    outcome = recognize_and_retrieve(probe, model, store, detector_config, match_config)
    assert len(outcome.faces) == 1
    assert outcome.faces[0].match is None
    assert outcome.faces[0].profile is None


def test_composition_oracle(store, model, detector_config, match_config):
    """recognize_and_retrieve equals the hand-rolled detect -> encode ->
    best_match -> retrieve composition."""
    enroll(store, detector_config, identity=24, jitters=range(3), name="Ana")
    enroll(store, detector_config, identity=25, jitters=range(3), name="Ben")
    probe, _ = glyph(24, 8)
    outcome = recognize_and_retrieve(probe, model, store, detector_config, match_config)

    known = store.all_encodings()
    boxes = detect_faces(probe, model, detector_config)
    assert [f.box for f in outcome.faces] == boxes
    for face, box in zip(outcome.faces, boxes):
        cand = encode_face(probe, box, detector_config)
        expected = best_match(known, cand, match_config)
        if expected is None:
            assert face.match is None
        else:
            assert face.match == expected
            assert face.person_id == known[expected.index][0]
            assert face.profile.person.person_id == face.person_id


def test_outcome_match_profile_consistency(store, model, detector_config, match_config):
    enroll(store, detector_config, identity=26, jitters=range(3), name="Cyn")
    probe, _ = glyph(26, 7)
    outcome = recognize_and_retrieve(probe, model, store, detector_config, match_config)
    for face in outcome.faces:
        assert (face.match is None) == (face.profile is None)
        if face.profile is not None:
            assert face.profile.person.person_id == face.person_id


def test_outcome_json_shape(store, model, detector_config, match_config):
    enroll(store, detector_config, identity=27, jitters=range(2), name="Dee")
    probe, _ = glyph(27, 5)
    obj = recognize_and_retrieve(probe, model, store, detector_config, match_config).to_json()
    assert set(obj) == {"faces", "timestamp"}
    face = obj["faces"][0]
    assert set(face) == {"box", "match", "profile"}
    assert set(face["box"]) == {"top", "right", "bottom", "left"}
    if face["match"]:
        assert set(face["match"]) == {"person_id", "distance", "matched"}
