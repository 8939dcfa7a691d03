import numpy as np
import pytest

from conftest import glyph
from mfrs.errors import DecodeError
from mfrs.glyphs import GlyphParams, generate_face_glyph
from mfrs.imaging import encode_pnm, image_from_array
from mfrs.ingestion import (
    MULTIPLE_FACES,
    NO_FACE,
    OFF_CENTER,
    TOO_SMALL,
    DirectorySource,
    FramingPolicy,
    SequenceSource,
    framing_check,
    next_frame,
    open_frame_source,
)


def write_glyph(path, identity, jitter, **kw):
    image, _ = glyph(identity, jitter, **kw)
    path.write_bytes(encode_pnm(image))


def test_directory_feed_lexicographic(tmp_path):
    write_glyph(tmp_path / "b.pgm", 1, 1)
    write_glyph(tmp_path / "a.pgm", 1, 2)
    src = open_frame_source(tmp_path)
    first, second = next_frame(src), next_frame(src)
    assert next_frame(src) is None
    expected_a, _ = glyph(1, 2)
    expected_b, _ = glyph(1, 1)
    assert first == expected_a
    assert second == expected_b


def test_empty_directory_immediately_exhausted(tmp_path):
    assert next_frame(open_frame_source(tmp_path)) is None


def test_three_files_exactly_once(tmp_path):
    for i in range(3):
        write_glyph(tmp_path / f"f{i}.pgm", 2, i)
    src = open_frame_source(tmp_path)
    frames = [next_frame(src) for _ in range(3)]
    assert all(f is not None for f in frames)
    assert next_frame(src) is None
    assert next_frame(src) is None  # never repeats
    assert src.index == 3


def test_unreadable_frame_raises_then_continues(tmp_path):
    write_glyph(tmp_path / "a.pgm", 3, 1)
    (tmp_path / "b.pgm").write_bytes(b"P5 9 9 255\nshort")
    write_glyph(tmp_path / "c.pgm", 3, 2)
    src = open_frame_source(tmp_path)
    assert next_frame(src) is not None
    with pytest.raises(DecodeError):
        next_frame(src)
    assert next_frame(src) is not None
    assert next_frame(src) is None


def test_single_file_source(tmp_path):
    write_glyph(tmp_path / "one.pgm", 4, 1)
    src = open_frame_source(tmp_path / "one.pgm")
    assert next_frame(src) is not None
    assert next_frame(src) is None


def test_sequence_source():
    image, _ = glyph(5, 1)
    src = SequenceSource([encode_pnm(image)])
    assert next_frame(src) == image
    assert next_frame(src) is None


def test_missing_source_rejected(tmp_path):
    with pytest.raises(DecodeError):
        open_frame_source(tmp_path / "nope")


def test_directory_ignores_unrecognized_extensions(tmp_path):
    write_glyph(tmp_path / "a.pgm", 6, 1)
    (tmp_path / "notes.txt").write_text("hi")
    src = DirectorySource(tmp_path)
    assert next_frame(src) is not None
    assert next_frame(src) is None


# --- framing ---

def test_blank_image_no_face(model, detector_config):
    blank = image_from_array(np.full((256, 256), 180, dtype=np.uint8))
    report = framing_check(blank, model, detector_config)
    assert not report.passed
    assert report.failures == {NO_FACE}
    assert report.face is None and report.size_ratio is None


def test_centered_sharp_glyph_passes(model, detector_config):
    image, _ = glyph(7, 1)  # default jitter keeps the face centered, ~half height
    report = framing_check(image, model, detector_config)
    assert report.passed
    assert report.failures == frozenset()
    assert report.size_ratio > 0.2
    assert report.center_offset <= 0.25
    assert report.sharpness >= 100.0


def test_corner_small_glyph_fails_small_and_off_center(model, detector_config):
    params = GlyphParams(
        seed=1, identity_seed=5_000_123, canvas=640,
        scale_range=(0.10, 0.10), offset_range=(-0.37, -0.37),
    )
    image, truth = generate_face_glyph(params)
    report = framing_check(image, model, detector_config)
    assert not report.passed
    assert {TOO_SMALL, OFF_CENTER} <= report.failures


def test_metrics_recomputable_from_reported_box(model, detector_config):
    image, _ = glyph(8, 1)
    report = framing_check(image, model, detector_config)
    face = report.face
    assert report.size_ratio == face.height / image.height
    cx, cy = face.center()
    expected_offset = max(
        abs(cx - image.width / 2) / (image.width / 2),
        abs(cy - image.height / 2) / (image.height / 2),
    )
    assert report.center_offset == expected_offset


def test_two_faces_fail_multiple(model, detector_config):
    left, _ = glyph(9, 1, canvas=160)
    right, _ = glyph(10, 1, canvas=160)
    image = image_from_array(
        np.concatenate([left.to_array(), right.to_array()], axis=1))
    report = framing_check(image, model, detector_config)
    assert not report.passed
    assert MULTIPLE_FACES in report.failures
    assert report.face is not None  # metrics still reported


def test_pass_iff_no_failures(model, detector_config):
    image, _ = glyph(11, 1)
    report = framing_check(image, model, detector_config)
    assert report.passed == (not report.failures)


def test_policy_thresholds_respected(model, detector_config):
    image, _ = glyph(12, 1)
    strict = FramingPolicy(min_size_ratio=0.99)
    report = framing_check(image, model, detector_config, strict)
    assert TOO_SMALL in report.failures
