"""Procedural face glyphs: the desk-scale benchmark corpus.

A glyph is a face-like drawing (head ellipse, eyes, brows, nose,
mouth) on textured background noise. Geometry is drawn from an
identity seed, so two glyphs with the same identity but different
jitter seeds depict "the same person" under pose/scale/illumination
variation, and the generator emits the exact ground-truth face box.
Everything is SplitMix64-driven: identical params give identical
pixels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams
from .geometry import BoundingBox
from .imaging import Image, bilinear_resize, image_from_array
from .recognition import DetectorConfig, DetectorModel, fit_detector
from .rng import SplitMix64, uniform_array

MIN_CANVAS = 96

# head width / height, shared by all identities; identity lives in the
# internal feature geometry so crops normalise cleanly
HEAD_ASPECT = 0.82


@dataclass(frozen=True)
class GlyphParams:
    seed: int
    identity_seed: int
    canvas: int = 160
    scale_range: tuple = (0.45, 0.62)   # face height / canvas
    offset_range: tuple = (-0.05, 0.05)  # center offset / canvas, per axis
    gain_range: tuple = (0.85, 1.15)
    bias_range: tuple = (-12.0, 12.0)
    margin: float = 0.05                 # box padding around the head


def _texture_plane(seed, height, width):
    """Smooth value noise plus fine grain, float64 in roughly [40, 160]."""
    coarse_h, coarse_w = height // 16 + 2, width // 16 + 2
    grid = uniform_array(seed, coarse_h * coarse_w, 60.0, 140.0).reshape(coarse_h, coarse_w)
    plane = bilinear_resize(grid, height, width)
    plane += uniform_array(seed ^ 0x5DEECE66D, height * width, -12.0, 12.0).reshape(height, width)
    return plane


def generate_texture(seed, width, height) -> Image:
    """Face-free textured noise image (detector negative material)."""
    plane = np.clip(_texture_plane(seed, height, width), 0.0, 255.0)
    return image_from_array(np.floor(plane + 0.5).astype(np.uint8))


def _ellipse_mask(yy, xx, cy, cx, ry, rx):
    return ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0


def _soften(plane):
    # separable 1-2-1 kernel: enough to tame rasterisation aliasing
    # without pulling the Laplacian sharpness near the framing threshold
    padded = np.pad(plane, 1, mode="edge")
    h = padded[:, :-2] + padded[:, 1:-1] * 2.0 + padded[:, 2:]
    v = h[:-2, :] + h[1:-1, :] * 2.0 + h[2:, :]
    return v / 16.0


def generate_face_glyph(params: GlyphParams):
    """Render one glyph; returns (Image, ground-truth BoundingBox)."""
    c = params.canvas
    if c < MIN_CANVAS:
        raise InvalidParams(f"canvas {c} below minimum {MIN_CANVAS}")

    ident = SplitMix64(params.identity_seed)
    aspect = HEAD_ASPECT
    eye_y = ident.uniform(0.30, 0.44)       # from head top, fraction of height
    eye_dx = ident.uniform(0.28, 0.55)      # fraction of half-width
    eye_r = ident.uniform(0.09, 0.17)       # fraction of half-height
    brow_dy = ident.uniform(0.09, 0.21)
    brow_w = ident.uniform(0.8, 1.7)        # multiples of eye radius
    nose_len = ident.uniform(0.16, 0.36)
    nose_w = ident.uniform(0.04, 0.11)
    mouth_y = ident.uniform(0.60, 0.82)
    mouth_w = ident.uniform(0.40, 0.78)     # fraction of half-width
    mouth_curve = ident.uniform(-0.08, 0.12)
    mouth_th = ident.uniform(0.04, 0.10)
    face_gray = ident.uniform(165.0, 230.0)
    feature_gray = ident.uniform(5.0, 45.0)

    jit = SplitMix64(params.seed)
    scale = jit.uniform(*params.scale_range)
    ox = jit.uniform(*params.offset_range) * c
    oy = jit.uniform(*params.offset_range) * c
    gain = jit.uniform(*params.gain_range)
    bias = jit.uniform(*params.bias_range)
    bg_seed = jit.next_u64()

    face_h = scale * c
    b = face_h / 2.0
    a = aspect * b
    cx = c / 2.0 + ox
    cy = c / 2.0 + oy

    plane = _texture_plane(bg_seed, c, c)
    yy, xx = np.mgrid[0:c, 0:c].astype(np.float64)

    head = _ellipse_mask(yy, xx, cy, cx, b, a)
    plane[head] = face_gray

    head_top = cy - b
    ey = head_top + eye_y * face_h
    er = eye_r * b
    for sign in (-1.0, 1.0):
        ex = cx + sign * eye_dx * a
        plane[_ellipse_mask(yy, xx, ey, ex, er, er)] = feature_gray
        brow = (
            (np.abs(yy - (ey - brow_dy * face_h)) <= er * 0.45)
            & (np.abs(xx - ex) <= er * brow_w)
        )
        plane[brow & head] = feature_gray

    nose = (
        (yy >= ey + er)
        & (yy <= ey + er + nose_len * face_h)
        & (np.abs(xx - cx) <= nose_w * a)
    )
    plane[nose & head] = feature_gray

    my = head_top + mouth_y * face_h
    half_mouth = mouth_w * a
    rel = np.where(half_mouth > 0, (xx - cx) / half_mouth, 0.0)
    curve_y = my + mouth_curve * face_h * (1.0 - rel * rel)
    mouth = (np.abs(yy - curve_y) <= mouth_th * face_h) & (np.abs(xx - cx) <= half_mouth)
    plane[mouth & head] = feature_gray

    plane = _soften(plane)
    plane = np.clip(plane * gain + bias, 0.0, 255.0)
    pixels = np.floor(plane + 0.5).astype(np.uint8)

    half = int(b * (1.0 + params.margin) + 0.5)
    row, col = int(cy + 0.5), int(cx + 0.5)
    box = BoundingBox(
        top=max(row - half, 0),
        right=min(col + half, c),
        bottom=min(row + half, c),
        left=max(col - half, 0),
    )
    return image_from_array(pixels), box


def crop_to_image(image: Image, box: BoundingBox) -> Image:
    arr = image.to_array()
    return image_from_array(arr[box.top : box.bottom, box.left : box.right])


# identity/jitter seed bases for the built-in training corpus
_POS_IDENTITY_BASE = 0x10_000
_POS_JITTER_BASE = 0x20_000
_NEG_SEED_BASE = 0x30_000


def training_windows(config: DetectorConfig, n_pos=120, n_neg=240):
    """Window images for the default detector: glyph face crops vs
    textured noise. Deterministic fixed corpus."""
    positives = []
    per_identity = 3
    for i in range(n_pos):
        params = GlyphParams(
            seed=_POS_JITTER_BASE + i,
            identity_seed=_POS_IDENTITY_BASE + i // per_identity,
            canvas=160,
        )
        image, box = generate_face_glyph(params)
        positives.append(crop_to_image(image, box))
    negatives = [
        generate_texture(_NEG_SEED_BASE + i, config.window, config.window)
        for i in range(n_neg)
    ]
    return positives, negatives


_default_models: dict = {}


def default_detector_model(config: DetectorConfig = DetectorConfig()) -> DetectorModel:
    """Detector fitted on the built-in corpus, cached per config."""
    model = _default_models.get(config)
    if model is None:
        positives, negatives = training_windows(config)
        model = fit_detector(positives, negatives, config)
        _default_models[config] = model
    return model


MODEL_FILE = "detector.bin"


def load_or_fit_model(data_dir, config: DetectorConfig = DetectorConfig()) -> DetectorModel:
    """Detector model for a data directory: loaded when present,
    otherwise fitted on the built-in corpus and persisted, so every
    process working that directory scores identically."""
    from pathlib import Path

    from .recognition import deserialize_model, serialize_model

    path = Path(data_dir) / MODEL_FILE
    if path.exists():
        return deserialize_model(path.read_bytes())
    model = default_detector_model(config)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(serialize_model(model))
    return model
