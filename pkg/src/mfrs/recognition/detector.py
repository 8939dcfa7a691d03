"""Linear face detector: training, pyramid scan, model serialization."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..errors import DecodeError, DegenerateModel, EmptyTrainingSet
from ..geometry import BoundingBox, nms
from ..imaging import Image, bilinear_resize, to_gray_f64
from .backend import kernels
from .hog import DetectorConfig

MODEL_MAGIC = b"MFRSDET1"


@dataclass(frozen=True)
class DetectorModel:
    """Linear scorer over window descriptors: score = weights . hog + bias."""

    weights: np.ndarray
    bias: float


def _window_plane(image: Image, config: DetectorConfig):
    gray = to_gray_f64(image)
    return bilinear_resize(gray, config.window, config.window)


def _window_descriptor(image: Image, config: DetectorConfig):
    return kernels.hog_descriptor(
        _window_plane(image, config), config.cell_size, config.block_cells,
        config.bins, config.norm_eps,
    )


def fit_detector(positives, negatives, config: DetectorConfig) -> DetectorModel:
    """Mean-difference training.

    weights = mean(HOG of positives) - mean(HOG of negatives); the bias
    centers the two class means symmetrically around score 0. Windows
    not at the canonical size are resized first.
    """
    if not positives or not negatives:
        raise EmptyTrainingSet("need at least one window per class")
    pos = np.stack([_window_descriptor(w, config) for w in positives])
    neg = np.stack([_window_descriptor(w, config) for w in negatives])
    mu_pos = pos.mean(axis=0)
    mu_neg = neg.mean(axis=0)
    weights = mu_pos - mu_neg
    if not np.any(weights):
        raise DegenerateModel("class means coincide")
    bias = -float(weights @ mu_pos + weights @ mu_neg) / 2.0
    return DetectorModel(weights=weights, bias=bias)


def score_window(model: DetectorModel, image: Image, config: DetectorConfig) -> float:
    """Detector score of a single window image."""
    return float(model.weights @ _window_descriptor(image, config) + model.bias)


def _crop_score(gray, model, config, top, left, side):
    """Score of the square crop at (top, left), or None when the crop
    leaves the image or is too small to resample meaningfully."""
    h, w = gray.shape
    if top < 0 or left < 0 or top + side > h or left + side > w or side < 16:
        return None
    plane = bilinear_resize(gray[top : top + side, left : left + side], config.window, config.window)
    d = kernels.hog_descriptor(plane, config.cell_size, config.block_cells,
                               config.bins, config.norm_eps)
    if not np.any(d):
        return None
    return float(model.weights @ d + model.bias)


_REFINE_SCALES = (0.85, 0.9, 0.95, 1.0, 1.05, 1.1, 1.15)


def _refine_box(gray, box: BoundingBox, score, model, config):
    """Local search around a detection, maximising the detector score.

    The pyramid quantises position to the stride and size to the scale
    steps; nudging the square crop to the score peak recovers most of
    that error, which downstream encoding is sensitive to.
    """
    side = max(box.height, box.width)
    top = (box.top + box.bottom) // 2 - side // 2
    left = (box.left + box.right) // 2 - side // 2
    best = (score, top, left, side)
    step = max(1, side // 16)
    for _ in range(2):
        moved = True
        while moved:
            moved = False
            for dt, dl in ((step, 0), (-step, 0), (0, step), (0, -step)):
                s = _crop_score(gray, model, config, best[1] + dt, best[2] + dl, best[3])
                if s is not None and s > best[0]:
                    best = (s, best[1] + dt, best[2] + dl, best[3])
                    moved = True
        for factor in _REFINE_SCALES:
            ns = int(best[3] * factor + 0.5)
            nt = best[1] + (best[3] - ns) // 2
            nl = best[2] + (best[3] - ns) // 2
            s = _crop_score(gray, model, config, nt, nl, ns)
            if s is not None and s > best[0]:
                best = (s, nt, nl, ns)
        step = max(1, step // 2)
    s, top, left, side = best
    return BoundingBox(top=top, right=left + side, bottom=top + side, left=left), s


def detect_faces(image: Image, model: DetectorModel, config: DetectorConfig):
    """Pyramid sliding-window detection.

    Downscales by pyramid_scale until the window no longer fits, scores
    every stride-aligned window, keeps scores above the threshold, maps
    hits back to original coordinates, applies NMS, then refines each
    survivor to its local score peak (deduplicating again afterwards).
    Result is sorted by descending score. Images smaller than the
    window yield [].
    """
    gray = to_gray_f64(image)
    h, w = gray.shape
    boxes, scores = [], []
    level = 0
    while True:
        factor = config.pyramid_scale ** level
        lh, lw = int(h / factor), int(w / factor)
        if lh < config.window or lw < config.window:
            break
        fy, fx = h / lh, w / lw
        level += 1
        if config.min_face and config.window * min(fx, fy) < config.min_face:
            continue
        plane = gray if (lh, lw) == (h, w) else bilinear_resize(gray, lh, lw)
        xs, ys, sc = kernels.scan_level(
            plane, model.weights, model.bias, config.window, config.stride,
            config.cell_size, config.block_cells, config.bins, config.score_threshold,
            config.norm_eps,
        )
        for x, y, s in zip(xs, ys, sc):
            top = min(int(y * fy + 0.5), h - 1)
            left = min(int(x * fx + 0.5), w - 1)
            bottom = min(int((y + config.window) * fy + 0.5), h)
            right = min(int((x + config.window) * fx + 0.5), w)
            if bottom > top and right > left:
                boxes.append(BoundingBox(top=top, right=right, bottom=bottom, left=left))
                scores.append(float(s))
    survivors = nms(boxes, scores, config.nms_iou)
    if not survivors:
        return []
    score_of = {b: s for b, s in zip(boxes, scores)}
    refined, rescored = [], []
    for b in survivors:
        rb, rs = _refine_box(gray, b, score_of[b], model, config)
        refined.append(rb)
        rescored.append(rs)
    return nms(refined, rescored, config.nms_iou)


def serialize_model(model: DetectorModel) -> bytes:
    """Flat binary: magic, u32 LE descriptor length, f64 LE weights, f64 LE bias."""
    payload = np.ascontiguousarray(model.weights, dtype="<f8").tobytes()
    return MODEL_MAGIC + struct.pack("<I", len(model.weights)) + payload + struct.pack("<d", model.bias)


def deserialize_model(data: bytes) -> DetectorModel:
    if data[:8] != MODEL_MAGIC:
        raise DecodeError(f"bad detector model magic {data[:8]!r}")
    (n,) = struct.unpack_from("<I", data, 8)
    expected = 8 + 4 + 8 * n + 8
    if len(data) != expected:
        raise DecodeError(f"detector model has {len(data)} bytes, expected {expected}")
    weights = np.frombuffer(data, dtype="<f8", count=n, offset=12).astype(np.float64)
    (bias,) = struct.unpack_from("<d", data, 12 + 8 * n)
    return DetectorModel(weights=weights, bias=bias)
