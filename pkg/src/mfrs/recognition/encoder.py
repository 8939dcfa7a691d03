"""Deterministic 128-dimensional face encodings.

The reference encoder is crop -> 128x128 grayscale -> central face
mask -> HOG -> fixed seeded Gaussian projection -> unit norm. It is a
stand-in with the same interface a learned embedder would have (see
FaceEncoder below), chosen so encodings are reproducible bit-for-bit
without model files.

The mask fades pixel contrast to the crop mean outside a fixed
elliptical inner-face region. Detector boxes frame the whole head, so
the crop corners and the head outline are background-dominated and
carry no identity; without the fade their texture noise drowns the
feature geometry the encoding is supposed to capture.
"""

from __future__ import annotations

from typing import Protocol

import numpy as np

from ..errors import DegenerateFace, InvalidEncoding, InvalidRegion
from ..imaging import Image, bilinear_resize, crop_gray, to_gray_f64
from ..rng import gaussian_matrix
from .backend import kernels
from .hog import DetectorConfig, as_box

ENCODING_DIM = 128
CANONICAL_SIZE = 128
PROJECTION_SEED = 0x4D465253

# inner-face ellipse, fractions of the crop half-size: full weight
# inside (rx0, ry0), fading smoothly to zero outside (rx1, ry1)
_MASK_FULL = (0.70, 0.80)
_MASK_ZERO = (0.82, 0.95)

_projections: dict[int, np.ndarray] = {}
_masks: dict[int, np.ndarray] = {}


class FaceEncoder(Protocol):
    """Anything that turns a face crop into a 128-d unit vector."""

    def __call__(self, image: Image, box, config: DetectorConfig) -> np.ndarray: ...


def projection_matrix(dim_in: int) -> np.ndarray:
    """Cached (128, dim_in) Gaussian projection for the fixed seed."""
    mat = _projections.get(dim_in)
    if mat is None:
        mat = gaussian_matrix(ENCODING_DIM, dim_in, PROJECTION_SEED)
        mat.setflags(write=False)
        _projections[dim_in] = mat
    return mat


def face_mask(size: int) -> np.ndarray:
    """Cached raised-cosine fade over the inner-face ellipse."""
    mask = _masks.get(size)
    if mask is None:
        c = (size - 1) / 2.0
        half = size / 2.0
        yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
        ry, rx = np.abs(yy - c) / half, np.abs(xx - c) / half
        r_full = np.sqrt((rx / _MASK_FULL[0]) ** 2 + (ry / _MASK_FULL[1]) ** 2)
        r_zero = np.sqrt((rx / _MASK_ZERO[0]) ** 2 + (ry / _MASK_ZERO[1]) ** 2)
        frac = np.clip((1.0 - r_zero) / np.maximum(r_full - r_zero, 1e-12), 0.0, 1.0)
        w = np.where(r_full <= 1.0, 1.0, np.where(r_zero >= 1.0, 0.0, frac))
        mask = 0.5 - 0.5 * np.cos(np.pi * w)
        mask.setflags(write=False)
        _masks[size] = mask
    return mask


def encode_face(image: Image, box, config: DetectorConfig = DetectorConfig()) -> np.ndarray:
    """Encode the face inside ``box`` as a unit-norm 128-vector.

    Deterministic: the same pixels and box give the same bits on every
    run. A constant crop has a zero descriptor, which cannot be
    normalised, so it raises DegenerateFace.
    """
    box = as_box(box)
    if not box.fits(image.width, image.height):
        raise InvalidRegion(f"box {box.as_tuple()} outside {image.width}x{image.height}")
    crop = crop_gray(to_gray_f64(image), box)
    plane = bilinear_resize(crop, CANONICAL_SIZE, CANONICAL_SIZE)
    mean = plane.mean()
    plane = mean + (plane - mean) * face_mask(CANONICAL_SIZE)
    desc = kernels.hog_descriptor(
        plane, config.cell_size, config.block_cells, config.bins, config.norm_eps
    )
    if not np.any(desc):
        raise DegenerateFace("constant crop has no gradient structure")
    enc = kernels.project(projection_matrix(len(desc)), desc)
    norm = float(np.sqrt((enc * enc).sum()))
    if norm == 0.0:
        raise DegenerateFace("descriptor projects to the zero vector")
    return enc / norm


def require_encoding(values) -> np.ndarray:
    """Validate and canonicalise an encoding to float64 shape (128,)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (ENCODING_DIM,):
        raise InvalidEncoding(f"expected {ENCODING_DIM} values, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidEncoding("encoding contains non-finite values")
    return arr
