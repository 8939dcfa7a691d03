"""Image type, codecs and pixel-level helpers.

PGM (P5) and PPM (P6) are the canonical formats: parsed and emitted
here byte-for-byte so golden fixtures stay exact. PNG and JPEG decode
through Pillow as a convenience. Only 8-bit samples are accepted.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DecodeError, InvalidRegion

GRAYSCALE = 1
RGB = 3


@dataclass(frozen=True)
class Image:
    """8-bit raster, row-major samples, 1 (gray) or 3 (RGB) channels."""

    width: int
    height: int
    channels: int
    pixels: bytes

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be >= 1")
        if self.channels not in (GRAYSCALE, RGB):
            raise ValueError("channels must be 1 or 3")
        if len(self.pixels) != self.width * self.height * self.channels:
            raise ValueError(
                f"pixel buffer has {len(self.pixels)} bytes, expected "
                f"{self.width * self.height * self.channels}"
            )

    def to_array(self):
        """uint8 array, (H, W) for grayscale or (H, W, 3) for RGB."""
        arr = np.frombuffer(self.pixels, dtype=np.uint8)
        if self.channels == GRAYSCALE:
            return arr.reshape(self.height, self.width)
        return arr.reshape(self.height, self.width, 3)


def image_from_array(arr) -> Image:
    arr = np.asarray(arr)
    if arr.dtype != np.uint8:
        raise ValueError("expected uint8 samples")
    if arr.ndim == 2:
        h, w = arr.shape
        return Image(w, h, GRAYSCALE, arr.tobytes())
    if arr.ndim == 3 and arr.shape[2] == 3:
        h, w, _ = arr.shape
        return Image(w, h, RGB, arr.tobytes())
    raise ValueError("expected (H, W) or (H, W, 3) array")


def to_gray_f64(image: Image):
    """float64 (H, W) luma plane.

    RGB collapses with luma = round(0.299 R + 0.587 G + 0.114 B),
    ties rounding up, so RGB fixtures stay bit-exact.
    """
    arr = image.to_array()
    if image.channels == GRAYSCALE:
        return arr.astype(np.float64)
    rgb = arr.astype(np.float64)
    luma = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    return np.floor(luma + 0.5)


# --- PNM codec ---

_WS = b" \t\n\r\v\f"


def _pnm_tokens(data, count):
    """First ``count`` header tokens after the magic, then the offset of
    the raster (one whitespace byte past the last token). '#' comments
    run to end of line."""
    tokens = []
    i = 2  # past magic
    while len(tokens) < count:
        while i < len(data) and data[i : i + 1] in _WS:
            i += 1
        if i < len(data) and data[i : i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        start = i
        while i < len(data) and data[i : i + 1] not in _WS:
            i += 1
        if start == i:
            raise DecodeError("PNM header truncated")
        tokens.append(data[start:i])
    if i >= len(data) or data[i : i + 1] not in _WS:
        raise DecodeError("PNM header not followed by whitespace")
    return tokens, i + 1


def decode_pnm(data) -> Image:
    magic = data[:2]
    channels = GRAYSCALE if magic == b"P5" else RGB
    try:
        tokens, offset = _pnm_tokens(data, 3)
        width, height, maxval = (int(t) for t in tokens)
    except (ValueError, DecodeError) as exc:
        raise DecodeError(f"bad PNM header: {exc}") from exc
    if width < 1 or height < 1:
        raise DecodeError("PNM dimensions must be positive")
    if maxval != 255:
        raise DecodeError(f"unsupported PNM maxval {maxval}, only 8-bit (255) accepted")
    need = width * height * channels
    raster = data[offset : offset + need]
    if len(raster) != need:
        raise DecodeError(f"PNM raster truncated: {len(raster)} of {need} bytes")
    return Image(width, height, channels, bytes(raster))


def encode_pnm(image: Image) -> bytes:
    magic = b"P5" if image.channels == GRAYSCALE else b"P6"
    header = b"%s\n%d %d\n255\n" % (magic, image.width, image.height)
    return header + image.pixels


def _decode_pillow(data) -> Image:
    try:
        from PIL import Image as PilImage
    except ImportError as exc:
        raise DecodeError(f"PNG/JPEG support unavailable: {exc}") from exc
    try:
        pil = PilImage.open(io.BytesIO(data))
        pil.load()
    except Exception as exc:
        raise DecodeError(f"undecodable image payload: {exc}") from exc
    if pil.mode in ("I", "I;16", "I;16B", "I;16L", "F"):
        raise DecodeError(f"16-bit/float images rejected (mode {pil.mode})")
    if pil.mode == "L":
        return image_from_array(np.asarray(pil, dtype=np.uint8))
    pil = pil.convert("RGB")
    return image_from_array(np.asarray(pil, dtype=np.uint8))


def load_image(source) -> Image:
    """Decode a path or a bytes payload, sniffing the format."""
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = bytes(source)
    if len(data) == 0:
        raise DecodeError("empty payload")
    if data[:2] in (b"P5", b"P6"):
        return decode_pnm(data)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return _decode_pillow(data)
    if data[:2] == b"\xff\xd8":
        return _decode_pillow(data)
    if data[:2] in (b"P1", b"P2", b"P3", b"P4"):
        raise DecodeError(f"PNM variant {data[:2]!r} unsupported, use binary P5/P6")
    raise DecodeError(f"unrecognized image format (magic {data[:4]!r})")


# --- pixel helpers ---

def bilinear_resize(gray, out_h, out_w):
    """Bilinear resample of a float64 plane.

    Sample centers map via src = (dst + 0.5) * scale - 0.5 (the usual
    half-pixel convention), so equal sizes reproduce the input exactly.
    """
    gray = np.asarray(gray, dtype=np.float64)
    in_h, in_w = gray.shape
    if (out_h, out_w) == (in_h, in_w):
        return gray.copy()
    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * (in_h / out_h) - 0.5
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * (in_w / out_w) - 0.5
    ys = np.clip(ys, 0.0, in_h - 1.0)
    xs = np.clip(xs, 0.0, in_w - 1.0)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    top = gray[y0][:, x0] * (1.0 - fx) + gray[y0][:, x1] * fx
    bot = gray[y1][:, x0] * (1.0 - fx) + gray[y1][:, x1] * fx
    return top * (1.0 - fy) + bot * fy


def crop_gray(gray, box):
    """Crop a (top, right, bottom, left) box out of a float64 plane."""
    h, w = gray.shape
    if not (0 <= box.top < box.bottom <= h and 0 <= box.left < box.right <= w):
        raise InvalidRegion(f"box {box} outside {w}x{h} image")
    return gray[box.top : box.bottom, box.left : box.right]


def laplacian_variance(gray):
    """Variance of the 4-neighbour Laplacian over interior pixels.

    The standard sharpness score: uniform regions give 0, crisp edges
    give large values. Images thinner than 3 px score 0.
    """
    gray = np.asarray(gray, dtype=np.float64)
    if gray.shape[0] < 3 or gray.shape[1] < 3:
        return 0.0
    core = gray[1:-1, 1:-1]
    lap = (
        gray[:-2, 1:-1] + gray[2:, 1:-1] + gray[1:-1, :-2] + gray[1:-1, 2:]
        - 4.0 * core
    )
    return float(np.var(lap))
