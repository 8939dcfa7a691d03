"""numpy kernel lane.

Descriptor layout (shared with the Cython lane): for a size x size
window with c = size/cell cells per side and b block cells, the
descriptor concatenates the (c-b+1)^2 blocks row-major, each block its
b*b cells row-major, bins innermost. Orientation is unsigned (0-180
degrees), bin k centered at k * 180/bins, votes split linearly between
the two nearest centers with wraparound. Blocks are L2-Hys normalised:
L2, clip at 0.2, L2 again.

The first L2 norm is regularised: n = sqrt(sum v^2 + eps^2). A positive
eps damps blocks whose gradient energy sits at the noise floor instead
of inflating them to unit weight, which is what makes encodings of
textured backgrounds stable. eps = 0 recovers the strict norm.

Reductions stick to bincount and contiguous-axis sums so every run of
the same input gives bit-identical output; BLAS is deliberately not
used.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

# windows per gradient batch in scan_level, bounds peak memory
_CHUNK = 256


def _gradients(wins):
    """Centered differences with edge replication, per window."""
    n, h, w = wins.shape
    dx = np.empty((n, h, w), dtype=np.float64)
    dy = np.empty((n, h, w), dtype=np.float64)
    if w >= 2:
        dx[:, :, 1:-1] = wins[:, :, 2:] - wins[:, :, :-2]
        dx[:, :, 0] = wins[:, :, 1] - wins[:, :, 0]
        dx[:, :, -1] = wins[:, :, -1] - wins[:, :, -2]
    else:
        dx[:] = 0.0
    if h >= 2:
        dy[:, 1:-1, :] = wins[:, 2:, :] - wins[:, :-2, :]
        dy[:, 0, :] = wins[:, 1, :] - wins[:, 0, :]
        dy[:, -1, :] = wins[:, -1, :] - wins[:, -2, :]
    else:
        dy[:] = 0.0
    return dx, dy


def _cell_histograms(wins, cell, bins):
    n, h, w = wins.shape
    cy, cx = h // cell, w // cell
    dx, dy = _gradients(wins)
    mag = np.sqrt(dx * dx + dy * dy)
    ang = np.arctan2(dy, dx) * (180.0 / np.pi)
    ang = np.mod(ang, 180.0)
    binw = 180.0 / bins
    t = ang / binw
    k0 = np.floor(t).astype(np.int64)
    frac = t - k0
    k0 = np.mod(k0, bins)
    k1 = (k0 + 1) % bins
    rows = np.arange(h, dtype=np.int64) // cell
    cols = np.arange(w, dtype=np.int64) // cell
    base = (
        np.arange(n, dtype=np.int64)[:, None, None] * (cy * cx)
        + rows[None, :, None] * cx
        + cols[None, None, :]
    ) * bins
    size = n * cy * cx * bins
    hist = np.bincount((base + k0).ravel(), weights=(mag * (1.0 - frac)).ravel(), minlength=size)
    hist += np.bincount((base + k1).ravel(), weights=(mag * frac).ravel(), minlength=size)
    return hist.reshape(n, cy, cx, bins)


def _block_descriptors(hist, block, norm_eps):
    n, cy, cx, bins = hist.shape
    by, bx = cy - block + 1, cx - block + 1
    v = sliding_window_view(hist, (block, block), axis=(1, 2))  # (n, by, bx, bins, block, block)
    v = np.moveaxis(v, 3, 5).reshape(n, by, bx, block * block * bins).copy()
    n1 = np.sqrt((v * v).sum(axis=-1, keepdims=True) + norm_eps * norm_eps)
    np.divide(v, n1, out=v, where=n1 > 0.0)
    np.minimum(v, 0.2, out=v)
    n2 = np.sqrt((v * v).sum(axis=-1, keepdims=True))
    np.divide(v, n2, out=v, where=n2 > 0.0)
    return v.reshape(n, by * bx * block * block * bins)


def hog_batch(wins, cell, block, bins, norm_eps=0.0):
    """Descriptors for a (N, H, W) stack of grayscale windows."""
    wins = np.ascontiguousarray(wins, dtype=np.float64)
    return _block_descriptors(_cell_histograms(wins, cell, bins), block, norm_eps)


def hog_descriptor(gray, cell, block, bins, norm_eps=0.0):
    """Descriptor of one grayscale window."""
    gray = np.asarray(gray, dtype=np.float64)
    return hog_batch(gray[None, :, :], cell, block, bins, norm_eps)[0]


def scan_level(gray, weights, bias, window, stride, cell, block, bins, threshold, norm_eps=0.0):
    """Slide a window over one pyramid level and score every position.

    Each window is scored exactly as if cropped and fed through
    hog_descriptor (gradients replicate at window borders). Returns
    (xs, ys, scores) for positions with score > threshold, row-major
    scan order.
    """
    gray = np.ascontiguousarray(gray, dtype=np.float64)
    h, w = gray.shape
    if h < window or w < window:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, np.empty(0, dtype=np.float64)
    ys = np.arange(0, h - window + 1, stride, dtype=np.int64)
    xs = np.arange(0, w - window + 1, stride, dtype=np.int64)
    wins = sliding_window_view(gray, (window, window))[::stride, ::stride]
    ny, nx = wins.shape[:2]
    wins = wins.reshape(ny * nx, window, window)
    scores = np.empty(ny * nx, dtype=np.float64)
    live = np.empty(ny * nx, dtype=bool)
    for start in range(0, ny * nx, _CHUNK):
        chunk = np.ascontiguousarray(wins[start : start + _CHUNK])
        desc = hog_batch(chunk, cell, block, bins, norm_eps)
        scores[start : start + len(chunk)] = (desc * weights).sum(axis=1) + bias
        # a window with no gradient energy cannot be a face; score it out
        live[start : start + len(chunk)] = desc.any(axis=1)
    keep = live & (scores > threshold)
    grid_x = np.tile(xs, ny)
    grid_y = np.repeat(ys, nx)
    return grid_x[keep], grid_y[keep], scores[keep]


def project(mat, vec):
    """mat @ vec without BLAS (elementwise multiply + pairwise sum)."""
    return (mat * vec).sum(axis=1)
