"""Deterministic random numbers for fixtures and the encoder projection.

Everything here is SplitMix64-based. SplitMix64 is counter-based
(output i depends only on seed + i * GAMMA), so the scalar generator and
the vectorised array generator produce bit-identical streams. That is
what makes encodings and glyph fixtures reproducible across runs.
"""

import math

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# 2**-53, scales a 53-bit integer into [0, 1)
_TO_UNIT = 1.0 / (1 << 53)


def _mix(z):
    z = (z ^ (z >> 30)) * _M1 & _MASK
    z = (z ^ (z >> 27)) * _M2 & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Scalar SplitMix64 stream."""

    def __init__(self, seed):
        self._state = seed & _MASK
        self._index = 0

    def next_u64(self):
        self._index += 1
        return _mix((self._state + self._index * _GAMMA) & _MASK)

    def next_float(self):
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * _TO_UNIT

    def uniform(self, lo, hi):
        return lo + (hi - lo) * self.next_float()

    def randint(self, lo, hi):
        """Integer in [lo, hi] inclusive."""
        span = hi - lo + 1
        return lo + self.next_u64() % span


def splitmix_u64_array(seed, n, offset=0):
    """First ``n`` outputs of SplitMix64(seed) starting at ``offset``.

    Matches SplitMix64.next_u64() call-for-call; vectorised with numpy
    uint64 arithmetic (wrapping multiply/xor are exact).
    """
    idx = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + idx * np.uint64(_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        z = z ^ (z >> np.uint64(31))
    return z


def uniform_array(seed, n, lo=0.0, hi=1.0, offset=0):
    """``n`` uniforms in [lo, hi) from the SplitMix64(seed) stream."""
    u = (splitmix_u64_array(seed, n, offset) >> np.uint64(11)).astype(np.float64)
    return lo + (hi - lo) * (u * _TO_UNIT)


def gaussian_matrix(rows, cols, seed):
    """Standard-normal matrix filled row-major from a seeded stream.

    Doubles are drawn as Box-Muller pairs: u64 outputs 2j and 2j+1 give
    u1 in (0, 1] and u2 in [0, 1); z0 = sqrt(-2 ln u1) cos(2 pi u2) and
    z1 = the sine partner land at flat positions 2j and 2j+1. A trailing
    odd element drops its sine partner.
    """
    n = rows * cols
    pairs = (n + 1) // 2
    raw = splitmix_u64_array(seed, 2 * pairs)
    u1 = ((raw[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _TO_UNIT
    u2 = (raw[1::2] >> np.uint64(11)).astype(np.float64) * _TO_UNIT
    r = np.sqrt(-2.0 * np.log(u1))
    theta = (2.0 * math.pi) * u2
    flat = np.empty(2 * pairs, dtype=np.float64)
    flat[0::2] = r * np.cos(theta)
    flat[1::2] = r * np.sin(theta)
    return flat[:n].reshape(rows, cols)
