#!/usr/bin/env python3
"""Benchmark the native (Cython) kernels against the numpy fallback.

Run:  python3 benchmarks/compare_backends.py [--repeats N]

Covers the three kernel entry points plus the end-to-end detector,
and checks that the lanes agree numerically while timing them.
"""

import argparse
import time

import numpy as np

from mfrs.glyphs import GlyphParams, default_detector_model, generate_face_glyph
from mfrs.imaging import to_gray_f64
from mfrs.recognition import DetectorConfig, detect_faces, native_kernels, python_kernels
from mfrs.rng import uniform_array


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    native = native_kernels()
    python = python_kernels()
    if native is None:
        print("native kernels not built; nothing to compare")
        return

    cfg = DetectorConfig()
    model = default_detector_model(cfg)
    gray64 = uniform_array(1, 64 * 64, 0, 256).reshape(64, 64)
    gray128 = uniform_array(2, 128 * 128, 0, 256).reshape(128, 128)
    level = uniform_array(3, 256 * 256, 0, 256).reshape(256, 256)
    proj = uniform_array(4, 128 * 8100, -1, 1).reshape(128, 8100)
    vec = uniform_array(5, 8100, 0, 1)
    image, _ = generate_face_glyph(GlyphParams(seed=11, identity_seed=22, canvas=256))

    rows = []

    def bench(name, nat_fn, py_fn, close=None):
        a, b = nat_fn(), py_fn()
        if close is not None:
            close(a, b)
        t_nat = timeit(nat_fn, args.repeats)
        t_py = timeit(py_fn, args.repeats)
        rows.append((name, t_nat, t_py))

    bench(
        "hog 64x64",
        lambda: native.hog_descriptor(gray64, 8, 2, 9, cfg.norm_eps),
        lambda: python.hog_descriptor(gray64, 8, 2, 9, cfg.norm_eps),
        lambda a, b: np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-12),
    )
    bench(
        "hog 128x128",
        lambda: native.hog_descriptor(gray128, 8, 2, 9, cfg.norm_eps),
        lambda: python.hog_descriptor(gray128, 8, 2, 9, cfg.norm_eps),
    )
    bench(
        "scan 256x256 level",
        lambda: native.scan_level(level, model.weights, model.bias, 64, 8, 8, 2, 9,
                                  -1e9, cfg.norm_eps),
        lambda: python.scan_level(level, model.weights, model.bias, 64, 8, 8, 2, 9,
                                  -1e9, cfg.norm_eps),
    )
    bench(
        "project 128x8100",
        lambda: native.project(proj, vec),
        lambda: python.project(proj, vec),
        lambda a, b: np.testing.assert_allclose(a, b, rtol=1e-10),
    )

    # monkey-swapping the lane is benchmark-only plumbing
    import mfrs.recognition.detector as det

    def detect_lane(kernels):
        saved = det.kernels
        det.kernels = kernels
        try:
            return detect_faces(image, model, cfg)
        finally:
            det.kernels = saved

    bench("detect_faces 256x256",
          lambda: detect_lane(native), lambda: detect_lane(python))

    print(f"{'kernel':24s} {'native':>10s} {'python':>10s} {'speedup':>8s}")
    for name, t_nat, t_py in rows:
        print(f"{name:24s} {t_nat * 1e3:8.2f}ms {t_py * 1e3:8.2f}ms {t_py / t_nat:7.1f}x")


if __name__ == "__main__":
    main()
