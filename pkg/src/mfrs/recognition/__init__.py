"""Face mathematics: HOG descriptors, detection, encoding, matching.

Every operation here is a pure function of its arguments; configs and
models are frozen dataclasses, safe to share across threads.
"""

from .backend import backend_name, native_kernels, python_kernels
from .detector import (
    DetectorModel,
    deserialize_model,
    detect_faces,
    fit_detector,
    score_window,
    serialize_model,
)
from .encoder import (
    CANONICAL_SIZE,
    ENCODING_DIM,
    PROJECTION_SEED,
    encode_face,
    projection_matrix,
    require_encoding,
)
from .hog import DetectorConfig, HogDescriptor, compute_hog
from .matching import MatchConfig, MatchResult, best_match, compare_faces, face_distance

__all__ = [
    "backend_name",
    "native_kernels",
    "python_kernels",
    "DetectorModel",
    "deserialize_model",
    "detect_faces",
    "fit_detector",
    "score_window",
    "serialize_model",
    "CANONICAL_SIZE",
    "ENCODING_DIM",
    "PROJECTION_SEED",
    "encode_face",
    "projection_matrix",
    "require_encoding",
    "DetectorConfig",
    "HogDescriptor",
    "compute_hog",
    "MatchConfig",
    "MatchResult",
    "best_match",
    "compare_faces",
    "face_distance",
]
