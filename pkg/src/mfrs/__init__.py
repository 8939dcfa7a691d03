"""mfrs: face enrollment and recognition engine with voice memos.

Subsystems: recognition (detection, encodings, matching), ingestion
(image sources, framing feedback), memo (audio capture and WAV),
store (transactional persistence), retrieval (profile assembly),
evalharness (verification benchmarks), service (HTTP API) and cli.
"""

__version__ = "0.1.0"
