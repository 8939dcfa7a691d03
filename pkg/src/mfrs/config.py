"""Service configuration: defaults, YAML file, environment overrides.

Precedence: environment > file > defaults. The clock is injectable for
deterministic tests: "system", "fixed:<iso>" (constant) or
"step:<iso>:<seconds>" (advances per call).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path

import yaml

from .ingestion import FramingPolicy
from .recognition import DetectorConfig, MatchConfig
from .store import utc_now

ENV_PREFIX = "MFRS_"


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: str = "./mfrs-data"
    host: str = "127.0.0.1"
    port: int = 8750
    token: str | None = None
    association_window_s: float = 120.0
    clock: str = "system"
    framing: FramingPolicy = field(default_factory=FramingPolicy)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    match: MatchConfig = field(default_factory=MatchConfig)

    def public_json(self):
        """Non-secret parameters exposed at /api/config."""
        return {
            "association_window_s": self.association_window_s,
            "framing": {
                "min_size_ratio": self.framing.min_size_ratio,
                "max_center_offset": self.framing.max_center_offset,
                "min_sharpness": self.framing.min_sharpness,
            },
            "detector": {
                "window": self.detector.window,
                "stride": self.detector.stride,
                "pyramid_scale": self.detector.pyramid_scale,
                "nms_iou": self.detector.nms_iou,
                "min_face": self.detector.min_face,
            },
            "match_tolerance": self.match.tolerance,
        }


def _section(data, name):
    value = data.get(name, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ValueError(f"config section {name!r} must be a mapping")
    return value


def load_config(path=None, env=os.environ) -> ServiceConfig:
    """Build the effective configuration.

    Raises ValueError for unreadable or ill-typed files (the CLI maps
    that to a usage error).
    """
    data = {}
    if path is not None:
        try:
            text = Path(path).read_text()
            data = yaml.safe_load(text) or {}
        except OSError as exc:
            raise ValueError(f"cannot read config file: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ValueError(f"malformed config file: {exc}") from exc
        if not isinstance(data, dict):
            raise ValueError("config file must contain a mapping")
    try:
        framing = FramingPolicy(**_section(data, "framing"))
        detector = DetectorConfig(**_section(data, "detector"))
        match = MatchConfig(**_section(data, "match"))
        cfg = ServiceConfig(
            data_dir=str(data.get("data_dir", ServiceConfig.data_dir)),
            host=str(data.get("host", ServiceConfig.host)),
            port=int(data.get("port", ServiceConfig.port)),
            token=data.get("token"),
            association_window_s=float(
                data.get("association_window_s", ServiceConfig.association_window_s)),
            clock=str(data.get("clock", ServiceConfig.clock)),
            framing=framing,
            detector=detector,
            match=match,
        )
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad config: {exc}") from exc

    overrides = {}
    if env.get(ENV_PREFIX + "DATA_DIR"):
        overrides["data_dir"] = env[ENV_PREFIX + "DATA_DIR"]
    if env.get(ENV_PREFIX + "TOKEN"):
        overrides["token"] = env[ENV_PREFIX + "TOKEN"]
    if env.get(ENV_PREFIX + "HOST"):
        overrides["host"] = env[ENV_PREFIX + "HOST"]
    if env.get(ENV_PREFIX + "PORT"):
        overrides["port"] = int(env[ENV_PREFIX + "PORT"])
    if env.get(ENV_PREFIX + "CLOCK"):
        overrides["clock"] = env[ENV_PREFIX + "CLOCK"]
    if env.get(ENV_PREFIX + "ASSOCIATION_WINDOW"):
        overrides["association_window_s"] = float(env[ENV_PREFIX + "ASSOCIATION_WINDOW"])
    if env.get(ENV_PREFIX + "MATCH_TOLERANCE"):
        overrides["match"] = MatchConfig(tolerance=float(env[ENV_PREFIX + "MATCH_TOLERANCE"]))
    return replace(cfg, **overrides) if overrides else cfg


def make_clock(spec: str):
    """Clock factory for the strings documented in the module
    docstring. Every produced clock returns tz-aware UTC datetimes."""
    if spec == "system":
        return utc_now
    if spec.startswith("fixed:"):
        moment = datetime.fromisoformat(spec[len("fixed:"):])
        if moment.tzinfo is None:
            moment = moment.replace(tzinfo=timezone.utc)
        return lambda: moment
    if spec.startswith("step:"):
        start, step = spec[len("step:"):].rsplit(":", 1)
        moment = datetime.fromisoformat(start)
        if moment.tzinfo is None:
            moment = moment.replace(tzinfo=timezone.utc)
        delta = timedelta(seconds=float(step))
        state = {"now": moment}

        def tick():
            current = state["now"]
            state["now"] = current + delta
            return current

        return tick
    raise ValueError(f"unknown clock spec {spec!r}")
