from datetime import datetime, timedelta

import pytest

from mfrs.glyphs import GlyphParams, default_detector_model, generate_face_glyph
from mfrs.recognition import DetectorConfig, MatchConfig
from mfrs.store import Store

# acceptance-criterion registry: the acceptance tests mark criteria as
# attempted/passed and the terminal summary prints one line per criterion
_attempted: dict = {}
_passed: set = set()


def criterion_started(num, text):
    _attempted[num] = text


def criterion_passed(num):
    _passed.add(num)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _attempted:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_attempted):
        verdict = "PASS" if num in _passed else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d} {verdict}  {_attempted[num]}")

# fixture seeds stay clear of the built-in training corpus bases
IDENTITY_BASE = 5_000_000
JITTER_BASE = 6_000_000


def glyph(identity, jitter, **kw):
    """Deterministic test glyph for (identity, jitter) indices."""
    params = GlyphParams(
        seed=JITTER_BASE + identity * 1000 + jitter,
        identity_seed=IDENTITY_BASE + identity,
        **kw,
    )
    return generate_face_glyph(params)


def step_clock(start="2026-01-01T00:00:00+00:00", step_s=1.0):
    state = {"now": datetime.fromisoformat(start)}
    delta = timedelta(seconds=step_s)

    def tick():
        current = state["now"]
        state["now"] = current + delta
        return current

    return tick


def fixed_clock(at="2026-01-01T00:00:00+00:00"):
    moment = datetime.fromisoformat(at)
    return lambda: moment


@pytest.fixture(scope="session")
def detector_config():
    return DetectorConfig()


@pytest.fixture(scope="session")
def match_config():
    return MatchConfig()


@pytest.fixture(scope="session")
def model(detector_config):
    return default_detector_model(detector_config)


@pytest.fixture
def store(tmp_path):
    s = Store(tmp_path / "data", clock=step_clock())
    yield s
    s.close()
