"""Operator command line: the headless twin of the console.

Exit codes are stable: 0 success, 1 domain error (not found,
validation, failed framing), 2 usage error, 3 I/O or decode error.
JSON goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import functools
import json
import socket
import sys
import tempfile
from datetime import datetime
from pathlib import Path

import click

from .config import load_config, make_clock
from .errors import (
    CorruptSnapshot,
    DecodeError,
    DegenerateFace,
    EmptyAudio,
    EvalError,
    MissingImage,
    NotFound,
    ParseError,
    UnsupportedVersion,
    ValidationError,
    WavError,
)
from .evalharness import bench_db, eval_pairs, parse_pairs, roc_csv
from .glyphs import load_or_fit_model
from .imaging import load_image
from .ingestion import FramingPolicy, framing_check
from .memo import CaptureContext, VoiceMemo, associate_memo, noise_gate, read_wav
from .recognition import DetectorConfig, MatchConfig, encode_face
from .retrieval import recognize_and_retrieve
from .store import Store

_DOMAIN_ERRORS = (NotFound, ValidationError, EmptyAudio, DegenerateFace, EvalError)
_IO_ERRORS = (DecodeError, WavError, CorruptSnapshot, UnsupportedVersion,
              ParseError, MissingImage, OSError)

SESSION_FILE = "session.json"


def engine_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _DOMAIN_ERRORS as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except _IO_ERRORS as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
    return wrapper


def emit(obj):
    click.echo(json.dumps(obj, indent=2))


class CliContext:
    def __init__(self, data_dir, clock_spec):
        self.data_dir = Path(data_dir)
        self.clock = make_clock(clock_spec)
        self.detector = DetectorConfig()
        self.match = MatchConfig()

    def store(self):
        return Store(self.data_dir, clock=self.clock)

    def model(self):
        return load_or_fit_model(self.data_dir, self.detector)

    # CLI invocations are separate processes, so the capture context
    # for memo association persists as a small file in the data dir.
    def save_session(self, person_id):
        payload = {"person_id": person_id, "at": self.clock().isoformat()}
        (self.data_dir / SESSION_FILE).write_text(json.dumps(payload))

    def capture_context(self):
        path = self.data_dir / SESSION_FILE
        if not path.exists():
            return CaptureContext()
        data = json.loads(path.read_text())
        return CaptureContext(
            last_enrollment=(data["person_id"], datetime.fromisoformat(data["at"])))


@click.group()
@click.option("--data-dir", envvar="MFRS_DATA_DIR", default="./mfrs-data",
              show_default=True, help="Store directory.")
@click.option("--clock", "clock_spec", envvar="MFRS_CLOCK", default="system",
              help="system | fixed:<iso> | step:<iso>:<seconds>")
@click.pass_context
def cli(ctx, data_dir, clock_spec):
    """Face enrollment, recognition and voice memos."""
    try:
        ctx.obj = CliContext(data_dir, clock_spec)
    except ValueError as exc:
        raise click.UsageError(str(exc))


@cli.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.pass_obj
@engine_errors
def serve(obj, config_path):
    """Run the HTTP service until interrupted."""
    import uvicorn

    from .service import create_app

    try:
        config = load_config(config_path)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((config.host, config.port))
    except OSError as exc:
        click.echo(f"error: cannot bind {config.host}:{config.port}: {exc}", err=True)
        sys.exit(3)
    finally:
        probe.close()
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")


@cli.command()
@click.option("--name", required=True)
@click.option("--relationship", default="")
@click.option("--notes", default="")
@click.option("--image", "image_path", required=True, type=click.Path())
@click.option("--override-framing", is_flag=True, default=False)
@click.pass_obj
@engine_errors
def enroll(obj, name, relationship, notes, image_path, override_framing):
    """Create a person from a framed capture."""
    image = load_image(image_path)
    model = obj.model()
    report = framing_check(image, model, obj.detector)
    if not report.passed:
        waivable = report.failures <= FramingPolicy.WAIVABLE
        if not (override_framing and waivable):
            emit({"framing": report.to_json()})
            sys.exit(1)
    encoding = encode_face(image, report.face, obj.detector)
    with obj.store() as store:
        person = store.create_person(name, relationship, notes)
        record = store.add_encoding(person.person_id, encoding,
                                    source_image=Path(image_path).read_bytes())
    obj.save_session(person.person_id)
    emit({"person_id": person.person_id, "encoding_id": record.encoding_id,
          "framing": report.to_json()})


@cli.command()
@click.option("--image", "image_path", required=True, type=click.Path())
@click.option("--json", "as_json", is_flag=True, default=False)
@click.pass_obj
@engine_errors
def recognize(obj, image_path, as_json):
    """Detect and identify every face in an image."""
    image = load_image(image_path)
    model = obj.model()
    with obj.store() as store:
        outcome = recognize_and_retrieve(image, model, store, obj.detector, obj.match)
    if as_json:
        emit(outcome.to_json())
        return
    if not outcome.faces:
        click.echo("no faces detected")
        return
    for i, hit in enumerate(outcome.faces):
        where = f"({hit.box.top},{hit.box.left})-({hit.box.bottom},{hit.box.right})"
        if hit.match is None:
            click.echo(f"face {i + 1} at {where}: unknown person")
        else:
            click.echo(
                f"face {i + 1} at {where}: {hit.profile.presentation_text} "
                f"(person {hit.person_id}, distance {hit.match.distance:.3f})"
            )


@cli.group()
def memo():
    """Voice memo management."""


@memo.command("add")
@click.option("--file", "wav_path", required=True, type=click.Path())
@click.option("--person", "person_id", type=int, default=None)
@click.option("--label", default="")
@click.pass_obj
@engine_errors
def memo_add(obj, wav_path, person_id, label):
    """Store a memo; auto-links to a recent enrollment when unlinked."""
    clip = read_wav(Path(wav_path).read_bytes())
    item = VoiceMemo(clip=noise_gate(clip), created_at=obj.clock(),
                     label=label, person_id=person_id)
    if item.person_id is None:
        item = associate_memo(item, obj.capture_context(), obj.clock())
    with obj.store() as store:
        memo_id = store.add_memo(item)
        emit(store.get_memo(memo_id).to_json())


@memo.command("list")
@click.option("--person", "person_id", type=int, default=None)
@click.option("--unlinked", is_flag=True, default=False)
@click.pass_obj
@engine_errors
def memo_list(obj, person_id, unlinked):
    if unlinked == (person_id is not None):
        raise click.UsageError("pass exactly one of --person or --unlinked")
    with obj.store() as store:
        memos = store.unlinked_memos() if unlinked else store.memos_for(person_id)
        emit([m.to_json() for m in memos])


@memo.command("play")
@click.option("--id", "memo_id", required=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_obj
@engine_errors
def memo_play(obj, memo_id, out_path):
    """Write the memo's canonical WAV to a file for playback."""
    with obj.store() as store:
        Path(out_path).write_bytes(store.memo_audio(memo_id))
    click.echo(f"wrote memo {memo_id} to {out_path}", err=True)


@cli.command()
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_obj
@engine_errors
def export(obj, out_path):
    """Write a checksummed snapshot of the whole store."""
    with obj.store() as store:
        Path(out_path).write_bytes(store.export_snapshot())
    click.echo(f"exported to {out_path}", err=True)


@cli.command("import")
@click.option("--in", "in_path", required=True, type=click.Path())
@click.pass_obj
@engine_errors
def import_(obj, in_path):
    """Restore a snapshot, replacing the store contents."""
    data = Path(in_path).read_bytes()
    with obj.store() as store:
        store.import_snapshot(data)
    click.echo(f"imported {in_path}", err=True)


@cli.group("eval")
def eval_group():
    """Recognition benchmarks."""


@eval_group.command("pairs")
@click.option("--pairs", "pairs_path", required=True, type=click.Path())
@click.option("--images", "images_dir", required=True, type=click.Path())
@click.option("--roc-csv", "roc_path", type=click.Path(), default=None)
@click.pass_obj
@engine_errors
def eval_pairs_cmd(obj, pairs_path, images_dir, roc_path):
    """Pair-verification benchmark over an image directory."""
    pair_list = parse_pairs(Path(pairs_path).read_text(), images_dir)
    report = eval_pairs(pair_list, obj.model(), obj.detector, obj.match)
    if roc_path:
        Path(roc_path).write_text(roc_csv(report))
    emit(report.to_json())


@cli.group()
def bench():
    """Performance stress tests."""


@bench.command("db")
@click.option("--n", "n", required=True, type=int)
@click.pass_obj
@engine_errors
def bench_db_cmd(obj, n):
    """Time insert/get/update over a fresh throwaway store."""
    with tempfile.TemporaryDirectory(prefix="mfrs-bench-") as tmp:
        store = Store(tmp, clock=obj.clock)
        report = bench_db(n, store)
        store.close()
    emit(report.to_json())


def main():
    cli(auto_envvar_prefix="MFRS")


if __name__ == "__main__":
    main()
