"""Transactional person/encoding/memo persistence.

Embedded engine: in-memory tables plus an append-only journal and a
checksummed snapshot, both in one data directory. Every public
mutation is one transaction; a transaction resolves against the
current state (assigning ids and timestamps), is framed into the
journal (length + CRC-32 + JSON payload, fsync on commit), and only
then applied to the tables. Recovery replays whole valid records and
discards a torn tail, so a crash at any byte leaves some committed
prefix.

Concurrency: single writer, any number of readers; everything touches
the tables under one lock and readers only ever observe committed
state. docs/schema.sql documents the equivalent SQL deployment.
"""

from __future__ import annotations

import base64
import json
import os
import struct
import threading
import zlib
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import CorruptSnapshot, InvalidEncoding, NotFound, UnsupportedVersion, ValidationError
from .memo import VoiceMemo, read_wav, write_wav
from .recognition import require_encoding

SNAPSHOT_MAGIC = b"MFRSSNAP"
SNAPSHOT_VERSION = 1
JOURNAL_NAME = "journal.log"
SNAPSHOT_NAME = "snapshot.bin"


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def _iso(dt: datetime) -> str:
    return dt.isoformat()


def _parse_iso(s: str) -> datetime:
    return datetime.fromisoformat(s)


# --- records ---

@dataclass(frozen=True)
class PersonRecord:
    person_id: int
    name: str
    relationship: str
    notes: str
    created_at: datetime
    updated_at: datetime

    def to_json(self):
        return {
            "person_id": self.person_id,
            "name": self.name,
            "relationship": self.relationship,
            "notes": self.notes,
            "created_at": _iso(self.created_at),
            "updated_at": _iso(self.updated_at),
        }


@dataclass(frozen=True)
class EncodingRecord:
    encoding_id: int
    person_id: int
    encoding: np.ndarray
    source_image: int | None
    created_at: datetime

    def to_json(self, with_values=False):
        obj = {
            "encoding_id": self.encoding_id,
            "person_id": self.person_id,
            "source_image": self.source_image,
            "created_at": _iso(self.created_at),
        }
        if with_values:
            obj["values"] = [float(v) for v in self.encoding]
        return obj


@dataclass(frozen=True)
class StoredMemo:
    memo_id: int
    person_id: int | None
    label: str
    created_at: datetime
    duration_s: float
    wav: bytes = field(repr=False)

    def to_json(self):
        return {
            "memo_id": self.memo_id,
            "person_id": self.person_id,
            "duration_s": self.duration_s,
            "created_at": _iso(self.created_at),
            "label": self.label,
        }


# --- mutations (a Transaction is an ordered list of these) ---

@dataclass(frozen=True)
class CreatePerson:
    name: str
    relationship: str = ""
    notes: str = ""


@dataclass(frozen=True)
class UpdatePerson:
    person_id: int
    fields: dict


@dataclass(frozen=True)
class DeletePerson:
    person_id: int


@dataclass(frozen=True)
class AddEncoding:
    person_id: int
    values: object
    image: bytes | None = None


@dataclass(frozen=True)
class AddMemo:
    memo: VoiceMemo


@dataclass(frozen=True)
class LinkMemo:
    memo_id: int
    person_id: int


_UPDATABLE = ("name", "relationship", "notes")


# --- journal framing ---

def frame_record(payload: bytes) -> bytes:
    return struct.pack("<II", len(payload), zlib.crc32(payload)) + payload


def scan_journal(data: bytes):
    """Parse every whole valid record; a torn or corrupt tail is
    silently discarded (it was never committed)."""
    records = []
    pos = 0
    while pos + 8 <= len(data):
        length, crc = struct.unpack_from("<II", data, pos)
        body = data[pos + 8 : pos + 8 + length]
        if len(body) < length or zlib.crc32(body) != crc:
            break
        try:
            records.append(json.loads(body.decode("utf-8")))
        except (UnicodeDecodeError, json.JSONDecodeError):
            break
        pos += 8 + length
    return records


class Store:
    """Single data-directory store handle."""

    def __init__(self, data_dir, clock=utc_now, durable=True):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.clock = clock
        self.durable = durable
        self._lock = threading.RLock()
        self._persons: dict[int, PersonRecord] = {}
        self._encodings: dict[int, EncodingRecord] = {}
        self._encoding_order: list[int] = []
        self._memos: dict[int, StoredMemo] = {}
        self._images: dict[int, bytes] = {}
        self._counters = {"person": 1, "encoding": 1, "memo": 1, "image": 1}
        self._txid = 0
        self._recover()
        self._journal = open(self.journal_path, "ab")

    @property
    def journal_path(self):
        return self.data_dir / JOURNAL_NAME

    @property
    def snapshot_path(self):
        return self.data_dir / SNAPSHOT_NAME

    def close(self):
        with self._lock:
            if not self._journal.closed:
                self._journal.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # --- recovery ---

    def _recover(self):
        if self.snapshot_path.exists():
            self._load_snapshot_state(self.snapshot_path.read_bytes())
        if self.journal_path.exists():
            for record in scan_journal(self.journal_path.read_bytes()):
                if record["txid"] > self._txid:
                    for op in record["ops"]:
                        self._apply(op)
                    self._txid = record["txid"]

    # --- resolution: mutation -> journal-ready op dict ---

    def _staged(self):
        """Mutable overlay of table state used while resolving a
        transaction; real tables stay untouched until commit. Encodings
        stage as (person_id, image_id) pairs, enough for cascades."""
        return {
            "persons": dict(self._persons),
            "memos": dict(self._memos),
            "counters": dict(self._counters),
            "encodings": {e: (r.person_id, r.source_image)
                          for e, r in self._encodings.items()},
            "order": list(self._encoding_order),
        }

    def _resolve(self, mutation, staged):
        now = self.clock()
        if isinstance(mutation, CreatePerson):
            if not mutation.name:
                raise ValidationError("person name must be non-empty")
            pid = staged["counters"]["person"]
            staged["counters"]["person"] = pid + 1
            record = PersonRecord(pid, mutation.name, mutation.relationship,
                                  mutation.notes, now, now)
            staged["persons"][pid] = record
            return {"op": "person.create", **record.to_json()}
        if isinstance(mutation, UpdatePerson):
            current = staged["persons"].get(mutation.person_id)
            if current is None:
                raise NotFound(f"person {mutation.person_id} not found")
            unknown = set(mutation.fields) - set(_UPDATABLE)
            if unknown:
                raise ValidationError(f"unknown fields {sorted(unknown)}")
            if "name" in mutation.fields and not mutation.fields["name"]:
                raise ValidationError("person name must be non-empty")
            fields = {k: str(v) for k, v in mutation.fields.items()}
            updated = PersonRecord(
                current.person_id,
                fields.get("name", current.name),
                fields.get("relationship", current.relationship),
                fields.get("notes", current.notes),
                current.created_at,
                now,
            )
            staged["persons"][current.person_id] = updated
            return {"op": "person.update", "person_id": current.person_id,
                    "fields": fields, "updated_at": _iso(now)}
        if isinstance(mutation, DeletePerson):
            if mutation.person_id not in staged["persons"]:
                raise NotFound(f"person {mutation.person_id} not found")
            del staged["persons"][mutation.person_id]
            encoding_ids = [e for e in staged["order"]
                            if staged["encodings"][e][0] == mutation.person_id]
            image_ids = sorted({
                staged["encodings"][e][1] for e in encoding_ids
                if staged["encodings"][e][1] is not None
            })
            for e in encoding_ids:
                del staged["encodings"][e]
                staged["order"].remove(e)
            memo_ids = sorted(
                m for m, rec in staged["memos"].items() if rec.person_id == mutation.person_id
            )
            for m in memo_ids:
                del staged["memos"][m]
            return {"op": "person.delete", "person_id": mutation.person_id,
                    "encoding_ids": encoding_ids, "memo_ids": memo_ids,
                    "image_ids": image_ids}
        if isinstance(mutation, AddEncoding):
            if mutation.person_id not in staged["persons"]:
                raise NotFound(f"person {mutation.person_id} not found")
            try:
                values = require_encoding(mutation.values)
            except InvalidEncoding as exc:
                raise ValidationError(str(exc)) from exc
            eid = staged["counters"]["encoding"]
            staged["counters"]["encoding"] = eid + 1
            image_id = None
            if mutation.image is not None:
                image_id = staged["counters"]["image"]
                staged["counters"]["image"] = image_id + 1
            staged["encodings"][eid] = (mutation.person_id, image_id)
            staged["order"].append(eid)
            op = {"op": "encoding.add", "encoding_id": eid,
                  "person_id": mutation.person_id,
                  "values": [float(v) for v in values],
                  "image_id": image_id, "created_at": _iso(now)}
            if mutation.image is not None:
                op["image_b64"] = base64.b64encode(mutation.image).decode("ascii")
            return op
        if isinstance(mutation, AddMemo):
            memo = mutation.memo
            if memo.person_id is not None and memo.person_id not in staged["persons"]:
                raise NotFound(f"person {memo.person_id} not found")
            mid = staged["counters"]["memo"]
            staged["counters"]["memo"] = mid + 1
            wav = write_wav(memo.clip)
            record = StoredMemo(mid, memo.person_id, memo.label, memo.created_at,
                                memo.clip.duration, wav)
            staged["memos"][mid] = record
            return {"op": "memo.add", "memo_id": mid, "person_id": memo.person_id,
                    "label": memo.label, "created_at": _iso(memo.created_at),
                    "duration_s": memo.clip.duration,
                    "wav_b64": base64.b64encode(wav).decode("ascii")}
        if isinstance(mutation, LinkMemo):
            memo = staged["memos"].get(mutation.memo_id)
            if memo is None:
                raise NotFound(f"memo {mutation.memo_id} not found")
            if mutation.person_id not in staged["persons"]:
                raise NotFound(f"person {mutation.person_id} not found")
            staged["memos"][mutation.memo_id] = StoredMemo(
                memo.memo_id, mutation.person_id, memo.label, memo.created_at,
                memo.duration_s, memo.wav)
            return {"op": "memo.link", "memo_id": mutation.memo_id,
                    "person_id": mutation.person_id}
        raise ValidationError(f"unknown mutation {type(mutation).__name__}")

    # --- application of resolved ops (also the replay path) ---

    def _apply(self, op):
        kind = op["op"]
        if kind == "person.create":
            pid = op["person_id"]
            self._persons[pid] = PersonRecord(
                pid, op["name"], op["relationship"], op["notes"],
                _parse_iso(op["created_at"]), _parse_iso(op["updated_at"]))
            self._counters["person"] = max(self._counters["person"], pid + 1)
        elif kind == "person.update":
            current = self._persons[op["person_id"]]
            fields = op["fields"]
            self._persons[op["person_id"]] = PersonRecord(
                current.person_id,
                fields.get("name", current.name),
                fields.get("relationship", current.relationship),
                fields.get("notes", current.notes),
                current.created_at,
                _parse_iso(op["updated_at"]))
        elif kind == "person.delete":
            self._persons.pop(op["person_id"], None)
            for eid in op["encoding_ids"]:
                self._encodings.pop(eid, None)
                if eid in self._encoding_order:
                    self._encoding_order.remove(eid)
            for mid in op["memo_ids"]:
                self._memos.pop(mid, None)
            for iid in op["image_ids"]:
                self._images.pop(iid, None)
        elif kind == "encoding.add":
            eid = op["encoding_id"]
            values = np.asarray(op["values"], dtype=np.float64)
            image_id = op.get("image_id")
            if image_id is not None:
                self._images[image_id] = base64.b64decode(op["image_b64"])
                self._counters["image"] = max(self._counters["image"], image_id + 1)
            self._encodings[eid] = EncodingRecord(
                eid, op["person_id"], values, image_id, _parse_iso(op["created_at"]))
            self._encoding_order.append(eid)
            self._counters["encoding"] = max(self._counters["encoding"], eid + 1)
        elif kind == "memo.add":
            mid = op["memo_id"]
            self._memos[mid] = StoredMemo(
                mid, op["person_id"], op["label"], _parse_iso(op["created_at"]),
                op["duration_s"], base64.b64decode(op["wav_b64"]))
            self._counters["memo"] = max(self._counters["memo"], mid + 1)
        elif kind == "memo.link":
            memo = self._memos[op["memo_id"]]
            self._memos[op["memo_id"]] = StoredMemo(
                memo.memo_id, op["person_id"], memo.label, memo.created_at,
                memo.duration_s, memo.wav)
        elif kind == "restore":
            self._load_body(op["body"])
        else:
            raise ValidationError(f"unknown journal op {kind!r}")

    # --- commit ---

    def _commit(self, ops):
        record = {"txid": self._txid + 1, "ops": ops}
        payload = json.dumps(record, sort_keys=True, separators=(",", ":")).encode("utf-8")
        self._journal.write(frame_record(payload))
        self._journal.flush()
        if self.durable:
            os.fsync(self._journal.fileno())
        for op in ops:
            self._apply(op)
        self._txid += 1

    def apply_transaction(self, mutations):
        """Apply an ordered list of mutations atomically: either every
        mutation commits or none does. Raises the first failure."""
        with self._lock:
            staged = self._staged()
            ops = [self._resolve(m, staged) for m in mutations]
            self._commit(ops)

    def _one(self, mutation):
        with self._lock:
            staged = self._staged()
            op = self._resolve(mutation, staged)
            self._commit([op])
            return op

    # --- person CRUD ---

    def create_person(self, name, relationship="", notes="") -> PersonRecord:
        op = self._one(CreatePerson(name=name, relationship=relationship, notes=notes))
        return self.get_person(op["person_id"])

    def update_person(self, person_id, **fields) -> PersonRecord:
        self._one(UpdatePerson(person_id=person_id, fields=fields))
        return self.get_person(person_id)

    def delete_person(self, person_id):
        self._one(DeletePerson(person_id=person_id))

    def get_person(self, person_id) -> PersonRecord:
        with self._lock:
            record = self._persons.get(person_id)
            if record is None:
                raise NotFound(f"person {person_id} not found")
            return record

    def list_persons(self):
        with self._lock:
            return [self._persons[pid] for pid in sorted(self._persons)]

    # --- encodings ---

    def add_encoding(self, person_id, encoding, source_image=None) -> EncodingRecord:
        op = self._one(AddEncoding(person_id=person_id, values=encoding, image=source_image))
        return self.get_encoding(op["encoding_id"])

    def get_encoding(self, encoding_id) -> EncodingRecord:
        with self._lock:
            record = self._encodings.get(encoding_id)
            if record is None:
                raise NotFound(f"encoding {encoding_id} not found")
            return record

    def all_encodings(self):
        """Every (person_id, encoding) pair, insertion-ordered."""
        with self._lock:
            return [(self._encodings[e].person_id, self._encodings[e].encoding)
                    for e in self._encoding_order]

    def encodings_for(self, person_id):
        with self._lock:
            self.get_person(person_id)
            return [self._encodings[e] for e in self._encoding_order
                    if self._encodings[e].person_id == person_id]

    def image_bytes(self, image_id) -> bytes:
        with self._lock:
            data = self._images.get(image_id)
            if data is None:
                raise NotFound(f"image {image_id} not found")
            return data

    # --- memos ---

    def add_memo(self, memo: VoiceMemo) -> int:
        op = self._one(AddMemo(memo=memo))
        return op["memo_id"]

    def get_memo(self, memo_id) -> StoredMemo:
        with self._lock:
            record = self._memos.get(memo_id)
            if record is None:
                raise NotFound(f"memo {memo_id} not found")
            return record

    def memo_audio(self, memo_id) -> bytes:
        return self.get_memo(memo_id).wav

    def memo_clip(self, memo_id):
        return read_wav(self.memo_audio(memo_id))

    @staticmethod
    def _memo_order(record: StoredMemo):
        return (record.created_at, record.memo_id)

    def memos_for(self, person_id):
        """Memos linked to a person, newest first (ties: higher id first)."""
        with self._lock:
            self.get_person(person_id)
            linked = [m for m in self._memos.values() if m.person_id == person_id]
            return sorted(linked, key=self._memo_order, reverse=True)

    def unlinked_memos(self):
        with self._lock:
            loose = [m for m in self._memos.values() if m.person_id is None]
            return sorted(loose, key=self._memo_order, reverse=True)

    def link_memo(self, memo_id, person_id):
        self._one(LinkMemo(memo_id=memo_id, person_id=person_id))

    # --- snapshot / backup ---

    def _body(self):
        return {
            "version": SNAPSHOT_VERSION,
            "txid": self._txid,
            "counters": dict(self._counters),
            "persons": [self._persons[p].to_json() for p in sorted(self._persons)],
            "encodings": [self._encodings[e].to_json(with_values=True)
                          for e in self._encoding_order],
            "memos": [{**self._memos[m].to_json(),
                       "wav_b64": base64.b64encode(self._memos[m].wav).decode("ascii")}
                      for m in sorted(self._memos)],
            "images": [{"image_id": i,
                        "data_b64": base64.b64encode(self._images[i]).decode("ascii")}
                       for i in sorted(self._images)],
        }

    def _load_body(self, body):
        self._persons.clear()
        self._encodings.clear()
        self._encoding_order.clear()
        self._memos.clear()
        self._images.clear()
        self._counters = dict(body["counters"])
        for p in body["persons"]:
            self._persons[p["person_id"]] = PersonRecord(
                p["person_id"], p["name"], p["relationship"], p["notes"],
                _parse_iso(p["created_at"]), _parse_iso(p["updated_at"]))
        for e in body["encodings"]:
            record = EncodingRecord(
                e["encoding_id"], e["person_id"],
                np.asarray(e["values"], dtype=np.float64),
                e["source_image"], _parse_iso(e["created_at"]))
            self._encodings[record.encoding_id] = record
            self._encoding_order.append(record.encoding_id)
        for m in body["memos"]:
            self._memos[m["memo_id"]] = StoredMemo(
                m["memo_id"], m["person_id"], m["label"],
                _parse_iso(m["created_at"]), m["duration_s"],
                base64.b64decode(m["wav_b64"]))
        for i in body["images"]:
            self._images[i["image_id"]] = base64.b64decode(i["data_b64"])

    def _load_snapshot_state(self, data):
        body = parse_snapshot(data)
        self._load_body(body)
        self._txid = body["txid"]

    def export_snapshot(self) -> bytes:
        """Checksummed full-state backup; deterministic for a given state."""
        with self._lock:
            body = json.dumps(self._body(), sort_keys=True, separators=(",", ":")).encode("utf-8")
            return (SNAPSHOT_MAGIC + struct.pack("<II", SNAPSHOT_VERSION, len(body))
                    + body + struct.pack("<I", zlib.crc32(body)))

    def import_snapshot(self, data: bytes):
        """Validate and restore a snapshot, replacing all current state.
        The restore itself is journaled, so it is crash-atomic."""
        body = parse_snapshot(data)
        with self._lock:
            restore_body = dict(body)
            restore_body["txid"] = 0  # txids are per-store, not portable
            self._one_restore(restore_body)

    def _one_restore(self, body):
        op = {"op": "restore", "body": body}
        self._commit([op])

    def compact(self):
        """Write the snapshot file and reset the journal."""
        with self._lock:
            data = self.export_snapshot()
            tmp = self.snapshot_path.with_suffix(".tmp")
            with open(tmp, "wb") as f:
                f.write(data)
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp, self.snapshot_path)
            self._journal.close()
            self._journal = open(self.journal_path, "wb")
            self._journal.flush()
            if self.durable:
                os.fsync(self._journal.fileno())

    # --- diagnostics ---

    def dump_state(self):
        """Canonical state dict (snapshot body sans txid), for equality
        checks in tests and the facade-equivalence harness."""
        with self._lock:
            body = self._body()
            body.pop("txid")
            return body

    def integrity_violations(self):
        """Referential-integrity scan; empty list when consistent."""
        problems = []
        with self._lock:
            for e in self._encodings.values():
                if e.person_id not in self._persons:
                    problems.append(f"encoding {e.encoding_id} -> missing person {e.person_id}")
                if e.source_image is not None and e.source_image not in self._images:
                    problems.append(f"encoding {e.encoding_id} -> missing image {e.source_image}")
            for m in self._memos.values():
                if m.person_id is not None and m.person_id not in self._persons:
                    problems.append(f"memo {m.memo_id} -> missing person {m.person_id}")
            if self._persons and max(self._persons) >= self._counters["person"]:
                problems.append("person counter behind max id")
        return problems


def parse_snapshot(data: bytes):
    """Validate snapshot framing and return the body dict."""
    if len(data) < 20 or data[:8] != SNAPSHOT_MAGIC:
        raise CorruptSnapshot("bad snapshot magic")
    version, length = struct.unpack_from("<II", data, 8)
    if version != SNAPSHOT_VERSION:
        raise UnsupportedVersion(f"snapshot version {version} unknown")
    body = data[16 : 16 + length]
    if len(body) != length or len(data) < 16 + length + 4:
        raise CorruptSnapshot("snapshot truncated")
    (crc,) = struct.unpack_from("<I", data, 16 + length)
    if zlib.crc32(body) != crc:
        raise CorruptSnapshot("snapshot checksum mismatch")
    try:
        parsed = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptSnapshot(f"snapshot body unreadable: {exc}") from exc
    return parsed
