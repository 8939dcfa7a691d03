"""HTTP/JSON facade over the engine, with a live recognition feed.

Every route is a thin mapping onto engine operations; no state lives
outside the store except the per-session capture contexts (for memo
auto-association) and the event backlog (per server run). Endpoints
run on the event loop and call the engine synchronously, which is fine
at desk scale.

Error bodies are {"code", "message", "details"?} with codes from the
closed set: validation, not_found, decode_error, framing_failed,
encoding_failed, unsupported_audio, malformed_audio, unauthorized,
bad_request.
"""

from __future__ import annotations

import asyncio
import json
import threading

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response, StreamingResponse

from .config import ServiceConfig, make_clock
from .errors import DecodeError, DegenerateFace, NotFound, ValidationError, WavError
from .glyphs import load_or_fit_model
from .imaging import load_image
from .ingestion import FramingPolicy, framing_check
from .memo import CaptureContext, VoiceMemo, associate_memo, noise_gate, read_wav
from .recognition import backend_name, encode_face
from .retrieval import recognize_and_retrieve, retrieve_profile
from .store import Store

SESSION_HEADER = "x-mfrs-session"


class ApiError(Exception):
    def __init__(self, status, code, message, details=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.details = details

    def response(self):
        body = {"code": self.code, "message": self.message}
        if self.details is not None:
            body["details"] = self.details
        return JSONResponse(body, status_code=self.status)


class EventBus:
    """Backlog of recognition events, ids monotone from 1 per run."""

    def __init__(self):
        self._events = []
        self._lock = threading.Lock()

    def publish(self, outcome_json):
        with self._lock:
            event = {"event_id": len(self._events) + 1, "outcome": outcome_json}
            self._events.append(event)
            return event

    def since(self, last_id):
        with self._lock:
            return [e for e in self._events if e["event_id"] > last_id]


def create_app(config: ServiceConfig, store: Store | None = None, model=None) -> FastAPI:
    clock = make_clock(config.clock)
    if store is None:
        store = Store(config.data_dir, clock=clock)
    if model is None:
        model = load_or_fit_model(config.data_dir, config.detector)

    app = FastAPI(title="mfrs", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.model = model
    app.state.config = config
    app.state.clock = clock
    app.state.events = EventBus()
    app.state.sessions: dict[str, CaptureContext] = {}
    app.state.session_lock = threading.Lock()

    def session_context(request: Request) -> tuple[str, CaptureContext]:
        key = request.headers.get(SESSION_HEADER, "global")
        with app.state.session_lock:
            ctx = app.state.sessions.get(key)
            if ctx is None:
                ctx = CaptureContext(association_window_s=config.association_window_s)
                app.state.sessions[key] = ctx
            return key, ctx

    def check_auth(request: Request):
        if not config.token:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {config.token}":
            raise ApiError(401, "unauthorized", "missing or invalid bearer token")

    @app.exception_handler(ApiError)
    async def on_api_error(request, exc: ApiError):
        return exc.response()

    @app.exception_handler(NotFound)
    async def on_not_found(request, exc):
        return ApiError(404, "not_found", str(exc)).response()

    @app.exception_handler(ValidationError)
    async def on_validation(request, exc):
        return ApiError(400, "validation", str(exc)).response()

    @app.exception_handler(RequestValidationError)
    async def on_request_validation(request, exc):
        return ApiError(400, "bad_request", str(exc)).response()

    def decode_or_400(payload):
        try:
            return load_image(payload)
        except DecodeError as exc:
            raise ApiError(400, "decode_error", str(exc))

    async def json_body(request: Request) -> dict:
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            raise ApiError(400, "bad_request", f"body is not valid JSON: {exc}")
        if not isinstance(body, dict):
            raise ApiError(400, "bad_request", "expected a JSON object")
        return body

    # --- persons ---

    @app.post("/api/persons", status_code=201)
    async def create_person(request: Request):
        check_auth(request)
        body = await json_body(request)
        person = store.create_person(
            name=str(body.get("name", "")),
            relationship=str(body.get("relationship", "")),
            notes=str(body.get("notes", "")),
        )
        return JSONResponse(person.to_json(), status_code=201,
                            headers={"Location": f"/api/persons/{person.person_id}"})

    @app.get("/api/persons")
    async def list_persons(request: Request):
        check_auth(request)
        return [p.to_json() for p in store.list_persons()]

    @app.get("/api/persons/{person_id}")
    async def get_person(person_id: int, request: Request):
        check_auth(request)
        return store.get_person(person_id).to_json()

    @app.patch("/api/persons/{person_id}")
    async def update_person(person_id: int, request: Request):
        check_auth(request)
        body = await json_body(request)
        fields = {k: v for k, v in body.items() if k in ("name", "relationship", "notes")}
        return store.update_person(person_id, **fields).to_json()

    @app.delete("/api/persons/{person_id}", status_code=204)
    async def delete_person(person_id: int, request: Request):
        check_auth(request)
        store.delete_person(person_id)
        return Response(status_code=204)

    @app.get("/api/persons/{person_id}/profile")
    async def person_profile(person_id: int, request: Request):
        check_auth(request)
        return retrieve_profile(store, person_id).to_json()

    @app.get("/api/persons/{person_id}/encodings")
    async def person_encodings(person_id: int, request: Request):
        check_auth(request)
        return [e.to_json() for e in store.encodings_for(person_id)]

    # --- enrollment ---

    @app.post("/api/persons/{person_id}/images", status_code=201)
    async def enroll_image(person_id: int, request: Request, override_framing: bool = False):
        check_auth(request)
        store.get_person(person_id)
        payload = await request.body()
        image = decode_or_400(payload)
        report = framing_check(image, model, config.detector, config.framing)
        if not report.passed:
            waivable = report.failures <= FramingPolicy.WAIVABLE
            if not (override_framing and waivable):
                raise ApiError(422, "framing_failed", "capture quality check failed",
                               details=report.to_json())
        try:
            encoding = encode_face(image, report.face, config.detector)
        except DegenerateFace as exc:
            raise ApiError(422, "encoding_failed", str(exc), details=report.to_json())
        record = store.add_encoding(person_id, encoding, source_image=payload)
        key, ctx = session_context(request)
        with app.state.session_lock:
            app.state.sessions[key] = CaptureContext(
                last_enrollment=(person_id, clock()),
                association_window_s=ctx.association_window_s,
            )
        return JSONResponse({"encoding_id": record.encoding_id, "framing": report.to_json()},
                            status_code=201)

    @app.get("/api/encodings/{encoding_id}/image")
    async def encoding_image(encoding_id: int, request: Request):
        check_auth(request)
        record = store.get_encoding(encoding_id)
        if record.source_image is None:
            raise ApiError(404, "not_found", f"encoding {encoding_id} stored without an image")
        return Response(content=store.image_bytes(record.source_image),
                        media_type="application/octet-stream")

    # --- recognition ---

    @app.post("/api/recognize")
    async def recognize(request: Request):
        check_auth(request)
        image = decode_or_400(await request.body())
        outcome = recognize_and_retrieve(image, model, store, config.detector, config.match)
        app.state.events.publish(outcome.to_json())
        return outcome.to_json()

    # --- memos ---

    @app.post("/api/memos", status_code=201)
    async def add_memo(request: Request, person_id: int | None = None, label: str = ""):
        check_auth(request)
        payload = await request.body()
        try:
            clip = read_wav(payload)
        except WavError as exc:
            code = "unsupported_audio" if exc.kind == "unsupported" else "malformed_audio"
            raise ApiError(400, code, str(exc))
        memo = VoiceMemo(clip=noise_gate(clip), created_at=clock(),
                         label=label, person_id=person_id)
        if memo.person_id is None:
            _, ctx = session_context(request)
            memo = associate_memo(memo, ctx, clock())
        memo_id = store.add_memo(memo)
        return JSONResponse(store.get_memo(memo_id).to_json(), status_code=201)

    @app.get("/api/memos")
    async def list_memos(request: Request, person_id: int | None = None,
                         unlinked: bool = False):
        check_auth(request)
        if unlinked:
            return [m.to_json() for m in store.unlinked_memos()]
        if person_id is not None:
            return [m.to_json() for m in store.memos_for(person_id)]
        raise ApiError(400, "bad_request", "pass person_id=N or unlinked=true")

    @app.patch("/api/memos/{memo_id}")
    async def link_memo(memo_id: int, request: Request):
        check_auth(request)
        body = await json_body(request)
        if "person_id" not in body:
            raise ApiError(400, "bad_request", "expected {\"person_id\": N}")
        store.link_memo(memo_id, int(body["person_id"]))
        return store.get_memo(memo_id).to_json()

    @app.get("/api/memos/{memo_id}/audio")
    async def memo_audio(memo_id: int, request: Request):
        check_auth(request)
        return Response(content=store.memo_audio(memo_id), media_type="audio/wav")

    # --- live feed ---

    def sse_frame(event):
        return f"id: {event['event_id']}\ndata: {json.dumps(event)}\n\n"

    @app.get("/api/events")
    async def events(request: Request, last_event_id: int = 0, follow: bool = True):
        check_auth(request)
        resume = int(request.headers.get("last-event-id", last_event_id))

        async def stream():
            cursor = resume
            while True:
                for event in app.state.events.since(cursor):
                    cursor = event["event_id"]
                    yield sse_frame(event)
                if not follow:
                    return
                if await request.is_disconnected():
                    return
                await asyncio.sleep(0.05)

        return StreamingResponse(stream(), media_type="text/event-stream")

    # --- config ---

    @app.get("/api/config")
    async def get_config(request: Request):
        check_auth(request)
        return {**config.public_json(), "backend": backend_name()}

    return app
