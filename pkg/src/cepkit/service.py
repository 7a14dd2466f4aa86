"""Stateless HTTP facade over validation, generation, and simulation.

Models travel in request bodies as full rule documents; nothing is
stored between requests. Malformed bodies answer 400, semantic refusals
(diagnostics, unsupported constructs, rejected stream content) answer
422, and identical requests always produce identical responses.
"""

from __future__ import annotations

import json
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .codegen import generate_drl, generate_epl
from .engine import open_session
from .errors import (
    DocumentFormatError,
    InvalidModelError,
    StreamError,
    UnsupportedConstructError,
)
from .model import RuleModel
from .serialization import model_from_data
from .streams import event_from_data
from .validation import validate


def _diagnostic_data(d) -> dict[str, str]:
    return {"code": d.code, "severity": d.severity, "path": d.path,
            "message": d.message}


def _bad_request(message: str, issues=()) -> JSONResponse:
    body: dict[str, Any] = {"error": message}
    if issues:
        body["issues"] = [str(i) for i in issues]
    return JSONResponse(body, status_code=400)


def _semantic_failure(err) -> JSONResponse:
    if isinstance(err, InvalidModelError):
        body: dict[str, Any] = {
            "diagnostics": [_diagnostic_data(d) for d in err.diagnostics]
        }
    else:
        body = {"unsupported": {"path": err.path, "message": str(err)}}
    return JSONResponse(body, status_code=422)


async def _json_body(request: Request):
    raw = await request.body()
    try:
        return json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError):
        return _bad_request("body is not valid JSON")


def _decode_model(data) -> RuleModel | JSONResponse:
    try:
        model, _ = model_from_data(data)
        return model
    except DocumentFormatError as err:
        return _bad_request("malformed rule document", err.issues)


def create_app() -> FastAPI:
    app = FastAPI(title="cepkit", docs_url=None, redoc_url=None)

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.post("/api/validate")
    async def validate_endpoint(request: Request):
        data = await _json_body(request)
        if isinstance(data, JSONResponse):
            return data
        model = _decode_model(data)
        if isinstance(model, JSONResponse):
            return model
        diagnostics = validate(model)
        return {
            "valid": not diagnostics,
            "diagnostics": [_diagnostic_data(d) for d in diagnostics],
        }

    @app.post("/api/generate")
    async def generate_endpoint(request: Request, target: str = "epl"):
        if target not in ("epl", "drl"):
            return _bad_request(f"unknown target {target!r}")
        data = await _json_body(request)
        if isinstance(data, JSONResponse):
            return data
        model = _decode_model(data)
        if isinstance(model, JSONResponse):
            return model
        generator = generate_epl if target == "epl" else generate_drl
        try:
            source = generator(model)
        except (InvalidModelError, UnsupportedConstructError) as err:
            return _semantic_failure(err)
        return {"target": target, "text": source.text}

    @app.post("/api/simulate")
    async def simulate_endpoint(request: Request):
        data = await _json_body(request)
        if isinstance(data, JSONResponse):
            return data
        if not isinstance(data, dict) or set(data) != {"model", "events"}:
            return _bad_request("body must be {\"model\": ..., \"events\": [...]}")
        model = _decode_model(data["model"])
        if isinstance(model, JSONResponse):
            return model
        if not isinstance(data["events"], list):
            return _bad_request("'events' must be an array")
        events = []
        for i, record in enumerate(data["events"]):
            try:
                events.append(event_from_data(record))
            except ValueError as err:
                return _bad_request(f"events[{i}]: {err}")

        try:
            session = open_session(model)
        except (InvalidModelError, UnsupportedConstructError) as err:
            return _semantic_failure(err)
        rows = []
        try:
            for event in events:
                rows.extend(session.push(event))
        except StreamError as err:
            return JSONResponse({"stream_error": str(err)}, status_code=422)

        return {
            "outputs": [
                {
                    "emitted_at": r.emitted_at,
                    "values": r.values,
                    "derived_event_name": r.derived_event_name,
                }
                for r in rows
            ]
        }

    return app
