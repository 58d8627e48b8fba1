"""HTTP surface of the annotation workflow.

Endpoints (all payloads use the corpus field vocabulary):
    GET  /api/queue/next?annotator=ID  -> record JSON or 204 when exhausted
    POST /api/annotations              -> 201 recorded / 409 conflict / 422 invalid
    GET  /api/progress                 -> {"pending": n, "done": n, "assigned": n}
    GET  /api/taxonomy                 -> error types with labels and examples

Authentication is a single shared bearer token taken from the REVIEW_TOKEN
environment variable; unset means open access (local annotation sessions).
"""

from __future__ import annotations

import os

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .store import (
    AnnotationValidationError,
    ReviewStore,
    StaleAssignmentError,
    taxonomy_entries,
    utc_now,
    validate_annotation_payload,
)

AUTH_ENV = "REVIEW_TOKEN"


def create_app(store: ReviewStore, taxonomy: list[dict] | None = None) -> FastAPI:
    app = FastAPI(title="mtcrit review service", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    entries = taxonomy if taxonomy is not None else taxonomy_entries()

    def unauthorized(request: Request) -> JSONResponse | None:
        token = os.environ.get(AUTH_ENV)
        if not token:
            return None
        header = request.headers.get("authorization", "")
        if header == f"Bearer {token}":
            return None
        return JSONResponse({"error": "missing or invalid bearer token"}, status_code=401)

    @app.get("/api/queue/next")
    def queue_next(request: Request, annotator: str = ""):
        denied = unauthorized(request)
        if denied:
            return denied
        if not annotator:
            return JSONResponse({"errors": ["annotator query parameter is required"]}, status_code=422)
        record = store.next_item(annotator)
        if record is None:
            return Response(status_code=204)
        progress = store.progress()
        return JSONResponse({"record": record.to_dict(), "progress": progress})

    @app.post("/api/annotations")
    async def post_annotation(request: Request):
        denied = unauthorized(request)
        if denied:
            return denied
        try:
            payload = await request.json()
        except Exception:
            return JSONResponse({"errors": ["body must be valid JSON"]}, status_code=422)
        event, errors = validate_annotation_payload(payload, timestamp=utc_now())
        if errors:
            return JSONResponse({"errors": errors}, status_code=422)
        try:
            store.submit_annotation(event)
        except StaleAssignmentError as exc:
            return JSONResponse({"error": str(exc)}, status_code=409)
        except AnnotationValidationError as exc:
            return JSONResponse({"errors": exc.errors}, status_code=422)
        return JSONResponse({"status": "recorded", "record_id": event.record_id}, status_code=201)

    @app.get("/api/progress")
    def progress(request: Request):
        denied = unauthorized(request)
        if denied:
            return denied
        return JSONResponse(store.progress())

    @app.get("/api/taxonomy")
    def taxonomy_list(request: Request):
        denied = unauthorized(request)
        if denied:
            return denied
        return JSONResponse({"error_types": entries})

    return app


def serve(store: ReviewStore, host: str = "127.0.0.1", port: int = 8008) -> None:
    import uvicorn

    uvicorn.run(create_app(store), host=host, port=port, log_level="warning")
