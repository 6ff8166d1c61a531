"""Versioned HTTP API over the story service.

Thin JSON endpoints: request bodies validate at the edge, business rules stay
in ``StoryService``, and errors surface as ``{"error": code, "message": ...}``
with the code's HTTP status. The realtime channel is an optional WebSocket
that replays each accepted session event document; polling works without it.
"""

from __future__ import annotations

import asyncio
import base64
import binascii
import queue

from fastapi import FastAPI, Header, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, Response

from .core import StoryService
from .errors import ServiceError

DEFAULT_ACCOUNT = "family"


def _account(header_value: str | None) -> str:
    return header_value or DEFAULT_ACCOUNT


def _resolve_photo(service: StoryService, account: str, body: dict) -> str | None:
    """Accept either a pre-stored ref ('photo') or inline bytes ('photo_data')."""
    if body.get("photo_data"):
        try:
            blob = base64.b64decode(body["photo_data"], validate=True)
        except (binascii.Error, ValueError):
            raise ServiceError("bad-request", "photo_data must be base64")
        return service.store_photo(account, blob)
    return body.get("photo")


def create_app(service: StoryService) -> FastAPI:
    app = FastAPI(title="storyforge", version="1")
    app.state.service = service

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, err: ServiceError):
        return JSONResponse(status_code=err.http_status, content=err.to_dict())

    # -- profile management ------------------------------------------------

    @app.get("/v1/profiles/{account}")
    def get_profile(account: str):
        return service.get_profile(account)

    @app.post("/v1/profiles/{account}/entities", status_code=201)
    def upsert_entity(account: str, body: dict):
        photo = _resolve_photo(service, account, body)
        return service.upsert_entity(
            account,
            kind=body.get("kind", ""),
            name=body.get("name", ""),
            description=body.get("description", ""),
            photo=photo,
            entity_id=body.get("id"),
        )

    @app.delete("/v1/profiles/{account}/entities/{entity_id}", status_code=204)
    def delete_entity(account: str, entity_id: str):
        service.delete_entity(account, entity_id)
        return Response(status_code=204)

    @app.post("/v1/profiles/{account}/stickers", status_code=201)
    def upsert_sticker(account: str, body: dict):
        image = _resolve_photo(service, account, body) or body.get("image")
        return service.upsert_sticker(account, label=body.get("label", ""),
                                      image=image or "", sticker_id=body.get("id"))

    @app.post("/v1/profiles/{account}/child/photo")
    def set_child_photo(account: str, body: dict):
        photo = _resolve_photo(service, account, body)
        return service.set_child_photo(account, photo)

    @app.put("/v1/profiles/{account}/child")
    def set_child(account: str, body: dict):
        photo = _resolve_photo(service, account, body)
        return service.set_child(account, name=body.get("name"), photo=photo)

    @app.get("/v1/profiles/{account}/images/{ref}")
    def get_image(account: str, ref: str):
        return Response(content=service.load_photo(account, ref),
                        media_type="application/octet-stream")

    # -- stories -------------------------------------------------------------

    @app.post("/v1/stories", status_code=202)
    def create_story(body: dict, x_account: str | None = Header(default=None)):
        account = _account(x_account)
        job_id = service.create_story(
            account,
            interests=body.get("interests", []),
            behavior=body.get("behavior", ""),
            sticker_id=body.get("sticker_id", ""),
            translate=bool(body.get("translate", False)),
        )
        return {"job_id": job_id}

    @app.get("/v1/jobs/{job_id}")
    def get_job(job_id: str, x_account: str | None = Header(default=None)):
        return service.get_job(_account(x_account), job_id)

    @app.get("/v1/stories")
    def list_stories(x_account: str | None = Header(default=None)):
        return {"stories": service.list_stories(_account(x_account))}

    @app.get("/v1/stories/{story_id}")
    def get_story(story_id: str, version: int | None = None,
                  x_account: str | None = Header(default=None)):
        return service.get_story(_account(x_account), story_id, version)

    @app.patch("/v1/stories/{story_id}/sections/{section_id}")
    def edit_section(story_id: str, section_id: str, body: dict,
                     x_account: str | None = Header(default=None)):
        immutable = set(body) - {"text"}
        if immutable:
            raise ServiceError(
                "structure-immutable",
                f"only the text may change; refused fields: {sorted(immutable)}",
            )
        if "text" not in body:
            raise ServiceError("bad-request", "body requires 'text'")
        return service.edit_section_text(_account(x_account), story_id, section_id,
                                         body["text"])

    @app.post("/v1/stories/{story_id}/sections/{section_id}/image")
    def regenerate_image(story_id: str, section_id: str,
                         x_account: str | None = Header(default=None)):
        return service.regenerate_image(_account(x_account), story_id, section_id)

    # -- reading sessions ------------------------------------------------------

    @app.post("/v1/sessions", status_code=201)
    def start_session(body: dict, x_account: str | None = Header(default=None)):
        return service.start_session(
            _account(x_account),
            story_id=body.get("story_id", ""),
            device=body.get("device", "reader"),
            started_at=body.get("started_at"),
        )

    @app.post("/v1/sessions/{session_id}/events")
    def record_event(session_id: str, body: dict,
                     x_account: str | None = Header(default=None)):
        return service.record_event(_account(x_account), session_id, body)

    @app.post("/v1/sessions/{session_id}/complete")
    def complete_session(session_id: str, body: dict | None = None,
                         x_account: str | None = Header(default=None)):
        at = (body or {}).get("at")
        return service.complete_session(_account(x_account), session_id, at=at)

    @app.websocket("/v1/sessions/{session_id}/channel")
    async def session_channel(websocket: WebSocket, session_id: str):
        await websocket.accept()
        subscription = service.channels.subscribe(session_id)
        disconnected = asyncio.Event()

        async def watch_disconnect():
            try:
                while True:
                    message = await websocket.receive()
                    if message["type"] == "websocket.disconnect":
                        break
            except (WebSocketDisconnect, RuntimeError):
                pass
            disconnected.set()

        watcher = asyncio.create_task(watch_disconnect())
        try:
            while not disconnected.is_set():
                try:
                    event = subscription.get_nowait()
                except queue.Empty:
                    await asyncio.sleep(0.02)
                    continue
                await websocket.send_json(event)
        finally:
            watcher.cancel()
            service.channels.unsubscribe(session_id, subscription)

    # -- analytics ---------------------------------------------------------------

    @app.get("/v1/stats")
    def stats(start: str, end: str, x_account: str | None = Header(default=None)):
        return service.engagement_stats(_account(x_account), start, end)

    @app.get("/v1/export")
    def export(x_account: str | None = Header(default=None)):
        return service.build_export(_account(x_account))

    return app
