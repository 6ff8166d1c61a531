"""The story service: profiles, story lifecycle, reading sessions, rewards, stats.

One ``StoryService`` owns the store, a bounded worker pool for generation
jobs, and per-session locks that serialize each session's event stream.
Generation never blocks a storage transaction: jobs snapshot the profile
into the request at enqueue time and write results back when finished.
"""

from __future__ import annotations

import json
import logging
import queue
import random
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable

from ..pipeline.images import PreprocessingCache, regenerate_illustration, text_digest
from ..pipeline.job import JobStore, run_pipeline
from ..pipeline.mock import mock_suite
from ..pipeline.providers import ProviderSuite
from ..pipeline.request import (
    ChildProfile,
    GenerationRequest,
    PipelineOptions,
    PipelinePreconditionError,
    utc_now_iso,
)
from ..story.document import story_from_document, story_to_document
from ..story.model import ProfileEntityRef
from .errors import ServiceError
from .sessions import (
    SESSION_IDLE_LIMIT_MINUTES,
    apply_event,
    completed_path_kind,
    minutes_between,
    replay,
)
from .stats import engagement_stats
from .storage import Store

logger = logging.getLogger(__name__)

ENTITY_KINDS = ("interest", "person", "place")
DEVICES = ("reader", "creator")


class SessionChannels:
    """In-process fan-out of accepted session events to realtime subscribers."""

    def __init__(self) -> None:
        self._subscribers: dict[str, list[queue.Queue]] = {}
        self._lock = threading.Lock()

    def subscribe(self, session_id: str) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.setdefault(session_id, []).append(q)
        return q

    def unsubscribe(self, session_id: str, q: queue.Queue) -> None:
        with self._lock:
            listeners = self._subscribers.get(session_id, [])
            if q in listeners:
                listeners.remove(q)

    def publish(self, session_id: str, event: dict) -> None:
        with self._lock:
            listeners = list(self._subscribers.get(session_id, []))
        for q in listeners:
            q.put(event)


class StoryService:
    def __init__(
        self,
        root: str | Path,
        providers: ProviderSuite | None = None,
        *,
        worker_pool: int = 2,
        inline_jobs: bool = False,
        clock: Callable[[], str] = utc_now_iso,
        pipeline_options: PipelineOptions | None = None,
        seed: int = 0,
    ):
        self.store = Store(root)
        self.providers = providers or mock_suite(seed=seed)
        self.job_store = JobStore(Path(root) / "jobs")
        self.clock = clock
        self.channels = SessionChannels()
        self.inline_jobs = inline_jobs
        self._executor = ThreadPoolExecutor(max_workers=max(1, worker_pool))
        self._session_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._seed_base = seed
        self._seed_counter = 0
        self._options = pipeline_options or PipelineOptions(clock=clock)

    def close(self) -> None:
        self._executor.shutdown(wait=True)
        self.store.close()

    # -- accounts & profiles ---------------------------------------------

    def _bootstrap(self, account: str) -> None:
        self.store.execute("INSERT OR IGNORE INTO accounts(id) VALUES (?)", (account,))
        star = self.store.query_one(
            "SELECT id FROM stickers WHERE account=? AND kind='star'", (account,))
        if star is None:
            self.store.execute(
                "INSERT INTO stickers(account, id, label, image, kind)"
                " VALUES (?, 'sticker-star', 'Star', 'img-star', 'star')",
                (account,),
            )

    def upsert_entity(self, account: str, kind: str, name: str,
                      description: str = "", photo: str | None = None,
                      entity_id: str | None = None) -> dict:
        self._bootstrap(account)
        if kind not in ENTITY_KINDS:
            raise ServiceError("bad-request", f"unknown entity kind {kind!r}")
        if not name.strip():
            raise ServiceError("bad-request", "entity name is required")
        if entity_id is None:
            entity_id = f"ent-{uuid.uuid4().hex[:10]}"
            duplicate = self.store.query_one(
                "SELECT id FROM entities WHERE account=? AND kind=? AND name=? COLLATE NOCASE",
                (account, kind, name),
            )
            if duplicate:
                raise ServiceError("conflict",
                                   f"a {kind} named {name!r} already exists")
            self.store.execute(
                "INSERT INTO entities(account, id, kind, name, description, photo)"
                " VALUES (?, ?, ?, ?, ?, ?)",
                (account, entity_id, kind, name, description, photo),
            )
        else:
            existing = self.store.query_one(
                "SELECT id FROM entities WHERE account=? AND id=?", (account, entity_id))
            if existing is None:
                raise ServiceError("not-found", f"no entity {entity_id!r}")
            clash = self.store.query_one(
                "SELECT id FROM entities WHERE account=? AND kind=? AND name=? "
                "COLLATE NOCASE AND id<>?",
                (account, kind, name, entity_id),
            )
            if clash:
                raise ServiceError("conflict", f"a {kind} named {name!r} already exists")
            self.store.execute(
                "UPDATE entities SET kind=?, name=?, description=?, photo=?"
                " WHERE account=? AND id=?",
                (kind, name, description, photo, account, entity_id),
            )
        return self.get_entity(account, entity_id)

    def get_entity(self, account: str, entity_id: str) -> dict:
        row = self.store.query_one(
            "SELECT * FROM entities WHERE account=? AND id=?", (account, entity_id))
        if row is None:
            raise ServiceError("not-found", f"no entity {entity_id!r}")
        return {"id": row["id"], "kind": row["kind"], "name": row["name"],
                "description": row["description"], "photo": row["photo"]}

    def _active_jobs(self, account: str) -> list[dict]:
        rows = self.store.query(
            "SELECT request_json FROM jobs WHERE account=? AND status IN"
            " ('pending', 'running')",
            (account,),
        )
        return [json.loads(r["request_json"]) for r in rows]

    def delete_entity(self, account: str, entity_id: str) -> None:
        entity = self.get_entity(account, entity_id)
        for request in self._active_jobs(account):
            if entity["kind"] == "interest":
                selected = {n.lower() for n in request["selected_interests"]}
                if entity["name"].lower() in selected:
                    raise ServiceError("in-use",
                                       "a pending story uses this interest")
            else:
                raise ServiceError("in-use",
                                   "a pending story may involve this entity")
        self.store.execute("DELETE FROM entities WHERE account=? AND id=?",
                           (account, entity_id))

    def upsert_sticker(self, account: str, label: str, image: str,
                       sticker_id: str | None = None) -> dict:
        self._bootstrap(account)
        if not label.strip() or not image.strip():
            raise ServiceError("bad-request", "sticker needs a label and an image")
        if sticker_id is None:
            sticker_id = f"sticker-{uuid.uuid4().hex[:10]}"
            self.store.execute(
                "INSERT INTO stickers(account, id, label, image, kind)"
                " VALUES (?, ?, ?, ?, 'custom')",
                (account, sticker_id, label, image),
            )
        else:
            row = self.store.query_one(
                "SELECT kind FROM stickers WHERE account=? AND id=?",
                (account, sticker_id))
            if row is None:
                raise ServiceError("not-found", f"no sticker {sticker_id!r}")
            if row["kind"] == "star":
                raise ServiceError("conflict", "the built-in star sticker is fixed")
            self.store.execute(
                "UPDATE stickers SET label=?, image=? WHERE account=? AND id=?",
                (label, image, account, sticker_id),
            )
        return self.get_sticker(account, sticker_id)

    def get_sticker(self, account: str, sticker_id: str) -> dict:
        row = self.store.query_one(
            "SELECT * FROM stickers WHERE account=? AND id=?", (account, sticker_id))
        if row is None:
            raise ServiceError("not-found", f"no sticker {sticker_id!r}")
        return {"id": row["id"], "label": row["label"], "image": row["image"],
                "kind": row["kind"]}

    def star_sticker(self, account: str) -> dict:
        self._bootstrap(account)
        row = self.store.query_one(
            "SELECT * FROM stickers WHERE account=? AND kind='star'", (account,))
        return {"id": row["id"], "label": row["label"], "image": row["image"],
                "kind": row["kind"]}

    def set_child(self, account: str, name: str | None = None,
                  photo: str | None = None) -> dict:
        self._bootstrap(account)
        if name is not None:
            self.store.execute("UPDATE accounts SET child_name=? WHERE id=?",
                               (name, account))
        if photo is not None:
            self.store.execute("UPDATE accounts SET child_photo=? WHERE id=?",
                               (photo, account))
        return self.get_profile(account)["child"]

    def set_child_photo(self, account: str, photo: str | None) -> dict:
        if not photo:
            raise ServiceError("bad-request", "a photo is required")
        return self.set_child(account, photo=photo)

    def get_profile(self, account: str) -> dict:
        self._bootstrap(account)
        child = self.store.query_one("SELECT * FROM accounts WHERE id=?", (account,))
        entities = self.store.query(
            "SELECT * FROM entities WHERE account=? ORDER BY rowid", (account,))
        stickers = self.store.query(
            "SELECT * FROM stickers WHERE account=? ORDER BY rowid", (account,))
        return {
            "child": {"name": child["child_name"], "photo": child["child_photo"]},
            "entities": [
                {"id": e["id"], "kind": e["kind"], "name": e["name"],
                 "description": e["description"], "photo": e["photo"]}
                for e in entities
            ],
            "stickers": [
                {"id": s["id"], "label": s["label"], "image": s["image"],
                 "kind": s["kind"]}
                for s in stickers
            ],
        }

    def store_photo(self, account: str, data: bytes) -> str:
        self._bootstrap(account)
        return self.store.store_image(account, data)

    def load_photo(self, account: str, ref: str) -> bytes:
        data = self.store.load_image(account, ref)
        if data is None:
            raise ServiceError("not-found", f"no image {ref!r} for this account")
        return data

    # -- story creation ----------------------------------------------------

    def _profile_for_pipeline(self, account: str) -> ChildProfile:
        profile = self.get_profile(account)
        by_kind: dict[str, list[ProfileEntityRef]] = {k: [] for k in ENTITY_KINDS}
        for raw in profile["entities"]:
            by_kind[raw["kind"]].append(ProfileEntityRef(
                id=raw["id"], kind=raw["kind"], name=raw["name"],
                description=raw["description"], photo=raw["photo"],
            ))
        return ChildProfile(
            child_name=profile["child"]["name"] or "",
            child_photo=profile["child"]["photo"],
            interests=tuple(by_kind["interest"]),
            persons=tuple(by_kind["person"]),
            places=tuple(by_kind["place"]),
        )

    def create_story(self, account: str, interests: list[str], behavior: str,
                     sticker_id: str, translate: bool = False) -> str:
        profile = self._profile_for_pipeline(account)
        if not (profile.child_name and profile.child_photo and profile.interests
                and profile.persons and profile.places):
            raise ServiceError(
                "profile-incomplete",
                "complete the profile first: child photo plus at least one "
                "interest, person, and place",
            )
        try:
            self.get_sticker(account, sticker_id)
        except ServiceError:
            raise ServiceError("bad-request", f"unknown sticker {sticker_id!r}")
        request = GenerationRequest(
            profile=profile,
            selected_interests=tuple(interests),
            behavior=behavior,
            reward_sticker=sticker_id,
            translate=translate,
        )
        try:
            request.check_preconditions()
        except PipelinePreconditionError as err:
            code = "profile-incomplete" if err.code == "profile-incomplete" else "bad-request"
            raise ServiceError(code, str(err)) from err

        job_id = f"job-{uuid.uuid4().hex[:12]}"
        with self._locks_guard:
            self._seed_counter += 1
            seed = self._seed_base + self._seed_counter
        self.store.execute(
            "INSERT INTO jobs(account, id, status, request_json, created_at)"
            " VALUES (?, ?, 'pending', ?, ?)",
            (account, job_id, json.dumps(request.to_dict(), sort_keys=True),
             self.clock()),
        )
        if self.inline_jobs:
            self._run_job(account, job_id, request, seed)
        else:
            self._executor.submit(self._run_job, account, job_id, request, seed)
        return job_id

    def _run_job(self, account: str, job_id: str, request: GenerationRequest,
                 seed: int) -> None:
        self.store.execute("UPDATE jobs SET status='running' WHERE account=? AND id=?",
                           (account, job_id))
        try:
            options = self._options.with_seed(seed)
            job = run_pipeline(request, self.providers, options,
                               job_id=job_id, store=self.job_store)
        except Exception as err:  # precondition races and programming errors
            logger.exception("job %s crashed", job_id)
            self.store.execute(
                "UPDATE jobs SET status='failed', failed_stage='internal',"
                " failure_reason=? WHERE account=? AND id=?",
                (str(err), account, job_id),
            )
            return
        if job.status == "complete":
            self.store.insert_story_version(account, job.story_document)
            self.store.execute(
                "UPDATE jobs SET status='complete', story_id=? WHERE account=? AND id=?",
                (job.story_id, account, job_id),
            )
        else:
            self.store.execute(
                "UPDATE jobs SET status='failed', failed_stage=?, failure_reason=?"
                " WHERE account=? AND id=?",
                (job.failed_stage, job.failure_reason, account, job_id),
            )

    def get_job(self, account: str, job_id: str) -> dict:
        row = self.store.query_one(
            "SELECT * FROM jobs WHERE account=? AND id=?", (account, job_id))
        if row is None:
            raise ServiceError("not-found", f"no job {job_id!r}")
        out = {
            "id": row["id"],
            "status": row["status"],
            "failed_stage": row["failed_stage"],
            "failure_reason": row["failure_reason"],
            "story_id": row["story_id"],
            "created_at": row["created_at"],
        }
        detail = self.job_store.load(job_id)
        if detail is not None:
            out["stage_log"] = [r.to_dict() for r in detail.stage_log]
            out["warnings"] = detail.warnings
        return out

    def wait_for_job(self, account: str, job_id: str, timeout: float = 30.0) -> dict:
        """Poll until the job leaves pending/running; test and CLI convenience."""
        import time

        deadline = time.monotonic() + timeout
        while True:
            job = self.get_job(account, job_id)
            if job["status"] in ("complete", "failed") or time.monotonic() > deadline:
                return job
            time.sleep(0.02)

    # -- story access & editing -------------------------------------------

    def list_stories(self, account: str) -> list[dict]:
        rows = self.store.query(
            "SELECT id, MAX(version) AS version, title, topic, behavior, created_at"
            " FROM stories WHERE account=? GROUP BY id"
            " ORDER BY created_at DESC, id DESC",
            (account,),
        )
        return [
            {"id": r["id"], "version": r["version"], "title": r["title"],
             "topic_type": r["topic"], "behavior": r["behavior"],
             "created_at": r["created_at"]}
            for r in rows
        ]

    def get_story(self, account: str, story_id: str,
                  version: int | None = None) -> dict:
        loaded = self.store.load_story(account, story_id, version)
        if loaded is None:
            raise ServiceError("not-found", f"no story {story_id!r}"
                               + (f" version {version}" if version else ""))
        doc, found_version = loaded
        doc["version"] = found_version
        return doc

    def edit_section_text(self, account: str, story_id: str, section_id: str,
                          new_text: str) -> dict:
        doc = self.get_story(account, story_id)
        doc.pop("version", None)
        sections = {s["id"]: s for s in doc["sections"]}
        if section_id not in sections:
            raise ServiceError("not-found", f"no section {section_id!r}")
        old_text = sections[section_id]["text"]
        if new_text == old_text:
            return self.get_story(account, story_id)
        if not new_text.strip():
            raise ServiceError("bad-request", "section text cannot be empty")
        sections[section_id]["text"] = new_text
        doc["edit_log"].append({
            "section_id": section_id,
            "edited_at": self.clock(),
            "old_digest": text_digest(old_text),
            "new_digest": text_digest(new_text),
        })
        preprocessing = doc.get("preprocessing")
        if preprocessing and section_id in preprocessing.get("sections", {}):
            del preprocessing["sections"][section_id]
        self.store.insert_story_version(account, doc)
        return self.get_story(account, story_id)

    def regenerate_image(self, account: str, story_id: str, section_id: str) -> dict:
        doc = self.get_story(account, story_id)
        doc.pop("version", None)
        preprocessing = doc.get("preprocessing")
        if not preprocessing:
            raise ServiceError("bad-request", "story has no preprocessing record")
        story = story_from_document(doc)
        if section_id not in story.graph.sections:
            raise ServiceError("not-found", f"no section {section_id!r}")
        cache = PreprocessingCache.from_dict(preprocessing)
        updated, cache, ref = regenerate_illustration(
            story, cache, section_id, self.providers, self._options)
        new_doc = story_to_document(updated, preprocessing=cache.to_dict())
        version = self.store.insert_story_version(account, new_doc)
        return {"image_ref": ref, "version": version}

    # -- reading sessions ---------------------------------------------------

    def _session_lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._session_locks.setdefault(session_id, threading.Lock())

    def _load_session(self, account: str, session_id: str) -> dict:
        row = self.store.query_one(
            "SELECT * FROM sessions WHERE account=? AND id=?", (account, session_id))
        if row is None:
            raise ServiceError("not-found", f"no session {session_id!r}")
        return {
            "id": row["id"],
            "story_id": row["story_id"],
            "device": row["device"],
            "started_at": row["started_at"],
            "option_mapping": json.loads(row["option_mapping"]),
            "completed": bool(row["completed"]),
            "events": json.loads(row["events_json"]),
        }

    def start_session(self, account: str, story_id: str, device: str = "reader",
                      started_at: str | None = None) -> dict:
        if device not in DEVICES:
            raise ServiceError("bad-request", f"unknown device {device!r}")
        doc = self.get_story(account, story_id)
        story = story_from_document({k: v for k, v in doc.items() if k != "version"})
        options = story.graph.challenge_options()
        session_id = f"session-{uuid.uuid4().hex[:12]}"
        mapping = list(range(len(options)))
        random.Random(session_id).shuffle(mapping)
        started = started_at or self.clock()
        self.store.execute(
            "INSERT INTO sessions(account, id, story_id, device, started_at,"
            " option_mapping) VALUES (?, ?, ?, ?, ?, ?)",
            (account, session_id, story_id, device, started, json.dumps(mapping)),
        )
        presented = [
            {"position": i, "section_id": options[actual],
             "text": story.section(options[actual]).text}
            for i, actual in enumerate(mapping)
        ]
        return {
            "id": session_id,
            "story_id": story_id,
            "device": device,
            "started_at": started,
            "options": presented,
            "option_mapping": mapping,
        }

    def record_event(self, account: str, session_id: str, event: dict) -> dict:
        with self._session_lock(session_id):
            session = self._load_session(account, session_id)
            if session["completed"]:
                raise ServiceError("session-completed",
                                   "this session already finished; reread in a new one")
            story = story_from_document(
                {k: v for k, v in self.get_story(account, session["story_id"]).items()
                 if k != "version"})
            state = replay(story, session["events"], session["option_mapping"])
            event = dict(event)
            last = state.last_t or session["started_at"]
            if event.get("t") and minutes_between(last, event["t"]) > SESSION_IDLE_LIMIT_MINUTES:
                raise ServiceError("session-expired",
                                   "the session idled past its time limit")
            apply_event(story, state, event, session["option_mapping"])
            events = session["events"] + [event]
            self.store.execute(
                "UPDATE sessions SET events_json=? WHERE account=? AND id=?",
                (json.dumps(events), account, session_id),
            )
        self.channels.publish(session_id, event)
        return event

    def complete_session(self, account: str, session_id: str,
                         at: str | None = None) -> dict:
        with self._session_lock(session_id):
            session = self._load_session(account, session_id)
            if session["completed"]:
                raise ServiceError("session-completed", "already completed")
            doc = self.get_story(account, session["story_id"])
            story = story_from_document({k: v for k, v in doc.items() if k != "version"})
            state = replay(story, session["events"], session["option_mapping"])
            t = at or state.last_t or self.clock()
            last = state.last_t or session["started_at"]
            if minutes_between(last, t) > SESSION_IDLE_LIMIT_MINUTES:
                raise ServiceError("session-expired",
                                   "the session idled past its time limit")
            kind, path = completed_path_kind(story, state)
            if kind == "desirable" and story.reward_sticker:
                try:
                    sticker = self.get_sticker(account, story.reward_sticker)
                except ServiceError:
                    sticker = self.star_sticker(account)
            else:
                sticker = self.star_sticker(account)
            completed_event = {"type": "completed", "path_kind": kind, "t": t}
            reward_event = {"type": "reward_issued", "sticker_id": sticker["id"], "t": t}
            events = session["events"] + [completed_event, reward_event]
            self.store.execute(
                "UPDATE sessions SET events_json=?, completed=1 WHERE account=? AND id=?",
                (json.dumps(events), account, session_id),
            )
        self.channels.publish(session_id, completed_event)
        self.channels.publish(session_id, reward_event)
        return {
            "session_id": session_id,
            "path_kind": kind,
            "path": list(path),
            "sticker": sticker,
        }

    # -- analytics -----------------------------------------------------------

    def _session_dicts(self, account: str) -> list[dict]:
        rows = self.store.query(
            "SELECT * FROM sessions WHERE account=? ORDER BY started_at", (account,))
        return [
            {"id": r["id"], "story_id": r["story_id"], "device": r["device"],
             "started_at": r["started_at"], "completed": bool(r["completed"]),
             "events": json.loads(r["events_json"])}
            for r in rows
        ]

    def engagement_stats(self, account: str, start: str, end: str) -> dict:
        stories = self.list_stories(account)
        return engagement_stats(stories, self._session_dicts(account), start, end)

    def build_export(self, account: str) -> dict:
        return {
            "export_version": "1",
            "account": account,
            "stories": self.list_stories(account),
            "sessions": self._session_dicts(account),
        }
