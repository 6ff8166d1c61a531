"""Single-file relational store behind the service.

Stories are kept as document blobs plus indexed metadata; versions are
append-only, so ``story(id, version)`` answers stably forever. All access
goes through one connection guarded by a lock; SQLite transactions give the
per-operation atomicity the API relies on.
"""

from __future__ import annotations

import hashlib
import json
import sqlite3
import threading
from pathlib import Path

_SCHEMA = """
CREATE TABLE IF NOT EXISTS accounts (
    id TEXT PRIMARY KEY,
    child_name TEXT NOT NULL DEFAULT '',
    child_photo TEXT
);
CREATE TABLE IF NOT EXISTS entities (
    account TEXT NOT NULL,
    id TEXT NOT NULL,
    kind TEXT NOT NULL,
    name TEXT NOT NULL,
    description TEXT NOT NULL DEFAULT '',
    photo TEXT,
    PRIMARY KEY (account, id)
);
CREATE UNIQUE INDEX IF NOT EXISTS entities_name
    ON entities(account, kind, name COLLATE NOCASE);
CREATE TABLE IF NOT EXISTS stickers (
    account TEXT NOT NULL,
    id TEXT NOT NULL,
    label TEXT NOT NULL,
    image TEXT NOT NULL,
    kind TEXT NOT NULL DEFAULT 'custom',
    PRIMARY KEY (account, id)
);
CREATE TABLE IF NOT EXISTS images (
    account TEXT NOT NULL,
    ref TEXT NOT NULL,
    data BLOB NOT NULL,
    PRIMARY KEY (account, ref)
);
CREATE TABLE IF NOT EXISTS jobs (
    account TEXT NOT NULL,
    id TEXT NOT NULL,
    status TEXT NOT NULL,
    failed_stage TEXT,
    failure_reason TEXT,
    story_id TEXT,
    request_json TEXT NOT NULL,
    created_at TEXT NOT NULL,
    PRIMARY KEY (account, id)
);
CREATE TABLE IF NOT EXISTS stories (
    account TEXT NOT NULL,
    id TEXT NOT NULL,
    version INTEGER NOT NULL,
    title TEXT NOT NULL,
    topic TEXT NOT NULL,
    behavior TEXT NOT NULL DEFAULT '',
    created_at TEXT NOT NULL,
    doc_json TEXT NOT NULL,
    PRIMARY KEY (account, id, version)
);
CREATE TABLE IF NOT EXISTS sessions (
    account TEXT NOT NULL,
    id TEXT NOT NULL,
    story_id TEXT NOT NULL,
    device TEXT NOT NULL,
    started_at TEXT NOT NULL,
    option_mapping TEXT NOT NULL,
    completed INTEGER NOT NULL DEFAULT 0,
    events_json TEXT NOT NULL DEFAULT '[]',
    PRIMARY KEY (account, id)
);
"""


class Store:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._conn = sqlite3.connect(self.root / "service.db", check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        self._lock = threading.RLock()
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # -- generic helpers -------------------------------------------------

    def execute(self, sql: str, params: tuple = ()) -> None:
        with self._lock, self._conn:
            self._conn.execute(sql, params)

    def query(self, sql: str, params: tuple = ()) -> list[sqlite3.Row]:
        with self._lock:
            return self._conn.execute(sql, params).fetchall()

    def query_one(self, sql: str, params: tuple = ()) -> sqlite3.Row | None:
        rows = self.query(sql, params)
        return rows[0] if rows else None

    @property
    def lock(self) -> threading.RLock:
        return self._lock

    @property
    def connection(self) -> sqlite3.Connection:
        return self._conn

    # -- images (content-addressed, account-scoped) ----------------------

    def store_image(self, account: str, data: bytes) -> str:
        ref = "img-" + hashlib.sha256(data).hexdigest()[:16]
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT OR IGNORE INTO images(account, ref, data) VALUES (?, ?, ?)",
                (account, ref, data),
            )
        return ref

    def load_image(self, account: str, ref: str) -> bytes | None:
        row = self.query_one("SELECT data FROM images WHERE account=? AND ref=?",
                             (account, ref))
        return bytes(row["data"]) if row else None

    # -- stories ----------------------------------------------------------

    def insert_story_version(self, account: str, doc: dict) -> int:
        meta = doc["story"]
        with self._lock, self._conn:
            row = self._conn.execute(
                "SELECT MAX(version) AS v FROM stories WHERE account=? AND id=?",
                (account, meta["id"]),
            ).fetchone()
            version = (row["v"] or 0) + 1
            self._conn.execute(
                "INSERT INTO stories(account, id, version, title, topic, behavior,"
                " created_at, doc_json) VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                (account, meta["id"], version, meta["title"], meta["topic_type"],
                 meta.get("target_behavior", {}).get("text", ""), meta["created_at"],
                 json.dumps(doc, sort_keys=True, ensure_ascii=False)),
            )
        return version

    def load_story(self, account: str, story_id: str,
                   version: int | None = None) -> tuple[dict, int] | None:
        if version is None:
            row = self.query_one(
                "SELECT doc_json, version FROM stories WHERE account=? AND id=?"
                " ORDER BY version DESC LIMIT 1",
                (account, story_id),
            )
        else:
            row = self.query_one(
                "SELECT doc_json, version FROM stories WHERE account=? AND id=? AND version=?",
                (account, story_id, version),
            )
        if row is None:
            return None
        return json.loads(row["doc_json"]), row["version"]
