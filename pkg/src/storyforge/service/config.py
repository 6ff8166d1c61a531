"""Serve configuration file handling."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml


@dataclass
class ServeConfig:
    """Contents of the ``forge serve --config`` file.

    provider: "mock", "live", or "replay:<fixtures-dir>".
    storage: directory for the database, job records, and photos.
    """

    provider: str = "mock"
    storage: str = "./forge-data"
    host: str = "127.0.0.1"
    port: int = 8080
    seed: int = 0
    worker_pool: int = 2
    image_concurrency: int = 4
    max_attempts: int = 3

    @classmethod
    def load(cls, path: str | Path) -> "ServeConfig":
        raw = yaml.safe_load(Path(path).read_text("utf-8")) or {}
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    def build_providers(self):
        from ..pipeline.mock import mock_suite, replay_suite
        from ..pipeline.providers import live_suite

        if self.provider == "mock":
            return mock_suite(seed=self.seed)
        if self.provider == "live":
            return live_suite()
        if self.provider.startswith("replay:"):
            return replay_suite(self.provider.split(":", 1)[1])
        raise ValueError(f"unknown provider mode {self.provider!r}")
