"""Persistence, reading sessions, rewards, and the HTTP API."""

from .api import create_app
from .config import ServeConfig
from .core import SessionChannels, StoryService
from .errors import ServiceError
from .sessions import SESSION_IDLE_LIMIT_MINUTES, apply_event, completed_path_kind, replay
from .stats import engagement_stats, session_duration_minutes
from .storage import Store

__all__ = [
    "create_app",
    "ServeConfig",
    "SessionChannels",
    "StoryService",
    "ServiceError",
    "SESSION_IDLE_LIMIT_MINUTES",
    "apply_event",
    "completed_path_kind",
    "replay",
    "engagement_stats",
    "session_duration_minutes",
    "Store",
]
