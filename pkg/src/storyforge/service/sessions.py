"""Reading-session event replay: the pure state machine behind shared reading.

A session's accepted events replay into a walk over the story graph. Page
views move forward one link at a time, backward jumps rewind the walk to a
previously visited page, and restarts from the cover begin a fresh walk;
anything else is an invalid transition (rejected, session continues). The
final walk decides the reward: the desirable path earns the story's own
sticker, an undesirable read-through earns the built-in star.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

from ..story.model import Story
from ..story.paths import enumerate_paths
from .errors import ServiceError

SESSION_IDLE_LIMIT_MINUTES = 60.0


@dataclass
class SessionState:
    current_path: list[str] = field(default_factory=list)
    visited: set[str] = field(default_factory=set)
    last_t: str | None = None
    chosen_options: list[int] = field(default_factory=list)


def parse_t(value: str) -> datetime:
    try:
        return datetime.fromisoformat(value)
    except (TypeError, ValueError):
        raise ServiceError("bad-request", f"event timestamp {value!r} is not ISO 8601")


def minutes_between(earlier: str, later: str) -> float:
    return (parse_t(later) - parse_t(earlier)).total_seconds() / 60.0


def apply_event(story: Story, state: SessionState, event: dict,
                option_mapping: list[int]) -> SessionState:
    """Apply one event or raise ``ServiceError('invalid-transition', ...)``.

    Mutates and returns ``state``. ``option_mapping`` maps presented option
    positions to actual Challenge successor indexes.
    """
    kind = event.get("type")
    t = event.get("t")
    if t is None:
        raise ServiceError("bad-request", "event requires a timestamp 't'")
    parse_t(t)
    graph = story.graph

    if kind == "page_view":
        section_id = event.get("section_id")
        if section_id not in graph.sections:
            raise ServiceError("invalid-transition",
                               f"no such section {section_id!r}")
        if section_id == graph.root:
            state.current_path = [section_id]
        elif state.current_path and section_id in graph.sections[
                state.current_path[-1]].next:
            state.current_path.append(section_id)
        elif section_id in state.current_path:
            state.current_path = state.current_path[
                :state.current_path.index(section_id) + 1]
        else:
            raise ServiceError("invalid-transition",
                               f"section {section_id!r} is not reachable from here")
        state.visited.add(section_id)
    elif kind == "choice":
        index = event.get("option_index")
        if not state.current_path or state.current_path[-1] != graph.challenge:
            raise ServiceError("invalid-transition",
                               "a choice is only valid on the challenge page")
        options = graph.sections[graph.challenge].next
        if not isinstance(index, int) or not 0 <= index < len(options):
            raise ServiceError("invalid-transition",
                               f"option index {index!r} is out of range")
        actual = option_mapping[index]
        event["section_id"] = options[actual]
        event["actual_index"] = actual
        state.chosen_options.append(actual)
    else:
        raise ServiceError("bad-request", f"client cannot post event type {kind!r}")

    state.last_t = t
    return state


def replay(story: Story, events: list[dict], option_mapping: list[int]) -> SessionState:
    state = SessionState()
    for event in events:
        if event.get("type") in ("completed", "reward_issued"):
            state.last_t = event.get("t", state.last_t)
            continue
        apply_event(story, state, dict(event), option_mapping)
    return state


def completed_path_kind(story: Story, state: SessionState) -> tuple[str, tuple[str, ...]]:
    """(path kind, path) for the final walk, or an ``incomplete-path`` error."""
    walk = tuple(state.current_path)
    if not walk or walk[-1] != story.graph.ending:
        raise ServiceError("incomplete-path",
                           "the session has not reached the ending")
    for path in enumerate_paths(story):
        if walk == tuple(path):
            kind = "desirable" if walk == tuple(story.graph.desirable_path) else "undesirable"
            return kind, walk
    raise ServiceError("incomplete-path",
                       "the visited pages do not form a full story path")
