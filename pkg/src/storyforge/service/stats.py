"""Engagement statistics over story and session records.

Pure functions shared by the service API and the offline report tool: daily
creation counts, daily completed-session counts, and reading minutes summed
into the starting hour of each session. Buckets are zero-filled across the
requested range so disjoint ranges add bucket-wise.
"""

from __future__ import annotations

from datetime import date, timedelta

from .sessions import minutes_between, parse_t


def _dates_in(start: str, end: str) -> list[str]:
    first, last = date.fromisoformat(start), date.fromisoformat(end)
    if last < first:
        return []
    out = []
    cursor = first
    while cursor <= last:
        out.append(cursor.isoformat())
        cursor += timedelta(days=1)
    return out


def _day_of(timestamp: str) -> str:
    return parse_t(timestamp).date().isoformat()


def session_duration_minutes(session: dict) -> float:
    """Last event time minus session start; sessions without events read zero."""
    events = session.get("events", [])
    if not events:
        return 0.0
    return max(0.0, minutes_between(session["started_at"], events[-1]["t"]))


def engagement_stats(stories: list[dict], sessions: list[dict],
                     start: str, end: str) -> dict:
    """Creation and reading series for [start, end], both dates inclusive."""
    days = _dates_in(start, end)
    in_range = set(days)
    created = {day: 0 for day in days}
    completed = {day: 0 for day in days}
    by_hour = [0.0] * 24
    devices: dict[str, dict[str, float]] = {
        "reader": {"sessions": 0, "minutes": 0.0},
        "creator": {"sessions": 0, "minutes": 0.0},
    }

    for story in stories:
        day = _day_of(story["created_at"])
        if day in in_range:
            created[day] += 1

    for session in sessions:
        start_day = _day_of(session["started_at"])
        if start_day not in in_range:
            continue
        duration = session_duration_minutes(session)
        if session.get("events"):
            hour = parse_t(session["started_at"]).hour
            by_hour[hour] += duration
            device = session.get("device", "reader")
            bucket = devices.setdefault(device, {"sessions": 0, "minutes": 0.0})
            bucket["sessions"] += 1
            bucket["minutes"] += duration
        for event in session.get("events", []):
            if event.get("type") == "completed":
                day = _day_of(event["t"])
                if day in in_range:
                    completed[day] += 1

    return {
        "range": {"start": start, "end": end},
        "stories_created_per_day": created,
        "sessions_completed_per_day": completed,
        "reading_minutes_by_hour_of_day": by_hour,
        "device_breakdown": devices,
    }
