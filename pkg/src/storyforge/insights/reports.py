"""Offline reports over exported event logs.

Every report is a pure function of the export file: no clock, no network.
Each returns a machine-readable series dict; ``render_table`` turns one into
the human-readable table the CLI prints.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..service.sessions import parse_t
from ..service.stats import session_duration_minutes

EXPORT_VERSION = "1"


class InsightsError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def load_exports(path: str | Path) -> list[dict]:
    """Parse an export file holding one export document or a list of them."""
    try:
        raw = json.loads(Path(path).read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as err:
        raise InsightsError("unreadable", f"cannot read export {path}: {err}") from err
    exports = raw if isinstance(raw, list) else [raw]
    for export in exports:
        if not isinstance(export, dict) or export.get("export_version") != EXPORT_VERSION:
            raise InsightsError(
                "unsupported-version",
                f"expected export_version {EXPORT_VERSION!r}, got "
                f"{export.get('export_version') if isinstance(export, dict) else export!r}",
            )
        story_ids = {s["id"] for s in export.get("stories", [])}
        for session in export.get("sessions", []):
            if session["story_id"] not in story_ids:
                raise InsightsError(
                    "unsupported-version",
                    f"session {session['id']} references unknown story "
                    f"{session['story_id']}",
                )
    return exports


def creation_heatmap(exports: list[dict]) -> dict:
    """Per-account per-day creation counts; cell sums equal total story count."""
    cells: dict[str, dict[str, int]] = {}
    days: set[str] = set()
    total = 0
    for export in exports:
        account = export["account"]
        row = cells.setdefault(account, {})
        for story in export.get("stories", []):
            day = parse_t(story["created_at"]).date().isoformat()
            row[day] = row.get(day, 0) + 1
            days.add(day)
            total += 1
    accounts = sorted(cells)
    return {
        "kind": "creation-heatmap",
        "accounts": accounts,
        "days": sorted(days),
        "cells": cells,
        "total_stories": total,
        "mean_stories_per_account": (total / len(accounts)) if accounts else 0.0,
    }


def reading_by_hour(exports: list[dict]) -> dict:
    """Total reading minutes per start hour, summed across accounts."""
    minutes = [0.0] * 24
    sessions_counted = 0
    for export in exports:
        for session in export.get("sessions", []):
            if not session.get("events"):
                continue
            hour = parse_t(session["started_at"]).hour
            minutes[hour] += session_duration_minutes(session)
            sessions_counted += 1
    return {
        "kind": "reading-by-hour",
        "hours": list(range(24)),
        "minutes": minutes,
        "sessions_counted": sessions_counted,
    }


def load_category_mapping(path: str | Path) -> dict[str, list[str]]:
    """User-editable category file: {"category": ["substring", ...]}."""
    raw = json.loads(Path(path).read_text("utf-8"))
    if not isinstance(raw, dict):
        raise InsightsError("unsupported-version", "category mapping must be an object")
    return {str(k): [str(p) for p in v] for k, v in raw.items()}


def behavior_categories(exports: list[dict], mapping: dict[str, list[str]]) -> dict:
    """Tally stories per category by substring match on the target behavior."""
    counts = {category: 0 for category in mapping}
    counts["uncategorized"] = 0
    for export in exports:
        for story in export.get("stories", []):
            behavior = (story.get("behavior") or "").lower()
            for category, patterns in mapping.items():
                if any(p.lower() in behavior for p in patterns):
                    counts[category] += 1
                    break
            else:
                counts["uncategorized"] += 1
    return {"kind": "behavior-categories", "counts": counts,
            "total_stories": sum(counts.values())}


def render_table(report: dict) -> str:
    kind = report["kind"]
    lines: list[str] = []
    if kind == "creation-heatmap":
        days = report["days"]
        header = ["account"] + days + ["total"]
        lines.append("  ".join(f"{h:>10}" for h in header))
        for account in report["accounts"]:
            row = report["cells"][account]
            values = [row.get(day, 0) for day in days]
            cells = [account] + [str(v) for v in values] + [str(sum(values))]
            lines.append("  ".join(f"{c:>10}" for c in cells))
        lines.append(f"total stories: {report['total_stories']}")
        lines.append(f"mean stories per account: "
                     f"{report['mean_stories_per_account']:.2f}")
    elif kind == "reading-by-hour":
        lines.append(f"{'hour':>4}  {'minutes':>8}")
        for hour, minutes in zip(report["hours"], report["minutes"]):
            lines.append(f"{hour:>4}  {minutes:>8.1f}")
        lines.append(f"sessions counted: {report['sessions_counted']}")
    elif kind == "behavior-categories":
        width = max(len(c) for c in report["counts"]) if report["counts"] else 8
        for category, count in sorted(report["counts"].items(),
                                      key=lambda kv: (-kv[1], kv[0])):
            lines.append(f"{category:<{width}}  {count}")
        lines.append(f"total stories: {report['total_stories']}")
    else:
        raise InsightsError("unsupported-version", f"unknown report kind {kind!r}")
    return "\n".join(lines)
