"""Drive a shared reading session end to end: choices, repair path, rewards.

Run from the repository root: python3 demos/03_reading_session.py
"""

import tempfile
from datetime import datetime, timedelta, timezone

from storyforge.pipeline import mock_suite
from storyforge.service import StoryService
from storyforge.story import enumerate_paths
from storyforge.story.document import story_from_document

BASE = datetime(2026, 8, 1, 20, 30, tzinfo=timezone.utc)


def t(minutes: float) -> str:
    return (BASE + timedelta(minutes=minutes)).isoformat(timespec="seconds")


with tempfile.TemporaryDirectory() as root:
    svc = StoryService(root, providers=mock_suite(seed=5), inline_jobs=True,
                       clock=lambda: t(0))
    account = "family"
    svc.set_child(account, name="Alex", photo="img-child01")
    svc.upsert_entity(account, "interest", "firefighter", "loves fire trucks")
    svc.upsert_entity(account, "person", "Max", "close friend", photo="img-max01")
    svc.upsert_entity(account, "place", "playground", "near home")
    sticker = svc.upsert_sticker(account, "Fire Truck", "img-sticker-fire")

    job_id = svc.create_story(account, ["firefighter"],
                              "taking turns during playtime", sticker["id"])
    story_id = svc.get_job(account, job_id)["story_id"]
    doc = svc.get_story(account, story_id)
    story = story_from_document({k: v for k, v in doc.items() if k != "version"})
    print(f"created {doc['story']['title']!r} with "
          f"{len(doc['paths']['undesirable'])} undesirable path(s)")

    # First read: the child picks an undesirable branch and repairs it.
    undesirable = enumerate_paths(story)[1]
    session = svc.start_session(account, story_id, started_at=t(0))
    print(f"option cards arrive shuffled by the server: "
          f"{[o['section_id'] for o in session['options']]}")
    minute = 1.0
    for sid in undesirable:
        svc.record_event(account, session["id"],
                         {"type": "page_view", "section_id": sid, "t": t(minute)})
        minute += 0.5
    outcome = svc.complete_session(account, session["id"], at=t(minute))
    print(f"first read: {outcome['path_kind']} path -> "
          f"{outcome['sticker']['kind']} sticker ({outcome['sticker']['label']})")

    # Reread: a fresh session, this time along the desirable branch.
    desirable = enumerate_paths(story)[0]
    session = svc.start_session(account, story_id, started_at=t(minute + 1))
    for sid in desirable:
        minute += 0.5
        svc.record_event(account, session["id"],
                         {"type": "page_view", "section_id": sid, "t": t(minute)})
    outcome = svc.complete_session(account, session["id"], at=t(minute + 0.5))
    print(f"reread: {outcome['path_kind']} path -> "
          f"{outcome['sticker']['kind']} sticker ({outcome['sticker']['label']})")

    stats = svc.engagement_stats(account, "2026-08-01", "2026-08-01")
    print(f"reading minutes at hour 20: "
          f"{stats['reading_minutes_by_hour_of_day'][20]:.1f}")
    svc.close()
