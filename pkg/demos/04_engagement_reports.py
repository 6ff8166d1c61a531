"""Build a multi-account export and render the offline reports.

Run from the repository root: python3 demos/04_engagement_reports.py
"""

from storyforge.insights import (
    behavior_categories,
    creation_heatmap,
    reading_by_hour,
    render_table,
)

BEHAVIORS = [
    "keeping quiet in the library",
    "washing hands before meals",
    "taking turns during playtime",
    "going to bed on time",
]


def export_for(account: str, stories: int, evening_reads: int) -> dict:
    return {
        "export_version": "1",
        "account": account,
        "stories": [
            {"id": f"{account}-s{i}", "title": f"Story {i}",
             "topic_type": "relationship",
             "behavior": BEHAVIORS[i % len(BEHAVIORS)],
             "created_at": f"2026-08-{(i % 14) + 1:02d}T09:00:00+00:00"}
            for i in range(stories)
        ],
        "sessions": [
            {"id": f"{account}-r{i}", "story_id": f"{account}-s0",
             "device": "reader", "started_at": "2026-08-05T21:15:00+00:00",
             "completed": True,
             "events": [
                 {"type": "page_view", "section_id": "cover",
                  "t": "2026-08-05T21:15:00+00:00"},
                 {"type": "completed", "path_kind": "desirable",
                  "t": "2026-08-05T21:21:00+00:00"},
             ]}
            for i in range(evening_reads)
        ],
    }


exports = [export_for(f"dyad-{i:02d}", stories=10 + i % 5, evening_reads=1 + i % 3)
           for i in range(6)]

print("== creation heatmap ==")
print(render_table(creation_heatmap(exports)))

print("\n== reading by hour ==")
print(render_table(reading_by_hour(exports)))

print("\n== behavior categories ==")
mapping = {
    "shared space": ["library", "quiet"],
    "hygiene": ["washing hands"],
    "interpersonal": ["taking turns"],
    "bedtime": ["bed"],
}
print(render_table(behavior_categories(exports, mapping)))
