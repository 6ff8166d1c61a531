"""Generate one story per topic with the mock providers and inspect its shape.

Run from the repository root: python3 demos/01_generate_and_validate.py
"""

import json
from pathlib import Path

from storyforge.pipeline import ChildProfile, GenerationRequest, PipelineOptions
from storyforge.pipeline import mock_suite, run_pipeline
from storyforge.story import enumerate_paths, validate_structure
from storyforge.story.document import story_from_document

profile = ChildProfile.from_dict(
    json.loads((Path(__file__).parent / "profile.alex.json").read_text()))

BEHAVIORS = [
    "asking a friend for permission to try their toy",
    "keeping calm during prayer at church",
    "washing hands before meals",
]

for behavior in BEHAVIORS:
    request = GenerationRequest(
        profile=profile,
        selected_interests=("firefighter",),
        behavior=behavior,
        reward_sticker="sticker-fire",
    )
    options = PipelineOptions(seed=1, clock=lambda: "2026-08-01T00:00:00+00:00")
    job = run_pipeline(request, mock_suite(seed=1), options)
    story = story_from_document(job.story_document)

    print(f"\n=== {behavior!r} -> {story.topic_type.value}")
    print(f"title: {story.title}")
    report = validate_structure(story)
    print(f"structural violations: {len(report.violations)}")
    for path in enumerate_paths(story):
        kinds = " > ".join(story.section(sid).kind.value for sid in path[3:])
        flavor = "desirable" if path == story.graph.desirable_path else "undesirable"
        print(f"  [{flavor}] challenge > {kinds}")
    print("stage log:", ", ".join(f"{r.stage}#{r.attempt}:{r.verdict}"
                                  for r in job.stage_log))
