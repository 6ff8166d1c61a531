"""The on-disk story document format.

A story serializes to a single self-contained JSON document embedding the
profile snapshot, so files render without a live profile store. The format
is versioned and schema-validated; binary image data is referenced by
content-addressed refs, never embedded. Serialization is canonical (sorted
keys, two-space indent, trailing newline) so identical stories produce
byte-identical files.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from typing import Any

import jsonschema

from .model import (
    EmotionCue,
    LanguageTag,
    PathGraph,
    ProfileEntityRef,
    ProfileSnapshot,
    Section,
    SectionEdit,
    SectionKind,
    Story,
    TargetBehavior,
    TopicType,
)

FORMAT_VERSION = "1"


class DocumentError(ValueError):
    """Raised when a document cannot be parsed; ``code`` is a stable error name."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@lru_cache(maxsize=1)
def _schema() -> dict[str, Any]:
    text = resources.files(__package__).joinpath("data/story_schema.json").read_text("utf-8")
    return json.loads(text)


def story_to_document(story: Story, preprocessing: dict[str, Any] | None = None) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "story": {
            "id": story.id,
            "title": story.title,
            "topic_type": story.topic_type.value,
            "target_behavior": {
                "text": story.target_behavior.text,
                "classified_type": story.target_behavior.classified_type.value,
            },
            "reward_sticker": story.reward_sticker,
            "created_at": story.created_at,
            "language": {
                "source": story.language.source,
                "translation": story.language.translation,
            },
        },
        "sections": [
            {
                "id": s.id,
                "kind": s.kind.value,
                "text": s.text,
                "translation": s.translation,
                "illustration": s.illustration,
                "emotion_cues": [
                    {
                        "character": c.character,
                        "emotion": c.emotion,
                        "observable_response": c.observable_response,
                    }
                    for c in s.emotion_cues
                ],
                "next": list(s.next),
            }
            for s in story.sections_in_order()
        ],
        "paths": {
            "root": story.graph.root,
            "challenge": story.graph.challenge,
            "ending": story.graph.ending,
            "desirable": list(story.graph.desirable_path),
            "undesirable": [list(p) for p in story.graph.undesirable_paths],
        },
        "profile_snapshot": {
            "child_name": story.profile_snapshot.child_name,
            "child_photo": story.profile_snapshot.child_photo,
            "entities": [
                {
                    "id": e.id,
                    "kind": e.kind,
                    "name": e.name,
                    "description": e.description,
                    "photo": e.photo,
                }
                for e in story.profile_snapshot.entities
            ],
        },
        "edit_log": [
            {
                "section_id": e.section_id,
                "edited_at": e.edited_at,
                "old_digest": e.old_digest,
                "new_digest": e.new_digest,
            }
            for e in story.edit_log
        ],
    }
    if preprocessing is not None:
        doc["preprocessing"] = preprocessing
    return doc


def story_from_document(doc: dict[str, Any]) -> Story:
    if not isinstance(doc, dict):
        raise DocumentError("malformed", "document must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise DocumentError(
            "unsupported-version",
            f"format_version {version!r} is not supported (expected {FORMAT_VERSION!r})",
        )
    try:
        jsonschema.validate(doc, _schema())
    except jsonschema.ValidationError as err:
        raise DocumentError("schema", f"document fails schema: {err.message}") from err

    sections: dict[str, Section] = {}
    for raw in doc["sections"]:
        if raw["id"] in sections:
            raise DocumentError("schema", f"duplicate section id {raw['id']!r}")
        sections[raw["id"]] = Section(
            id=raw["id"],
            kind=SectionKind.parse(raw["kind"]),
            text=raw["text"],
            next=tuple(raw["next"]),
            illustration=raw.get("illustration"),
            translation=raw.get("translation"),
            emotion_cues=tuple(
                EmotionCue(c["character"], c["emotion"], c["observable_response"])
                for c in raw.get("emotion_cues", [])
            ),
        )

    paths = doc["paths"]
    graph = PathGraph(
        sections=sections,
        root=paths["root"],
        challenge=paths["challenge"],
        ending=paths["ending"],
        desirable_path=tuple(paths["desirable"]),
        undesirable_paths=tuple(tuple(p) for p in paths["undesirable"]),
    )
    snapshot_raw = doc["profile_snapshot"]
    snapshot = ProfileSnapshot(
        child_name=snapshot_raw["child_name"],
        child_photo=snapshot_raw.get("child_photo"),
        entities=tuple(
            ProfileEntityRef(
                id=e["id"],
                kind=e["kind"],
                name=e["name"],
                description=e.get("description", ""),
                photo=e.get("photo"),
            )
            for e in snapshot_raw["entities"]
        ),
    )
    meta = doc["story"]
    return Story(
        id=meta["id"],
        title=meta["title"],
        topic_type=TopicType.parse(meta["topic_type"]),
        target_behavior=TargetBehavior(
            text=meta["target_behavior"]["text"],
            classified_type=TopicType.parse(meta["target_behavior"]["classified_type"]),
        ),
        profile_snapshot=snapshot,
        graph=graph,
        reward_sticker=meta.get("reward_sticker"),
        created_at=meta["created_at"],
        language=LanguageTag(
            source=meta["language"]["source"],
            translation=meta["language"].get("translation"),
        ),
        edit_log=tuple(
            SectionEdit(
                section_id=e["section_id"],
                edited_at=e["edited_at"],
                old_digest=e["old_digest"],
                new_digest=e["new_digest"],
            )
            for e in doc["edit_log"]
        ),
    )


def dumps_story(story: Story, preprocessing: dict[str, Any] | None = None) -> str:
    doc = story_to_document(story, preprocessing)
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def loads_story(text: str) -> Story:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise DocumentError("malformed", f"not valid JSON: {err}") from err
    return story_from_document(doc)
