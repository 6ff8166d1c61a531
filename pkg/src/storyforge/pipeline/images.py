"""Illustration generation with preprocessing cache and bounded parallelism.

Each section gets one image; requests for distinct sections run concurrently.
The preprocessing cache keeps per-section scene descriptions and entity
assignments keyed by a digest of the section text: regenerating an image for
an unedited section reuses them and costs exactly one image-provider call,
while an edited section re-runs scene planning, entity matching, and entity
describing for that section only.
"""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from ..story.model import Story
from .prompts import render
from .providers import ImageRequest, ProviderError, ProviderSuite
from .request import PipelineOptions
from .scenes import (
    EntityAssignment,
    EntityDescription,
    SceneDescription,
    describe_entities,
    generate_scene_descriptions,
    match_entities,
)
from .stages import StageError

logger = logging.getLogger(__name__)


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


@dataclass
class SectionPrep:
    text_digest: str
    scene: SceneDescription
    assignment: EntityAssignment

    def to_dict(self) -> dict:
        return {
            "text_digest": self.text_digest,
            "scene": self.scene.to_dict(),
            "assignment": self.assignment.to_dict(),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "SectionPrep":
        return cls(
            text_digest=raw["text_digest"],
            scene=SceneDescription.from_dict(raw["scene"]),
            assignment=EntityAssignment.from_dict(raw["assignment"]),
        )


@dataclass
class PreprocessingCache:
    """Everything regeneration can reuse, serialized inside the story document."""

    sections: dict[str, SectionPrep] = field(default_factory=dict)
    entities: dict[str, EntityDescription] = field(default_factory=dict)
    roster: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "sections": {sid: prep.to_dict() for sid, prep in sorted(self.sections.items())},
            "entities": {name: d.to_dict() for name, d in sorted(self.entities.items())},
            "roster": dict(sorted(self.roster.items())),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "PreprocessingCache":
        return cls(
            sections={sid: SectionPrep.from_dict(p) for sid, p in raw["sections"].items()},
            entities={n: EntityDescription.from_dict(d) for n, d in raw["entities"].items()},
            roster=dict(raw["roster"]),
        )

    def invalidate(self, section_id: str) -> None:
        self.sections.pop(section_id, None)

    def is_fresh(self, story: Story, section_id: str) -> bool:
        prep = self.sections.get(section_id)
        return prep is not None and prep.text_digest == text_digest(
            story.section(section_id).text)


def build_cache(
    story: Story,
    scenes: dict[str, SceneDescription],
    assignments: dict[str, EntityAssignment],
    descriptions: dict[str, EntityDescription],
    roster: dict[str, str],
) -> PreprocessingCache:
    return PreprocessingCache(
        sections={
            sid: SectionPrep(
                text_digest=text_digest(story.section(sid).text),
                scene=scenes[sid],
                assignment=assignments[sid],
            )
            for sid in scenes
        },
        entities=dict(descriptions),
        roster=dict(roster),
    )


def assemble_illustration_request(
    section_id: str,
    scene: SceneDescription,
    assignment: EntityAssignment,
    descriptions: dict[str, EntityDescription],
    child_name: str,
    child_photo: str | None,
) -> ImageRequest:
    """The full prompt for one image: style directive, scene, entities, photos."""
    lines = []
    references = []
    for name in assignment.entities:
        description = descriptions.get(name)
        if description is None:
            continue
        outfit = f" ({description.outfit_context})" if description.outfit_context else ""
        lines.append(f"- {name} [{description.kind}]: {description.appearance}{outfit}")
        if description.photo:
            references.append(description.photo)
    if child_name in assignment.entities and child_photo:
        references.append(child_photo)
    references = tuple(sorted(set(references)))
    prompt = render(
        "illustration",
        scene_description=scene.description,
        entity_descriptions="\n".join(lines) or "- (none)",
        reference_count=len(references),
    )
    return ImageRequest(section_id=section_id, prompt=prompt,
                        reference_images=references)


def _generate_one(providers: ProviderSuite, request: ImageRequest,
                  max_attempts: int) -> tuple[str, str | None]:
    """Returns (image_ref, warning); failures degrade to a placeholder ref."""
    for attempt in range(1, max_attempts + 1):
        try:
            return providers.image.generate(request), None
        except ProviderError as err:
            logger.warning("image attempt %d for %s failed: %s",
                           attempt, request.section_id, err)
    placeholder = f"img-placeholder-{text_digest(request.section_id)}"
    return placeholder, f"illustration-placeholder:{request.section_id}"


def illustrate_story(
    story: Story,
    scenes: dict[str, SceneDescription],
    assignments: dict[str, EntityAssignment],
    descriptions: dict[str, EntityDescription],
    providers: ProviderSuite,
    options: PipelineOptions,
) -> tuple[Story, list[str]]:
    """One image per section, generated concurrently up to the configured limit."""
    snapshot = story.profile_snapshot
    requests = {
        sid: assemble_illustration_request(
            sid, scenes[sid], assignments[sid], descriptions,
            snapshot.child_name, snapshot.child_photo,
        )
        for sid in scenes
    }
    warnings: list[str] = []
    results: dict[str, str] = {}
    workers = max(1, min(options.image_concurrency, len(requests)) if requests else 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {
            sid: pool.submit(_generate_one, providers, request, options.max_attempts)
            for sid, request in requests.items()
        }
        for sid, future in futures.items():
            ref, warning = future.result()
            results[sid] = ref
            if warning:
                warnings.append(warning)

    illustrated = story
    for sid, ref in results.items():
        illustrated = illustrated.replace_section(
            replace(illustrated.section(sid), illustration=ref))
    return illustrated, warnings


def regenerate_illustration(
    story: Story,
    cache: PreprocessingCache,
    section_id: str,
    providers: ProviderSuite,
    options: PipelineOptions,
) -> tuple[Story, PreprocessingCache, str]:
    """Redraw one section's image, reusing preprocessing when the text is unchanged."""
    if section_id not in story.graph.sections:
        raise StageError("illustrate", "no-such-section",
                         f"story has no section {section_id!r}")

    if not cache.is_fresh(story, section_id):
        scenes, extra_roster = generate_scene_descriptions(
            story, providers, options, only_sections=(section_id,))
        roster = {**cache.roster, **extra_roster}
        assignments = match_entities(
            story, {**{sid: p.scene for sid, p in cache.sections.items()}, **scenes},
            roster, providers, options,
            preassigned={sid: p.assignment for sid, p in cache.sections.items()
                         if sid != section_id},
            only_sections=(section_id,),
        )
        descriptions = describe_entities(
            story, {n: roster[n] for n in assignments[section_id].entities if n in roster},
            None, providers, options, known=cache.entities,
        )
        cache.roster = roster
        cache.entities = descriptions
        cache.sections[section_id] = SectionPrep(
            text_digest=text_digest(story.section(section_id).text),
            scene=scenes[section_id],
            assignment=assignments[section_id],
        )

    prep = cache.sections[section_id]
    snapshot = story.profile_snapshot
    request = assemble_illustration_request(
        section_id, prep.scene, prep.assignment, cache.entities,
        snapshot.child_name, snapshot.child_photo,
    )
    ref, warning = _generate_one(providers, request, options.max_attempts)
    if warning:
        logger.warning("regeneration degraded to placeholder for %s", section_id)
    updated = story.replace_section(replace(story.section(section_id), illustration=ref))
    return updated, cache, ref
