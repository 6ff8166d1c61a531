"""Illustration preprocessing: scene planning, entity matching, entity describing.

These stages keep pictures coherent across pages: the scene planner reads the
whole story, the matcher decides which entities stand in each picture (with a
continuity guarantee: a character does not vanish between pictures of the
same scene without a justified removal), and the describer fixes one stable
appearance per entity for the entire book.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..story.model import Story
from .prompts import render
from .providers import ProviderSuite
from .request import ChildProfile, PipelineOptions
from .stages import StageError, call_structured, story_text_of


@dataclass(frozen=True)
class SceneDescription:
    section_id: str
    description: str
    required_entities: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "section_id": self.section_id,
            "description": self.description,
            "required_entities": list(self.required_entities),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "SceneDescription":
        return cls(raw["section_id"], raw["description"], tuple(raw["required_entities"]))


@dataclass(frozen=True)
class EntityAssignment:
    section_id: str
    entities: tuple[str, ...]
    removals: tuple[tuple[str, str], ...] = ()

    def to_dict(self) -> dict:
        return {
            "section_id": self.section_id,
            "entities": list(self.entities),
            "removals": [list(r) for r in self.removals],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "EntityAssignment":
        return cls(raw["section_id"], tuple(raw["entities"]),
                   tuple((r[0], r[1]) for r in raw.get("removals", [])))


@dataclass(frozen=True)
class EntityDescription:
    name: str
    kind: str  # person | object | place
    appearance: str
    photo: str | None = None
    outfit_context: str | None = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "appearance": self.appearance,
            "photo": self.photo,
            "outfit_context": self.outfit_context,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "EntityDescription":
        return cls(raw["name"], raw["kind"], raw["appearance"],
                   raw.get("photo"), raw.get("outfit_context"))


def _known_entities(story: Story) -> list[dict]:
    snapshot = story.profile_snapshot
    known = [{"name": snapshot.child_name, "kind": "person"}]
    kind_map = {"interest": "object", "person": "person", "place": "place"}
    for entity in snapshot.entities:
        known.append({"name": entity.name, "kind": kind_map[entity.kind]})
    return known


def _story_place(story: Story) -> str:
    places = story.profile_snapshot.by_kind("place")
    return places[0].name if places else ""


def generate_scene_descriptions(
    story: Story,
    providers: ProviderSuite,
    options: PipelineOptions,
    *,
    only_sections: tuple[str, ...] | None = None,
) -> tuple[dict[str, SceneDescription], dict[str, str]]:
    """One scene per section (cover included) plus the entity roster.

    ``only_sections`` narrows the request to specific pages for cache-refresh
    runs; the whole story text still rides along as context.
    """
    ordered = story.sections_in_order()
    wanted = [s for s in ordered if only_sections is None or s.id in only_sections]
    payload = {
        "child_name": story.profile_snapshot.child_name,
        "place": _story_place(story),
        "known_entities": _known_entities(story),
        "sections": [{"id": s.id, "kind": s.kind.value, "text": s.text} for s in wanted],
        "story_text": story_text_of(story),
    }
    prompt = render(
        "scenes",
        child_name=story.profile_snapshot.child_name,
        known_entities=", ".join(f"{e['name']} ({e['kind']})"
                                 for e in payload["known_entities"]),
        sections="\n".join(f"[{s.id}] ({s.kind.value}) {s.text}" for s in wanted),
    )

    attempts = 0
    current_prompt = prompt
    while True:
        attempts += 1
        response = call_structured(
            providers, "scenes", current_prompt, dict(payload, attempt=attempts),
            "scenes", max_attempts=options.max_attempts, parse_reprompts=1,
        )
        scenes = {s["section_id"]: SceneDescription.from_dict(s) for s in response["scenes"]}
        roster = {e["name"]: e["kind"] for e in response["roster"]}
        expected = {s.id for s in wanted}
        missing_scenes = expected - set(scenes)
        unrostered = {
            name
            for scene in scenes.values()
            for name in scene.required_entities
            if name not in roster
        }
        if not missing_scenes and not unrostered and set(scenes) <= expected:
            return scenes, roster
        if attempts >= 2:
            raise StageError(
                "scenes", "roster-mismatch",
                f"missing scenes {sorted(missing_scenes)}, unrostered {sorted(unrostered)}",
            )
        current_prompt = prompt + (
            f"\nYour previous answer was incomplete: cover every page "
            f"({sorted(missing_scenes)}) and roster every referenced entity "
            f"({sorted(unrostered)})."
        )


def _predecessors(story: Story) -> dict[str, list[str]]:
    preds: dict[str, list[str]] = {sid: [] for sid in story.graph.sections}
    for section in story.graph.sections.values():
        for nxt in section.next:
            if nxt in preds:
                preds[nxt].append(section.id)
    return preds


def _place_of(entities: tuple[str, ...], roster: dict[str, str]) -> str | None:
    for name in entities:
        if roster.get(name) == "place":
            return name
    return None


def match_entities(
    story: Story,
    scenes: dict[str, SceneDescription],
    roster: dict[str, str],
    providers: ProviderSuite,
    options: PipelineOptions,
    *,
    preassigned: dict[str, EntityAssignment] | None = None,
    only_sections: tuple[str, ...] | None = None,
) -> dict[str, EntityAssignment]:
    """Assign entities per section, enforcing same-scene continuity.

    An entity present in a predecessor picture of the same scene carries over
    unless the response justifies its removal; the pipeline appends missing
    carry-overs itself, so the guarantee holds regardless of provider quality.
    """
    assignments: dict[str, EntityAssignment] = dict(preassigned or {})
    predecessors = _predecessors(story)

    for section in story.sections_in_order():
        sid = section.id
        if only_sections is not None and sid not in only_sections:
            continue
        scene = scenes[sid]
        prev_assigned = [p for p in predecessors[sid] if p in assignments]
        previous = None
        if prev_assigned:
            prev = assignments[prev_assigned[0]]
            previous = {
                "section_id": prev.section_id,
                "entities": list(prev.entities),
                "place": _place_of(prev.entities, roster),
            }
        scene_place = _place_of(scene.required_entities, roster)
        payload = {
            "section_id": sid,
            "description": scene.description,
            "required_entities": list(scene.required_entities),
            "previous": previous,
            "place": scene_place,
            "roster": sorted(roster),
        }
        prompt = render(
            "match_entities",
            section_id=sid,
            description=scene.description,
            required_entities=", ".join(scene.required_entities),
            previous=str(previous) if previous else "none (first picture)",
            roster=", ".join(sorted(roster)),
        )
        response = call_structured(
            providers, "match_entities", prompt, payload, "assignment",
            max_attempts=options.max_attempts, parse_reprompts=1,
        )
        entities = [name for name in response["entities"] if name in roster]
        removals = tuple((r["name"], r["reason"]) for r in response.get("removals", []))
        removed_names = {name for name, _ in removals}

        # Continuity guarantee: carry over same-scene predecessors' entities.
        for pred_id in prev_assigned:
            pred = assignments[pred_id]
            if _place_of(pred.entities, roster) != scene_place or scene_place is None:
                continue
            for name in pred.entities:
                if name not in entities and name not in removed_names:
                    entities.append(name)
        assignments[sid] = EntityAssignment(section_id=sid, entities=tuple(entities),
                                            removals=removals)
    return assignments


def describe_entities(
    story: Story,
    roster: dict[str, str],
    profile_like: ChildProfile | None,
    providers: ProviderSuite,
    options: PipelineOptions,
    *,
    known: dict[str, EntityDescription] | None = None,
) -> dict[str, EntityDescription]:
    """One stable appearance per roster entity; profile photos ride along.

    Entities already described (``known``) keep their existing description so
    regeneration never changes how an unrelated entity looks.
    """
    snapshot = story.profile_snapshot
    kind_map = {"interest": "object", "person": "person", "place": "place"}
    profile_entities = [
        {"name": snapshot.child_name, "kind": "person",
         "photo": snapshot.child_photo, "description": "the protagonist child"},
    ]
    registered = list(snapshot.entities)
    if profile_like is not None:
        registered += [*profile_like.interests, *profile_like.persons, *profile_like.places]
    photos: dict[str, str] = {}
    if snapshot.child_photo:
        photos[snapshot.child_name.lower()] = snapshot.child_photo
    for entity in registered:
        if entity.photo:
            photos.setdefault(entity.name.lower(), entity.photo)
    seen = {snapshot.child_name.lower()}
    for entity in registered:
        if entity.name.lower() in seen:
            continue
        seen.add(entity.name.lower())
        profile_entities.append({
            "name": entity.name,
            "kind": kind_map[entity.kind],
            "photo": photos.get(entity.name.lower()),
            "description": entity.description,
        })

    known = dict(known or {})
    todo = {name: kind for name, kind in roster.items() if name not in known}
    if not todo:
        return known

    payload = {
        "roster": [{"name": n, "kind": k} for n, k in sorted(todo.items())],
        "profile_entities": profile_entities,
        "story_text": story_text_of(story),
    }
    prompt = render(
        "describe_entities",
        roster=", ".join(f"{n} ({k})" for n, k in sorted(todo.items())),
        profile_entities="; ".join(
            f"{e['name']} ({e['kind']}, photo={'yes' if e['photo'] else 'no'}): "
            f"{e['description']}"
            for e in profile_entities
        ),
        story_text=story_text_of(story),
    )

    attempts = 0
    current_prompt = prompt
    while True:
        attempts += 1
        response = call_structured(
            providers, "describe_entities", current_prompt,
            dict(payload, attempt=attempts), "entity_descriptions",
            max_attempts=options.max_attempts, parse_reprompts=1,
        )
        described: dict[str, EntityDescription] = {}
        for raw in response["entities"]:
            name = raw["name"]
            if name not in todo:
                continue
            photo = photos.get(name.lower())
            described[name] = EntityDescription(
                name=name,
                kind=raw["kind"],
                appearance=raw["appearance"],
                photo=photo,
                outfit_context=raw.get("outfit_context"),
            )
        missing = set(todo) - set(described)
        bare = {n for n, d in described.items() if d.photo is None and not d.appearance.strip()}
        if not missing and not bare:
            return {**known, **described}
        if attempts >= 2:
            raise StageError(
                "describe_entities", "coverage",
                f"missing descriptions {sorted(missing)}, empty appearance {sorted(bare)}",
            )
        current_prompt = prompt + (
            f"\nYour previous answer was incomplete: describe {sorted(missing | bare)} "
            f"with non-empty appearance text."
        )
