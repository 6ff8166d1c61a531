"""Pipeline inputs: the child profile, the generation request, and run options."""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime, timezone
from typing import Callable

from ..readability.lexicon import CEFRLevel, Lexicon
from ..story.model import ProfileEntityRef
from .fewshot import FewShotBank
from .providers import digest_of


class PipelinePreconditionError(ValueError):
    """A generation request that cannot start; ``code`` names the unmet precondition."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _entity_from_dict(kind: str, raw: dict) -> ProfileEntityRef:
    return ProfileEntityRef(
        id=raw.get("id") or f"{kind[:3]}-{raw['name'].lower().replace(' ', '-')}",
        kind=kind,
        name=raw["name"],
        description=raw.get("description", ""),
        photo=raw.get("photo"),
    )


@dataclass(frozen=True)
class ChildProfile:
    """Everything the pipeline may personalize with."""

    child_name: str
    child_photo: str | None = None
    interests: tuple[ProfileEntityRef, ...] = ()
    persons: tuple[ProfileEntityRef, ...] = ()
    places: tuple[ProfileEntityRef, ...] = ()

    def to_dict(self) -> dict:
        def dump(entities: tuple[ProfileEntityRef, ...]) -> list[dict]:
            return [
                {"id": e.id, "name": e.name, "description": e.description, "photo": e.photo}
                for e in entities
            ]

        return {
            "child": {"name": self.child_name, "photo": self.child_photo},
            "interests": dump(self.interests),
            "persons": dump(self.persons),
            "places": dump(self.places),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ChildProfile":
        child = raw.get("child", {})
        return cls(
            child_name=child.get("name") or raw.get("child_name", ""),
            child_photo=child.get("photo"),
            interests=tuple(_entity_from_dict("interest", e) for e in raw.get("interests", [])),
            persons=tuple(_entity_from_dict("person", e) for e in raw.get("persons", [])),
            places=tuple(_entity_from_dict("place", e) for e in raw.get("places", [])),
        )

    def interest_by_name(self, name: str) -> ProfileEntityRef | None:
        lowered = name.lower()
        for entity in self.interests:
            if entity.name.lower() == lowered:
                return entity
        return None


@dataclass(frozen=True)
class GenerationRequest:
    profile: ChildProfile
    selected_interests: tuple[str, ...]
    behavior: str
    reward_sticker: str | None = None
    translate: bool = False

    def to_dict(self) -> dict:
        return {
            "profile": self.profile.to_dict(),
            "selected_interests": list(self.selected_interests),
            "behavior": self.behavior,
            "reward_sticker": self.reward_sticker,
            "translate": self.translate,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "GenerationRequest":
        return cls(
            profile=ChildProfile.from_dict(raw["profile"]),
            selected_interests=tuple(raw["selected_interests"]),
            behavior=raw["behavior"],
            reward_sticker=raw.get("reward_sticker"),
            translate=bool(raw.get("translate", False)),
        )

    @property
    def digest(self) -> str:
        return digest_of(self.to_dict())

    def check_preconditions(self) -> None:
        if not self.behavior.strip():
            raise PipelinePreconditionError("empty-behavior", "target behavior text is required")
        if not self.selected_interests:
            raise PipelinePreconditionError("no-interest-selected",
                                            "select at least one interest")
        profile = self.profile
        if not (profile.child_name and profile.interests and profile.persons and profile.places):
            raise PipelinePreconditionError(
                "profile-incomplete",
                "profile needs a child plus at least one interest, person, and place",
            )
        for name in self.selected_interests:
            if profile.interest_by_name(name) is None:
                raise PipelinePreconditionError("unknown-interest",
                                                f"interest {name!r} is not in the profile")


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class PipelineOptions:
    max_attempts: int = 3
    image_concurrency: int = 4
    grade_cap: float = 5.0
    cefr_threshold: CEFRLevel = CEFRLevel.B2
    path_sentence_cap: int = 12
    fewshot_k: int = 22
    seed: int = 0
    lexicon: Lexicon | None = None
    bank: FewShotBank | None = None
    clock: Callable[[], str] = utc_now_iso

    def with_seed(self, seed: int) -> "PipelineOptions":
        return replace(self, seed=seed)

    def get_lexicon(self) -> Lexicon:
        if self.lexicon is None:
            self.lexicon = Lexicon.bundled()
        return self.lexicon
