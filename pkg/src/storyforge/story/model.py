"""Value types for branching social-narrative stories.

A story is a DAG of sections with a single branch point (the Challenge).
One branch is the desirable behavior; the others are undesirable and must
pass through a repair sequence before rejoining the shared positive Ending.
All values here are immutable after construction; mutation happens by
building a new ``Story``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace


class TopicType(enum.Enum):
    """Behavior domain of a story; fixes its branch pattern."""

    RELATIONSHIP = "relationship"
    SOCIAL_RULES = "social_rules"
    HEALTHY_HABITS = "healthy_habits"

    @classmethod
    def parse(cls, token: str) -> "TopicType":
        try:
            return cls(token)
        except ValueError:
            raise ValueError(f"unknown topic type: {token!r}") from None


#: Required number of undesirable paths per topic type.
UNDESIRABLE_PATH_COUNT: dict[TopicType, int] = {
    TopicType.RELATIONSHIP: 2,
    TopicType.SOCIAL_RULES: 1,
    TopicType.HEALTHY_HABITS: 1,
}


class SectionKind(enum.Enum):
    COVER = "cover"
    INTRODUCTION = "introduction"
    CHALLENGE = "challenge"
    DECISION = "decision"
    CONSEQUENCE = "consequence"
    REPAIR = "repair"
    RESPONSE = "response"
    REPAIRED_CONSEQUENCE = "repaired_consequence"
    ENDING = "ending"

    @classmethod
    def parse(cls, token: str) -> "SectionKind":
        try:
            return cls(token)
        except ValueError:
            raise ValueError(f"unknown section kind: {token!r}") from None


#: Section kinds that must appear exactly once in every story.
SINGLETON_KINDS = (
    SectionKind.COVER,
    SectionKind.INTRODUCTION,
    SectionKind.CHALLENGE,
    SectionKind.ENDING,
)

#: Kind sequence after the Challenge on the single desirable path.
DESIRABLE_CHAIN = (
    SectionKind.DECISION,
    SectionKind.CONSEQUENCE,
    SectionKind.ENDING,
)

#: Kind sequence after the Challenge on every undesirable path.
REPAIR_CHAIN = (
    SectionKind.DECISION,
    SectionKind.CONSEQUENCE,
    SectionKind.REPAIR,
    SectionKind.RESPONSE,
    SectionKind.REPAIRED_CONSEQUENCE,
    SectionKind.ENDING,
)


@dataclass(frozen=True)
class EmotionCue:
    """A character's emotion paired with its observable response.

    Example: character "Max" is "happy" (emotion) and "smiles" (response).
    """

    character: str
    emotion: str
    observable_response: str

    @property
    def populated(self) -> bool:
        return bool(self.emotion.strip()) and bool(self.observable_response.strip())


@dataclass(frozen=True)
class Section:
    """One story page: text, optional illustration, successor links."""

    id: str
    kind: SectionKind
    text: str
    next: tuple[str, ...] = ()
    illustration: str | None = None
    emotion_cues: tuple[EmotionCue, ...] = ()
    translation: str | None = None

    def with_text(self, text: str) -> "Section":
        return replace(self, text=text)


@dataclass(frozen=True)
class PathGraph:
    """The section DAG with its recorded path decomposition.

    ``desirable_path`` and ``undesirable_paths`` are the declared
    root-to-Ending section id sequences; ``validate_structure`` checks that
    they agree with the actual topology.
    """

    sections: dict[str, Section]
    root: str
    challenge: str
    ending: str
    desirable_path: tuple[str, ...]
    undesirable_paths: tuple[tuple[str, ...], ...]

    def section(self, section_id: str) -> Section:
        try:
            return self.sections[section_id]
        except KeyError:
            raise KeyError(f"no such section: {section_id!r}") from None

    def challenge_options(self) -> tuple[str, ...]:
        """Successor ids of the Challenge, in stored option order."""
        return self.sections[self.challenge].next if self.challenge in self.sections else ()


@dataclass(frozen=True)
class ProfileEntityRef:
    """A personalization entity captured in the story's profile snapshot."""

    id: str
    kind: str  # interest | person | place
    name: str
    description: str = ""
    photo: str | None = None


@dataclass(frozen=True)
class ProfileSnapshot:
    """The entities a story was personalized with, embedded for self-containment."""

    child_name: str
    child_photo: str | None = None
    entities: tuple[ProfileEntityRef, ...] = ()

    def names(self) -> set[str]:
        """All referenceable entity names, including the child, lowercased."""
        out = {self.child_name.lower()}
        out.update(e.name.lower() for e in self.entities)
        return out

    def by_kind(self, kind: str) -> tuple[ProfileEntityRef, ...]:
        return tuple(e for e in self.entities if e.kind == kind)


@dataclass(frozen=True)
class TargetBehavior:
    """The parent-entered behavior a story teaches, with its classified topic."""

    text: str
    classified_type: TopicType

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("target behavior text must be non-empty")


@dataclass(frozen=True)
class SectionEdit:
    """One manual text edit, recorded append-only in the story's edit log."""

    section_id: str
    edited_at: str
    old_digest: str
    new_digest: str


@dataclass(frozen=True)
class LanguageTag:
    source: str = "en"
    translation: str | None = None


@dataclass(frozen=True)
class Story:
    id: str
    title: str
    topic_type: TopicType
    target_behavior: TargetBehavior
    profile_snapshot: ProfileSnapshot
    graph: PathGraph
    reward_sticker: str | None
    created_at: str
    language: LanguageTag = field(default_factory=LanguageTag)
    edit_log: tuple[SectionEdit, ...] = ()

    def section(self, section_id: str) -> Section:
        return self.graph.section(section_id)

    def sections_in_order(self) -> tuple[Section, ...]:
        """Sections in a stable, path-oriented order (root first, ending last)."""
        seen: list[str] = []
        for path in (self.graph.desirable_path, *self.graph.undesirable_paths):
            for sid in path:
                if sid not in seen:
                    seen.append(sid)
        for sid in self.graph.sections:
            if sid not in seen:
                seen.append(sid)
        return tuple(self.graph.sections[sid] for sid in seen if sid in self.graph.sections)

    def replace_section(self, section: Section) -> "Story":
        sections = dict(self.graph.sections)
        sections[section.id] = section
        return replace(self, graph=replace(self.graph, sections=sections))
