"""Shared fixtures: hand-built story graphs independent of the generation pipeline."""

from __future__ import annotations

import pytest

from storyforge.story import (
    EmotionCue,
    PathGraph,
    ProfileEntityRef,
    ProfileSnapshot,
    Section,
    SectionKind,
    Story,
    TargetBehavior,
    TopicType,
)

CHILD = "Alex"
FRIEND = "Max"
CAREGIVER = "Mom"
TEACHER = "Ms. Lee"
PLACE = "playground"
OBJECT = "fire truck toy"


def make_snapshot(extra_entities: tuple[ProfileEntityRef, ...] = ()) -> ProfileSnapshot:
    return ProfileSnapshot(
        child_name=CHILD,
        child_photo=None,
        entities=(
            ProfileEntityRef(id="int-fire", kind="interest", name="firefighter",
                             description="loves fire trucks"),
            ProfileEntityRef(id="per-max", kind="person", name=FRIEND,
                             description="close friend from school"),
            ProfileEntityRef(id="per-mom", kind="person", name=CAREGIVER,
                             description="mother, primary caregiver"),
            ProfileEntityRef(id="per-lee", kind="person", name=TEACHER,
                             description="teacher at school"),
            ProfileEntityRef(id="pla-play", kind="place", name=PLACE,
                             description="the playground near home"),
        ) + extra_entities,
    )


def _cue(character: str, emotion: str, response: str) -> tuple[EmotionCue, ...]:
    return (EmotionCue(character=character, emotion=emotion, observable_response=response),)


def _undesirable_branch(tag: str, decision_text: str, helper: str,
                        next_after: str = "ending") -> list[Section]:
    return [
        Section(id=f"decision-{tag}", kind=SectionKind.DECISION, text=decision_text,
                next=(f"consequence-{tag}",)),
        Section(id=f"consequence-{tag}", kind=SectionKind.CONSEQUENCE,
                text=f"{FRIEND} is sad and frowns. The game stops.",
                emotion_cues=_cue(FRIEND, "sad", "frowns"),
                next=(f"repair-{tag}",)),
        Section(id=f"repair-{tag}", kind=SectionKind.REPAIR,
                text=f"{helper} says taking turns is fair.",
                next=(f"response-{tag}",)),
        Section(id=f"response-{tag}", kind=SectionKind.RESPONSE,
                text=f"{CHILD} says sorry and asks to play.",
                next=(f"repaired-{tag}",)),
        Section(id=f"repaired-{tag}", kind=SectionKind.REPAIRED_CONSEQUENCE,
                text=f"{FRIEND} is glad and smiles again.",
                emotion_cues=_cue(FRIEND, "glad", "smiles"),
                next=(next_after,)),
    ]


def make_story(
    topic: TopicType = TopicType.RELATIONSHIP,
    *,
    story_id: str = "story-fixture",
    sticker: str | None = "sticker-fire",
    title: str = "Playing Together at the Playground",
) -> Story:
    """A structurally sound story of the requested topic type.

    Relationship stories branch three ways (one desirable, two undesirable);
    the other topics branch two ways with a single repair path.
    """
    undesirable_tags = ["u1", "u2"] if topic is TopicType.RELATIONSHIP else ["u1"]
    helper = {
        TopicType.RELATIONSHIP: FRIEND,
        TopicType.SOCIAL_RULES: TEACHER,
        TopicType.HEALTHY_HABITS: CAREGIVER,
    }[topic]

    sections = [
        Section(id="cover", kind=SectionKind.COVER, text=title, next=("intro",)),
        Section(id="intro", kind=SectionKind.INTRODUCTION,
                text=f"{CHILD} and {FRIEND} play with the {OBJECT} at the {PLACE}.",
                next=("challenge",)),
        Section(id="challenge", kind=SectionKind.CHALLENGE,
                text=f"{CHILD} and {FRIEND} both want the {OBJECT} first. "
                     f"What should {CHILD} do?",
                next=("decision-d", *(f"decision-{t}" for t in undesirable_tags))),
        Section(id="decision-d", kind=SectionKind.DECISION,
                text=f"{CHILD} asks {FRIEND} to take turns with the {OBJECT}.",
                next=("consequence-d",)),
        Section(id="consequence-d", kind=SectionKind.CONSEQUENCE,
                text=f"{FRIEND} is happy and smiles. They play together.",
                emotion_cues=_cue(FRIEND, "happy", "smiles"),
                next=("ending",)),
        Section(id="ending", kind=SectionKind.ENDING,
                text=f"{CHILD} and {FRIEND} take turns with the {OBJECT}. "
                     f"They have fun at the {PLACE}."),
    ]
    decisions = {
        "u1": f"{CHILD} grabs the {OBJECT} without asking.",
        "u2": f"{CHILD} walks away to play alone.",
    }
    for tag in undesirable_tags:
        sections.extend(_undesirable_branch(tag, decisions[tag], helper))

    desirable = ("cover", "intro", "challenge", "decision-d", "consequence-d", "ending")
    undesirable = tuple(
        ("cover", "intro", "challenge", f"decision-{t}", f"consequence-{t}",
         f"repair-{t}", f"response-{t}", f"repaired-{t}", "ending")
        for t in undesirable_tags
    )
    graph = PathGraph(
        sections={s.id: s for s in sections},
        root="cover",
        challenge="challenge",
        ending="ending",
        desirable_path=desirable,
        undesirable_paths=undesirable,
    )
    behavior = {
        TopicType.RELATIONSHIP: "taking turns during playtime",
        TopicType.SOCIAL_RULES: "keeping calm during prayer at church",
        TopicType.HEALTHY_HABITS: "washing hands before meals",
    }[topic]
    return Story(
        id=story_id,
        title=title,
        topic_type=topic,
        target_behavior=TargetBehavior(text=behavior, classified_type=topic),
        profile_snapshot=make_snapshot(),
        graph=graph,
        reward_sticker=sticker,
        created_at="2026-08-01T09:00:00+00:00",
    )


def make_pipeline_profile(*, photos: bool = True):
    from storyforge.pipeline import ChildProfile

    return ChildProfile.from_dict({
        "child": {"name": CHILD, "photo": "img-child01" if photos else None},
        "interests": [{"name": "firefighter", "description": "loves fire trucks"}],
        "persons": [
            {"name": FRIEND, "description": "close friend from school",
             "photo": "img-max01" if photos else None},
            {"name": CAREGIVER, "description": "mother, primary caregiver"},
            {"name": TEACHER, "description": "teacher at school"},
        ],
        "places": [{"name": PLACE, "description": "the playground near home"}],
    })


def make_request(behavior: str = "taking turns during playtime", *,
                 translate: bool = False, photos: bool = True):
    from storyforge.pipeline import GenerationRequest

    return GenerationRequest(
        profile=make_pipeline_profile(photos=photos),
        selected_interests=("firefighter",),
        behavior=behavior,
        reward_sticker="sticker-fire",
        translate=translate,
    )


def fixed_clock() -> str:
    return "2026-08-01T00:00:00+00:00"


def make_options(seed: int = 0, **overrides):
    from storyforge.pipeline import PipelineOptions

    return PipelineOptions(seed=seed, clock=fixed_clock, **overrides)


@pytest.fixture
def relationship_story() -> Story:
    return make_story(TopicType.RELATIONSHIP)


@pytest.fixture
def social_rules_story() -> Story:
    return make_story(TopicType.SOCIAL_RULES, story_id="story-rules")


@pytest.fixture
def healthy_habits_story() -> Story:
    return make_story(TopicType.HEALTHY_HABITS, story_id="story-habits")
