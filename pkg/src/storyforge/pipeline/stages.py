"""Text-side pipeline stages: classify, draft, content check, refine, translate."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from dataclasses import replace as dc_replace

from ..readability.scoring import assess_section
from ..story.model import (
    EmotionCue,
    LanguageTag,
    PathGraph,
    ProfileEntityRef,
    ProfileSnapshot,
    Section,
    SectionKind,
    Story,
    TargetBehavior,
    TopicType,
    UNDESIRABLE_PATH_COUNT,
)
from .fewshot import FewShotBank, select_samples
from .prompts import render
from .providers import (
    ProviderError,
    ProviderSuite,
    ResponseParseError,
    TextRequest,
)
from .request import GenerationRequest, PipelineOptions
from .schemas import parse_response

logger = logging.getLogger(__name__)


class StageError(RuntimeError):
    """A stage exhausted its attempts; carries the stage name and a stable reason."""

    def __init__(self, stage: str, reason: str, message: str = ""):
        super().__init__(message or f"{stage}: {reason}")
        self.stage = stage
        self.reason = reason


def call_structured(
    providers: ProviderSuite,
    stage: str,
    prompt: str,
    payload: dict,
    schema_id: str,
    *,
    max_attempts: int = 3,
    parse_reprompts: int = 1,
) -> dict:
    """Call the text provider with transport retries and bounded reprompts.

    Transport failures retry up to ``max_attempts`` total tries; a response
    that fails its schema earns ``parse_reprompts`` further tries with the
    parse error quoted back, after which the stage fails.
    """
    transport_failures = 0
    parse_failures = 0
    current_prompt, current_payload = prompt, payload
    while True:
        request = TextRequest(stage=stage, prompt=current_prompt,
                              payload=current_payload, schema_id=schema_id)
        try:
            raw = providers.text.complete(request)
        except ProviderError as err:
            transport_failures += 1
            if transport_failures >= max_attempts:
                raise StageError(stage, "provider-unreachable", str(err)) from err
            continue
        try:
            return parse_response(schema_id, raw)
        except ResponseParseError as err:
            parse_failures += 1
            if parse_failures > parse_reprompts:
                raise StageError(stage, "unparseable-response", str(err)) from err
            note = f"\nYour previous answer was rejected: {err}. Answer with valid JSON only."
            current_prompt = prompt + note
            current_payload = dict(payload, reprompt=parse_failures)


def classify_topic(behavior: str, providers: ProviderSuite,
                   options: PipelineOptions) -> TopicType:
    if not behavior.strip():
        raise StageError("classify", "empty-behavior")
    response = call_structured(
        providers,
        "classify",
        render("classify", behavior=behavior),
        {"behavior": behavior},
        "topic",
        max_attempts=options.max_attempts,
        parse_reprompts=1,
    )
    return TopicType.parse(response["topic_type"])


_GENERATE_TEMPLATES = {
    TopicType.RELATIONSHIP: "generate_relationship",
    TopicType.SOCIAL_RULES: "generate_social_rules",
    TopicType.HEALTHY_HABITS: "generate_healthy_habits",
}


def _check_draft_semantics(draft: dict, topic: TopicType,
                           request: GenerationRequest) -> None:
    options = draft["options"]
    desirable = [o for o in options if o["desirable"]]
    if len(desirable) != 1:
        raise ResponseParseError(f"draft: expected one desirable option, got {len(desirable)}")
    expected = 1 + UNDESIRABLE_PATH_COUNT[topic]
    if len(options) != expected:
        raise ResponseParseError(
            f"draft: {topic.value} needs {expected} options, got {len(options)}")
    for option in options:
        if not option["desirable"]:
            for key in ("repair", "response", "repaired_consequence"):
                if key not in option:
                    raise ResponseParseError(f"draft: undesirable option misses {key!r}")
    profile = request.profile
    person_names = {p.name.lower() for p in profile.persons}
    for name in draft["persons_used"]:
        if name.lower() not in person_names:
            raise ResponseParseError(f"draft: person {name!r} is not in the profile")
    place_names = {p.name.lower() for p in profile.places}
    for name in draft["places_used"]:
        if name.lower() not in place_names:
            raise ResponseParseError(f"draft: place {name!r} is not in the profile")


def _cues(raw: list[dict]) -> tuple[EmotionCue, ...]:
    return tuple(
        EmotionCue(c["character"], c["emotion"], c["observable_response"]) for c in raw
    )


def assemble_story(draft: dict, topic: TopicType, request: GenerationRequest,
                   story_id: str, created_at: str) -> Story:
    """Turn a draft response into a Story document with stable section ids."""
    sections: list[Section] = []
    option_heads: list[str] = []
    desirable_index = next(i for i, o in enumerate(draft["options"]) if o["desirable"])

    for index, option in enumerate(draft["options"], start=1):
        head = f"decision-{index}"
        option_heads.append(head)
        if option["desirable"]:
            chain = [
                Section(id=head, kind=SectionKind.DECISION,
                        text=option["decision"]["text"], next=(f"consequence-{index}",)),
                Section(id=f"consequence-{index}", kind=SectionKind.CONSEQUENCE,
                        text=option["consequence"]["text"],
                        emotion_cues=_cues(option["consequence"]["emotion_cues"]),
                        next=("ending",)),
            ]
        else:
            chain = [
                Section(id=head, kind=SectionKind.DECISION,
                        text=option["decision"]["text"], next=(f"consequence-{index}",)),
                Section(id=f"consequence-{index}", kind=SectionKind.CONSEQUENCE,
                        text=option["consequence"]["text"],
                        emotion_cues=_cues(option["consequence"]["emotion_cues"]),
                        next=(f"repair-{index}",)),
                Section(id=f"repair-{index}", kind=SectionKind.REPAIR,
                        text=option["repair"]["text"], next=(f"response-{index}",)),
                Section(id=f"response-{index}", kind=SectionKind.RESPONSE,
                        text=option["response"]["text"], next=(f"repaired-{index}",)),
                Section(id=f"repaired-{index}", kind=SectionKind.REPAIRED_CONSEQUENCE,
                        text=option["repaired_consequence"]["text"],
                        emotion_cues=_cues(option["repaired_consequence"]["emotion_cues"]),
                        next=("ending",)),
            ]
        sections.extend(chain)

    sections = [
        Section(id="cover", kind=SectionKind.COVER, text=draft["title"], next=("intro",)),
        Section(id="intro", kind=SectionKind.INTRODUCTION,
                text=draft["introduction"]["text"], next=("challenge",)),
        Section(id="challenge", kind=SectionKind.CHALLENGE,
                text=draft["challenge"]["text"], next=tuple(option_heads)),
        *sections,
        Section(id="ending", kind=SectionKind.ENDING, text=draft["ending"]["text"]),
    ]

    prefix = ("cover", "intro", "challenge")
    desirable_path = prefix + (
        f"decision-{desirable_index + 1}", f"consequence-{desirable_index + 1}", "ending")
    undesirable_paths = tuple(
        prefix + (f"decision-{i + 1}", f"consequence-{i + 1}", f"repair-{i + 1}",
                  f"response-{i + 1}", f"repaired-{i + 1}", "ending")
        for i, option in enumerate(draft["options"])
        if not option["desirable"]
    )
    graph = PathGraph(
        sections={s.id: s for s in sections},
        root="cover",
        challenge="challenge",
        ending="ending",
        desirable_path=desirable_path,
        undesirable_paths=undesirable_paths,
    )

    profile = request.profile
    used_persons = {n.lower() for n in draft["persons_used"]}
    used_places = {n.lower() for n in draft["places_used"]}
    snapshot_entities: list[ProfileEntityRef] = []
    for name in request.selected_interests:
        entity = profile.interest_by_name(name)
        if entity is not None:
            snapshot_entities.append(entity)
    snapshot_entities.extend(p for p in profile.persons if p.name.lower() in used_persons)
    snapshot_entities.extend(p for p in profile.places if p.name.lower() in used_places)

    return Story(
        id=story_id,
        title=draft["title"],
        topic_type=topic,
        target_behavior=TargetBehavior(text=request.behavior, classified_type=topic),
        profile_snapshot=ProfileSnapshot(
            child_name=profile.child_name,
            child_photo=profile.child_photo,
            entities=tuple(snapshot_entities),
        ),
        graph=graph,
        reward_sticker=request.reward_sticker,
        created_at=created_at,
        language=LanguageTag(source="en"),
    )


def generate_story_draft(
    topic: TopicType,
    request: GenerationRequest,
    providers: ProviderSuite,
    options: PipelineOptions,
    *,
    story_id: str,
    created_at: str,
    attempt: int = 1,
    feedback: str = "",
) -> Story:
    """One draft from the provider, assembled but not yet validated."""
    request.check_preconditions()
    profile = request.profile
    selected = [profile.interest_by_name(n) for n in request.selected_interests]
    payload = {
        "topic_type": topic.value,
        "behavior": request.behavior,
        "child_name": profile.child_name,
        "interests": [
            {"name": e.name, "description": e.description, "photo": e.photo}
            for e in selected if e is not None
        ],
        "persons": [{"name": e.name, "description": e.description} for e in profile.persons],
        "places": [{"name": e.name, "description": e.description} for e in profile.places],
        "attempt": attempt,
        "feedback": feedback,
    }
    prompt = render(
        _GENERATE_TEMPLATES[topic],
        child_name=profile.child_name,
        behavior=request.behavior,
        interests=", ".join(request.selected_interests),
        persons="; ".join(f"{e.name} ({e.description})" for e in profile.persons),
        places="; ".join(f"{e.name} ({e.description})" for e in profile.places),
        sentence_cap=options.path_sentence_cap,
        feedback=f"Previous attempt was rejected: {feedback}" if feedback else "",
    )

    parse_failures = 0
    transport_failures = 0
    current_prompt, current_payload = prompt, payload
    while True:
        req = TextRequest(stage="generate", prompt=current_prompt,
                          payload=current_payload, schema_id="draft")
        try:
            raw = providers.text.complete(req)
            draft = parse_response("draft", raw)
            _check_draft_semantics(draft, topic, request)
            return assemble_story(draft, topic, request, story_id, created_at)
        except ProviderError as err:
            transport_failures += 1
            if transport_failures >= options.max_attempts:
                raise StageError("generate", "provider-unreachable", str(err)) from err
        except ResponseParseError as err:
            parse_failures += 1
            if parse_failures >= options.max_attempts:
                raise StageError("generate", "unparseable-draft", str(err)) from err
            note = f"\nYour previous answer was rejected: {err}. Answer with valid JSON only."
            current_prompt = prompt + note
            current_payload = dict(payload, reprompt=parse_failures)


#: Content criteria the draft must satisfy, judged one at a time.
CONTENT_CRITERIA = (
    (1, "Realistic and everyday grounding",
     "The story must stay closely connected to realistic, everyday contexts; "
     "metaphorical or imaginary situations confuse literal readers."),
    (2, "Consistent and logical integration of the child's interest",
     "The child's selected interest should appear naturally and consistently "
     "throughout the story, not as a one-off mention."),
    (3, "Prevention of misunderstandings",
     "The story must not plant misconceptions a child could carry into real "
     "life, such as showing an elevator being used during an emergency."),
)


@dataclass(frozen=True)
class ContentVerdict:
    passed: bool
    failures: tuple[tuple[int, str], ...] = ()

    @property
    def reason(self) -> str:
        return "; ".join(f"criterion {n}: {r}" for n, r in self.failures)


def story_text_of(story: Story) -> str:
    return "\n".join(s.text for s in story.sections_in_order())


def validate_content(story: Story, request: GenerationRequest,
                     providers: ProviderSuite, options: PipelineOptions) -> ContentVerdict:
    """Judge the three content criteria; any failing criterion fails the draft.

    Interest integration (criterion 2) is pre-checked structurally, so a
    draft that never mentions the selected interest fails without spending
    a provider call.
    """
    text = story_text_of(story)
    lowered = text.lower()
    interest_terms = set()
    for name in request.selected_interests:
        interest_terms.update(name.lower().split())
    if interest_terms and not any(term in lowered for term in interest_terms):
        return ContentVerdict(
            passed=False,
            failures=((2, "selected interest never appears in the story"),),
        )

    failures: list[tuple[int, str]] = []
    for number, name, definition in CONTENT_CRITERIA:
        payload = {"criterion": number, "criterion_name": name, "story_text": text}
        prompt = render("validate_content", criterion_number=number,
                        criterion_name=name, criterion_definition=definition,
                        story_text=text)
        try:
            judgment = call_structured(
                providers, "validate_content", prompt, payload, "judgment",
                max_attempts=options.max_attempts, parse_reprompts=1,
            )
        except StageError as err:
            if err.reason == "unparseable-response":
                failures.append((number, "unjudgeable"))
                continue
            raise
        if not judgment["pass"]:
            failures.append((number, judgment["rationale"]))
    return ContentVerdict(passed=not failures, failures=tuple(failures))


def refine_text(story: Story, request: GenerationRequest, providers: ProviderSuite,
                options: PipelineOptions) -> tuple[Story, list[str]]:
    """Regenerate hard sections until every one reads at level.

    Sections failing after ``max_attempts`` regenerations ship anyway with an
    ``unrefined-section`` warning; parents can edit by hand. Only text is
    touched, never kinds or links.
    """
    lexicon = options.get_lexicon()
    snapshot = story.profile_snapshot
    exemptions = {snapshot.child_name} | {e.name for e in snapshot.entities}
    interest_names = [e.name for e in snapshot.entities if e.kind == "interest"]
    warnings: list[str] = []
    refined = story

    for section in story.sections_in_order():
        if section.kind is SectionKind.COVER:
            continue
        assessment = assess_section(section.text, lexicon, exemptions,
                                    grade_cap=options.grade_cap,
                                    threshold=options.cefr_threshold)
        attempt = 0
        text = section.text
        while not assessment.passed and attempt < options.max_attempts:
            attempt += 1
            flagged = [f.word for f in assessment.report.flagged_words] \
                if assessment.report else []
            payload = {
                "section_id": section.id,
                "kind": section.kind.value,
                "text": text,
                "reasons": list(assessment.reasons),
                "flagged_words": flagged,
                "child_name": snapshot.child_name,
                "required_terms": interest_names,
                "attempt": attempt,
            }
            prompt = render(
                "refine",
                kind=section.kind.value,
                text=text,
                reasons=", ".join(assessment.reasons),
                flagged_words=", ".join(flagged) or "none",
                keep_names=", ".join(sorted(exemptions)),
                required_terms=", ".join(interest_names) or "the story's interest",
            )
            response = call_structured(
                providers, "refine", prompt, payload, "refined",
                max_attempts=options.max_attempts, parse_reprompts=1,
            )
            text = response["text"]
            assessment = assess_section(text, lexicon, exemptions,
                                        grade_cap=options.grade_cap,
                                        threshold=options.cefr_threshold)
        if attempt and text != section.text:
            refined = refined.replace_section(section.with_text(text))
        if not assessment.passed:
            warnings.append(f"unrefined-section:{section.id}")
            logger.warning("section %s still fails readability after %d attempts",
                           section.id, options.max_attempts)
    return refined, warnings


def translate_story(story: Story, providers: ProviderSuite, options: PipelineOptions,
                    bank: FewShotBank | None = None,
                    k: int | None = None) -> tuple[Story, list[str]]:
    """Attach one translation per section, choosing few-shot examples by similarity."""
    warnings: list[str] = []
    bank = bank if bank is not None else options.bank
    if bank is None:
        bank = FewShotBank.bundled(providers.embedding)
    k = options.fewshot_k if k is None else k
    if len(bank) < k:
        warnings.append(f"fewshot-bank-short:{len(bank)}<{k}")
    query = providers.embedding.embed(story_text_of(story))
    samples = select_samples(bank, query, k)

    ordered = story.sections_in_order()
    payload = {
        "sections": [{"id": s.id, "text": s.text} for s in ordered],
        "examples": [{"source": s.source, "translated": s.translated} for s in samples],
        "k": k,
    }
    prompt = render(
        "translate",
        examples="\n".join(f"EN: {s.source}\nKO: {s.translated}" for s in samples) or "none",
        sections="\n".join(f"[{s.id}] {s.text}" for s in ordered),
    )
    response = call_structured(
        providers, "translate", prompt, payload, "translation",
        max_attempts=options.max_attempts, parse_reprompts=1,
    )
    translations = {entry["id"]: entry["translation"] for entry in response["sections"]}
    expected = {s.id for s in ordered}
    if set(translations) != expected:
        raise StageError("translate", "sections-not-intact",
                         f"translated ids {sorted(translations)} != {sorted(expected)}")
    translated = story
    for section in ordered:
        translated = translated.replace_section(
            dc_replace(section, translation=translations[section.id])
        )
    translated = dc_replace(translated,
                            language=LanguageTag(source=story.language.source,
                                                 translation="ko"))
    return translated, warnings
