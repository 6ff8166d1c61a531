"""Acceptance suite: every release criterion at its stated tolerance.

Each test prints one ``[acceptance] <criterion>: PASS`` line (visible with
``pytest -s`` or in captured output on failure). The whole module runs with
the deterministic mock provider suite only: no network, no credentials.
"""

import json
import os
import random
import time
from dataclasses import replace
from datetime import datetime, timedelta, timezone

import pytest

from storyforge.insights import creation_heatmap, load_exports, reading_by_hour
from storyforge.pipeline import (
    FewShotBank,
    MockEmbeddingProvider,
    PreprocessingCache,
    mock_suite,
    regenerate_illustration,
    run_pipeline,
)
from storyforge.readability import Lexicon, assess_section, cefr_flags, fkgl
from storyforge.service import ServiceError, StoryService
from storyforge.story import (
    Section,
    SectionKind,
    TopicType,
    enumerate_paths,
    validate_structure,
)
from storyforge.story.document import story_from_document, story_to_document

from conftest import make_options, make_request, make_story

TOPICS = (TopicType.RELATIONSHIP, TopicType.SOCIAL_RULES, TopicType.HEALTHY_HABITS)

BEHAVIORS = {
    TopicType.RELATIONSHIP: "taking turns during playtime",
    TopicType.SOCIAL_RULES: "keeping calm during prayer at church",
    TopicType.HEALTHY_HABITS: "washing hands before meals",
}


def announce(name: str, detail: str = "") -> None:
    suffix = f" ({detail})" if detail else ""
    print(f"[acceptance] {name}: PASS{suffix}")


# --------------------------------------------------------------------------
# Criterion 1: structural suite over 100 mutation-generated documents
# --------------------------------------------------------------------------

def _mutate_missing_repair(story):
    sections = dict(story.graph.sections)
    sections["consequence-u1"] = replace(sections["consequence-u1"],
                                         next=("response-u1",))
    del sections["repair-u1"]
    undesirable = tuple(
        tuple(sid for sid in path if sid != "repair-u1")
        for path in story.graph.undesirable_paths
    )
    graph = replace(story.graph, sections=sections, undesirable_paths=undesirable)
    return replace(story, graph=graph)


def _mutate_extra_path(story):
    sections = dict(story.graph.sections)
    chain = [
        Section(id="decision-u9", kind=SectionKind.DECISION,
                text="Alex hides the toy.", next=("consequence-u9",)),
        Section(id="consequence-u9", kind=SectionKind.CONSEQUENCE,
                text="Max is sad and frowns.",
                emotion_cues=sections["consequence-u1"].emotion_cues,
                next=("repair-u9",)),
        Section(id="repair-u9", kind=SectionKind.REPAIR,
                text="Max asks for a turn.", next=("response-u9",)),
        Section(id="response-u9", kind=SectionKind.RESPONSE,
                text="Alex says okay.", next=("repaired-u9",)),
        Section(id="repaired-u9", kind=SectionKind.REPAIRED_CONSEQUENCE,
                text="Max is glad and smiles.",
                emotion_cues=sections["repaired-u1"].emotion_cues,
                next=("ending",)),
    ]
    for section in chain:
        sections[section.id] = section
    sections["challenge"] = replace(
        sections["challenge"], next=sections["challenge"].next + ("decision-u9",))
    extra = ("cover", "intro", "challenge", "decision-u9", "consequence-u9",
             "repair-u9", "response-u9", "repaired-u9", "ending")
    graph = replace(story.graph, sections=sections,
                    undesirable_paths=story.graph.undesirable_paths + (extra,))
    return replace(story, graph=graph)


def _mutate_cycle(story):
    return story.replace_section(
        replace(story.section("repaired-u1"), next=("challenge",)))


def _mutate_orphan(story):
    return story.replace_section(
        Section(id="orphan-1", kind=SectionKind.REPAIR, text="A lost page."))


MUTATIONS = {
    "valid": lambda story: story,
    "missing-repair": _mutate_missing_repair,
    "extra-path": _mutate_extra_path,
    "cycle": _mutate_cycle,
    "orphan": _mutate_orphan,
}


def test_structural_suite_classifies_100_mutants_exactly():
    rng = random.Random(20260809)
    corpus = []
    for index in range(100):
        label = rng.choice(list(MUTATIONS))
        topic = rng.choice(TOPICS)
        story = make_story(topic, story_id=f"story-m{index}")
        corpus.append((label, MUTATIONS[label](story)))

    started = time.monotonic()
    false_accepts = false_rejects = 0
    for label, story in corpus:
        # Full round trip: classification happens on the serialized document.
        parsed = story_from_document(story_to_document(story))
        report = validate_structure(parsed)
        if label == "valid" and not report.ok:
            false_rejects += 1
        if label != "valid" and report.ok:
            false_accepts += 1
    elapsed = time.monotonic() - started

    assert false_accepts == 0
    assert false_rejects == 0
    assert elapsed < 5.0
    valid_count = sum(1 for label, _ in corpus if label == "valid")
    announce("structural-suite",
             f"100 documents, {valid_count} valid, 0 false accepts, "
             f"0 false rejects, {elapsed:.2f}s")


# --------------------------------------------------------------------------
# Criterion 2: topology fidelity and per-seed byte determinism
# --------------------------------------------------------------------------

EXPECTED_UNDESIRABLE = {
    TopicType.RELATIONSHIP: 2,
    TopicType.SOCIAL_RULES: 1,
    TopicType.HEALTHY_HABITS: 1,
}

REPAIR_SEQUENCE = ("decision", "consequence", "repair", "response",
                   "repaired_consequence", "ending")


def test_topology_fidelity_and_determinism():
    for topic in TOPICS:
        for seed in (1, 2):
            documents = set()
            for _ in range(3):
                job = run_pipeline(make_request(BEHAVIORS[topic]),
                                   mock_suite(seed=seed), make_options(seed=seed))
                assert job.status == "complete"
                documents.add(json.dumps(job.story_document, sort_keys=True,
                                         ensure_ascii=False))
            assert len(documents) == 1, f"{topic} seed {seed} not byte-identical"

            story = story_from_document(json.loads(next(iter(documents))))
            assert story.topic_type is topic
            paths = enumerate_paths(story)
            assert len(paths) == 1 + EXPECTED_UNDESIRABLE[topic]
            kinds_desirable = tuple(story.section(sid).kind.value for sid in paths[0])
            assert kinds_desirable[3:] == ("decision", "consequence", "ending")
            for path in paths[1:]:
                kinds = [story.section(sid).kind.value for sid in path[3:]]
                iterator = iter(kinds)
                assert all(step in iterator for step in REPAIR_SEQUENCE), \
                    f"repair chain out of order in {kinds}"
    announce("topology-fidelity",
             "3 topics x 2 seeds x 3 runs, byte-identical, paths 1+2/1+1/1+1")


# --------------------------------------------------------------------------
# Criterion 3: grade-formula oracle and refinement postconditions
# --------------------------------------------------------------------------

# Hand syllable counts; every word double-checked against the shipped rules.
VOCAB = {
    "the": 1, "dog": 1, "cat": 1, "happy": 2, "little": 2, "plays": 1,
    "tree": 1, "see": 1, "water": 2, "banana": 3, "elephant": 3,
    "beautiful": 3, "quiet": 2, "going": 2, "idea": 3, "lion": 2,
    "monkey": 2, "orange": 2, "together": 3, "morning": 2, "teacher": 2,
    "friend": 1, "school": 1, "playground": 2, "birthday": 2,
    "dinosaur": 3, "computer": 3, "helicopter": 4, "butterfly": 3,
    "window": 2, "sunshine": 2, "basket": 2, "remember": 3, "story": 2,
    "jump": 1, "turtle": 2, "purple": 2,
}


def test_fkgl_matches_hand_scored_fixtures():
    rng = random.Random(7)
    words = sorted(VOCAB)
    checked = 0
    for _ in range(20):
        sentence_count = rng.randint(1, 4)
        sentences = []
        total_words = 0
        total_syllables = 0
        for _ in range(sentence_count):
            length = rng.randint(3, 9)
            chosen = [rng.choice(words) for _ in range(length)]
            total_words += length
            total_syllables += sum(VOCAB[w] for w in chosen)
            terminator = rng.choice([".", "!", "?"])
            sentences.append(" ".join(chosen).capitalize() + terminator)
        text = " ".join(sentences)
        expected = (0.39 * (total_words / sentence_count)
                    + 11.8 * (total_syllables / total_words) - 15.59)
        assert fkgl(text) == pytest.approx(expected, abs=1e-9), text
        checked += 1
    assert checked == 20
    announce("fkgl-oracle", "20 hand-scored fixtures within 1e-9")


def test_refinement_postconditions_hold_for_every_mock_story():
    lexicon = Lexicon.bundled()
    sections_checked = 0
    for topic in TOPICS:
        for seed in (0, 3):
            job = run_pipeline(make_request(BEHAVIORS[topic]),
                               mock_suite(seed=seed), make_options(seed=seed))
            assert job.status == "complete"
            assert not any(w.startswith("unrefined-section") for w in job.warnings)
            story = story_from_document(job.story_document)
            exemptions = {story.profile_snapshot.child_name} | {
                e.name for e in story.profile_snapshot.entities}
            for section in story.sections_in_order():
                assert cefr_flags(section.text, lexicon, exemptions) == []
                if section.kind is SectionKind.COVER:
                    continue
                assessment = assess_section(section.text, lexicon, exemptions)
                assert assessment.passed, (section.id, assessment.reasons)
                assert assessment.report.fkgl <= 5.0
                sections_checked += 1
    announce("refinement-postconditions",
             f"{sections_checked} sections at fkgl<=5.0 with zero flags above B2")


# --------------------------------------------------------------------------
# Criterion 4: translation few-shot selection against a brute-force oracle
# --------------------------------------------------------------------------

def test_translation_selects_exactly_the_top_22_of_190():
    embedder = MockEmbeddingProvider()
    pairs = [
        {"source": f"Sample page {i}: the child practices habit number {i}.",
         "translated": f"(한국어) 예시 {i}"}
        for i in range(190)
    ]
    bank = FewShotBank.from_pairs(pairs, embedder)
    options = make_options(seed=0)
    options.bank = bank
    suite = mock_suite(seed=0)
    job = run_pipeline(make_request(translate=True), suite, options)
    assert job.status == "complete"

    request = next(r for r in suite.text.requests if r.stage == "translate")
    prompt_examples = [e["source"] for e in request.payload["examples"]]
    assert len(prompt_examples) == 22

    story = story_from_document(job.artifacts["refine"]["document"])
    query = embedder.embed("\n".join(s.text for s in story.sections_in_order()))
    scored = []
    for index, sample in enumerate(bank.samples):
        dot = sum(float(a) * float(b) for a, b in zip(sample.embedding, query))
        norm = (sum(float(a) ** 2 for a in sample.embedding) ** 0.5) * \
               (sum(float(b) ** 2 for b in query) ** 0.5)
        scored.append((-(dot / norm if norm else 0.0), index))
    scored.sort()
    oracle = [bank.samples[i].source for _, i in scored[:22]]
    assert prompt_examples == oracle
    for example in request.payload["examples"]:
        assert f"EN: {example['source']}" in request.prompt
    announce("translation-fewshot", "top-22 of 190 by cosine, oracle-exact")


# --------------------------------------------------------------------------
# Criterion 5: illustration caching and parallelism
# --------------------------------------------------------------------------

def test_illustration_caching_and_parallelism():
    options = make_options(seed=0)
    suite = mock_suite(seed=0)
    job = run_pipeline(make_request(), suite, options)
    doc = job.story_document
    story = story_from_document(doc)
    cache = PreprocessingCache.from_dict(doc["preprocessing"])

    # Unedited regeneration: exactly one image-provider call, zero text calls.
    fresh = mock_suite(seed=0)
    _, cache, _ = regenerate_illustration(story, cache, "challenge", fresh, options)
    assert len(fresh.image.requests) == 1
    assert sum(fresh.text.calls_by_stage.values()) == 0

    # Edited section: preprocessing reruns for that section only, then one image.
    edited = story.replace_section(
        replace(story.section("challenge"),
                text="Alex looks at the firefighter toy and waits."))
    fresh = mock_suite(seed=0)
    _, cache, _ = regenerate_illustration(edited, cache, "challenge", fresh, options)
    assert fresh.text.calls_by_stage["scenes"] == 1
    assert fresh.text.calls_by_stage["match_entities"] == 1
    assert len(fresh.image.requests) == 1
    scene_request = next(r for r in fresh.text.requests if r.stage == "scenes")
    assert [s["id"] for s in scene_request.payload["sections"]] == ["challenge"]

    # Parallelism: an 11-section story with limit 4 overlaps in flight.
    suite = mock_suite(seed=0, image_latency=0.05)
    job = run_pipeline(make_request(BEHAVIORS[TopicType.SOCIAL_RULES]), suite,
                       make_options(seed=0, image_concurrency=4))
    story = story_from_document(job.story_document)
    assert len(story.graph.sections) == 11
    assert suite.image.max_in_flight >= 2
    announce("illustration-caching",
             f"1 call unedited, per-section rerun on edit, "
             f"max in-flight {suite.image.max_in_flight} of limit 4")


# --------------------------------------------------------------------------
# Criterion 6: session and reward state machine under 50 random replays
# --------------------------------------------------------------------------

class SessionOracle:
    """Independent reading of the session rules, kept deliberately naive."""

    def __init__(self, doc):
        self.sections = {s["id"]: s for s in doc["sections"]}
        self.root = doc["paths"]["root"]
        self.challenge = doc["paths"]["challenge"]
        self.ending = doc["paths"]["ending"]
        self.desirable = tuple(doc["paths"]["desirable"])
        self.all_paths = [tuple(doc["paths"]["desirable"])] + \
            [tuple(p) for p in doc["paths"]["undesirable"]]
        self.walk: list[str] = []

    def accepts_page(self, target: str) -> bool:
        if target not in self.sections:
            return False
        if target == self.root:
            return True
        if self.walk and target in self.sections[self.walk[-1]]["next"]:
            return True
        return target in self.walk

    def apply_page(self, target: str) -> None:
        if target == self.root:
            self.walk = [target]
        elif self.walk and target in self.sections[self.walk[-1]]["next"]:
            self.walk.append(target)
        else:
            self.walk = self.walk[:self.walk.index(target) + 1]

    def accepts_choice(self, index: int) -> bool:
        return (bool(self.walk) and self.walk[-1] == self.challenge
                and 0 <= index < len(self.sections[self.challenge]["next"]))

    def completion(self):
        walk = tuple(self.walk)
        if walk in self.all_paths:
            return "desirable" if walk == self.desirable else "undesirable"
        return None


def test_session_reward_state_machine_over_50_random_replays(tmp_path):
    svc = StoryService(tmp_path / "data", providers=mock_suite(), inline_jobs=True,
                       clock=lambda: "2026-08-01T09:00:00+00:00")
    try:
        account = "family"
        sticker = svc.upsert_sticker(account, "Fire Truck", "img-st")
        docs = {}
        for topic in TOPICS:
            story = make_story(topic, story_id=f"story-{topic.value}",
                               sticker=sticker["id"])
            svc.store.insert_story_version(account, story_to_document(story))
            docs[topic] = svc.get_story(account, story.id)

        rng = random.Random(42)
        completions = rejections = 0
        for round_index in range(50):
            topic = TOPICS[round_index % 3]
            doc = docs[topic]
            oracle = SessionOracle(doc)
            session = svc.start_session(account, doc["story"]["id"],
                                        started_at="2026-08-01T10:00:00+00:00")
            base = datetime(2026, 8, 1, 10, 0, tzinfo=timezone.utc)
            section_ids = sorted(oracle.sections)

            if round_index % 2 == 0:
                # Guided replay: walk a randomly chosen full path, with the
                # occasional valid choice event at the branch point.
                path = list(rng.choice(oracle.all_paths))
                moves = []
                for sid in path:
                    moves.append(("page", sid))
                    if sid == oracle.challenge and rng.random() < 0.7:
                        options = oracle.sections[oracle.challenge]["next"]
                        actual = options.index(path[path.index(sid) + 1])
                        presented = session["option_mapping"].index(actual)
                        moves.append(("choice", presented))
            else:
                moves = None

            step = 0

            def stamp():
                return (base + timedelta(minutes=step + 1)).isoformat(
                    timespec="seconds")

            if moves is not None:
                for kind, value in moves:
                    step += 1
                    if kind == "choice":
                        svc.record_event(account, session["id"],
                                         {"type": "choice", "option_index": value,
                                          "t": stamp()})
                    else:
                        svc.record_event(account, session["id"],
                                         {"type": "page_view", "section_id": value,
                                          "t": stamp()})
                        oracle.apply_page(value)
            else:
                for _ in range(rng.randint(4, 18)):
                    step += 1
                    t = stamp()
                    move = rng.random()
                    if move < 0.55:
                        if not oracle.walk:
                            target = oracle.root
                        else:
                            successors = oracle.sections[oracle.walk[-1]]["next"]
                            target = rng.choice(list(successors) or [oracle.root])
                    elif move < 0.7 and oracle.walk:
                        target = rng.choice(oracle.walk)
                    elif move < 0.85:
                        target = rng.choice(section_ids)
                    else:
                        index = rng.choice([0, 1, 2, 5])
                        event = {"type": "choice", "option_index": index, "t": t}
                        if oracle.accepts_choice(index):
                            svc.record_event(account, session["id"], event)
                        else:
                            with pytest.raises(ServiceError) as err:
                                svc.record_event(account, session["id"], event)
                            assert err.value.code == "invalid-transition"
                            rejections += 1
                        continue
                    event = {"type": "page_view", "section_id": target, "t": t}
                    if oracle.accepts_page(target):
                        svc.record_event(account, session["id"], event)
                        oracle.apply_page(target)
                    else:
                        with pytest.raises(ServiceError) as err:
                            svc.record_event(account, session["id"], event)
                        assert err.value.code == "invalid-transition"
                        rejections += 1

            expected = oracle.completion()
            final_t = (base + timedelta(minutes=40)).isoformat(timespec="seconds")
            if expected is None:
                with pytest.raises(ServiceError) as err:
                    svc.complete_session(account, session["id"], at=final_t)
                assert err.value.code == "incomplete-path"
            else:
                outcome = svc.complete_session(account, session["id"], at=final_t)
                assert outcome["path_kind"] == expected
                assert tuple(outcome["path"]) in oracle.all_paths
                if expected == "desirable":
                    assert outcome["sticker"]["id"] == sticker["id"]
                else:
                    assert outcome["sticker"]["kind"] == "star"
                completions += 1
        assert completions + rejections > 0
        announce("session-rewards",
                 f"50 replays, {completions} completions, "
                 f"{rejections} rejected transitions, oracle-exact")
    finally:
        svc.close()


# --------------------------------------------------------------------------
# Criterion 7: engagement statistics on the 218-story synthetic export
# --------------------------------------------------------------------------

def test_engagement_stats_fixture(tmp_path):
    story_counts = [14] * 10 + [13] * 6  # 16 accounts, 218 stories
    assert sum(story_counts) == 218
    exports = []
    for index, count in enumerate(story_counts):
        account = f"dyad-{index:02d}"
        day = 1 + (index % 14)
        stories = [
            {"id": f"{account}-s{i}", "title": f"Story {i}",
             "topic_type": "relationship", "behavior": "taking turns",
             "created_at": f"2026-08-{day:02d}T08:{i % 60:02d}:00+00:00"}
            for i in range(count)
        ]
        sessions = []
        if index == 0:
            # Hand-built evening block: three 10-minute reads starting 21:10.
            for i in range(3):
                start = f"2026-08-02T21:10:00+00:00"
                sessions.append({
                    "id": f"{account}-read-{i}", "story_id": f"{account}-s0",
                    "device": "reader", "started_at": start, "completed": True,
                    "events": [
                        {"type": "page_view", "section_id": "cover", "t": start},
                        {"type": "completed", "path_kind": "desirable",
                         "t": "2026-08-02T21:20:00+00:00"},
                    ],
                })
        if index == 1:
            # Two 7.5-minute reads starting 21:45.
            for i in range(2):
                start = "2026-08-03T21:45:00+00:00"
                sessions.append({
                    "id": f"{account}-read-{i}", "story_id": f"{account}-s0",
                    "device": "reader", "started_at": start, "completed": True,
                    "events": [
                        {"type": "page_view", "section_id": "cover", "t": start},
                        {"type": "completed", "path_kind": "undesirable",
                         "t": "2026-08-03T21:52:30+00:00"},
                    ],
                })
        exports.append({"export_version": "1", "account": account,
                        "stories": stories, "sessions": sessions})

    export_path = tmp_path / "export.json"
    export_path.write_text(json.dumps(exports), encoding="utf-8")
    loaded = load_exports(export_path)

    heatmap = creation_heatmap(loaded)
    assert heatmap["total_stories"] == 218
    assert abs(heatmap["mean_stories_per_account"] - 13.63) <= 0.01
    cell_sum = sum(v for row in heatmap["cells"].values() for v in row.values())
    assert cell_sum == 218

    hours = reading_by_hour(loaded)
    hand_computed_hour_21 = 3 * 10.0 + 2 * 7.5
    assert hours["minutes"][21] == hand_computed_hour_21
    assert sum(hours["minutes"]) == hand_computed_hour_21
    announce("engagement-stats",
             "218 stories / 16 accounts, mean 13.63 (+/-0.01), hour-21 = 45.0 exact")


# --------------------------------------------------------------------------
# Criterion 8: the suite needs no network, credentials, or secondary build
# --------------------------------------------------------------------------

def test_runs_mock_only_without_credentials(monkeypatch):
    for variable in ("STORYFORGE_API_KEY", "STORYFORGE_API_BASE",
                     "STORYFORGE_TEXT_MODEL"):
        monkeypatch.delenv(variable, raising=False)
    from storyforge.pipeline.providers import LiveTextProvider, ProviderError

    with pytest.raises(ProviderError):
        LiveTextProvider()

    job = run_pipeline(make_request(), mock_suite(seed=1), make_options(seed=1))
    assert job.status == "complete"
    assert os.environ.get("STORYFORGE_API_KEY") is None
    announce("mock-only", "no credentials present, end-to-end run still green")
