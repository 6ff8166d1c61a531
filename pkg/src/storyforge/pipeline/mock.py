"""Deterministic provider mocks.

``mock_suite`` answers every pipeline stage from the request payload alone,
rule-based and seeded, so full runs are reproducible bit for bit without a
network. ``ReplaySuite``/``RecordingSuite`` implement the fixture format:
a directory of ``<request-digest>.json`` response documents.

The mocks double as instrumentation: they record every request, per-stage
call counts, and (for images) overlapping in-flight requests, which tests
use to assert caching and parallelism behavior.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import time
from collections import Counter
from pathlib import Path

import numpy as np

from .providers import (
    ImageRequest,
    ProviderError,
    ProviderSuite,
    TextRequest,
    digest_of,
)

_HEALTHY_WORDS = ("wash", "brush", "teeth", "bed", "bedtime", "sleep", "meal",
                  "meals", "bath", "eat", "eating", "breakfast", "dinner")
_SOCIAL_WORDS = ("church", "prayer", "library", "bell", "quiet", "line",
                 "classroom", "museum", "bus", "sit", "rule", "rules")
_RELATIONSHIP_WORDS = ("friend", "friends", "toy", "share", "turn", "turns",
                       "play", "ask", "asking", "help", "together", "brother",
                       "sister", "talk")

_TITLES = (
    "$child and the $object",
    "$child's Big Choice",
    "A Good Day with the $object",
)


def _pick(seed: int, key: str, n: int) -> int:
    if n <= 0:
        return 0
    digest = hashlib.sha256(f"{seed}:{key}".encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big") % n


def _has_word(text: str, words: tuple[str, ...]) -> bool:
    lowered = text.lower()
    return any(re.search(rf"\b{re.escape(w)}\b", lowered) for w in words)


class MockTextProvider:
    """Rule-based structured-text mock; a pure function of (payload, seed)."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.requests: list[TextRequest] = []
        self.calls_by_stage: Counter[str] = Counter()
        self.fail_stages: Counter[str] = Counter()
        self.malformed_stages: Counter[str] = Counter()
        self._lock = threading.Lock()

    def complete(self, request: TextRequest) -> dict:
        with self._lock:
            self.requests.append(request)
            self.calls_by_stage[request.stage] += 1
            if self.fail_stages[request.stage] > 0:
                self.fail_stages[request.stage] -= 1
                raise ProviderError(f"injected outage at stage {request.stage}")
            if self.malformed_stages[request.stage] > 0:
                self.malformed_stages[request.stage] -= 1
                return {"unexpected": "shape"}
        handler = getattr(self, f"_handle_{request.stage}", None)
        if handler is None:
            raise ProviderError(f"mock has no handler for stage {request.stage!r}")
        return handler(dict(request.payload))

    # -- stage handlers -------------------------------------------------

    def _handle_classify(self, payload: dict) -> dict:
        behavior = payload["behavior"]
        if _has_word(behavior, _HEALTHY_WORDS):
            topic = "healthy_habits"
        elif _has_word(behavior, _SOCIAL_WORDS):
            topic = "social_rules"
        elif _has_word(behavior, _RELATIONSHIP_WORDS):
            topic = "relationship"
        else:
            topic = "social_rules"
        return {"topic_type": topic}

    def _object_name(self, payload: dict) -> str:
        interest = payload["interests"][0]
        return interest["name"] if interest.get("photo") else f"{interest['name']} toy"

    def _pick_person(self, persons: list[dict], markers: tuple[str, ...]) -> str:
        for person in persons:
            blob = f"{person['name']} {person.get('description', '')}".lower()
            if any(marker in blob for marker in markers):
                return person["name"]
        return persons[0]["name"]

    def _handle_generate(self, payload: dict) -> dict:
        child = payload["child_name"]
        topic = payload["topic_type"]
        attempt = payload.get("attempt", 1)
        obj = self._object_name(payload)
        place = payload["places"][0]["name"]
        persons = payload["persons"]

        title_index = _pick(self.seed, f"title:{payload['behavior']}", len(_TITLES))
        title = _TITLES[title_index].replace("$child", child).replace("$object", obj)

        intro = (f"{child} and the friends are meticulously assembling an "
                 f"extraordinarily intricate {obj} game at the {place}.")
        # A behavior marker lets tests exercise the regenerate-on-content-fail loop.
        if "elevator" in payload["behavior"].lower() and attempt == 1:
            intro += " They take the elevator during the emergency."

        def cue(character: str, emotion: str, response: str) -> list[dict]:
            return [{"character": character, "emotion": emotion,
                     "observable_response": response}]

        if topic == "relationship":
            friend = self._pick_person(persons, ("friend",))
            options = [
                {
                    "desirable": True,
                    "decision": {"text": f"{child} asks {friend} to take turns with the {obj}."},
                    "consequence": {
                        "text": f"{friend} is happy and smiles. They play together.",
                        "emotion_cues": cue(friend, "happy", "smiles"),
                    },
                },
                {
                    "desirable": False,
                    "decision": {"text": f"{child} grabs the {obj} and does not ask."},
                    "consequence": {
                        "text": f"{friend} is sad and frowns. The game stops.",
                        "emotion_cues": cue(friend, "sad", "frowns"),
                    },
                    "repair": {"text": f"{friend} says taking turns is fair.",
                               "speaker": friend},
                    "response": {"text": f"{child} says sorry and asks to play."},
                    "repaired_consequence": {
                        "text": f"{friend} is glad and smiles again.",
                        "emotion_cues": cue(friend, "glad", "smiles"),
                    },
                },
                {
                    "desirable": False,
                    "decision": {"text": f"{child} walks away to play alone."},
                    "consequence": {
                        "text": f"{friend} is lonely and looks down.",
                        "emotion_cues": cue(friend, "lonely", "looks down"),
                    },
                    "repair": {"text": f"{friend} asks {child} to come back and share.",
                               "speaker": friend},
                    "response": {"text": f"{child} comes back and says yes."},
                    "repaired_consequence": {
                        "text": f"{friend} is happy and claps.",
                        "emotion_cues": cue(friend, "happy", "claps"),
                    },
                },
            ]
            challenge = (f"{child} and {friend} both want the {obj} first. "
                         f"What should {child} do?")
            ending = (f"{child} and {friend} take turns with the {obj}. "
                      f"They have fun at the {place}.")
            persons_used = [friend]
        elif topic == "social_rules":
            adult = self._pick_person(persons, ("teacher", "coach", "librarian"))
            options = [
                {
                    "desirable": True,
                    "decision": {"text": f"{child} stays calm and holds the {obj}."},
                    "consequence": {
                        "text": f"{adult} is proud and smiles. The room stays quiet.",
                        "emotion_cues": cue(adult, "proud", "smiles"),
                    },
                },
                {
                    "desirable": False,
                    "decision": {"text": f"{child} shouts and runs around."},
                    "consequence": {
                        "text": f"{adult} is upset and frowns. Others look at {child}.",
                        "emotion_cues": cue(adult, "upset", "frowns"),
                    },
                    "repair": {"text": f"{adult} says that is not okay and asks "
                                       f"{child} to wait.",
                               "speaker": adult},
                    "response": {"text": f"{child} says sorry and sits down."},
                    "repaired_consequence": {
                        "text": f"{adult} is glad and nods.",
                        "emotion_cues": cue(adult, "glad", "nods"),
                    },
                },
            ]
            challenge = (f"At the {place}, it is time to be calm. "
                         f"What should {child} do?")
            ending = (f"{child} stays calm at the {place}. "
                      f"{child} feels proud with the {obj}.")
            persons_used = [adult]
        else:
            caregiver = self._pick_person(persons, ("mom", "dad", "mother", "father",
                                                    "parent", "grand", "caregiver"))
            options = [
                {
                    "desirable": True,
                    "decision": {"text": f"{child} does the routine right away."},
                    "consequence": {
                        "text": f"{caregiver} is happy and smiles. {child} feels good.",
                        "emotion_cues": cue(caregiver, "happy", "smiles"),
                    },
                },
                {
                    "desirable": False,
                    "decision": {"text": f"{child} keeps playing and skips the routine."},
                    "consequence": {
                        "text": f"{caregiver} is worried and frowns.",
                        "emotion_cues": cue(caregiver, "worried", "frowns"),
                    },
                    "repair": {"text": f"{caregiver} says the routine keeps {child} "
                                       f"safe and asks {child} to try.",
                               "speaker": caregiver},
                    "response": {"text": f"{child} says okay and does the routine."},
                    "repaired_consequence": {
                        "text": f"{caregiver} is proud and claps. {child} smiles too.",
                        "emotion_cues": cue(caregiver, "proud", "claps"),
                    },
                },
            ]
            challenge = (f"It is time for the routine at the {place}. "
                         f"What should {child} do?")
            ending = (f"{child} finishes the routine and plays with the {obj}. "
                      f"{caregiver} is glad.")
            persons_used = [caregiver]

        # Stable but seed-dependent option order; the desirable branch can sit anywhere.
        rotation = _pick(self.seed, f"options:{payload['behavior']}", len(options))
        options = options[rotation:] + options[:rotation]

        return {
            "title": title,
            "introduction": {"text": intro},
            "challenge": {"text": challenge},
            "options": options,
            "ending": {"text": ending},
            "persons_used": persons_used,
            "places_used": [place],
        }

    def _handle_validate_content(self, payload: dict) -> dict:
        text = payload["story_text"].lower()
        criterion = payload["criterion"]
        if criterion == 1 and ("magic" in text or "dragon" in text):
            return {"pass": False, "rationale": "story leaves everyday grounding"}
        if criterion == 3 and "elevator during the emergency" in text:
            return {"pass": False,
                    "rationale": "shows an elevator being used during an emergency"}
        return {"pass": True, "rationale": "looks consistent"}

    def _handle_refine(self, payload: dict) -> dict:
        child = payload["child_name"]
        terms = payload.get("required_terms") or []
        anchor = terms[0] if terms else "story"
        return {"text": f"{child} plays with the {anchor} and has fun."}

    def _handle_translate(self, payload: dict) -> dict:
        return {
            "sections": [
                {"id": s["id"], "translation": f"(한국어) {s['text']}"}
                for s in payload["sections"]
            ]
        }

    def _handle_scenes(self, payload: dict) -> dict:
        child = payload["child_name"]
        place = payload["place"]
        known = payload["known_entities"]  # [{name, kind}]
        scenes = []
        roster: dict[str, str] = {child: "person", place: "place"}
        for section in payload["sections"]:
            text = section["text"].lower()
            present = [child]
            for entity in known:
                name = entity["name"]
                lowered = name.lower()
                if name == child or entity["kind"] == "place":
                    continue
                # Interests often surface in the text as a derived plaything.
                if entity["kind"] == "object" and f"{lowered} toy" in text:
                    toy = f"{name} toy"
                    present.append(toy)
                    roster.setdefault(toy, "object")
                elif lowered in text:
                    present.append(name)
                    roster.setdefault(name, entity["kind"])
            present.append(place)
            mood = "warm daylight" if section["kind"] != "consequence" else "tense moment"
            scenes.append({
                "section_id": section["id"],
                "description": f"{', '.join(present)} at the {place}; {mood}.",
                "required_entities": present,
            })
        return {
            "scenes": scenes,
            "roster": [{"name": name, "kind": kind} for name, kind in roster.items()],
        }

    def _handle_match_entities(self, payload: dict) -> dict:
        entities = list(payload["required_entities"])
        previous = payload.get("previous")
        if previous and previous.get("place") == payload.get("place"):
            for name in previous["entities"]:
                if name not in entities:
                    entities.append(name)
        return {"entities": entities, "removals": []}

    def _handle_describe_entities(self, payload: dict) -> dict:
        colors = ("red", "blue", "green", "yellow", "orange")
        swimming = "swim" in payload["story_text"].lower()
        described = []
        profile = {p["name"]: p for p in payload["profile_entities"]}
        for entity in payload["roster"]:
            name, kind = entity["name"], entity["kind"]
            registered = profile.get(name)
            outfit = None
            if kind == "person":
                outfit = ("wearing a swimsuit for the water"
                          if swimming else "wearing everyday play clothes")
            if registered and registered.get("photo"):
                appearance = f"{name} looks exactly like the registered photo."
            elif kind == "place":
                appearance = f"The {name}, drawn wide and friendly."
            else:
                color = colors[_pick(self.seed, f"color:{name}", len(colors))]
                appearance = (f"{name} is {color}, small, and well loved, with "
                              f"soft rounded shapes.")
            described.append({
                "name": name,
                "kind": kind,
                "appearance": appearance,
                "outfit_context": outfit,
            })
        return {"entities": described}


class MockImageProvider:
    """Content-addressed image mock with in-flight instrumentation."""

    def __init__(self, latency: float = 0.0):
        self.latency = latency
        self.requests: list[ImageRequest] = []
        self.fail_sections: Counter[str] = Counter()
        self.in_flight = 0
        self.max_in_flight = 0
        self._lock = threading.Lock()

    def generate(self, request: ImageRequest) -> str:
        with self._lock:
            self.requests.append(request)
            if self.fail_sections[request.section_id] > 0:
                self.fail_sections[request.section_id] -= 1
                raise ProviderError(f"injected image failure for {request.section_id}")
            self.in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self.in_flight)
        try:
            if self.latency:
                time.sleep(self.latency)
        finally:
            with self._lock:
                self.in_flight -= 1
        return "img-" + request.digest[:16]


class MockEmbeddingProvider:
    """Character-trigram hash embedding; stable across processes."""

    def __init__(self, dim: int = 32):
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        vector = np.zeros(self.dim, dtype=np.float64)
        padded = f"  {text.lower()}  "
        for i in range(len(padded) - 2):
            trigram = padded[i:i + 3]
            digest = hashlib.sha256(trigram.encode("utf-8")).digest()
            vector[int.from_bytes(digest[:4], "big") % self.dim] += 1.0
        norm = np.linalg.norm(vector)
        return vector / norm if norm else vector


def mock_suite(seed: int = 0, image_latency: float = 0.0) -> ProviderSuite:
    return ProviderSuite(
        text=MockTextProvider(seed=seed),
        image=MockImageProvider(latency=image_latency),
        embedding=MockEmbeddingProvider(),
    )


class FixtureMissing(ProviderError):
    pass


class _ReplayBase:
    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _load(self, digest: str) -> dict:
        path = self.root / f"{digest}.json"
        if not path.exists():
            raise FixtureMissing(f"no fixture for request digest {digest}")
        return json.loads(path.read_text("utf-8"))


class ReplayTextProvider(_ReplayBase):
    def complete(self, request: TextRequest) -> dict:
        return self._load(request.digest)


class ReplayImageProvider(_ReplayBase):
    def generate(self, request: ImageRequest) -> str:
        return self._load(request.digest)["image_ref"]


class ReplayEmbeddingProvider(_ReplayBase):
    def embed(self, text: str) -> np.ndarray:
        return np.asarray(self._load(digest_of({"embed": text}))["vector"], dtype=np.float64)


def replay_suite(root: str | Path) -> ProviderSuite:
    """Providers that replay recorded responses keyed by request digest."""
    return ProviderSuite(
        text=ReplayTextProvider(root),
        image=ReplayImageProvider(root),
        embedding=ReplayEmbeddingProvider(root),
    )


class RecordingSuite:
    """Wraps a suite and writes every response into the replay fixture format."""

    def __init__(self, inner: ProviderSuite, root: str | Path):
        self.inner = inner
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        outer = self

        class _Text:
            def complete(self, request: TextRequest) -> dict:
                response = outer.inner.text.complete(request)
                outer._write(request.digest, response)
                return response

        class _Image:
            def generate(self, request: ImageRequest) -> str:
                ref = outer.inner.image.generate(request)
                outer._write(request.digest, {"image_ref": ref})
                return ref

        class _Embed:
            def embed(self, text: str) -> np.ndarray:
                vector = outer.inner.embedding.embed(text)
                outer._write(digest_of({"embed": text}), {"vector": list(map(float, vector))})
                return vector

        self.suite = ProviderSuite(text=_Text(), image=_Image(), embedding=_Embed())

    def _write(self, digest: str, payload: dict) -> None:
        path = self.root / f"{digest}.json"
        path.write_text(json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=1) + "\n",
                        encoding="utf-8")
