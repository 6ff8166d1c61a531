"""End-to-end pipeline runs as resumable, auditable jobs.

A job advances through the stage order below, persisting each stage's output
artifact before moving on. Restarting a job re-reads the artifact store and
continues from the first stage without an artifact, so a crashed or failed
run never repeats completed provider work. A completed job is a no-op to
re-run. The stage log records every attempt with input digests, enough to
reconstruct the run.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..story.document import story_from_document, story_to_document
from ..story.model import TopicType
from ..story.validate import validate_structure
from .images import build_cache, illustrate_story
from .providers import ProviderSuite, digest_of
from .request import GenerationRequest, PipelineOptions
from .scenes import (
    EntityAssignment,
    EntityDescription,
    SceneDescription,
    describe_entities,
    generate_scene_descriptions,
    match_entities,
)
from .stages import (
    StageError,
    classify_topic,
    generate_story_draft,
    refine_text,
    translate_story,
    validate_content,
)

STAGE_ORDER = (
    "classify",
    "generate",
    "validate_content",
    "refine",
    "translate",
    "scenes",
    "match_entities",
    "describe_entities",
    "illustrate",
)


@dataclass
class StageRecord:
    stage: str
    attempt: int
    input_digest: str
    artifact: str  # digest of the output artifact; empty on failure
    verdict: str  # ok | fail | skipped
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "attempt": self.attempt,
            "input_digest": self.input_digest,
            "artifact": self.artifact,
            "verdict": self.verdict,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "StageRecord":
        return cls(**raw)


@dataclass
class GenerationJob:
    id: str
    request: GenerationRequest
    seed: int
    status: str = "pending"  # pending | running | failed | complete
    failed_stage: str | None = None
    failure_reason: str | None = None
    story_id: str | None = None
    stage_log: list[StageRecord] = field(default_factory=list)
    artifacts: dict[str, dict] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def record(self, stage: str, attempt: int, input_digest: str,
               artifact: Any = None, verdict: str = "ok", detail: str = "") -> None:
        self.stage_log.append(StageRecord(
            stage=stage,
            attempt=attempt,
            input_digest=input_digest,
            artifact=digest_of(artifact) if artifact is not None else "",
            verdict=verdict,
            detail=detail,
        ))

    @property
    def story_document(self) -> dict | None:
        return self.artifacts.get("illustrate", {}).get("document")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "request": self.request.to_dict(),
            "seed": self.seed,
            "status": self.status,
            "failed_stage": self.failed_stage,
            "failure_reason": self.failure_reason,
            "story_id": self.story_id,
            "stage_log": [r.to_dict() for r in self.stage_log],
            "artifacts": self.artifacts,
            "warnings": self.warnings,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "GenerationJob":
        return cls(
            id=raw["id"],
            request=GenerationRequest.from_dict(raw["request"]),
            seed=raw["seed"],
            status=raw["status"],
            failed_stage=raw.get("failed_stage"),
            failure_reason=raw.get("failure_reason"),
            story_id=raw.get("story_id"),
            stage_log=[StageRecord.from_dict(r) for r in raw.get("stage_log", [])],
            artifacts=raw.get("artifacts", {}),
            warnings=raw.get("warnings", []),
        )


class JobStore:
    """Directory-backed job persistence with atomic writes."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, job_id: str) -> Path:
        return self.root / f"{job_id}.json"

    def save(self, job: GenerationJob) -> None:
        target = self.path(job.id)
        tmp = target.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(job.to_dict(), sort_keys=True, ensure_ascii=False,
                                  indent=2) + "\n", encoding="utf-8")
        os.replace(tmp, target)

    def load(self, job_id: str) -> GenerationJob | None:
        path = self.path(job_id)
        if not path.exists():
            return None
        return GenerationJob.from_dict(json.loads(path.read_text("utf-8")))

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.json"))


def _save(store: JobStore | None, job: GenerationJob) -> None:
    if store is not None:
        store.save(job)


def run_pipeline(
    request: GenerationRequest,
    providers: ProviderSuite,
    options: PipelineOptions | None = None,
    *,
    job_id: str | None = None,
    store: JobStore | None = None,
) -> GenerationJob:
    """Run (or resume) a full generation job; never raises for stage failures.

    Precondition violations raise ``PipelinePreconditionError`` before a job
    exists; anything after that lands in the returned job's status.
    """
    options = options or PipelineOptions()
    request.check_preconditions()

    identity = {"request": request.to_dict(), "seed": options.seed}
    job_id = job_id or "job-" + digest_of(identity)[:16]
    job = store.load(job_id) if store is not None else None
    if job is None:
        job = GenerationJob(id=job_id, request=request, seed=options.seed)
    if job.status == "complete":
        return job

    job.status = "running"
    job.failed_stage = None
    job.failure_reason = None
    _save(store, job)

    story_id = "story-" + digest_of(identity)[:16]
    created_at = options.clock()

    try:
        _advance(job, request, providers, options, story_id, created_at, store)
        job.status = "complete"
        job.story_id = story_id
    except StageError as err:
        job.status = "failed"
        job.failed_stage = err.stage
        job.failure_reason = err.reason
        job.record(err.stage, attempt=0, input_digest="", verdict="fail", detail=str(err))
    _save(store, job)
    return job


def _advance(
    job: GenerationJob,
    request: GenerationRequest,
    providers: ProviderSuite,
    options: PipelineOptions,
    story_id: str,
    created_at: str,
    store: JobStore | None,
) -> None:
    # classify
    if "classify" not in job.artifacts:
        topic = classify_topic(request.behavior, providers, options)
        job.artifacts["classify"] = {"topic_type": topic.value}
        job.record("classify", 1, digest_of(request.to_dict()),
                   job.artifacts["classify"])
        _save(store, job)
    topic = TopicType.parse(job.artifacts["classify"]["topic_type"])

    # generate + content validation loop, sharing one attempt budget
    if "validate_content" not in job.artifacts:
        generate_state = job.artifacts.get("generate", {})
        attempt = generate_state.get("attempt", 0)
        feedback = generate_state.get("feedback", "")
        story = (story_from_document(generate_state["document"])
                 if "document" in generate_state else None)
        while True:
            if story is None:
                attempt += 1
                story = generate_story_draft(
                    topic, request, providers, options,
                    story_id=story_id, created_at=created_at,
                    attempt=attempt, feedback=feedback,
                )
                report = validate_structure(
                    story, path_sentence_cap=options.path_sentence_cap)
                if not report.ok:
                    detail = "; ".join(str(v) for v in report.violations[:4])
                    job.record("generate", attempt, digest_of(request.to_dict()),
                               verdict="fail", detail=f"structure: {detail}")
                    if attempt >= options.max_attempts:
                        raise StageError("generate", "structure-invalid", detail)
                    feedback = f"the draft violated structure rules: {detail}"
                    story = None
                    continue
                doc = story_to_document(story)
                job.artifacts["generate"] = {
                    "document": doc, "attempt": attempt, "feedback": feedback,
                }
                job.record("generate", attempt, digest_of(request.to_dict()), doc)
                _save(store, job)

            verdict = validate_content(story, request, providers, options)
            doc_digest = digest_of(job.artifacts["generate"]["document"])
            if verdict.passed:
                job.artifacts["validate_content"] = {"passed": True, "attempt": attempt}
                job.record("validate_content", attempt, doc_digest, {"passed": True})
                _save(store, job)
                break
            job.record("validate_content", attempt, doc_digest,
                       verdict="fail", detail=verdict.reason)
            if attempt >= options.max_attempts:
                raise StageError("validate_content", "content-invalid", verdict.reason)
            feedback = verdict.reason
            story = None
    story = story_from_document(job.artifacts["generate"]["document"])

    # refine
    if "refine" not in job.artifacts:
        refined, warnings = refine_text(story, request, providers, options)
        doc = story_to_document(refined)
        job.artifacts["refine"] = {"document": doc, "warnings": warnings}
        job.warnings.extend(warnings)
        job.record("refine", 1, digest_of(job.artifacts["generate"]["document"]), doc)
        _save(store, job)
    story = story_from_document(job.artifacts["refine"]["document"])

    # translate (optional per request)
    if "translate" not in job.artifacts:
        if request.translate:
            translated, warnings = translate_story(story, providers, options)
            doc = story_to_document(translated)
            job.artifacts["translate"] = {"document": doc, "warnings": warnings}
            job.warnings.extend(warnings)
            job.record("translate", 1, digest_of(job.artifacts["refine"]["document"]), doc)
        else:
            job.artifacts["translate"] = {"skipped": True}
            job.record("translate", 1, digest_of(job.artifacts["refine"]["document"]),
                       verdict="skipped")
        _save(store, job)
    if not job.artifacts["translate"].get("skipped"):
        story = story_from_document(job.artifacts["translate"]["document"])

    # scene descriptions
    if "scenes" not in job.artifacts:
        scenes, roster = generate_scene_descriptions(story, providers, options)
        job.artifacts["scenes"] = {
            "scenes": [scenes[sid].to_dict() for sid in sorted(scenes)],
            "roster": roster,
        }
        job.record("scenes", 1, digest_of(story_to_document(story)),
                   job.artifacts["scenes"])
        _save(store, job)
    scenes = {
        raw["section_id"]: SceneDescription.from_dict(raw)
        for raw in job.artifacts["scenes"]["scenes"]
    }
    roster = dict(job.artifacts["scenes"]["roster"])

    # entity matching
    if "match_entities" not in job.artifacts:
        assignments = match_entities(story, scenes, roster, providers, options)
        job.artifacts["match_entities"] = {
            "assignments": [assignments[sid].to_dict() for sid in sorted(assignments)],
        }
        job.record("match_entities", 1, digest_of(job.artifacts["scenes"]),
                   job.artifacts["match_entities"])
        _save(store, job)
    assignments = {
        raw["section_id"]: EntityAssignment.from_dict(raw)
        for raw in job.artifacts["match_entities"]["assignments"]
    }

    # entity descriptions
    if "describe_entities" not in job.artifacts:
        descriptions = describe_entities(story, roster, request.profile,
                                         providers, options)
        job.artifacts["describe_entities"] = {
            "entities": [descriptions[name].to_dict() for name in sorted(descriptions)],
        }
        job.record("describe_entities", 1, digest_of(roster),
                   job.artifacts["describe_entities"])
        _save(store, job)
    descriptions = {
        raw["name"]: EntityDescription.from_dict(raw)
        for raw in job.artifacts["describe_entities"]["entities"]
    }

    # entity closure: anything assigned must be described exactly once
    assigned_names = {name for a in assignments.values() for name in a.entities}
    undescribed = assigned_names - set(descriptions)
    if undescribed:
        raise StageError("describe_entities", "coverage",
                         f"assigned but undescribed: {sorted(undescribed)}")

    # illustration
    if "illustrate" not in job.artifacts:
        illustrated, warnings = illustrate_story(
            story, scenes, assignments, descriptions, providers, options)
        cache = build_cache(illustrated, scenes, assignments, descriptions, roster)
        doc = story_to_document(illustrated, preprocessing=cache.to_dict())
        job.artifacts["illustrate"] = {
            "document": doc,
            "images": {s.id: s.illustration for s in illustrated.sections_in_order()},
        }
        job.warnings.extend(warnings)
        job.record(
            "illustrate", 1,
            digest_of({"assignments": job.artifacts["match_entities"],
                       "descriptions": job.artifacts["describe_entities"]}),
            doc,
        )
        _save(store, job)
