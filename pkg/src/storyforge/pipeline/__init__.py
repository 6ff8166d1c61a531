"""Staged story-generation pipeline over pluggable providers."""

from .fewshot import FewShotBank, FewShotSample, cosine_similarities, select_samples
from .images import (
    PreprocessingCache,
    SectionPrep,
    assemble_illustration_request,
    build_cache,
    illustrate_story,
    regenerate_illustration,
    text_digest,
)
from .job import STAGE_ORDER, GenerationJob, JobStore, StageRecord, run_pipeline
from .mock import (
    FixtureMissing,
    MockEmbeddingProvider,
    MockImageProvider,
    MockTextProvider,
    RecordingSuite,
    mock_suite,
    replay_suite,
)
from .providers import (
    ImageRequest,
    ProviderError,
    ProviderSuite,
    ResponseParseError,
    TextRequest,
    digest_of,
    live_suite,
)
from .request import (
    ChildProfile,
    GenerationRequest,
    PipelineOptions,
    PipelinePreconditionError,
)
from .scenes import (
    EntityAssignment,
    EntityDescription,
    SceneDescription,
    describe_entities,
    generate_scene_descriptions,
    match_entities,
)
from .stages import (
    CONTENT_CRITERIA,
    ContentVerdict,
    StageError,
    classify_topic,
    generate_story_draft,
    refine_text,
    translate_story,
    validate_content,
)

__all__ = [
    "FewShotBank",
    "FewShotSample",
    "cosine_similarities",
    "select_samples",
    "PreprocessingCache",
    "SectionPrep",
    "assemble_illustration_request",
    "build_cache",
    "illustrate_story",
    "regenerate_illustration",
    "text_digest",
    "STAGE_ORDER",
    "GenerationJob",
    "JobStore",
    "StageRecord",
    "run_pipeline",
    "FixtureMissing",
    "MockEmbeddingProvider",
    "MockImageProvider",
    "MockTextProvider",
    "RecordingSuite",
    "mock_suite",
    "replay_suite",
    "ImageRequest",
    "ProviderError",
    "ProviderSuite",
    "ResponseParseError",
    "TextRequest",
    "digest_of",
    "live_suite",
    "ChildProfile",
    "GenerationRequest",
    "PipelineOptions",
    "PipelinePreconditionError",
    "EntityAssignment",
    "EntityDescription",
    "SceneDescription",
    "describe_entities",
    "generate_scene_descriptions",
    "match_entities",
    "CONTENT_CRITERIA",
    "ContentVerdict",
    "StageError",
    "classify_topic",
    "generate_story_draft",
    "refine_text",
    "translate_story",
    "validate_content",
]
