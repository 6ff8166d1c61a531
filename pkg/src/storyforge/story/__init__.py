"""Story document model: sections, path graph, structural rules, and file format."""

from .model import (
    DESIRABLE_CHAIN,
    REPAIR_CHAIN,
    UNDESIRABLE_PATH_COUNT,
    EmotionCue,
    PathGraph,
    ProfileEntityRef,
    ProfileSnapshot,
    Section,
    SectionEdit,
    SectionKind,
    Story,
    TargetBehavior,
    TopicType,
)
from .paths import GraphError, enumerate_paths
from .sentences import count_sentences, load_abbreviations
from .validate import ValidationReport, Violation, validate_structure
from .document import (
    FORMAT_VERSION,
    DocumentError,
    dumps_story,
    loads_story,
    story_from_document,
    story_to_document,
)

__all__ = [
    "DESIRABLE_CHAIN",
    "REPAIR_CHAIN",
    "UNDESIRABLE_PATH_COUNT",
    "EmotionCue",
    "PathGraph",
    "ProfileEntityRef",
    "ProfileSnapshot",
    "Section",
    "SectionEdit",
    "SectionKind",
    "Story",
    "TargetBehavior",
    "TopicType",
    "GraphError",
    "enumerate_paths",
    "count_sentences",
    "load_abbreviations",
    "ValidationReport",
    "Violation",
    "validate_structure",
    "FORMAT_VERSION",
    "DocumentError",
    "dumps_story",
    "loads_story",
    "story_from_document",
    "story_to_document",
]
