"""Readability measurement: grade-level scoring and CEFR vocabulary flags."""

from .lexicon import CEFRLevel, Lexicon, LexiconError
from .scoring import (
    DEFAULT_CEFR_THRESHOLD,
    DEFAULT_GRADE_CAP,
    FlaggedWord,
    ReadabilityReport,
    SectionAssessment,
    UnscorableText,
    analyze,
    assess_section,
    cefr_flags,
    fkgl,
    words_of,
)
from .syllables import count_syllables

__all__ = [
    "CEFRLevel",
    "Lexicon",
    "LexiconError",
    "DEFAULT_CEFR_THRESHOLD",
    "DEFAULT_GRADE_CAP",
    "FlaggedWord",
    "ReadabilityReport",
    "SectionAssessment",
    "UnscorableText",
    "analyze",
    "assess_section",
    "cefr_flags",
    "fkgl",
    "words_of",
    "count_syllables",
]
