"""Grade-level scoring and vocabulary flagging for story text.

The grade score is 0.39*(words/sentences) + 11.8*(syllables/words) - 15.59.
Vocabulary flags report every token above the CEFR threshold, skipping
personalization entities (exempt by name) and words absent from the lexicon;
proper nouns dominate unknowns and must never be forced out of a story.
This module only measures; simplification happens by regeneration elsewhere.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from ..story.sentences import count_sentences
from .lexicon import CEFRLevel, Lexicon
from .syllables import count_syllables

logger = logging.getLogger(__name__)

GRADE_WORDS_COEFF = 0.39
GRADE_SYLLABLES_COEFF = 11.8
GRADE_OFFSET = 15.59

DEFAULT_GRADE_CAP = 5.0
DEFAULT_CEFR_THRESHOLD = CEFRLevel.B2

_WORD = re.compile(r"[A-Za-z]+(?:['’-][A-Za-z]+)*")


class UnscorableText(ValueError):
    """Text with no words or no sentences cannot be graded."""


@dataclass(frozen=True)
class FlaggedWord:
    word: str
    level: CEFRLevel
    offset: int


@dataclass(frozen=True)
class ReadabilityReport:
    fkgl: float | None
    flagged_words: tuple[FlaggedWord, ...]
    syllable_count: int
    word_count: int
    sentence_count: int

    def to_dict(self) -> dict:
        return {
            "fkgl": self.fkgl,
            "syllable_count": self.syllable_count,
            "word_count": self.word_count,
            "sentence_count": self.sentence_count,
            "flagged_words": [
                {"word": f.word, "level": f.level.name, "offset": f.offset}
                for f in self.flagged_words
            ],
        }


@dataclass(frozen=True)
class SectionAssessment:
    passed: bool
    reasons: tuple[str, ...]
    report: ReadabilityReport | None

    @property
    def needs_simplification(self) -> bool:
        return not self.passed


def words_of(text: str) -> list[str]:
    return _WORD.findall(text)


def fkgl(text: str) -> float:
    """Grade level of ``text``; raises ``UnscorableText`` without words and sentences."""
    words = words_of(text)
    sentences = count_sentences(text)
    if not words or sentences == 0:
        raise UnscorableText("unscorable")
    syllables = sum(count_syllables(w) for w in words)
    return (
        GRADE_WORDS_COEFF * (len(words) / sentences)
        + GRADE_SYLLABLES_COEFF * (syllables / len(words))
        - GRADE_OFFSET
    )


def _exemption_tokens(exemptions: set[str] | frozenset[str] | tuple[str, ...]) -> set[str]:
    tokens: set[str] = set()
    for name in exemptions:
        tokens.update(t.lower() for t in _WORD.findall(name))
    return tokens


def cefr_flags(
    text: str,
    lexicon: Lexicon,
    exemptions: set[str] | frozenset[str] | tuple[str, ...] = (),
    threshold: CEFRLevel = DEFAULT_CEFR_THRESHOLD,
) -> list[FlaggedWord]:
    """Tokens above ``threshold``, one entry per distinct text offset.

    Exempt names (matched case-insensitively, token by token) and words
    missing from the lexicon are never flagged.
    """
    exempt = _exemption_tokens(exemptions)
    flags: list[FlaggedWord] = []
    for match in _WORD.finditer(text):
        token = match.group().lower()
        if token in exempt:
            continue
        level = lexicon.level(token)
        if level is None:
            logger.debug("word %r missing from lexicon %s; not flagged", token, lexicon.source_tag)
            continue
        if level > threshold:
            flags.append(FlaggedWord(word=match.group(), level=level, offset=match.start()))
    return flags


def analyze(
    text: str,
    lexicon: Lexicon,
    exemptions: set[str] | frozenset[str] | tuple[str, ...] = (),
    threshold: CEFRLevel = DEFAULT_CEFR_THRESHOLD,
) -> ReadabilityReport:
    words = words_of(text)
    sentences = count_sentences(text)
    syllables = sum(count_syllables(w) for w in words)
    grade: float | None
    try:
        grade = fkgl(text)
    except UnscorableText:
        grade = None
    return ReadabilityReport(
        fkgl=grade,
        flagged_words=tuple(cefr_flags(text, lexicon, exemptions, threshold)),
        syllable_count=syllables,
        word_count=len(words),
        sentence_count=sentences,
    )


def assess_section(
    text: str,
    lexicon: Lexicon,
    exemptions: set[str] | frozenset[str] | tuple[str, ...] = (),
    grade_cap: float = DEFAULT_GRADE_CAP,
    threshold: CEFRLevel = DEFAULT_CEFR_THRESHOLD,
) -> SectionAssessment:
    """Pass/needs-simplification verdict for one section's text.

    Simplification is needed when the grade exceeds ``grade_cap`` (strict) or
    any vocabulary flag fires; unscorable text needs simplification too.
    """
    report = analyze(text, lexicon, exemptions, threshold)
    reasons: list[str] = []
    if report.fkgl is None:
        reasons.append("unscorable")
    elif report.fkgl > grade_cap:
        reasons.append("grade")
    if report.flagged_words:
        reasons.append("vocabulary")
    return SectionAssessment(passed=not reasons, reasons=tuple(reasons), report=report)
