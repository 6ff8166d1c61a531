"""Deterministic sentence counting.

A sentence boundary is a maximal run of terminator characters (``.``, ``!``,
``?``), with two suppressions: a period acting as a decimal point, and a
period that closes a known abbreviation ("Mr.", "e.g.", ...). An ellipsis is
a single run and therefore counts once. The abbreviation list ships as a
data asset next to this module.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

_TERMINATOR_RUN = re.compile(r"[.!?]+")
_DECIMAL_POINT = re.compile(r"(?<=\d)\.(?=\d)")


@lru_cache(maxsize=1)
def load_abbreviations() -> frozenset[str]:
    """Bundled abbreviation tokens, each ending with a period."""
    text = resources.files(__package__).joinpath("data/abbreviations.txt").read_text("utf-8")
    entries = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.add(line)
    return frozenset(entries)


@lru_cache(maxsize=1)
def _abbreviation_pattern() -> re.Pattern[str]:
    # Longest entries first so "e.g." wins over any shorter overlap.
    entries = sorted(load_abbreviations(), key=len, reverse=True)
    alternatives = "|".join(re.escape(entry) for entry in entries)
    return re.compile(rf"(?<![\w.])(?:{alternatives})(?!\w)", re.IGNORECASE)


def count_sentences(text: str) -> int:
    """Number of sentence terminators in ``text``; empty text counts zero."""
    if not text:
        return 0
    neutral = _DECIMAL_POINT.sub(",", text)
    neutral = _abbreviation_pattern().sub(lambda m: m.group().replace(".", ""), neutral)
    return len(_TERMINATOR_RUN.findall(neutral))
