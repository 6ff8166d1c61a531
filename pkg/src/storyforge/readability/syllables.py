"""Dictionary-free syllable estimation.

Counts maximal vowel groups (a, e, i, o, u, y), subtracts a silent trailing
"e" unless the word ends in "le" preceded by a consonant, and never returns
less than 1 for an alphabetic word. A small bundled override table corrects
words the rule mis-counts (hiatus like "lion", compounds like "firefighter").
Non-alphabetic tokens count zero.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

_VOWEL_GROUP = re.compile(r"[aeiouy]+")
_VOWELS = frozenset("aeiouy")
_EDGE_PUNCT = "\"'‘’“”.,;:!?()[]{}…-"


@lru_cache(maxsize=1)
def load_overrides() -> dict[str, int]:
    text = resources.files(__package__).joinpath("data/syllable_overrides.tsv").read_text("utf-8")
    overrides: dict[str, int] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        word, count = line.split("\t")
        overrides[word.strip().lower()] = int(count)
    return overrides


def _vowel_group_count(word: str) -> int:
    groups = len(_VOWEL_GROUP.findall(word))
    if word.endswith("e") and not (
        word.endswith("le") and len(word) >= 3 and word[-3] not in _VOWELS
    ):
        groups -= 1
    return max(groups, 1)


def count_syllables(word: str) -> int:
    """Syllables in a single token; >= 1 for alphabetic words, 0 otherwise."""
    w = word.lower().strip(_EDGE_PUNCT).replace("'", "").replace("’", "")
    if not w:
        return 0
    override = load_overrides().get(w)
    if override is not None:
        return override
    parts = w.split("-") if "-" in w else [w]
    if not all(part.isalpha() and part.isascii() for part in parts):
        return 0
    return sum(load_overrides().get(part, _vowel_group_count(part)) for part in parts)
