"""CEFR vocabulary lexicon: word -> proficiency level."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from importlib import resources
from pathlib import Path


class CEFRLevel(enum.IntEnum):
    """Language-proficiency levels, totally ordered A1 < A2 < B1 < B2 < C1 < C2."""

    A1 = 1
    A2 = 2
    B1 = 3
    B2 = 4
    C1 = 5
    C2 = 6

    @classmethod
    def parse(cls, token: str) -> "CEFRLevel":
        try:
            return cls[token.strip().upper()]
        except KeyError:
            raise LexiconError(f"invalid CEFR level token: {token!r}") from None


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class Lexicon:
    """Read-only word-to-level map, shareable across concurrent assessments."""

    entries: dict[str, CEFRLevel]
    source_tag: str

    def level(self, word: str) -> CEFRLevel | None:
        return self.entries.get(word.lower())

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def parse_text(cls, text: str, source_tag: str) -> "Lexicon":
        """Parse the two-column tab-separated format; ``#`` starts a comment line."""
        entries: dict[str, CEFRLevel] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split("\t") if p.strip()]
            if len(parts) != 2:
                raise LexiconError(f"line {lineno}: expected 'word<TAB>level', got {line!r}")
            word, level = parts
            entries[word.lower()] = CEFRLevel.parse(level)
        return cls(entries=entries, source_tag=source_tag)

    @classmethod
    def load(cls, path: str | Path) -> "Lexicon":
        path = Path(path)
        return cls.parse_text(path.read_text("utf-8"), source_tag=str(path))

    @classmethod
    def bundled(cls) -> "Lexicon":
        text = resources.files(__package__).joinpath("data/cefr_lexicon.tsv").read_text("utf-8")
        return cls.parse_text(text, source_tag="storyforge-cefr-mini-1")
