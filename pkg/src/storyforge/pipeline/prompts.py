"""Prompt template loading.

Prompt text is data, not code: each stage's instructions live as a versioned
``.txt`` asset under ``prompts/`` with ``$slot`` placeholders. ``render``
fails loudly on a missing slot so template drift cannot pass silently.

Template slots:

- classify: behavior
- generate_relationship / generate_social_rules / generate_healthy_habits:
  child_name, behavior, interests, persons, places, sentence_cap, feedback
- validate_content: criterion_number, criterion_name, criterion_definition,
  story_text
- refine: kind, text, reasons, flagged_words, keep_names, required_terms
- translate: examples, sections
- scenes: child_name, known_entities, sections
- match_entities: section_id, description, required_entities, previous, roster
- describe_entities: roster, profile_entities, story_text
- illustration: scene_description, entity_descriptions, reference_count
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from string import Template


@lru_cache(maxsize=None)
def template(name: str) -> Template:
    text = resources.files(__package__).joinpath(f"prompts/{name}.txt").read_text("utf-8")
    return Template(text)


def render(name: str, **slots: object) -> str:
    return template(name).substitute(**{k: str(v) for k, v in slots.items()})
