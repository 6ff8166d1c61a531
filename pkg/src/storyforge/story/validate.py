"""Structural validation of story documents.

Every rule of the story format is checked here and reported as a named
violation; malformed graphs (dangling ids, cycles) are themselves violations,
never crashes. Rule names are stable strings asserted by tests and surfaced
to users, so treat them as part of the contract.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    DESIRABLE_CHAIN,
    REPAIR_CHAIN,
    SINGLETON_KINDS,
    UNDESIRABLE_PATH_COUNT,
    SectionKind,
    Story,
)
from .paths import GraphError, enumerate_paths
from .sentences import count_sentences

#: Maximum sentences along any single root-to-Ending path (Cover excluded).
DEFAULT_PATH_SENTENCE_CAP = 12
#: Per-section sentence count above which a warning (not a violation) is raised.
DEFAULT_SECTION_SENTENCE_SOFT_CAP = 3

_PREFIX = (SectionKind.COVER, SectionKind.INTRODUCTION, SectionKind.CHALLENGE)


@dataclass(frozen=True)
class Violation:
    rule: str
    message: str
    section_id: str | None = None

    def __str__(self) -> str:
        where = f" [{self.section_id}]" if self.section_id else ""
        return f"{self.rule}{where}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def rules(self) -> set[str]:
        return {v.rule for v in self.violations}

    def add(self, rule: str, message: str, section_id: str | None = None) -> None:
        self.violations.append(Violation(rule, message, section_id))

    def warn(self, rule: str, message: str, section_id: str | None = None) -> None:
        self.warnings.append(Violation(rule, message, section_id))


def _contains_in_order(kinds: tuple[SectionKind, ...], chain: tuple[SectionKind, ...]) -> bool:
    it = iter(kinds)
    return all(step in it for step in chain)


def _check_sections(story: Story, report: ValidationReport) -> None:
    graph = story.graph
    by_kind: dict[SectionKind, list[str]] = {}
    for section in graph.sections.values():
        by_kind.setdefault(section.kind, []).append(section.id)

    for kind in SINGLETON_KINDS:
        ids = by_kind.get(kind, [])
        if len(ids) != 1:
            report.add(
                "kind-count",
                f"expected exactly one {kind.value} section, found {len(ids)}",
            )

    roles = ((graph.root, SectionKind.COVER), (graph.challenge, SectionKind.CHALLENGE),
             (graph.ending, SectionKind.ENDING))
    for section_id, expected in roles:
        section = graph.sections.get(section_id)
        if section is None:
            report.add("dangling-id", f"declared {expected.value} id is not a section", section_id)
        elif section.kind is not expected:
            report.add(
                "role-mismatch",
                f"section has kind {section.kind.value}, expected {expected.value}",
                section_id,
            )

    snapshot_names = story.profile_snapshot.names()
    for section in graph.sections.values():
        if len(section.next) >= 2 and section.kind is not SectionKind.CHALLENGE:
            report.add(
                "branch-outside-challenge",
                f"{section.kind.value} section has {len(section.next)} successors",
                section.id,
            )
        if section.kind is SectionKind.CHALLENGE and not 2 <= len(section.next) <= 3:
            report.add(
                "branch-fanout",
                f"challenge offers {len(section.next)} options, expected 2 or 3",
                section.id,
            )
        if section.kind is not SectionKind.COVER and not section.text.strip():
            report.add("empty-text", "section text is empty", section.id)
        for cue in section.emotion_cues:
            if not cue.populated:
                report.add(
                    "empty-emotion-cue",
                    f"cue for {cue.character!r} must pair an emotion with an observable response",
                    section.id,
                )
            if cue.character.lower() not in snapshot_names:
                report.add(
                    "unknown-entity",
                    f"cue character {cue.character!r} is not in the profile snapshot",
                    section.id,
                )
        if section.kind in (SectionKind.CONSEQUENCE, SectionKind.REPAIRED_CONSEQUENCE):
            if not any(cue.populated for cue in section.emotion_cues):
                report.add(
                    "missing-emotion-cue",
                    f"{section.kind.value} section needs at least one emotion cue",
                    section.id,
                )
        for successor in section.next:
            if successor not in graph.sections:
                report.add(
                    "dangling-id",
                    f"successor {successor!r} is not a section",
                    section.id,
                )


def _check_paths(
    story: Story,
    report: ValidationReport,
    path_sentence_cap: int,
    section_sentence_soft_cap: int,
) -> None:
    graph = story.graph
    try:
        paths = enumerate_paths(graph)
    except GraphError as err:
        rule = "cycle" if err.code == "cycle" else "dangling-id"
        if err.code == "no-branch":
            # Fan-out 0 is already reported as branch-fanout; nothing to walk.
            return
        report.add(rule, str(err), err.details[0] if err.details else None)
        return

    desirable: list[tuple[str, ...]] = []
    undesirable: list[tuple[str, ...]] = []
    for path in paths:
        if path[-1] != graph.ending:
            report.add(
                "shared-ending",
                "path does not terminate at the shared ending",
                path[-1],
            )
            continue
        kinds = tuple(graph.sections[sid].kind for sid in path)
        if kinds[:3] != _PREFIX:
            report.add(
                "path-shape",
                "path must open with cover, introduction, challenge",
                path[0],
            )
            continue
        if kinds[3:] == DESIRABLE_CHAIN:
            desirable.append(path)
        elif _contains_in_order(kinds[3:], REPAIR_CHAIN):
            undesirable.append(path)
        else:
            report.add(
                "missing-repair-chain",
                "undesirable path must run decision, consequence, repair, "
                "response, repaired consequence, ending in order",
                path[3] if len(path) > 3 else None,
            )
            undesirable.append(path)

    if len(desirable) != 1:
        report.add(
            "desirable-path",
            f"expected exactly one desirable path, found {len(desirable)}",
        )
    expected_undesirable = UNDESIRABLE_PATH_COUNT[story.topic_type]
    if len(undesirable) != expected_undesirable:
        report.add(
            "path-count-mismatch",
            f"{story.topic_type.value} stories need {expected_undesirable} "
            f"undesirable path(s), found {len(undesirable)}",
        )

    if len(desirable) == 1 and tuple(graph.desirable_path) != desirable[0]:
        report.add(
            "path-declaration-mismatch",
            "declared desirable path does not match the graph",
        )
    if {tuple(p) for p in graph.undesirable_paths} != {tuple(p) for p in undesirable}:
        report.add(
            "path-declaration-mismatch",
            "declared undesirable paths do not match the graph",
        )

    for path in paths:
        total = sum(
            count_sentences(graph.sections[sid].text)
            for sid in path
            if graph.sections[sid].kind is not SectionKind.COVER
        )
        if total > path_sentence_cap:
            report.add(
                "sentence-cap",
                f"path carries {total} sentences, cap is {path_sentence_cap}",
                path[-1],
            )

    reachable = {sid for path in paths for sid in path}
    for section_id in graph.sections:
        if section_id not in reachable:
            report.add("unreachable-section", "section is unreachable from the root", section_id)

    for section in graph.sections.values():
        if section.kind is SectionKind.COVER:
            continue
        per_section = count_sentences(section.text)
        if per_section > section_sentence_soft_cap:
            report.warn(
                "section-sentence-cap",
                f"section has {per_section} sentences, prefer at most "
                f"{section_sentence_soft_cap}",
                section.id,
            )


def validate_structure(
    story: Story,
    *,
    path_sentence_cap: int = DEFAULT_PATH_SENTENCE_CAP,
    section_sentence_soft_cap: int = DEFAULT_SECTION_SENTENCE_SOFT_CAP,
) -> ValidationReport:
    """Check every structural rule; an empty violation list means the story is sound."""
    report = ValidationReport()
    _check_sections(story, report)
    if not any(v.rule == "dangling-id" for v in report.violations):
        _check_paths(story, report, path_sentence_cap, section_sentence_soft_cap)
    return report
