"""Corpus-wide structural validation: the regression gate over generated stories."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..story.document import DocumentError, loads_story
from ..story.validate import validate_structure


@dataclass
class FileResult:
    path: str
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass
class CorpusSummary:
    files: list[FileResult]

    @property
    def total_violations(self) -> int:
        return sum(len(f.violations) for f in self.files)

    @property
    def ok(self) -> bool:
        return self.total_violations == 0

    def render(self) -> str:
        lines = []
        for result in self.files:
            status = "ok" if result.ok else f"{len(result.violations)} violation(s)"
            lines.append(f"{result.path}: {status}")
            for violation in result.violations:
                lines.append(f"  - {violation}")
        lines.append(f"checked {len(self.files)} file(s), "
                     f"{self.total_violations} violation(s)")
        return "\n".join(lines)


def _check_file(path: Path) -> FileResult:
    result = FileResult(path=str(path))
    try:
        story = loads_story(path.read_text("utf-8"))
    except (OSError, DocumentError, UnicodeDecodeError) as err:
        result.violations.append(f"unreadable: {err}")
        return result
    report = validate_structure(story)
    result.violations.extend(str(v) for v in report.violations)
    return result


def validate_corpus(directory: str | Path, pattern: str = "*.json") -> CorpusSummary:
    """Validate every story file in a directory; aggregation is order-independent."""
    paths = sorted(Path(directory).glob(pattern))
    with ThreadPoolExecutor(max_workers=4) as pool:
        results = list(pool.map(_check_file, paths))
    results.sort(key=lambda r: r.path)
    return CorpusSummary(files=results)
