"""Path enumeration over the section graph."""

from __future__ import annotations

from .model import PathGraph, Story


class GraphError(ValueError):
    """A structural defect that prevents path enumeration.

    ``code`` is a stable machine-readable rule name; ``details`` carries the
    offending section ids.
    """

    def __init__(self, code: str, message: str, details: tuple[str, ...] = ()):
        super().__init__(message)
        self.code = code
        self.details = details


def _graph_of(story: Story | PathGraph) -> PathGraph:
    return story.graph if isinstance(story, Story) else story


def enumerate_paths(story: Story | PathGraph) -> list[tuple[str, ...]]:
    """Every maximal root-to-end section id sequence.

    The recorded desirable path is listed first when it matches an actual
    sequence; the remaining sequences keep Challenge option order (which is
    depth-first discovery order). Raises ``GraphError`` on cycles, dangling
    successor ids, a missing root, or a Challenge with no successors.
    """
    graph = _graph_of(story)
    if graph.root not in graph.sections:
        raise GraphError("dangling-id", f"root section {graph.root!r} not present", (graph.root,))
    challenge = graph.sections.get(graph.challenge)
    if challenge is not None and not challenge.next:
        raise GraphError("no-branch", "challenge section has no successors", (graph.challenge,))

    paths: list[tuple[str, ...]] = []

    def walk(section_id: str, trail: list[str]) -> None:
        if section_id in trail:
            cycle = tuple(trail[trail.index(section_id):]) + (section_id,)
            raise GraphError("cycle", f"cycle through {section_id!r}", cycle)
        if section_id not in graph.sections:
            raise GraphError("dangling-id", f"successor {section_id!r} not present", (section_id,))
        trail.append(section_id)
        successors = graph.sections[section_id].next
        if not successors:
            paths.append(tuple(trail))
        else:
            for nxt in successors:
                walk(nxt, trail)
        trail.pop()

    walk(graph.root, [])

    desirable = tuple(graph.desirable_path)
    if desirable in paths:
        paths.remove(desirable)
        paths.insert(0, desirable)
    return paths
