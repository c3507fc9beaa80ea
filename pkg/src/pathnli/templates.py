"""Relation verbalization templates.

A template turns one traversed triple into a short sentence. Patterns are
plain text with {head} and {tail} placeholders, plus an optional {rel}
placeholder that emits the relation as a single token (so it keeps its
graph embedding instead of being spelled out in words). Each relation can
carry a separate pattern per traversal direction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import TextIO

from .errors import TemplateError
from .kg import Direction, KnowledgeGraph

_PLACEHOLDER_RE = re.compile(r"\{(head|tail|rel)\}")
DEFAULT_PATTERN = "{head} {rel} {tail}"


def validate_pattern(pattern: str) -> None:
    """A pattern needs {head} and {tail} exactly once; {rel} is optional
    (at most once) and no other braced names are allowed."""
    names = _PLACEHOLDER_RE.findall(pattern)
    stripped = _PLACEHOLDER_RE.sub("", pattern)
    if "{" in stripped or "}" in stripped:
        bad = re.search(r"\{[^{}]*\}|[{}]", stripped)
        raise TemplateError(f"unknown placeholder near {bad.group(0)!r}")
    for required in ("head", "tail"):
        if names.count(required) != 1:
            raise TemplateError(
                f"pattern must use {{{required}}} exactly once: {pattern!r}")
    if names.count("rel") > 1:
        raise TemplateError(f"pattern uses {{rel}} more than once: {pattern!r}")


@dataclass
class TemplateTable:
    """Per-(relation, direction) patterns with a shared default."""

    patterns: dict[tuple[int, Direction], str] = field(default_factory=dict)
    default: str = DEFAULT_PATTERN

    def set(self, relation: int, direction: Direction, pattern: str) -> None:
        validate_pattern(pattern)
        self.patterns[(relation, Direction(direction))] = pattern

    def get(self, relation: int, direction: Direction) -> str:
        return self.patterns.get((relation, Direction(direction)), self.default)


def save_templates(table: TemplateTable, kg: KnowledgeGraph,
                   out: TextIO) -> None:
    """One `relation<TAB>direction<TAB>pattern` line per override."""
    for (r, d) in sorted(table.patterns, key=lambda k: (k[0], int(k[1]))):
        out.write(f"{kg.relations[r]}\t{d}\t{table.patterns[(r, d)]}\n")


def load_templates(source: TextIO, kg: KnowledgeGraph) -> TemplateTable:
    table = TemplateTable()
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise TemplateError(
                f"line {lineno}: expected relation<TAB>direction<TAB>pattern")
        rel_name, dir_name, pattern = parts
        if rel_name not in kg.relation_ids:
            raise TemplateError(f"line {lineno}: unknown relation {rel_name!r}")
        if dir_name not in ("forward", "inverse"):
            raise TemplateError(
                f"line {lineno}: direction must be forward or inverse, "
                f"got {dir_name!r}")
        direction = Direction.FORWARD if dir_name == "forward" else Direction.INVERSE
        try:
            table.set(kg.relation_ids[rel_name], direction, pattern)
        except TemplateError as e:
            raise TemplateError(f"line {lineno}: {e}") from e
    return table
