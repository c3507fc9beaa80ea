"""Knowledge-graph storage, traversal, and candidate-answer sampling.

The graph is an immutable, fully indexed set of (head, relation, tail)
triples with interned string tables. Traversal is bidirectional: a step may
follow a triple either along its stored direction or against it, and the
direction is recorded so verbalization can pick the right template.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, NamedTuple, Optional, Sequence, TextIO

import numpy as np

from .errors import DataError, KGFormatError, UnanswerableQuestionError


class Direction(IntEnum):
    FORWARD = 0
    INVERSE = 1

    def __str__(self) -> str:
        return "forward" if self is Direction.FORWARD else "inverse"


FORWARD = Direction.FORWARD
INVERSE = Direction.INVERSE


class Step(NamedTuple):
    """One directed traversal of a triple: relation, entity arrived at, and
    whether the stored triple was followed forward (head->tail) or inverse."""

    relation: int
    neighbor: int
    direction: Direction


@dataclass(frozen=True)
class Path:
    """A simple path: an origin entity and the ordered steps taken from it."""

    origin: int
    steps: tuple[Step, ...]

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def terminus(self) -> int:
        return self.steps[-1].neighbor

    def entities(self) -> list[int]:
        """All entities visited, origin first."""
        return [self.origin] + [s.neighbor for s in self.steps]

    def triples(self) -> list[tuple[int, int, int]]:
        """The stored (head, relation, tail) triple behind each step."""
        out = []
        cur = self.origin
        for s in self.steps:
            if s.direction == FORWARD:
                out.append((cur, s.relation, s.neighbor))
            else:
                out.append((s.neighbor, s.relation, cur))
            cur = s.neighbor
        return out

    def sort_key(self):
        """Canonical ordering key: length, then the step sequence."""
        return (len(self.steps),
                tuple((s.relation, int(s.direction), s.neighbor) for s in self.steps))


@dataclass(frozen=True)
class KGFormat:
    """Line format of a triple file: one head|relation|tail per line."""

    delimiter: str = "|"
    comment: str = "#"


@dataclass
class KnowledgeGraph:
    entities: list[str]
    relations: list[str]
    entity_ids: dict[str, int]
    relation_ids: dict[str, int]
    triples: frozenset[tuple[int, int, int]]
    fwd_index: dict[int, list[tuple[int, int]]]  # head -> [(relation, tail)]
    inv_index: dict[int, list[tuple[int, int]]]  # tail -> [(relation, head)]
    _gazetteer: Optional[dict] = field(default=None, repr=False, compare=False)

    @property
    def n_entities(self) -> int:
        return len(self.entities)

    @property
    def n_relations(self) -> int:
        return len(self.relations)

    @property
    def n_triples(self) -> int:
        return len(self.triples)

    def entity_name(self, e: int) -> str:
        self._check_entity(e)
        return self.entities[e]

    def entity_id(self, name: str) -> Optional[int]:
        """Exact-name lookup, falling back to a case-insensitive match."""
        if name in self.entity_ids:
            return self.entity_ids[name]
        lower = {n.lower(): i for n, i in self.entity_ids.items()}
        return lower.get(name.lower())

    def _check_entity(self, e: int) -> None:
        if not (0 <= e < len(self.entities)):
            raise KeyError(f"unknown entity id {e}")

    def stats_line(self) -> str:
        return (f"entities={self.n_entities} relations={self.n_relations} "
                f"triples={self.n_triples}")

    @classmethod
    def from_triples(cls, named_triples: Iterable[tuple[str, str, str]],
                     extra_entities: Sequence[str] = ()) -> "KnowledgeGraph":
        """Build an indexed graph from (head, relation, tail) name triples."""
        entities: list[str] = []
        relations: list[str] = []
        e_ids: dict[str, int] = {}
        r_ids: dict[str, int] = {}

        def e_id(name: str) -> int:
            if name not in e_ids:
                e_ids[name] = len(entities)
                entities.append(name)
            return e_ids[name]

        def r_id(name: str) -> int:
            if name not in r_ids:
                r_ids[name] = len(relations)
                relations.append(name)
            return r_ids[name]

        triples = set()
        for h, r, t in named_triples:
            triples.add((e_id(h), r_id(r), e_id(t)))
        for name in extra_entities:
            e_id(name)

        fwd: dict[int, list[tuple[int, int]]] = {}
        inv: dict[int, list[tuple[int, int]]] = {}
        for h, r, t in triples:
            fwd.setdefault(h, []).append((r, t))
            inv.setdefault(t, []).append((r, h))
        for adj in (fwd, inv):
            for lst in adj.values():
                lst.sort()
        return cls(entities, relations, e_ids, r_ids, frozenset(triples), fwd, inv)

    def validate(self) -> None:
        """Check the structural invariants; raises AssertionError on breakage."""
        n_fwd = sum(len(v) for v in self.fwd_index.values())
        n_inv = sum(len(v) for v in self.inv_index.values())
        assert n_fwd == len(self.triples) == n_inv
        for h, adj in self.fwd_index.items():
            for r, t in adj:
                assert (h, r, t) in self.triples
        for t, adj in self.inv_index.items():
            for r, h in adj:
                assert (h, r, t) in self.triples
        for h, r, t in self.triples:
            assert 0 <= h < self.n_entities and 0 <= t < self.n_entities
            assert 0 <= r < self.n_relations


def load_triples(source: TextIO | Iterable[str],
                 fmt: KGFormat = KGFormat()) -> KnowledgeGraph:
    """Parse a triple-per-line stream into an indexed graph.

    Blank lines and lines starting with the comment prefix are skipped,
    duplicate triples are dropped, and malformed lines raise KGFormatError
    with the offending line number.
    """
    named = []
    n_lines = 0
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith(fmt.comment):
            continue
        n_lines += 1
        parts = line.split(fmt.delimiter)
        if len(parts) != 3 or any(not p.strip() for p in parts):
            raise KGFormatError(
                f"line {lineno}: expected head{fmt.delimiter}relation"
                f"{fmt.delimiter}tail, got {line!r}")
        h, r, t = (p.strip() for p in parts)
        named.append((h, r, t))
    if n_lines == 0:
        raise KGFormatError("empty input: no triples found")
    return KnowledgeGraph.from_triples(named)


def load_triples_file(path: str, fmt: KGFormat = KGFormat()) -> KnowledgeGraph:
    try:
        f = open(path, encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read triples {path}: {e}") from e
    with f:
        return load_triples(f, fmt)


def neighbors(kg: KnowledgeGraph, e: int) -> list[Step]:
    """All steps leaving an entity, ordered by (relation, neighbor, direction)."""
    kg._check_entity(e)
    steps = [Step(r, t, FORWARD) for r, t in kg.fwd_index.get(e, ())]
    steps += [Step(r, h, INVERSE) for r, h in kg.inv_index.get(e, ())]
    steps.sort(key=lambda s: (s.relation, s.neighbor, int(s.direction)))
    return steps


def distances_from(kg: KnowledgeGraph, sources: Iterable[int],
                    limit: Optional[int] = None) -> dict[int, int]:
    """BFS distance (in undirected steps) from a source set, up to limit."""
    dist = {s: 0 for s in sources}
    frontier = list(dist)
    d = 0
    while frontier and (limit is None or d < limit):
        d += 1
        nxt = []
        for u in frontier:
            for adj in (kg.fwd_index, kg.inv_index):
                for _, v in adj.get(u, ()):
                    if v not in dist:
                        dist[v] = d
                        nxt.append(v)
        frontier = nxt
    return dist


def enumerate_paths(kg: KnowledgeGraph, src: int, dst: int,
                    max_len: int = 3, max_paths: int = 250) -> list[Path]:
    """All simple paths from src to dst with 1..max_len steps.

    Paths may traverse triples in either direction. The result is in
    canonical order (length ascending, then lexicographic over the
    (relation, direction, neighbor) step sequence) and truncated to
    max_paths after sorting.
    """
    if src == dst:
        raise ValueError("src and dst must differ")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    kg._check_entity(src)
    kg._check_entity(dst)

    # Pruning: never extend into a node that cannot reach dst in the
    # remaining budget. Distances are over the same undirected step set,
    # so no valid path is ever cut.
    dist = distances_from(kg, [dst], limit=max_len)
    found: list[Path] = []
    steps: list[Step] = []
    visited = {src}

    def dfs(cur: int) -> None:
        remaining = max_len - len(steps)
        for step in neighbors(kg, cur):
            v = step.neighbor
            if v == dst:
                found.append(Path(src, tuple(steps) + (step,)))
                continue
            if v in visited or remaining < 2:
                continue
            if dist.get(v, max_len + 1) > remaining - 1:
                continue
            visited.add(v)
            steps.append(step)
            dfs(v)
            steps.pop()
            visited.remove(v)

    if dist.get(src, max_len + 1) <= max_len:
        dfs(src)
    found.sort(key=Path.sort_key)
    return found[:max_paths]


def question_seed(base_seed: int, qid: str) -> int:
    """Stable per-question RNG seed derived from the run seed and qid."""
    return (int(base_seed) & 0xFFFFFFFF) ^ zlib.crc32(qid.encode("utf-8"))


def candidate_answers(kg: KnowledgeGraph, query_entities: Iterable[int],
                      hop: int, n: int, gold: Iterable[int],
                      rng_seed: int) -> list[int]:
    """Potential answer set: reachable gold answers plus sampled distractors.

    Gold answers reachable within `hop` steps of any query entity are all
    kept; the list is padded up to `n` with seeded uniform samples from the
    entities at exactly `hop` distance. Query entities are never returned.
    """
    if hop < 1:
        raise ValueError("hop must be >= 1")
    query = set(query_entities)
    gold = set(gold)
    for e in query:
        kg._check_entity(e)
    dist = distances_from(kg, query, limit=hop)
    reachable_gold = sorted(g for g in gold
                            if g in dist and g not in query)
    if not reachable_gold:
        raise UnanswerableQuestionError(
            "no gold answer reachable within "
            f"{hop} steps of the question entities")
    if n < len(reachable_gold):
        raise ValueError(
            f"n={n} is smaller than the {len(reachable_gold)} reachable gold answers")
    ring = sorted(e for e, d in dist.items()
                  if d == hop and e not in gold and e not in query)
    k = min(n - len(reachable_gold), len(ring))
    rng = np.random.default_rng(rng_seed)
    picked = sorted(rng.choice(len(ring), size=k, replace=False).tolist()) if k else []
    return reachable_gold + [ring[i] for i in picked]
