"""Entity mention detection and string-similarity linking.

Mentions are found two ways: spans wrapped in square brackets are taken
verbatim, and otherwise a gazetteer built from the graph's entity names is
scanned leftmost-longest. Each mention is linked to the entity whose name
maximizes Jaro-Winkler similarity, subject to a threshold.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import UnlinkableQuestionError
from .kg import KnowledgeGraph

_WORD_RE = re.compile(r"[^\s]+")


def jaro(a: str, b: str) -> float:
    """Jaro similarity in [0, 1].

    Characters match if equal and within a window of
    floor(max(len)/2) - 1 positions; transpositions are counted as
    half the number of matched characters that disagree in order.
    """
    if a == b:
        return 1.0
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return 0.0
    window = max(la, lb) // 2 - 1
    match_a = [False] * la
    match_b = [False] * lb
    m = 0
    for i, ca in enumerate(a):
        lo = max(0, i - window)
        hi = min(lb, i + window + 1)
        for j in range(lo, hi):
            if not match_b[j] and b[j] == ca:
                match_a[i] = match_b[j] = True
                m += 1
                break
    if m == 0:
        return 0.0
    seq_b = [b[j] for j in range(lb) if match_b[j]]
    t = 0
    k = 0
    for i in range(la):
        if match_a[i]:
            if a[i] != seq_b[k]:
                t += 1
            k += 1
    t //= 2
    return (m / la + m / lb + (m - t) / m) / 3.0


def jaro_winkler(a: str, b: str, scale: float = 0.1,
                 max_prefix: int = 4) -> float:
    """Jaro boosted by shared-prefix length: j + l * scale * (1 - j).

    The prefix length l is capped at max_prefix; scale must lie in
    [0, 0.25] so the result stays within [0, 1].
    """
    if not 0.0 <= scale <= 0.25:
        raise ValueError(f"scale must be in [0, 0.25], got {scale}")
    j = jaro(a, b)
    l = 0
    for ca, cb in zip(a, b):
        if ca != cb or l == max_prefix:
            break
        l += 1
    return j + l * scale * (1.0 - j)


@dataclass(frozen=True)
class Mention:
    """A detected entity mention: surface span plus the linked entity id."""

    text: str
    start: int
    end: int
    entity: int
    score: float


def link_entity(kg: KnowledgeGraph, text: str,
                threshold: float = 0.85) -> Optional[tuple[int, float]]:
    """Best entity for a surface string by Jaro-Winkler over entity names.

    Comparison is case-insensitive. Returns (entity_id, score), or None if
    no name clears the threshold. Score ties go to the lower entity id.
    """
    needle = text.lower()
    best_id = -1
    best = -1.0
    for i, name in enumerate(kg.entities):
        s = jaro_winkler(needle, name.lower())
        if s > best:
            best, best_id = s, i
    if best >= threshold:
        return best_id, best
    return None


def _gazetteer(kg: KnowledgeGraph) -> dict[tuple[str, ...], int]:
    """Lowercased token-tuple -> entity id, built once per graph."""
    if kg._gazetteer is None:
        gaz = {}
        for i, name in enumerate(kg.entities):
            key = tuple(name.lower().split())
            if key and key not in gaz:
                gaz[key] = i
        kg._gazetteer = gaz
    return kg._gazetteer


def extract_entities(kg: KnowledgeGraph, text: str,
                     threshold: float = 0.85) -> list[Mention]:
    """Detect and link entity mentions in question text.

    Bracketed spans ([...]) are always treated as mentions and linked by
    similarity. Outside brackets, the gazetteer of entity names is matched
    leftmost-longest on token boundaries (case-insensitive, non-overlapping);
    those matches link exactly. Raises if a bracketed span cannot be linked.
    """
    mentions: list[Mention] = []
    covered: list[tuple[int, int]] = []

    for m in re.finditer(r"\[([^\[\]]+)\]", text):
        span = m.group(1)
        hit = link_entity(kg, span, threshold)
        if hit is None:
            raise UnlinkableQuestionError(
                f"cannot link bracketed mention {span!r} to any entity")
        mentions.append(Mention(span, m.start(), m.end(), hit[0], hit[1]))
        covered.append((m.start(), m.end()))

    # Token scan outside bracketed regions.
    tokens = [(w.group(0), w.start(), w.end())
              for w in _WORD_RE.finditer(text)
              if not any(s <= w.start() < e for s, e in covered)]
    gaz = _gazetteer(kg)
    max_len = max((len(k) for k in gaz), default=0)
    i = 0
    while i < len(tokens):
        hit = None
        for n in range(min(max_len, len(tokens) - i), 0, -1):
            window = tokens[i:i + n]
            key = tuple(t[0].lower().strip("?.,!;:'\"") for t in window)
            if key in gaz:
                hit = (n, gaz[key])
                break
        if hit is None:
            i += 1
            continue
        n, ent = hit
        start, end = tokens[i][1], tokens[i + n - 1][2]
        surface = text[start:end]
        mentions.append(Mention(surface.rstrip("?.,!;:'\""), start,
                                start + len(surface.rstrip("?.,!;:'\"")),
                                ent, 1.0))
        i += n

    mentions.sort(key=lambda m: m.start)
    return mentions
