"""Synthetic movie-domain fixture: a small knowledge graph plus multi-hop
questions with chain-derived gold answers.

The graph mimics the usual movie KG shape (films connected to directors,
writers, actors, release years, languages, and genres) at a size where
training and evaluation run in seconds. Questions are generated from
fixed phrase patterns, each tied to a relation chain; the gold answers are
the entities reached by walking that chain from the query entity, with
everything seen at earlier levels excluded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

import numpy as np

from .kg import FORWARD, INVERSE, Direction, KnowledgeGraph
from .phl import QAExample

_FIRST = ["Alan", "Bree", "Carl", "Dena", "Eli", "Faye", "Gus", "Hana",
          "Ivan", "June", "Kurt", "Lena", "Miles", "Nora", "Otto", "Pia",
          "Quinn", "Rosa", "Seth", "Tara", "Ugo", "Vera", "Walt", "Xena",
          "Yuri", "Zoe"]
_LAST = ["Abbott", "Birch", "Calder", "Dunn", "Ellery", "Frost", "Garner",
         "Hale", "Ingram", "Joyce", "Keller", "Lowell", "Marsh", "Noble",
         "Orton", "Pryor", "Quill", "Rhodes", "Sloan", "Thorpe", "Usher",
         "Vance", "Webb", "Yates"]
_ADJ = ["Silent", "Crimson", "Hollow", "Golden", "Broken", "Hidden",
        "Distant", "Frozen", "Burning", "Lonely", "Savage", "Gentle",
        "Midnight", "Scarlet", "Iron", "Velvet", "Wild", "Pale", "Last",
        "First"]
_NOUN = ["River", "Harbor", "Garden", "Mirror", "Station", "Forest",
         "Bridge", "Window", "Canyon", "Empire", "Voyage", "Letter",
         "Summer", "Winter", "Shadow", "Parade", "Circus", "Island",
         "Tower", "Meadow"]
_GENRES = ["action", "adventure", "comedy", "drama", "fantasy", "horror",
           "romance", "thriller"]
_LANGUAGES = ["english", "french", "german", "hindi", "italian", "spanish"]

RELATIONS = ("directed_by", "written_by", "starred_actors", "release_year",
             "in_language", "has_genre")


@dataclass(frozen=True)
class SynthConfig:
    """Defaults add up to exactly 200 entities: films + actors + directors
    + writers + years + 8 genres + 6 languages."""

    n_films: int = 65
    n_actors: int = 42
    n_directors: int = 27
    n_writers: int = 27
    first_year: int = 1975
    n_years: int = 25
    min_cast: int = 1
    max_cast: int = 2
    seed: int = 0


def _pick_names(rng: np.random.Generator, left: Sequence[str],
                right: Sequence[str], n: int, prefix: str = "") -> list[str]:
    combos = [f"{prefix}{a} {b}" for a in left for b in right]
    if n > len(combos):
        raise ValueError(f"cannot make {n} unique names from {len(combos)} combos")
    idx = rng.permutation(len(combos))[:n]
    return [combos[i] for i in idx]


def build_synthetic_kg(config: SynthConfig = SynthConfig()) -> KnowledgeGraph:
    rng = np.random.default_rng(config.seed)
    films = _pick_names(rng, _ADJ, _NOUN, config.n_films, prefix="The ")
    n_people = config.n_actors + config.n_directors + config.n_writers
    people = _pick_names(rng, _FIRST, _LAST, n_people)
    actors = people[:config.n_actors]
    directors = people[config.n_actors:config.n_actors + config.n_directors]
    writers = people[config.n_actors + config.n_directors:]
    years = [str(config.first_year + i) for i in range(config.n_years)]

    triples = []
    for film in films:
        triples.append((film, "directed_by",
                        directors[int(rng.integers(len(directors)))]))
        triples.append((film, "written_by",
                        writers[int(rng.integers(len(writers)))]))
        cast_n = int(rng.integers(config.min_cast, config.max_cast + 1))
        cast = rng.permutation(len(actors))[:cast_n]
        for a in sorted(cast.tolist()):
            triples.append((film, "starred_actors", actors[a]))
        triples.append((film, "release_year",
                        years[int(rng.integers(len(years)))]))
        triples.append((film, "in_language",
                        _LANGUAGES[int(rng.integers(len(_LANGUAGES)))]))
        triples.append((film, "has_genre",
                        _GENRES[int(rng.integers(len(_GENRES)))]))
    # Force the whole pool into the entity table so the graph size is a
    # function of the config alone, not of which values the rng happened
    # to use.
    extra = actors + directors + writers + years + _GENRES + _LANGUAGES
    return KnowledgeGraph.from_triples(triples, extra_entities=extra)


# One question pattern: phrasing with an {e} slot, which entity pool the
# query entity comes from, and the relation chain defining the gold set.
_PATTERNS: dict[int, list[tuple[str, str, tuple]]] = {
    1: [
        ("who directed [{e}]", "film", (("directed_by", FORWARD),)),
        ("who wrote [{e}]", "film", (("written_by", FORWARD),)),
        ("who acted in [{e}]", "film", (("starred_actors", FORWARD),)),
        ("when was [{e}] released", "film", (("release_year", FORWARD),)),
        ("what language is [{e}] in", "film", (("in_language", FORWARD),)),
        ("what genre is [{e}]", "film", (("has_genre", FORWARD),)),
        ("which films did [{e}] direct", "director",
         (("directed_by", INVERSE),)),
        ("which films did [{e}] write", "writer", (("written_by", INVERSE),)),
        ("which films did [{e}] star in", "actor",
         (("starred_actors", INVERSE),)),
    ],
    2: [
        ("which films share actors with [{e}]", "film",
         (("starred_actors", FORWARD), ("starred_actors", INVERSE))),
        ("which films were released in the same year as [{e}]", "film",
         (("release_year", FORWARD), ("release_year", INVERSE))),
        ("who acted in the films directed by [{e}]", "director",
         (("directed_by", INVERSE), ("starred_actors", FORWARD))),
        ("when were the films directed by [{e}] released", "director",
         (("directed_by", INVERSE), ("release_year", FORWARD))),
        ("who wrote the films directed by [{e}]", "director",
         (("directed_by", INVERSE), ("written_by", FORWARD))),
        ("who directed the films written by [{e}]", "writer",
         (("written_by", INVERSE), ("directed_by", FORWARD))),
        ("what genres are the films written by [{e}]", "writer",
         (("written_by", INVERSE), ("has_genre", FORWARD))),
        ("who directed the films starring [{e}]", "actor",
         (("starred_actors", INVERSE), ("directed_by", FORWARD))),
        ("when were the films starring [{e}] released", "actor",
         (("starred_actors", INVERSE), ("release_year", FORWARD))),
        ("what genres are the films starring [{e}]", "actor",
         (("starred_actors", INVERSE), ("has_genre", FORWARD))),
        ("what languages are the films directed by [{e}] in", "director",
         (("directed_by", INVERSE), ("in_language", FORWARD))),
        ("what languages are the films starring [{e}] in", "actor",
         (("starred_actors", INVERSE), ("in_language", FORWARD))),
        ("who wrote the films starring [{e}]", "actor",
         (("starred_actors", INVERSE), ("written_by", FORWARD))),
    ],
    3: [
        ("who directed the films that share actors with [{e}]", "film",
         (("starred_actors", FORWARD), ("starred_actors", INVERSE),
          ("directed_by", FORWARD))),
        ("who wrote the films that share actors with [{e}]", "film",
         (("starred_actors", FORWARD), ("starred_actors", INVERSE),
          ("written_by", FORWARD))),
        ("what genres are the films that share actors with [{e}]", "film",
         (("starred_actors", FORWARD), ("starred_actors", INVERSE),
          ("has_genre", FORWARD))),
        ("when were the films that share actors with [{e}] released", "film",
         (("starred_actors", FORWARD), ("starred_actors", INVERSE),
          ("release_year", FORWARD))),
        ("who acted in the films released in the same year as [{e}]", "film",
         (("release_year", FORWARD), ("release_year", INVERSE),
          ("starred_actors", FORWARD))),
        ("who acted in the films directed by the director of [{e}]", "film",
         (("directed_by", FORWARD), ("directed_by", INVERSE),
          ("starred_actors", FORWARD))),
        ("what languages are the films that share actors with [{e}] in",
         "film",
         (("starred_actors", FORWARD), ("starred_actors", INVERSE),
          ("in_language", FORWARD))),
        ("which films share actors with the films directed by [{e}]",
         "director",
         (("directed_by", INVERSE), ("starred_actors", FORWARD),
          ("starred_actors", INVERSE))),
        ("which films were released in the same year as the films written "
         "by [{e}]", "writer",
         (("written_by", INVERSE), ("release_year", FORWARD),
          ("release_year", INVERSE))),
        ("who wrote the films released in the same year as [{e}]", "film",
         (("release_year", FORWARD), ("release_year", INVERSE),
          ("written_by", FORWARD))),
        ("which person directed the films released in the same year as "
         "[{e}]", "film",
         (("release_year", FORWARD), ("release_year", INVERSE),
          ("directed_by", FORWARD))),
        ("what genres are the films released in the same year as [{e}]",
         "film",
         (("release_year", FORWARD), ("release_year", INVERSE),
          ("has_genre", FORWARD))),
        ("what languages are the films released in the same year as [{e}] "
         "in", "film",
         (("release_year", FORWARD), ("release_year", INVERSE),
          ("in_language", FORWARD))),
        ("which person wrote the films that share actors with [{e}]", "film",
         (("starred_actors", FORWARD), ("starred_actors", INVERSE),
          ("written_by", FORWARD))),
        ("which person directed the films acted by the actors in [{e}]",
         "film",
         (("starred_actors", FORWARD), ("starred_actors", INVERSE),
          ("directed_by", FORWARD))),
    ],
}


def chain_gold(kg: KnowledgeGraph, start: int,
               chain: Sequence[tuple[str, Direction]]) -> set[int]:
    """Entities reached by the full chain walk; anything already reached at
    an earlier level (including the start) is excluded from later levels."""
    level = {start}
    seen = {start}
    for rel_name, direction in chain:
        r = kg.relation_ids[rel_name]
        nxt = set()
        index = kg.fwd_index if direction == FORWARD else kg.inv_index
        for e in level:
            for rr, v in index.get(e, ()):
                if rr == r and v not in seen:
                    nxt.add(v)
        if not nxt:
            return set()
        seen |= nxt
        level = nxt
    return level


def _entity_pools(kg: KnowledgeGraph) -> dict[str, list[int]]:
    """Classify entities by their incident relations."""
    pools: dict[str, list[int]] = {"film": [], "director": [], "writer": [],
                                   "actor": []}
    # Films are the only entities with outgoing triples in this schema.
    is_film = set(kg.fwd_index)
    by_rel: dict[str, set[int]] = {name: set() for name in RELATIONS}
    for h, r, t in kg.triples:
        by_rel[kg.relations[r]].add(t)
    for e in range(kg.n_entities):
        if e in is_film:
            pools["film"].append(e)
        elif e in by_rel["directed_by"]:
            pools["director"].append(e)
        elif e in by_rel["written_by"]:
            pools["writer"].append(e)
        elif e in by_rel["starred_actors"]:
            pools["actor"].append(e)
    return pools


def synth_questions(kg: KnowledgeGraph, hop: int, n_questions: int,
                    seed: int = 0, max_gold: int = 3) -> list[QAExample]:
    """Generate up to n_questions questions needing `hop`-step reasoning.

    Patterns rotate round-robin, each drawing query entities from its own
    shuffled pool. Questions whose gold set is empty or larger than
    max_gold are skipped. Fewer than n_questions may come back when the
    pools run dry.
    """
    if hop not in _PATTERNS:
        raise ValueError(f"hop must be one of {sorted(_PATTERNS)}, got {hop}")
    rng = np.random.default_rng(seed)
    pools = _entity_pools(kg)
    patterns = _PATTERNS[hop]
    queues = []
    for text, pool_name, chain in patterns:
        order = rng.permutation(len(pools[pool_name]))
        queues.append([pools[pool_name][i] for i in order])
    out: list[QAExample] = []
    active = True
    while len(out) < n_questions and active:
        active = False
        for p_idx, (text, pool_name, chain) in enumerate(patterns):
            if len(out) >= n_questions:
                break
            queue = queues[p_idx]
            while queue:
                e = queue.pop()
                gold = chain_gold(kg, e, chain)
                if not gold or len(gold) > max_gold:
                    continue
                question = text.format(e=kg.entities[e])
                answers = tuple(sorted(kg.entities[g] for g in gold))
                out.append(QAExample(f"h{hop}q{len(out)}", question, answers))
                active = True
                break
    return out


def write_kg_file(kg: KnowledgeGraph, out: TextIO,
                  delimiter: str = "|") -> None:
    for h, r, t in sorted(kg.triples):
        out.write(f"{kg.entities[h]}{delimiter}{kg.relations[r]}"
                  f"{delimiter}{kg.entities[t]}\n")


def write_qa_file(examples: Sequence[QAExample], out: TextIO) -> None:
    for ex in examples:
        out.write(f"{ex.question}\t{'|'.join(ex.answers)}\n")
