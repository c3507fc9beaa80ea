"""Shared test helpers: independent oracles and random input builders.

The path oracle and the numeric gradient here are deliberately naive
reimplementations so the fast library code is checked against something
with no shared logic.
"""

import numpy as np

from pathnli.kg import Direction, KnowledgeGraph, Path, Step
from pathnli.phl import PHLInstance


def random_graph(rng, max_entities=50, max_triples=150, max_relations=8):
    """A random directed multigraph as a KnowledgeGraph."""
    n_e = int(rng.integers(2, max_entities + 1))
    n_r = int(rng.integers(1, max_relations + 1))
    n_t = int(rng.integers(1, max_triples + 1))
    triples = set()
    for _ in range(n_t):
        h = int(rng.integers(n_e))
        t = int(rng.integers(n_e))
        r = int(rng.integers(n_r))
        triples.add((f"e{h}", f"r{r}", f"e{t}"))
    extra = [f"e{i}" for i in range(n_e)]
    return KnowledgeGraph.from_triples(sorted(triples), extra_entities=extra)


def brute_force_paths(kg, src, max_len):
    """Every simple path from src up to max_len steps, keyed by terminus.

    Unpruned depth-first walk over an adjacency list rebuilt from the raw
    triple set; shares nothing with the library's enumerator.
    """
    adj = {}
    for h, r, t in kg.triples:
        adj.setdefault(h, []).append(Step(r, t, Direction.FORWARD))
        adj.setdefault(t, []).append(Step(r, h, Direction.INVERSE))
    found = {}

    def walk(node, steps, visited):
        if len(steps) >= max_len:
            return
        for step in adj.get(node, ()):
            if step.neighbor in visited:
                continue
            chain = steps + (step,)
            found.setdefault(step.neighbor, set()).add(Path(src, chain))
            walk(step.neighbor, chain, visited | {step.neighbor})

    walk(src, (), {src})
    return found


def numeric_grad(f, x, eps=1e-5):
    """Central-difference gradient of scalar f at array x."""
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = f()
        flat[i] = orig - eps
        lo = f()
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * eps)
    return g


def max_relative_error(analytic, numeric, floor=1e-8):
    # The floor keeps elements near the finite-difference noise level
    # from being judged on a relative scale they cannot meet.
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


def random_instance(rng, n_entities=12, n_relations=5, n_paths=2,
                    path_tokens=3, hyp_tokens=4, qid="q0"):
    """A PHLInstance of random entity, relation, and word tokens."""
    words = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"]

    def token():
        kind = rng.integers(3)
        if kind == 0:
            return ("e", int(rng.integers(n_entities)))
        if kind == 1:
            return ("r", int(rng.integers(n_relations)))
        return ("w", words[int(rng.integers(len(words)))])

    premise = tuple(tuple(token() for _ in range(path_tokens))
                    for _ in range(n_paths))
    hypothesis = tuple(token() for _ in range(hyp_tokens))
    return PHLInstance(qid, int(rng.integers(n_entities)), premise,
                       hypothesis, int(rng.integers(2)))


# A small film KG whose 3-hop question has one correct director and three
# same-year distractor directors, all forced into the candidate set.
DIRECTOR_TRIPLES = [
    "Kid Millions|starred_actors|Eddie Cantor",
    "Thank Your Lucky Stars|starred_actors|Eddie Cantor",
    "Thank Your Lucky Stars|directed_by|David Butler",
    "Kid Millions|release_year|1934",
    "Imitation of Life|release_year|1934",
    "Imitation of Life|directed_by|Douglas Sirk",
    "Les Miserables|release_year|1934",
    "Les Miserables|directed_by|Tom Hooper",
    "Maniac|release_year|1934",
    "Maniac|directed_by|Franck Khalfoun",
]

DIRECTOR_QUESTION = ("Which person directed the films acted by "
                     "the actors in Kid Millions?")

DIRECTOR_ANSWER = "David Butler"

DIRECTOR_EXPECTED_ROWS = {
    ("Kid Millions starred actors Eddie Cantor and "
     "Thank Your Lucky Stars starred actors Eddie Cantor and "
     "Thank Your Lucky Stars directed by David Butler",
     "David Butler directed the films acted by the actors in Kid Millions",
     0),
    ("Kid Millions release year 1934 and "
     "Imitation of Life release year 1934 and "
     "Imitation of Life directed by Douglas Sirk",
     "Douglas Sirk directed the films acted by the actors in Kid Millions",
     1),
    ("Kid Millions release year 1934 and "
     "Les Miserables release year 1934 and "
     "Les Miserables directed by Tom Hooper",
     "Tom Hooper directed the films acted by the actors in Kid Millions",
     1),
    ("Kid Millions release year 1934 and "
     "Maniac release year 1934 and "
     "Maniac directed by Franck Khalfoun",
     "Franck Khalfoun directed the films acted by the actors in Kid Millions",
     1),
}
