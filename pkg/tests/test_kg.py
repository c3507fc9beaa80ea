"""Triple store, indexing, traversal, and candidate sampling."""

import numpy as np
import pytest

from pathnli.errors import KGFormatError, UnanswerableQuestionError
from pathnli.kg import (Direction, KnowledgeGraph, Path, Step,
                        candidate_answers, distances_from, enumerate_paths,
                        load_triples, neighbors, question_seed)

from util import brute_force_paths, random_graph


def test_load_triples_parses_and_indexes():
    kg = load_triples([
        "# header comment",
        "a|likes|b",
        "",
        "b|likes|c",
        "a|likes|b",
    ])
    assert kg.n_entities == 3
    assert kg.n_relations == 1
    assert len(kg.triples) == 2
    assert kg.stats_line() == "entities=3 relations=1 triples=2"
    kg.validate()


def test_load_triples_reports_bad_line_number():
    with pytest.raises(KGFormatError) as err:
        load_triples(["a|r|b", "broken line"])
    assert "line 2" in str(err.value)


def test_load_triples_rejects_empty_input():
    with pytest.raises(KGFormatError):
        load_triples(["# only a comment"])


def test_entity_id_falls_back_to_case_insensitive():
    kg = load_triples(["Rome|capital_of|Italy"])
    exact = kg.entity_id("Rome")
    assert exact is not None
    assert kg.entity_id("rome") == exact
    assert kg.entity_id("ROME") == exact
    assert kg.entity_id("romeo") is None


def test_neighbors_are_sorted_and_bidirectional():
    kg = load_triples(["a|r|b", "c|r|a", "a|q|b"])
    a = kg.entity_id("a")
    steps = neighbors(kg, a)
    assert steps == sorted(steps, key=lambda s: (s.relation, s.neighbor,
                                                 s.direction))
    directions = {(kg.relations[s.relation], s.direction) for s in steps}
    assert ("r", Direction.FORWARD) in directions
    assert ("r", Direction.INVERSE) in directions


def test_distances_match_naive_bfs():
    rng = np.random.default_rng(3)
    for _ in range(20):
        kg = random_graph(rng, max_entities=20, max_triples=40)
        src = int(rng.integers(kg.n_entities))
        got = distances_from(kg, [src])
        # Naive frontier expansion over the undirected edge set.
        undirected = {}
        for h, r, t in kg.triples:
            undirected.setdefault(h, set()).add(t)
            undirected.setdefault(t, set()).add(h)
        want = {src: 0}
        frontier = [src]
        d = 0
        while frontier:
            d += 1
            frontier = [v for u in frontier for v in undirected.get(u, ())
                        if v not in want]
            for v in frontier:
                want.setdefault(v, d)
            frontier = [v for v in frontier if want[v] == d]
        assert got == want


def test_distances_limit_truncates():
    kg = load_triples(["a|r|b", "b|r|c", "c|r|d"])
    a = kg.entity_id("a")
    got = distances_from(kg, [a], limit=2)
    assert max(got.values()) == 2
    assert kg.entity_id("d") not in got


def test_paths_are_simple_sorted_and_unique():
    rng = np.random.default_rng(11)
    for _ in range(25):
        kg = random_graph(rng, max_entities=15, max_triples=40)
        src, dst = rng.choice(kg.n_entities, size=2, replace=False)
        paths = enumerate_paths(kg, int(src), int(dst), max_len=3,
                                max_paths=10 ** 9)
        keys = [p.sort_key() for p in paths]
        assert keys == sorted(keys)
        assert len(set(paths)) == len(paths)
        for p in paths:
            ents = p.entities()
            assert len(set(ents)) == len(ents)
            assert ents[0] == int(src) and ents[-1] == int(dst)


def test_paths_match_brute_force_on_small_graphs():
    rng = np.random.default_rng(5)
    for _ in range(30):
        kg = random_graph(rng, max_entities=12, max_triples=30)
        for src in range(kg.n_entities):
            oracle = brute_force_paths(kg, src, 3)
            for dst in range(kg.n_entities):
                if dst == src:
                    continue
                got = set(enumerate_paths(kg, src, dst, max_len=3,
                                          max_paths=10 ** 9))
                assert got == oracle.get(dst, set())


def test_max_paths_truncates_canonical_prefix():
    kg = load_triples(["a|r|b", "a|q|b", "a|s|b"])
    a, b = kg.entity_id("a"), kg.entity_id("b")
    full = enumerate_paths(kg, a, b, max_len=1, max_paths=10)
    cut = enumerate_paths(kg, a, b, max_len=1, max_paths=2)
    assert cut == full[:2]


def test_enumerate_rejects_equal_endpoints():
    kg = load_triples(["a|r|b"])
    with pytest.raises(ValueError):
        enumerate_paths(kg, 0, 0, max_len=2)


def test_path_reconstructs_stored_triples():
    kg = load_triples(["f|directed_by|d", "f|starred|x"])
    d, f, x = (kg.entity_id(n) for n in "dfx")
    paths = enumerate_paths(kg, d, x, max_len=2)
    assert len(paths) == 1
    stored = paths[0].triples()
    assert set(stored) <= kg.triples
    assert paths[0].terminus == x


def test_question_seed_is_stable_and_distinct():
    a = question_seed(7, "q1")
    assert a == question_seed(7, "q1")
    assert 0 <= a < 2 ** 32
    seeds = {question_seed(7, f"q{i}") for i in range(200)}
    assert len(seeds) > 195


def test_candidate_answers_golds_first_then_exact_hop_ring():
    kg = load_triples(["a|r|b", "b|r|c", "b|r|d", "b|r|e", "a|r|f"])
    a = kg.entity_id("a")
    gold = {kg.entity_id("c")}
    ring = {kg.entity_id(x) for x in "cde"}
    cands = candidate_answers(kg, [a], hop=2, n=3, gold=gold, rng_seed=0)
    assert cands[0] == kg.entity_id("c")
    assert len(cands) == 3 and len(set(cands)) == 3
    assert set(cands) <= ring
    again = candidate_answers(kg, [a], hop=2, n=3, gold=gold, rng_seed=0)
    assert cands == again
    other = candidate_answers(kg, [a], hop=2, n=3, gold=gold, rng_seed=1)
    assert set(other) <= ring and other[0] == cands[0]


def test_candidate_answers_unreachable_gold_is_unanswerable():
    kg = load_triples(["a|r|b", "x|r|y"])
    with pytest.raises(UnanswerableQuestionError):
        candidate_answers(kg, [kg.entity_id("a")], hop=2, n=2,
                          gold={kg.entity_id("y")}, rng_seed=0)


def test_candidate_answers_rejects_more_golds_than_slots():
    kg = load_triples(["a|r|b", "a|r|c", "a|r|d"])
    a = kg.entity_id("a")
    gold = {kg.entity_id("b"), kg.entity_id("c"), kg.entity_id("d")}
    with pytest.raises(ValueError):
        candidate_answers(kg, [a], hop=1, n=2, gold=gold, rng_seed=0)


def test_step_and_path_are_hashable_value_types():
    s = Step(1, 2, Direction.FORWARD)
    p = Path(0, (s,))
    assert p == Path(0, (Step(1, 2, Direction.FORWARD),))
    assert hash(p) == hash(Path(0, (s,)))


def test_from_triples_registers_isolated_entities():
    kg = KnowledgeGraph.from_triples([("a", "r", "b")],
                                     extra_entities=["lone", "b", "z"])
    assert kg.n_entities == 4
    assert kg.entity_id("z") is not None
