"""Verbalization template patterns, overrides, and the TSV format."""

import io

import pytest

from pathnli.errors import TemplateError
from pathnli.kg import Direction, load_triples
from pathnli.phl import render_text, verbalize_triple
from pathnli.templates import (DEFAULT_PATTERN, TemplateTable, load_templates,
                               save_templates, validate_pattern)


def test_default_pattern_is_valid():
    validate_pattern(DEFAULT_PATTERN)


@pytest.mark.parametrize("bad", [
    "{head} only",
    "{tail} only",
    "{head} {head} {tail}",
    "{head} {rel} {rel} {tail}",
    "{head} {unknown} {tail}",
    "{head} {tail} stray } brace",
])
def test_malformed_patterns_are_rejected(bad):
    with pytest.raises(TemplateError):
        validate_pattern(bad)


def test_override_applies_per_relation_and_direction():
    kg = load_triples(["f|directed_by|d"])
    table = TemplateTable()
    r = kg.relation_ids["directed_by"]
    table.set(r, Direction.INVERSE, "{tail} is the director of {head}")
    f, d = kg.entity_id("f"), kg.entity_id("d")
    fwd = render_text(kg, verbalize_triple(kg, table, (f, r, d),
                                           Direction.FORWARD))
    inv = render_text(kg, verbalize_triple(kg, table, (f, r, d),
                                           Direction.INVERSE))
    assert fwd == "f directed by d"
    assert inv == "d is the director of f"


def test_relation_token_renders_with_spaces():
    kg = load_triples(["f|release_year|1999"])
    table = TemplateTable()
    toks = verbalize_triple(kg, table, (0, 0, 1), Direction.FORWARD)
    assert ("r", 0) in toks
    assert render_text(kg, toks) == "f release year 1999"


def test_save_load_round_trip():
    kg = load_triples(["f|directed_by|d", "f|starred|a"])
    table = TemplateTable()
    table.set(kg.relation_ids["directed_by"], Direction.INVERSE,
              "{tail} directed {head}")
    table.set(kg.relation_ids["starred"], Direction.FORWARD,
              "{head} features {tail}")
    buf = io.StringIO()
    save_templates(table, kg, buf)
    buf.seek(0)
    back = load_templates(buf, kg)
    for r in range(kg.n_relations):
        for d in (Direction.FORWARD, Direction.INVERSE):
            assert back.get(r, d) == table.get(r, d)


def test_load_rejects_unknown_relation_and_direction():
    kg = load_triples(["a|r|b"])
    with pytest.raises(TemplateError):
        load_templates(io.StringIO("missing\tforward\t{head} {tail}\n"), kg)
    with pytest.raises(TemplateError):
        load_templates(io.StringIO("r\tsideways\t{head} {tail}\n"), kg)
    with pytest.raises(TemplateError):
        load_templates(io.StringIO("r\tforward\t{head} {head}\n"), kg)
