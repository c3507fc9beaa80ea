"""Premise-hypothesis-label instance generation.

A question plus one candidate answer becomes a single classification
instance: the premise is every graph path connecting the candidate to the
question's entities, each path verbalized into a token sequence; the
hypothesis is the question with its WH-phrase replaced by the candidate.
Label 0 means the premise entails the hypothesis (the candidate is a
correct answer), label 1 means it contradicts it.

Tokens are (kind, value) pairs: ("e", entity_id) and ("r", relation_id)
keep their graph embeddings downstream, ("w", word) uses word vectors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO

from .errors import (PHLFormatError, QAFormatError,
                     UnanswerableQuestionError, UnlinkableQuestionError,
                     UnsupportedQuestionError)
from .kg import KnowledgeGraph, Path, candidate_answers, enumerate_paths, question_seed
from .linker import extract_entities
from .templates import TemplateTable, validate_pattern

Token = tuple  # ("e", int) | ("r", int) | ("w", str)

WH_WORDS = ("who", "what", "which", "whom", "where", "when")
_STRIP = "?.,!;:'\""


def word_token(w: str) -> Token:
    return ("w", w.lower())


def entity_token(e: int) -> Token:
    return ("e", int(e))


def relation_token(r: int) -> Token:
    return ("r", int(r))


def tokenize_words(text: str) -> list[Token]:
    """Whitespace tokenization with edge punctuation stripped and words
    lowercased; tokens that were pure punctuation are dropped."""
    out = []
    for piece in text.split():
        w = piece.strip(_STRIP)
        if w:
            out.append(word_token(w))
    return out


def render_text(kg: KnowledgeGraph, tokens: Iterable[Token]) -> str:
    """Human-readable form: entity tokens show their original-case name,
    relation tokens show the relation name with underscores as spaces."""
    parts = []
    for kind, val in tokens:
        if kind == "e":
            parts.append(kg.entities[val])
        elif kind == "r":
            parts.append(kg.relations[val].replace("_", " "))
        else:
            parts.append(val)
    return " ".join(parts)


def verbalize_triple(kg: KnowledgeGraph, templates: TemplateTable,
                     triple: tuple[int, int, int],
                     direction) -> list[Token]:
    """Expand one stored (head, relation, tail) triple through the template
    for the given traversal direction. {head} and {tail} always bind to the
    stored orientation regardless of which way the triple was walked."""
    h, r, t = triple
    pattern = templates.get(r, direction)
    validate_pattern(pattern)
    tokens: list[Token] = []
    pos = 0
    while True:
        brace = pattern.find("{", pos)
        chunk = pattern[pos:] if brace < 0 else pattern[pos:brace]
        tokens.extend(tokenize_words(chunk))
        if brace < 0:
            break
        end = pattern.index("}", brace)
        name = pattern[brace + 1:end]
        if name == "head":
            tokens.append(entity_token(h))
        elif name == "tail":
            tokens.append(entity_token(t))
        else:
            tokens.append(relation_token(r))
        pos = end + 1
    return tokens


def verbalize_path(kg: KnowledgeGraph, templates: TemplateTable, path: Path,
                   inner_cap: int = 20) -> tuple[list[Token], bool]:
    """One token sequence for a whole path.

    Steps are verbalized in reverse order (the end of the path first), so a
    path enumerated from a candidate answer back to a question entity reads
    from the question entity toward the candidate. Sentences are joined
    with the word "and". Sequences longer than inner_cap are truncated and
    flagged.
    """
    tokens: list[Token] = []
    triples = path.triples()
    for i in range(len(path.steps) - 1, -1, -1):
        if tokens:
            tokens.append(word_token("and"))
        tokens.extend(verbalize_triple(kg, templates, triples[i],
                                       path.steps[i].direction))
    if len(tokens) > inner_cap:
        return tokens[:inner_cap], True
    return tokens, False


def build_hypothesis(kg: KnowledgeGraph, question: str, candidate: int,
                     threshold: float = 0.85) -> list[Token]:
    """Question text with the first WH-word replaced by the candidate.

    Entity mentions become entity tokens. For "which" the immediately
    following word is consumed too ("which person" -> the candidate), since
    the WH-phrase spans both words. Questions without a recognized WH-word
    are not supported.
    """
    mentions = extract_entities(kg, question, threshold)
    tokens: list[Token] = []
    pos = 0
    for m in mentions:
        tokens.extend(tokenize_words(question[pos:m.start]))
        tokens.append(entity_token(m.entity))
        pos = m.end
    tokens.extend(tokenize_words(question[pos:]))

    out: list[Token] = []
    replaced = False
    skip_next_word = False
    for tok in tokens:
        if skip_next_word and tok[0] == "w":
            skip_next_word = False
            continue
        skip_next_word = False
        if not replaced and tok[0] == "w" and tok[1] in WH_WORDS:
            out.append(entity_token(candidate))
            replaced = True
            if tok[1] == "which":
                skip_next_word = True
            continue
        out.append(tok)
    if not replaced:
        raise UnsupportedQuestionError(
            f"no WH-word ({', '.join(WH_WORDS)}) in question: {question!r}")
    return out


@dataclass(frozen=True)
class PHLInstance:
    """One classification example for a (question, candidate) pair."""

    qid: str
    candidate: int
    premise: tuple[tuple[Token, ...], ...]   # one token sequence per path
    hypothesis: tuple[Token, ...]
    label: int                               # 0 entail, 1 contradict

    def premise_text(self, kg: KnowledgeGraph) -> list[str]:
        return [render_text(kg, seq) for seq in self.premise]

    def hypothesis_text(self, kg: KnowledgeGraph) -> str:
        return render_text(kg, self.hypothesis)


@dataclass(frozen=True)
class QAExample:
    qid: str
    question: str
    answers: tuple[str, ...]


@dataclass
class PHLStats:
    """What survived conversion and why questions were dropped."""

    n_questions: int = 0
    n_kept: int = 0
    n_instances: int = 0
    n_entail: int = 0
    n_contradict: int = 0
    dropped_unanswerable: int = 0
    dropped_unlinkable: int = 0
    dropped_unsupported: int = 0
    dropped_no_paths: int = 0
    dropped_gold_overflow: int = 0
    candidates_without_paths: int = 0

    def dropped_total(self) -> int:
        return (self.dropped_unanswerable + self.dropped_unlinkable
                + self.dropped_unsupported + self.dropped_no_paths
                + self.dropped_gold_overflow)


def read_qa_file(source: TextIO | Iterable[str]) -> list[QAExample]:
    """MetaQA-style lines: `question<TAB>answer1|answer2|...`."""
    out = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise QAFormatError(
                f"line {lineno}: expected question<TAB>answers, got {line!r}")
        question, answer_field = parts
        answers = tuple(a.strip() for a in answer_field.split("|") if a.strip())
        if not question.strip() or not answers:
            raise QAFormatError(f"line {lineno}: empty question or answer list")
        out.append(QAExample(f"q{len(out)}", question.strip(), answers))
    if not out:
        raise QAFormatError("empty input: no questions found")
    return out


def gold_entity_ids(kg: KnowledgeGraph, example: QAExample) -> set[int]:
    ids = set()
    for name in example.answers:
        e = kg.entity_id(name)
        if e is not None:
            ids.add(e)
    return ids


def instances_for_question(kg: KnowledgeGraph, templates: TemplateTable,
                           example: QAExample, n_candidates: int, hop: int,
                           max_len: int, max_paths: int, inner_cap: int,
                           seed: int, threshold: float = 0.85,
                           stats: Optional[PHLStats] = None) -> list[PHLInstance]:
    """All PHL instances for one question; may legitimately be empty.

    Candidates that connect to no question entity within max_len steps are
    skipped; if that removes every correct candidate the whole question is
    dropped, because no predictor could answer it from the premises.
    """
    stats = stats if stats is not None else PHLStats()
    mentions = extract_entities(kg, example.question, threshold)
    if not mentions:
        raise UnlinkableQuestionError(
            f"no entity mention found in question: {example.question!r}")
    query_entities = sorted({m.entity for m in mentions})
    gold = gold_entity_ids(kg, example)
    candidates = candidate_answers(kg, query_entities, hop, n_candidates,
                                   gold, question_seed(seed, example.qid))
    out = []
    kept_gold = 0
    for cand in candidates:
        pooled: list[Path] = []
        for q in query_entities:
            if q == cand:
                continue
            pooled.extend(enumerate_paths(kg, cand, q, max_len, max_paths))
        pooled.sort(key=Path.sort_key)
        pooled = pooled[:max_paths]
        if not pooled:
            stats.candidates_without_paths += 1
            continue
        premise = tuple(
            tuple(verbalize_path(kg, templates, p, inner_cap)[0])
            for p in pooled)
        hypothesis = tuple(
            build_hypothesis(kg, example.question, cand, threshold)[:inner_cap])
        label = 0 if cand in gold else 1
        if label == 0:
            kept_gold += 1
        out.append(PHLInstance(example.qid, cand, premise, hypothesis, label))
    if kept_gold == 0:
        stats.dropped_no_paths += 1
        return []
    return out


def generate_phl(kg: KnowledgeGraph, templates: TemplateTable,
                 examples: Iterable[QAExample], n_candidates: int = 4,
                 hop: int = 3, max_len: int = 3, max_paths: int = 250,
                 inner_cap: int = 20, seed: int = 0,
                 threshold: float = 0.85) -> tuple[list[PHLInstance], PHLStats]:
    """Convert a question set to PHL instances, tallying drops per cause."""
    stats = PHLStats()
    out: list[PHLInstance] = []
    for ex in examples:
        stats.n_questions += 1
        try:
            insts = instances_for_question(
                kg, templates, ex, n_candidates, hop, max_len, max_paths,
                inner_cap, seed, threshold, stats)
        except UnanswerableQuestionError:
            stats.dropped_unanswerable += 1
            continue
        except UnlinkableQuestionError:
            stats.dropped_unlinkable += 1
            continue
        except UnsupportedQuestionError:
            stats.dropped_unsupported += 1
            continue
        except ValueError:
            stats.dropped_gold_overflow += 1
            continue
        if not insts:
            continue
        stats.n_kept += 1
        stats.n_instances += len(insts)
        stats.n_entail += sum(1 for i in insts if i.label == 0)
        stats.n_contradict += sum(1 for i in insts if i.label == 1)
        out.extend(insts)
    return out, stats


def _token_to_json(tok: Token) -> list:
    return [tok[0], tok[1]]


def _token_from_json(obj, where: str) -> Token:
    if (not isinstance(obj, list) or len(obj) != 2
            or obj[0] not in ("e", "r", "w")):
        raise PHLFormatError(f"{where}: bad token {obj!r}")
    kind, val = obj
    if kind in ("e", "r"):
        if not isinstance(val, int):
            raise PHLFormatError(f"{where}: {kind}-token value must be int")
        return (kind, val)
    if not isinstance(val, str):
        raise PHLFormatError(f"{where}: w-token value must be str")
    return (kind, val)


def write_phl(instances: Iterable[PHLInstance], out: TextIO) -> None:
    """One JSON object per line, insertion order preserved."""
    for inst in instances:
        rec = {
            "qid": inst.qid,
            "candidate": inst.candidate,
            "premise": [[_token_to_json(t) for t in seq]
                        for seq in inst.premise],
            "hypothesis": [_token_to_json(t) for t in inst.hypothesis],
            "label": inst.label,
        }
        out.write(json.dumps(rec, separators=(",", ":")) + "\n")


def read_phl(source: TextIO | Iterable[str]) -> list[PHLInstance]:
    out = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        where = f"line {lineno}"
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise PHLFormatError(f"{where}: {e}") from e
        for key in ("qid", "candidate", "premise", "hypothesis", "label"):
            if key not in rec:
                raise PHLFormatError(f"{where}: missing field {key!r}")
        if rec["label"] not in (0, 1):
            raise PHLFormatError(f"{where}: label must be 0 or 1")
        premise = tuple(
            tuple(_token_from_json(t, where) for t in seq)
            for seq in rec["premise"])
        if not premise or any(not seq for seq in premise):
            raise PHLFormatError(f"{where}: empty premise or empty path")
        hypothesis = tuple(_token_from_json(t, where)
                           for t in rec["hypothesis"])
        if not hypothesis:
            raise PHLFormatError(f"{where}: empty hypothesis")
        out.append(PHLInstance(str(rec["qid"]), int(rec["candidate"]),
                               premise, hypothesis, int(rec["label"])))
    return out
