"""Embedding tables, translation-based graph embedding training, word
vectors, and cross-graph linear alignment.

Graph embeddings are trained from scratch with the translation objective:
a true triple (h, r, t) should satisfy h + r ~ t, scored by the L1 or L2
distance ||h + r - t||. Training minimizes a margin ranking loss against
corrupted triples, renormalizing entity vectors to the unit ball each epoch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO

import numpy as np

from .errors import ModelError, WordVectorFormatError
from .kg import KnowledgeGraph


@dataclass
class EmbeddingTable:
    """Vectors for entities, relations, and words, all of one dimension.

    Unknown words fall back to a deterministic unit vector drawn from a
    seeded generator and cached, so repeated lookups agree within and
    across runs.
    """

    dim: int
    entity_vecs: np.ndarray            # (n_entities, dim)
    relation_vecs: np.ndarray          # (n_relations, dim)
    word_vecs: dict[str, np.ndarray] = field(default_factory=dict)
    oov_seed: int = 0
    _oov_cache: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def entity(self, e: int) -> np.ndarray:
        return self.entity_vecs[e]

    def relation(self, r: int) -> np.ndarray:
        return self.relation_vecs[r]

    def word(self, w: str) -> np.ndarray:
        if w in self.word_vecs:
            return self.word_vecs[w]
        if w not in self._oov_cache:
            h = np.frombuffer(w.encode("utf-8"), dtype=np.uint8)
            seed = (self.oov_seed * 1000003 + int(h.sum()) * 131
                    + len(w)) & 0xFFFFFFFF
            rng = np.random.default_rng(seed)
            v = rng.standard_normal(self.dim)
            self._oov_cache[w] = v / np.linalg.norm(v)
        return self._oov_cache[w]


def init_embeddings(kg: KnowledgeGraph, dim: int, seed: int = 0) -> EmbeddingTable:
    """Uniform(-6/sqrt(dim), 6/sqrt(dim)) init with relations L2-normalized."""
    rng = np.random.default_rng(seed)
    bound = 6.0 / np.sqrt(dim)
    ent = rng.uniform(-bound, bound, size=(kg.n_entities, dim))
    rel = rng.uniform(-bound, bound, size=(kg.n_relations, dim))
    rel /= np.maximum(np.linalg.norm(rel, axis=1, keepdims=True), 1e-12)
    return EmbeddingTable(dim, ent, rel)


def transe_score(h: np.ndarray, r: np.ndarray, t: np.ndarray,
                 norm: int = 1) -> float:
    """Dissimilarity ||h + r - t|| under the L1 or L2 norm (lower = better)."""
    if norm not in (1, 2):
        raise ValueError(f"norm must be 1 or 2, got {norm}")
    d = h + r - t
    return float(np.sum(np.abs(d))) if norm == 1 else float(np.sqrt(np.sum(d * d)))


def train_transe(kg: KnowledgeGraph, dim: int, epochs: int = 100,
                 lr: float = 0.01, margin: float = 1.0, norm: int = 1,
                 batch: int = 64, seed: int = 0,
                 table: Optional[EmbeddingTable] = None) -> tuple[EmbeddingTable, list[float]]:
    """Train translation embeddings by margin ranking with SGD.

    Each epoch shuffles the triples, corrupts one side of every positive
    uniformly at random (head or tail swapped for a random entity), and
    takes minibatch SGD steps on max(0, margin + d(pos) - d(neg)). Entity
    vectors are projected back to the unit ball after every epoch. Returns
    the table and the per-epoch mean loss trace.
    """
    if norm not in (1, 2):
        raise ValueError(f"norm must be 1 or 2, got {norm}")
    rng = np.random.default_rng(seed)
    if table is None:
        table = init_embeddings(kg, dim, seed)
    ent, rel = table.entity_vecs, table.relation_vecs
    triples = np.array(sorted(kg.triples), dtype=np.int64)
    n = len(triples)
    losses = []
    for _ in range(epochs):
        order = rng.permutation(n)
        corrupt_head = rng.random(n) < 0.5
        repl = rng.integers(0, kg.n_entities, size=n)
        total = 0.0
        for lo in range(0, n, batch):
            idx = order[lo:lo + batch]
            pos = triples[idx]
            neg = pos.copy()
            ch = corrupt_head[idx]
            neg[ch, 0] = repl[idx][ch]
            neg[~ch, 2] = repl[idx][~ch]

            def dist_and_grad(t3):
                d = ent[t3[:, 0]] + rel[t3[:, 1]] - ent[t3[:, 2]]
                if norm == 1:
                    return np.sum(np.abs(d), axis=1), np.sign(d)
                nr = np.sqrt(np.sum(d * d, axis=1))
                return nr, d / np.maximum(nr, 1e-12)[:, None]

            dp, gp = dist_and_grad(pos)
            dn, gn = dist_and_grad(neg)
            viol = margin + dp - dn > 0
            total += float(np.sum(np.maximum(0.0, margin + dp - dn)))
            if not np.any(viol):
                continue
            gp = gp[viol] * lr
            gn = gn[viol] * lr
            p, q = pos[viol], neg[viol]
            # d(pos) decreases, d(neg) increases.
            np.add.at(ent, p[:, 0], -gp)
            np.add.at(rel, p[:, 1], -gp)
            np.add.at(ent, p[:, 2], gp)
            np.add.at(ent, q[:, 0], gn)
            np.add.at(rel, q[:, 1], gn)
            np.add.at(ent, q[:, 2], -gn)
        norms = np.linalg.norm(ent, axis=1, keepdims=True)
        np.divide(ent, norms, out=ent, where=norms > 1.0)
        losses.append(total / n)
    return table, losses


def rank_tails(kg: KnowledgeGraph, table: EmbeddingTable, h: int, r: int,
               norm: int = 1) -> list[int]:
    """All entities sorted by triple score for (h, r, ?), best first."""
    d = table.entity_vecs[h] + table.relation_vecs[r] - table.entity_vecs
    s = np.sum(np.abs(d), axis=1) if norm == 1 else np.linalg.norm(d, axis=1)
    return [int(i) for i in np.lexsort((np.arange(len(s)), s))]


def load_word_vectors(source: TextIO | Iterable[str],
                      dim: Optional[int] = None) -> dict[str, np.ndarray]:
    """Parse `word v1 v2 ... vd` lines; dim is inferred from the first row."""
    vecs: dict[str, np.ndarray] = {}
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if dim is None:
            dim = len(parts) - 1
            if dim < 1:
                raise WordVectorFormatError(f"line {lineno}: no vector values")
        if len(parts) != dim + 1:
            raise WordVectorFormatError(
                f"line {lineno}: expected {dim} values, got {len(parts) - 1}")
        try:
            vecs[parts[0]] = np.array([float(x) for x in parts[1:]])
        except ValueError as e:
            raise WordVectorFormatError(f"line {lineno}: {e}") from e
    return vecs


def save_embeddings(table: EmbeddingTable, kg: KnowledgeGraph,
                    out: TextIO) -> None:
    """Text dump: a #dim header then #entities/#relations/#words sections,
    one `name v1 ... vd` row each. %.17g keeps float64 round-trips exact."""
    def row(name: str, vec: np.ndarray) -> str:
        return name + " " + " ".join("%.17g" % x for x in vec)

    out.write(f"#dim {table.dim}\n#entities\n")
    for i, name in enumerate(kg.entities):
        out.write(row(name, table.entity_vecs[i]) + "\n")
    out.write("#relations\n")
    for i, name in enumerate(kg.relations):
        out.write(row(name, table.relation_vecs[i]) + "\n")
    out.write("#words\n")
    for w in sorted(table.word_vecs):
        out.write(row(w, table.word_vecs[w]) + "\n")


def load_embeddings(source: TextIO | Iterable[str],
                    kg: KnowledgeGraph) -> EmbeddingTable:
    """Inverse of save_embeddings. Names may contain spaces, so each row is
    split from the right using the declared dimension."""
    lines = iter(enumerate(source, start=1))
    try:
        _, first = next(lines)
    except StopIteration:
        raise WordVectorFormatError("empty embedding file") from None
    if not first.startswith("#dim "):
        raise WordVectorFormatError("missing #dim header")
    dim = int(first.split()[1])
    ent = np.zeros((kg.n_entities, dim))
    rel = np.zeros((kg.n_relations, dim))
    seen_e = np.zeros(kg.n_entities, dtype=bool)
    seen_r = np.zeros(kg.n_relations, dtype=bool)
    words: dict[str, np.ndarray] = {}
    section = None
    for lineno, raw in lines:
        line = raw.rstrip("\n")
        if not line:
            continue
        if line in ("#entities", "#relations", "#words"):
            section = line[1:]
            continue
        parts = line.rsplit(maxsplit=dim)
        if len(parts) != dim + 1:
            raise WordVectorFormatError(
                f"line {lineno}: expected name + {dim} values")
        name = parts[0]
        try:
            vec = np.array([float(x) for x in parts[1:]])
        except ValueError as e:
            raise WordVectorFormatError(f"line {lineno}: {e}") from e
        if section == "entities":
            if name not in kg.entity_ids:
                raise WordVectorFormatError(
                    f"line {lineno}: unknown entity {name!r}")
            i = kg.entity_ids[name]
            ent[i] = vec
            seen_e[i] = True
        elif section == "relations":
            if name not in kg.relation_ids:
                raise WordVectorFormatError(
                    f"line {lineno}: unknown relation {name!r}")
            i = kg.relation_ids[name]
            rel[i] = vec
            seen_r[i] = True
        elif section == "words":
            words[name] = vec
        else:
            raise WordVectorFormatError(
                f"line {lineno}: row before any section header")
    if not seen_e.all():
        missing = kg.entities[int(np.argmin(seen_e))]
        raise WordVectorFormatError(f"no vector for entity {missing!r}")
    if not seen_r.all():
        missing = kg.relations[int(np.argmin(seen_r))]
        raise WordVectorFormatError(f"no vector for relation {missing!r}")
    return EmbeddingTable(dim, ent, rel, words)


def read_anchor_file(source: TextIO | Iterable[str], src_kg: KnowledgeGraph,
                     tgt_kg: KnowledgeGraph) -> list[tuple[int, int]]:
    """Parse `source_entity<TAB>target_entity` anchor lines to id pairs."""
    pairs = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise WordVectorFormatError(
                f"line {lineno}: expected source_entity<TAB>target_entity")
        s = src_kg.entity_id(parts[0].strip())
        t = tgt_kg.entity_id(parts[1].strip())
        if s is None:
            raise WordVectorFormatError(
                f"line {lineno}: unknown source entity {parts[0]!r}")
        if t is None:
            raise WordVectorFormatError(
                f"line {lineno}: unknown target entity {parts[1]!r}")
        pairs.append((s, t))
    return pairs


@dataclass
class DomainMap:
    """Linear (optionally affine) map aligning one embedding space into
    another: x -> x @ weight + bias."""

    weight: np.ndarray                  # (dim, dim)
    bias: Optional[np.ndarray] = None   # (dim,) or None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        y = x @ self.weight
        if self.bias is not None:
            y = y + self.bias
        return y


def fit_domain_map(src: np.ndarray, tgt: np.ndarray, ridge: float = 0.0,
                   fit_bias: bool = False) -> DomainMap:
    """Least-squares fit of tgt ~ src @ W (+ b) from paired anchor vectors.

    With ridge = 0 the anchor set must determine the map: rank(src) must be
    the full dimension (plus one effective row when fitting a bias), else
    the fit is refused rather than silently pseudo-inverted.
    """
    if src.shape != tgt.shape:
        raise ValueError(f"anchor shapes differ: {src.shape} vs {tgt.shape}")
    n, dim = src.shape
    X = np.hstack([src, np.ones((n, 1))]) if fit_bias else src
    cols = X.shape[1]
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    if ridge == 0.0:
        if np.linalg.matrix_rank(X) < cols:
            raise ModelError(
                f"anchor set is rank-deficient ({n} pairs, need rank {cols}); "
                "add anchors or use ridge > 0")
        W, *_ = np.linalg.lstsq(X, tgt, rcond=None)
    else:
        A = X.T @ X + ridge * np.eye(cols)
        W = np.linalg.solve(A, X.T @ tgt)
    if fit_bias:
        return DomainMap(W[:-1], W[-1])
    return DomainMap(W)


def apply_domain_map(table: EmbeddingTable, dmap: DomainMap) -> EmbeddingTable:
    """Map entity and relation vectors into the other space; word vectors
    pass through unchanged."""
    return EmbeddingTable(
        dim=table.dim,
        entity_vecs=dmap(table.entity_vecs),
        relation_vecs=dmap(table.relation_vecs),
        word_vecs=dict(table.word_vecs),
        oov_seed=table.oov_seed,
    )
