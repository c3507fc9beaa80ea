"""Metrics, reports, the candidate-set-size ablation, and cross-domain
transfer experiments.

A question counts as answered correctly only when the predicted entailed
set equals the gold answer set exactly; partial overlap is wrong. Hit@1
(is the single most-confident candidate a correct answer) is available as
a softer secondary mode.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, TextIO

import numpy as np

from .embeddings import (DomainMap, EmbeddingTable, apply_domain_map,
                         fit_domain_map)
from .model.network import embed_tokens, predict
from .model.params import ModelParams
from .model.training import TrainResult, train_model
from .phl import PHLInstance

REPORT_COLUMNS = ("split", "n_candidates", "cls_acc", "qa_acc",
                  "n_questions", "n_instances")


def predict_label(params: ModelParams, table: EmbeddingTable,
                  inst: PHLInstance, threshold: float = 0.5) -> int:
    """0 (entail) when p(entail) clears the threshold, else 1."""
    return 0 if predict(params, table, inst)[0] >= threshold else 1


def classification_accuracy(params: ModelParams, table: EmbeddingTable,
                            instances: Sequence[PHLInstance],
                            threshold: float = 0.5) -> float:
    if not instances:
        raise ValueError("no instances to evaluate")
    hits = sum(1 for inst in instances
               if predict_label(params, table, inst, threshold) == inst.label)
    return hits / len(instances)


def group_by_question(instances: Iterable[PHLInstance]
                      ) -> dict[str, list[PHLInstance]]:
    """qid -> instances, preserving first-seen question order."""
    groups: dict[str, list[PHLInstance]] = {}
    for inst in instances:
        groups.setdefault(inst.qid, []).append(inst)
    return groups


@dataclass(frozen=True)
class QAResult:
    qid: str
    predicted: frozenset
    gold: frozenset
    correct: bool


def qa_accuracy(params: ModelParams, table: EmbeddingTable,
                instances: Sequence[PHLInstance], threshold: float = 0.5,
                mode: str = "set") -> tuple[float, list[QAResult]]:
    """Question-level accuracy over grouped instances.

    mode="set": the entailed candidate set must equal the gold set.
    mode="hit1": the candidate with the highest entailment probability
    must be one of the gold answers.
    """
    if mode not in ("set", "hit1"):
        raise ValueError(f"mode must be 'set' or 'hit1', got {mode!r}")
    groups = group_by_question(instances)
    if not groups:
        raise ValueError("no instances to evaluate")
    results = []
    for qid, insts in groups.items():
        gold = frozenset(i.candidate for i in insts if i.label == 0)
        if mode == "set":
            predicted = frozenset(
                i.candidate for i in insts
                if predict_label(params, table, i, threshold) == 0)
            correct = predicted == gold
        else:
            probs = [predict(params, table, i)[0] for i in insts]
            best = insts[int(np.argmax(probs))].candidate
            predicted = frozenset([best])
            correct = best in gold
        results.append(QAResult(qid, predicted, gold, correct))
    acc = sum(r.correct for r in results) / len(results)
    return acc, results


@dataclass(frozen=True)
class EvalReport:
    split: str
    n_candidates: int
    cls_acc: float
    qa_acc: float
    n_questions: int
    n_instances: int

    def row(self) -> tuple:
        return (self.split, self.n_candidates, f"{self.cls_acc:.4f}",
                f"{self.qa_acc:.4f}", self.n_questions, self.n_instances)


def evaluate_split(params: ModelParams, table: EmbeddingTable,
                   instances: Sequence[PHLInstance], split: str,
                   n_candidates: int, threshold: float = 0.5,
                   qa_mode: str = "set") -> EvalReport:
    cls = classification_accuracy(params, table, instances, threshold)
    qa, results = qa_accuracy(params, table, instances, threshold, qa_mode)
    return EvalReport(split, n_candidates, cls, qa, len(results),
                      len(instances))


def write_report_csv(reports: Sequence[EvalReport], out: TextIO) -> None:
    out.write(",".join(REPORT_COLUMNS) + "\n")
    for r in reports:
        out.write(",".join(str(v) for v in r.row()) + "\n")


def format_report_table(reports: Sequence[EvalReport]) -> str:
    rows = [REPORT_COLUMNS] + [tuple(str(v) for v in r.row())
                               for r in reports]
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
             for row in rows]
    return "\n".join(lines)


def report_csv_text(reports: Sequence[EvalReport]) -> str:
    buf = io.StringIO()
    write_report_csv(reports, buf)
    return buf.getvalue()


def ablation_sweep(make_split: Callable[[int], tuple[list[PHLInstance],
                                                     list[PHLInstance]]],
                   table: EmbeddingTable, sizes: Sequence[int] = (4, 8, 16, 24),
                   d_h: int = 150, epochs: int = 10, lr: float = 0.001,
                   batch: int = 32, dropout: float = 0.2, seed: int = 0,
                   threshold: float = 0.5, retrain: bool = True
                   ) -> list[EvalReport]:
    """How accuracy degrades as the candidate set grows.

    make_split(n) must return (train, eval) PHL instances generated with n
    potential answers per question. By default a fresh model is trained per
    size; with retrain=False one model is trained at the smallest size and
    evaluated across all of them.
    """
    if not sizes:
        raise ValueError("sizes must be non-empty")
    reports = []
    shared: Optional[TrainResult] = None
    for n in sorted(sizes):
        train_insts, eval_insts = make_split(n)
        if retrain or shared is None:
            result = train_model(train_insts, table, d_h=d_h, epochs=epochs,
                                 lr=lr, batch=batch, dropout=dropout,
                                 seed=seed)
            if not retrain:
                shared = result
        else:
            result = shared
        reports.append(evaluate_split(result.params, result.table,
                                      eval_insts, f"n={n}", n, threshold))
    return reports


@dataclass
class AdaptResult:
    """Transfer experiment outcome: fine-tuning a source-domain model on
    alignment-mapped target data versus training from scratch there."""

    map_rmse: float
    warm: TrainResult
    cold: TrainResult
    warm_plateau: int
    cold_plateau: int
    warm_final: float = field(default=float("nan"))
    cold_final: float = field(default=float("nan"))


def epochs_to_plateau(history: Sequence[dict], key: str = "metric",
                      tol: float = 0.02) -> int:
    """1-based index of the first epoch whose metric is within tol of the
    best metric ever reached."""
    values = [h[key] for h in history]
    if not values:
        raise ValueError("empty history")
    best = max(values)
    for i, v in enumerate(values):
        if v >= best - tol:
            return i + 1
    raise AssertionError("unreachable")


def align_tables(src_table: EmbeddingTable, tgt_table: EmbeddingTable,
                 anchors: Sequence[tuple[int, int]], ridge: float = 0.0
                 ) -> tuple[EmbeddingTable, DomainMap]:
    """Map the target graph's vectors into the source space.

    The map is fitted in the target-to-source direction from anchor entity
    pairs, then applied to every target entity and relation vector, so a
    model trained in the source space can read the result directly.
    """
    src_vecs = np.array([src_table.entity_vecs[s] for s, _ in anchors])
    tgt_vecs = np.array([tgt_table.entity_vecs[t] for _, t in anchors])
    dmap = fit_domain_map(tgt_vecs, src_vecs, ridge=ridge)
    return apply_domain_map(tgt_table, dmap), dmap


def domain_adapt(src_params: ModelParams, src_table: EmbeddingTable,
                 tgt_table: EmbeddingTable,
                 anchors: Sequence[tuple[int, int]],
                 tgt_train: Sequence[PHLInstance],
                 tgt_eval: Sequence[PHLInstance], epochs: int = 20,
                 lr: float = 0.001, batch: int = 32, dropout: float = 0.2,
                 seed: int = 0, threshold: float = 0.5,
                 ridge: float = 0.0, plateau_tol: float = 0.02) -> AdaptResult:
    """Warm start versus cold start on a new domain.

    Target embeddings are aligned into the source space through the anchor
    map; the warm run fine-tunes the source model on the aligned target
    data while the cold run trains a fresh model of the same shape on the
    same data. Per-epoch evaluation accuracy on tgt_eval drives the
    epochs-to-plateau comparison.
    """
    aligned, dmap = align_tables(src_table, tgt_table, anchors, ridge)
    src_anchor = np.array([src_table.entity_vecs[s] for s, _ in anchors])
    mapped = np.array([aligned.entity_vecs[t] for _, t in anchors])
    map_rmse = float(np.sqrt(np.mean((mapped - src_anchor) ** 2)))

    def hook(params, table, epoch, loss):
        return classification_accuracy(params, table, tgt_eval, threshold)

    warm = train_model(tgt_train, aligned, d_h=src_params.d_h, epochs=epochs,
                       lr=lr, batch=batch, dropout=dropout, seed=seed,
                       params=src_params, epoch_hook=hook)
    cold = train_model(tgt_train, aligned, d_h=src_params.d_h, epochs=epochs,
                       lr=lr, batch=batch, dropout=dropout, seed=seed,
                       epoch_hook=hook)
    return AdaptResult(
        map_rmse, warm, cold,
        epochs_to_plateau(warm.history, tol=plateau_tol),
        epochs_to_plateau(cold.history, tol=plateau_tol),
        warm.history[-1]["metric"], cold.history[-1]["metric"])


def _baseline_features(table: EmbeddingTable,
                       inst: PHLInstance) -> np.ndarray:
    """Order-free summary: mean premise token vector and mean hypothesis
    token vector, concatenated. Deliberately blind to path structure."""
    prem = np.concatenate([embed_tokens(table, seq) for seq in inst.premise])
    hyp = embed_tokens(table, inst.hypothesis)
    return np.concatenate([prem.mean(axis=0), hyp.mean(axis=0)])


@dataclass
class BaselineModel:
    w: np.ndarray
    b: float


def train_baseline(instances: Sequence[PHLInstance], table: EmbeddingTable,
                   epochs: int = 200, lr: float = 0.5,
                   seed: int = 0) -> BaselineModel:
    """Logistic regression on bag-of-embedding features, full-batch
    gradient descent. Serves as the structure-free reference point."""
    X = np.array([_baseline_features(table, i) for i in instances])
    y = np.array([i.label for i in instances], dtype=np.float64)
    mu = X.mean(axis=0)
    sd = np.maximum(X.std(axis=0), 1e-8)
    Xn = (X - mu) / sd
    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, 0.01, size=X.shape[1])
    b = 0.0
    n = len(y)
    for _ in range(epochs):
        z = Xn @ w + b
        p = 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
        g = p - y
        w -= lr * (Xn.T @ g) / n
        b -= lr * float(g.mean())
    # Fold the standardization into the weights.
    w_raw = w / sd
    b_raw = b - float(mu @ w_raw)
    return BaselineModel(w_raw, b_raw)


def baseline_accuracy(model: BaselineModel, table: EmbeddingTable,
                      instances: Sequence[PHLInstance]) -> float:
    if not instances:
        raise ValueError("no instances to evaluate")
    hits = 0
    for inst in instances:
        z = float(_baseline_features(table, inst) @ model.w + model.b)
        hits += int((1 if z >= 0 else 0) == inst.label)
    return hits / len(instances)
