"""Minibatch training of the path-entailment classifier.

Determinism contract: one generator seeded from the run seed drives epoch
shuffling and dropout masks in a fixed consumption order (permutation
first, then one mask per instance in batch order), gradients are reduced
in batch order, and parameters update through Adam with a fixed tensor
ordering. Same seed and data, same floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..embeddings import EmbeddingTable
from ..errors import ModelError
from ..phl import PHLInstance
from .network import backward, forward, loss_from_trace
from .params import ModelParams, init_model, zero_like_tensors


class Adam:
    """Adam with bias correction; state is keyed by tensor name."""

    def __init__(self, lr: float = 0.001, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, tensors: dict[str, np.ndarray],
             grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for name, theta in tensors.items():
            g = grads[name]
            m = self.m.setdefault(name, np.zeros_like(theta))
            v = self.v.setdefault(name, np.zeros_like(theta))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            theta -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class TrainResult:
    params: ModelParams
    table: EmbeddingTable
    history: list[dict] = field(default_factory=list)


def _copy_table(table: EmbeddingTable) -> EmbeddingTable:
    return EmbeddingTable(table.dim, table.entity_vecs.copy(),
                          table.relation_vecs.copy(),
                          dict(table.word_vecs), table.oov_seed)


def train_model(instances: Sequence[PHLInstance], table: EmbeddingTable,
                d_h: int = 150, epochs: int = 30, lr: float = 0.001,
                batch: int = 32, dropout: float = 0.2, seed: int = 0,
                params: Optional[ModelParams] = None,
                fine_tune_embeddings: bool = False,
                average_tail: int = 0,
                epoch_hook: Optional[Callable] = None) -> TrainResult:
    """Train on PHL instances, returning new params, the (possibly updated)
    embedding table, and a per-epoch history of mean loss and training
    accuracy.

    Passing params warm-starts from a copy of them. With
    fine_tune_embeddings the entity and relation vectors join the Adam
    update; word vectors always stay fixed. average_tail > 1 returns the
    element-wise mean of the parameters from the last average_tail epochs
    instead of the final iterate, which damps the oscillation of small
    noisy runs. epoch_hook(params, table, epoch, mean_loss), if given,
    runs after each epoch and its non-None return value is recorded as
    "metric" for that epoch.
    """
    if not instances:
        raise ModelError("no training instances")
    if batch < 1:
        raise ValueError("batch must be >= 1")
    if average_tail < 0 or average_tail > epochs:
        raise ModelError("average_tail must be between 0 and epochs")
    table = _copy_table(table)
    if params is None:
        params = init_model(table.dim, d_h, seed)
    else:
        if params.d_in != table.dim:
            raise ModelError(
                f"model expects {params.d_in}-dim embeddings, table has {table.dim}")
        params = params.copy()
    rng = np.random.default_rng(seed + 1)
    opt = Adam(lr)
    tensors = dict(params.named_tensors())
    if fine_tune_embeddings:
        tensors["entity_vecs"] = table.entity_vecs
        tensors["relation_vecs"] = table.relation_vecs
    history: list[dict] = []
    snapshots: list[dict[str, np.ndarray]] = []
    n = len(instances)
    for epoch in range(epochs):
        order = rng.permutation(n)
        total = 0.0
        correct = 0
        for lo in range(0, n, batch):
            idx = order[lo:lo + batch]
            gsum = zero_like_tensors(params)
            if fine_tune_embeddings:
                gsum["entity_vecs"] = np.zeros_like(table.entity_vecs)
                gsum["relation_vecs"] = np.zeros_like(table.relation_vecs)
            for k in idx:
                inst = instances[k]
                trace = forward(params, table, inst, dropout, rng)
                total += loss_from_trace(trace, inst.label)
                if int(np.argmax(trace.probs)) == inst.label:
                    correct += 1
                grads, egrads = backward(params, trace, inst.label,
                                         want_embedding_grads=fine_tune_embeddings)
                for name in grads:
                    gsum[name] += grads[name]
                for (kind, tid), g in egrads.items():
                    if kind == "e":
                        gsum["entity_vecs"][tid] += g
                    else:
                        gsum["relation_vecs"][tid] += g
            scale = 1.0 / len(idx)
            for name in gsum:
                gsum[name] *= scale
            opt.step(tensors, gsum)
        if epochs - (epoch + 1) < average_tail:
            snapshots.append({name: t.copy() for name, t in tensors.items()})
        record = {"epoch": epoch, "loss": total / n, "train_acc": correct / n}
        if epoch_hook is not None:
            metric = epoch_hook(params, table, epoch, record["loss"])
            if metric is not None:
                record["metric"] = float(metric)
        history.append(record)
    if len(snapshots) > 1:
        for name, theta in tensors.items():
            theta[...] = np.mean([snap[name] for snap in snapshots], axis=0)
    return TrainResult(params, table, history)
