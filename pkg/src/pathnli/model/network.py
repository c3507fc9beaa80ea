"""Forward and exact reverse-mode backward passes of the hierarchical
path-entailment classifier.

Layout for one instance with J premise paths:
  - each path token sequence -> inner LSTM -> final state p_j      (h,)
  - hypothesis tokens -> forward and backward LSTMs -> H           (2h,)
  - attention: s_j = H . (U p_j), softmax -> weights, pooled p     (h,)
  - outer LSTM over (p_1 .. p_J) -> final state P                  (h,)
  - A = [H; p; P], dropout while training, linear -> 2 logits
  - loss = -log softmax(logits)[gold]

Everything is float64 and the backward pass is hand-derived, so gradients
can be checked against finite differences to tight tolerances. Premise
paths are put into a canonical order before encoding, which makes the
model's output invariant to how the path set was ordered upstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..embeddings import EmbeddingTable
from ..phl import PHLInstance
from .kernels import lstm_backward, lstm_forward
from .params import ModelParams, zero_like_tensors


def _token_sort_key(seq) -> tuple:
    return (len(seq), tuple(
        (kind, f"{val:012d}" if kind in ("e", "r") else val)
        for kind, val in seq))


def canonical_premise(premise) -> tuple:
    """Premise path sequences in a fixed total order."""
    return tuple(sorted(premise, key=_token_sort_key))


def embed_tokens(table: EmbeddingTable, tokens) -> np.ndarray:
    rows = []
    for kind, val in tokens:
        if kind == "e":
            rows.append(table.entity(val))
        elif kind == "r":
            rows.append(table.relation(val))
        else:
            rows.append(table.word(val))
    return np.array(rows, dtype=np.float64)


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - np.max(z))
    return e / e.sum()


@dataclass
class Trace:
    """Every intermediate the backward pass needs, plus the outputs."""

    premise: tuple                 # canonical token sequences
    hypothesis: tuple
    xs: list                       # per-path embeddings (T_j, d_in)
    path_runs: list                # per-path (h_seq, c_seq, gates)
    p_mat: np.ndarray              # (J, h)
    hx: np.ndarray                 # (T_h, d_in)
    hyp_f: tuple
    hyp_b: tuple
    H: np.ndarray                  # (2h,)
    v: np.ndarray                  # (h,)
    scores: np.ndarray             # (J,)
    weights: np.ndarray            # (J,)
    p: np.ndarray                  # (h,)
    outer_run: tuple
    P: np.ndarray                  # (h,)
    A: np.ndarray                  # (4h,)
    mask: Optional[np.ndarray]
    A_drop: np.ndarray
    logits: np.ndarray             # (2,)
    probs: np.ndarray              # (2,)


def forward(params: ModelParams, table: EmbeddingTable, inst: PHLInstance,
            dropout: float = 0.0,
            rng: Optional[np.random.Generator] = None) -> Trace:
    """Run the model on one instance.

    With dropout > 0 an inverted-dropout mask is drawn from rng and applied
    to the concatenated summary vector; at evaluation time pass dropout=0.
    """
    if not 0.0 <= dropout < 1.0:
        raise ValueError(f"dropout must be in [0, 1), got {dropout}")
    if dropout > 0.0 and rng is None:
        raise ValueError("dropout requires an rng")
    h = params.d_h
    premise = canonical_premise(inst.premise)
    xs = [embed_tokens(table, seq) for seq in premise]
    path_runs = []
    p_rows = []
    pl = params.path_lstm
    for x in xs:
        run = lstm_forward(x, pl.wx, pl.wh, pl.b)
        path_runs.append(run)
        p_rows.append(run[0][-1])
    p_mat = np.array(p_rows)

    hx = embed_tokens(table, inst.hypothesis)
    hf = params.hyp_fwd
    hb = params.hyp_bwd
    hyp_f = lstm_forward(hx, hf.wx, hf.wh, hf.b)
    hyp_b = lstm_forward(hx[::-1], hb.wx, hb.wh, hb.b)
    H = np.concatenate([hyp_f[0][-1], hyp_b[0][-1]])

    v = params.attn_u.T @ H
    scores = p_mat @ v
    weights = _softmax(scores)
    p = weights @ p_mat

    ol = params.outer_lstm
    outer_run = lstm_forward(p_mat, ol.wx, ol.wh, ol.b)
    P = outer_run[0][-1]

    A = np.concatenate([H, p, P])
    if dropout > 0.0:
        mask = (rng.random(A.shape[0]) >= dropout) / (1.0 - dropout)
        A_drop = A * mask
    else:
        mask = None
        A_drop = A
    logits = params.cls_w.T @ A_drop + params.cls_b
    probs = _softmax(logits)
    return Trace(premise, inst.hypothesis, xs, path_runs, p_mat, hx, hyp_f,
                 hyp_b, H, v, scores, weights, p, outer_run, P, A, mask,
                 A_drop, logits, probs)


def loss_from_trace(trace: Trace, gold: int) -> float:
    z = trace.logits
    return float(np.log(np.exp(z - z.max()).sum()) + z.max() - z[gold])


def backward(params: ModelParams, trace: Trace, gold: int,
             want_embedding_grads: bool = False
             ) -> tuple[dict[str, np.ndarray], dict]:
    """Gradients of -log p(gold) for every model tensor.

    When want_embedding_grads is set, also returns gradients with respect
    to the entity and relation token embeddings as a dict keyed by
    ("e"|"r", id); word vectors are treated as fixed inputs.
    """
    h = params.d_h
    grads = zero_like_tensors(params)
    embed_grads: dict = {}

    dlogits = trace.probs.copy()
    dlogits[gold] -= 1.0
    grads["cls_b"] += dlogits
    grads["cls_w"] += np.outer(trace.A_drop, dlogits)
    dA = params.cls_w @ dlogits
    if trace.mask is not None:
        dA = dA * trace.mask
    dH = dA[:2 * h].copy()
    dp_pool = dA[2 * h:3 * h]
    dP = dA[3 * h:]

    # Outer LSTM: only its final state feeds the summary.
    J = trace.p_mat.shape[0]
    dh_out = np.zeros((J, h))
    dh_out[-1] = dP
    ol = params.outer_lstm
    dwx, dwh, db, dp_from_outer = lstm_backward(
        dh_out, trace.p_mat, ol.wx, ol.wh, *trace.outer_run)
    grads["outer.wx"] += dwx
    grads["outer.wh"] += dwh
    grads["outer.b"] += db

    # Attention pooling over path encodings.
    dw = trace.p_mat @ dp_pool
    ds = trace.weights * (dw - float(trace.weights @ dw))
    dv = trace.p_mat.T @ ds
    grads["attn_u"] += np.outer(trace.H, dv)
    dH += params.attn_u @ dv
    dp_mat = (dp_from_outer + trace.weights[:, None] * dp_pool
              + ds[:, None] * trace.v)

    # Inner path LSTM, one run per path, shared weights.
    pl = params.path_lstm
    for j, x in enumerate(trace.xs):
        dh_out = np.zeros((x.shape[0], h))
        dh_out[-1] = dp_mat[j]
        dwx, dwh, db, dx = lstm_backward(dh_out, x, pl.wx, pl.wh,
                                         *trace.path_runs[j])
        grads["path.wx"] += dwx
        grads["path.wh"] += dwh
        grads["path.b"] += db
        if want_embedding_grads:
            _scatter_embed(embed_grads, trace.premise[j], dx)

    # Hypothesis encoder: gradients flow only through the final states.
    dhf = dH[:h]
    dhb = dH[h:]
    Th = trace.hx.shape[0]
    hf = params.hyp_fwd
    dh_out = np.zeros((Th, h))
    dh_out[-1] = dhf
    dwx, dwh, db, dx_f = lstm_backward(dh_out, trace.hx, hf.wx, hf.wh,
                                       *trace.hyp_f)
    grads["hyp_fwd.wx"] += dwx
    grads["hyp_fwd.wh"] += dwh
    grads["hyp_fwd.b"] += db
    hb = params.hyp_bwd
    dh_out = np.zeros((Th, h))
    dh_out[-1] = dhb
    dwx, dwh, db, dx_b = lstm_backward(dh_out, trace.hx[::-1], hb.wx, hb.wh,
                                       *trace.hyp_b)
    grads["hyp_bwd.wx"] += dwx
    grads["hyp_bwd.wh"] += dwh
    grads["hyp_bwd.b"] += db
    if want_embedding_grads:
        _scatter_embed(embed_grads, trace.hypothesis, dx_f + dx_b[::-1])

    return grads, embed_grads


def _scatter_embed(acc: dict, tokens, dx: np.ndarray) -> None:
    for i, (kind, val) in enumerate(tokens):
        if kind in ("e", "r"):
            key = (kind, val)
            if key in acc:
                acc[key] = acc[key] + dx[i]
            else:
                acc[key] = dx[i].copy()


def predict(params: ModelParams, table: EmbeddingTable,
            inst: PHLInstance) -> np.ndarray:
    """Class probabilities [p(entail), p(contradict)] without dropout."""
    return forward(params, table, inst).probs


def instance_loss(params: ModelParams, table: EmbeddingTable,
                  inst: PHLInstance) -> float:
    return loss_from_trace(forward(params, table, inst), inst.label)
