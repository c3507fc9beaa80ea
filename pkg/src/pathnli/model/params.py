"""Model parameter containers, initialization, and checkpointing.

The checkpoint container is a purpose-built binary format (magic, one JSON
header line, then raw float64 tensor bytes in header order) so that saving
the same parameters twice yields byte-identical files; archive formats
embed timestamps and would break that.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ModelError

MAGIC = b"PNLI\x01\n"


@dataclass
class LSTMParams:
    """Fused-gate LSTM weights; rows are the four gates stacked in the
    order input, forget, output, candidate."""

    wx: np.ndarray   # (4h, d_in)
    wh: np.ndarray   # (4h, h)
    b: np.ndarray    # (4h,)

    @property
    def hidden(self) -> int:
        return self.wh.shape[1]


def init_lstm(rng: np.random.Generator, d_in: int, d_h: int) -> LSTMParams:
    """Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights; the forget-gate
    bias starts at 1 so early training does not flush the cell state."""
    bx = 1.0 / np.sqrt(d_in)
    bh = 1.0 / np.sqrt(d_h)
    wx = rng.uniform(-bx, bx, size=(4 * d_h, d_in))
    wh = rng.uniform(-bh, bh, size=(4 * d_h, d_h))
    b = np.zeros(4 * d_h)
    b[d_h:2 * d_h] = 1.0
    return LSTMParams(wx, wh, b)


@dataclass
class ModelParams:
    """Hierarchical path-entailment classifier.

    Inner LSTM encodes each premise path, a bidirectional pair encodes the
    hypothesis, attention scores each path against the hypothesis, an outer
    LSTM runs over the path encodings, and a linear layer classifies the
    concatenated summary [hypothesis; pooled path; outer state].
    """

    d_in: int
    d_h: int
    path_lstm: LSTMParams
    hyp_fwd: LSTMParams
    hyp_bwd: LSTMParams
    outer_lstm: LSTMParams
    attn_u: np.ndarray   # (2h, h)
    cls_w: np.ndarray    # (4h, 2)
    cls_b: np.ndarray    # (2,)

    def named_tensors(self) -> dict[str, np.ndarray]:
        """Stable name -> array view of every trainable tensor."""
        out = {}
        for prefix, lstm in (("path", self.path_lstm), ("hyp_fwd", self.hyp_fwd),
                             ("hyp_bwd", self.hyp_bwd), ("outer", self.outer_lstm)):
            out[f"{prefix}.wx"] = lstm.wx
            out[f"{prefix}.wh"] = lstm.wh
            out[f"{prefix}.b"] = lstm.b
        out["attn_u"] = self.attn_u
        out["cls_w"] = self.cls_w
        out["cls_b"] = self.cls_b
        return out

    def copy(self) -> "ModelParams":
        return ModelParams(
            self.d_in, self.d_h,
            LSTMParams(self.path_lstm.wx.copy(), self.path_lstm.wh.copy(),
                       self.path_lstm.b.copy()),
            LSTMParams(self.hyp_fwd.wx.copy(), self.hyp_fwd.wh.copy(),
                       self.hyp_fwd.b.copy()),
            LSTMParams(self.hyp_bwd.wx.copy(), self.hyp_bwd.wh.copy(),
                       self.hyp_bwd.b.copy()),
            LSTMParams(self.outer_lstm.wx.copy(), self.outer_lstm.wh.copy(),
                       self.outer_lstm.b.copy()),
            self.attn_u.copy(), self.cls_w.copy(), self.cls_b.copy())


def init_model(d_in: int, d_h: int, seed: int = 0) -> ModelParams:
    rng = np.random.default_rng(seed)
    path_lstm = init_lstm(rng, d_in, d_h)
    hyp_fwd = init_lstm(rng, d_in, d_h)
    hyp_bwd = init_lstm(rng, d_in, d_h)
    outer = init_lstm(rng, d_h, d_h)
    bu = 1.0 / np.sqrt(2 * d_h)
    attn_u = rng.uniform(-bu, bu, size=(2 * d_h, d_h))
    bw = 1.0 / np.sqrt(4 * d_h)
    cls_w = rng.uniform(-bw, bw, size=(4 * d_h, 2))
    cls_b = np.zeros(2)
    return ModelParams(d_in, d_h, path_lstm, hyp_fwd, hyp_bwd, outer,
                       attn_u, cls_w, cls_b)


def zero_like_tensors(params: ModelParams) -> dict[str, np.ndarray]:
    return {k: np.zeros_like(v) for k, v in params.named_tensors().items()}


def save_checkpoint(path: str, params: ModelParams,
                    meta: Optional[dict] = None) -> None:
    tensors = params.named_tensors()
    header = {
        "version": 1,
        "dtype": "float64",
        "d_in": params.d_in,
        "d_h": params.d_h,
        "tensors": [[name, list(arr.shape)] for name, arr in tensors.items()],
        "meta": meta or {},
    }
    try:
        f = open(path, "wb")
    except OSError as e:
        raise ModelError(f"cannot write checkpoint {path}: {e}") from e
    with f:
        f.write(MAGIC)
        f.write(json.dumps(header, sort_keys=True,
                           separators=(",", ":")).encode("utf-8"))
        f.write(b"\n")
        for arr in tensors.values():
            f.write(np.ascontiguousarray(arr, dtype=np.float64).tobytes())


def load_checkpoint(path: str) -> tuple[ModelParams, dict]:
    try:
        f = open(path, "rb")
    except OSError as e:
        raise ModelError(f"cannot read checkpoint {path}: {e}") from e
    with f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise ModelError(f"{path}: not a model checkpoint (bad magic)")
        header_line = f.readline()
        try:
            header = json.loads(header_line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise ModelError(f"{path}: corrupt checkpoint header") from e
        if header.get("version") != 1:
            raise ModelError(
                f"{path}: unsupported checkpoint version {header.get('version')}")
        d_in, d_h = header["d_in"], header["d_h"]
        blank = init_model(d_in, d_h, seed=0)
        tensors = blank.named_tensors()
        expect = [[name, list(arr.shape)] for name, arr in tensors.items()]
        if header["tensors"] != expect:
            raise ModelError(f"{path}: tensor layout does not match "
                             f"a d_in={d_in}, d_h={d_h} model")
        for name, arr in tensors.items():
            raw = f.read(arr.size * 8)
            if len(raw) != arr.size * 8:
                raise ModelError(f"{path}: truncated tensor {name!r}")
            arr[...] = np.frombuffer(raw, dtype=np.float64).reshape(arr.shape)
        if f.read(1):
            raise ModelError(f"{path}: trailing bytes after last tensor")
    return blank, header.get("meta", {})
