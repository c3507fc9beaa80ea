"""The two LSTM kernel implementations must agree bit-for-bit in spirit:
same contract, same numbers to float64 round-off."""

import numpy as np
import pytest

from pathnli.model import kernels
from pathnli.model.params import init_lstm

from util import max_relative_error, numeric_grad


def _random_case(rng, t_steps, d_in, d_h):
    p = init_lstm(rng, d_in, d_h)
    x = rng.normal(size=(t_steps, d_in))
    dh = rng.normal(size=(t_steps, d_h))
    return p, x, dh


def test_forward_shapes_and_state_recurrence():
    rng = np.random.default_rng(0)
    p, x, _ = _random_case(rng, 5, 3, 4)
    h_seq, c_seq, gates = kernels.lstm_forward(x, p.wx, p.wh, p.b)
    assert h_seq.shape == (5, 4)
    assert c_seq.shape == (5, 4)
    assert gates.shape == (5, 16)
    # A single step must not depend on trailing inputs.
    h1, _, _ = kernels.lstm_forward(x[:1], p.wx, p.wh, p.b)
    assert np.allclose(h1[0], h_seq[0])


def test_backends_agree_on_random_cases():
    backends = kernels.get_backends()
    if len(backends) < 2:
        pytest.skip("only one kernel backend compiled")
    rng = np.random.default_rng(1)
    for _ in range(30):
        t_steps = int(rng.integers(1, 9))
        d_in = int(rng.integers(1, 7))
        d_h = int(rng.integers(1, 7))
        p, x, dh = _random_case(rng, t_steps, d_in, d_h)
        outs = {}
        for name, mod in backends.items():
            h_seq, c_seq, gates = mod.lstm_forward(x, p.wx, p.wh, p.b)
            grads = mod.lstm_backward(dh, x, p.wx, p.wh, h_seq, c_seq, gates)
            outs[name] = (h_seq, c_seq, gates) + grads
        names = sorted(outs)
        for a, b in zip(outs[names[0]], outs[names[1]]):
            assert np.max(np.abs(a - b)) < 1e-10


def test_kernel_gradients_match_finite_differences():
    rng = np.random.default_rng(2)
    p, x, dh = _random_case(rng, 4, 3, 3)

    def loss():
        h_seq, _, _ = kernels.lstm_forward(x, p.wx, p.wh, p.b)
        return float(np.sum(h_seq * dh))

    h_seq, c_seq, gates = kernels.lstm_forward(x, p.wx, p.wh, p.b)
    dwx, dwh, db, dx = kernels.lstm_backward(dh, x, p.wx, p.wh, h_seq,
                                             c_seq, gates)
    for analytic, tensor in ((dwx, p.wx), (dwh, p.wh), (db, p.b), (dx, x)):
        numeric = numeric_grad(loss, tensor)
        assert max_relative_error(analytic, numeric) < 1e-6


def test_backend_env_override(monkeypatch):
    import importlib

    monkeypatch.setenv("PATHNLI_BACKEND", "python")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
        monkeypatch.setenv("PATHNLI_BACKEND", "nonsense")
        with pytest.raises(Exception):
            importlib.reload(kernels)
    finally:
        monkeypatch.delenv("PATHNLI_BACKEND", raising=False)
        importlib.reload(kernels)
