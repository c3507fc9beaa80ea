"""Time the LSTM kernels across backends.

Run as `python3 benchmarks/bench_kernels.py [--repeats N]`. Each backend
runs the same forward and forward+backward workloads over a spread of
sequence lengths and widths; times are the best of N repeats.
"""

import argparse
import time

import numpy as np

from pathnli.model.kernels import BACKEND, get_backends

SHAPES = [
    # (T, d_in, d_h)
    (8, 64, 64),
    (32, 64, 64),
    (16, 150, 150),
    (64, 150, 150),
    (128, 300, 150),
]


def make_case(rng, t, d_in, d_h):
    x = rng.normal(0.0, 1.0, (t, d_in))
    wx = rng.normal(0.0, 0.1, (4 * d_h, d_in))
    wh = rng.normal(0.0, 0.1, (4 * d_h, d_h))
    b = np.zeros(4 * d_h)
    dh = rng.normal(0.0, 1.0, (t, d_h))
    return x, wx, wh, b, dh


def best_of(repeats, fn):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="keep the best of this many timings")
    args = parser.parse_args()

    backends = get_backends()
    print(f"default backend: {BACKEND}")
    print(f"{'shape (T,d_in,d_h)':<22}{'pass':<10}"
          + "".join(f"{name:>12}" for name in backends)
          + (f"{'speedup':>10}" if len(backends) > 1 else ""))
    rng = np.random.default_rng(0)
    for shape in SHAPES:
        x, wx, wh, b, dh = make_case(rng, *shape)
        rows = {}
        for name, mod in backends.items():
            fwd = best_of(args.repeats, lambda: mod.lstm_forward(x, wx, wh, b))
            h_seq, c_seq, gates = mod.lstm_forward(x, wx, wh, b)
            bwd = best_of(
                args.repeats,
                lambda: mod.lstm_backward(dh, x, wx, wh, h_seq, c_seq, gates))
            rows[name] = (fwd, fwd + bwd)
        for i, label in enumerate(("forward", "fwd+bwd")):
            cells = "".join(f"{rows[name][i] * 1e3:>10.3f}ms"
                            for name in backends)
            if len(backends) > 1:
                vals = [rows[name][i] for name in backends]
                ratio = max(vals) / min(vals)
                fastest = min(backends, key=lambda n: rows[n][i])
                cells += f"{ratio:>8.2f}x {fastest[:2]}"
            print(f"{str(shape):<22}{label:<10}" + cells)


if __name__ == "__main__":
    main()
