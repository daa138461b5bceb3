"""Times every hot kernel on both lanes and prints the speedup table.

Run with `python3 benchmarks/bench_kernels.py [--repeats N]`. Shapes mirror
a real decoding cell: 21 channels at 100 Hz, 250 ms windows, batch 64.
The numba lane is JIT-compiled, so the first call per kernel is excluded
by a warmup pass; both lanes are checked against each other before timing.
"""
import argparse
import time

import numpy as np

from eegtraj.accel import get_impl


def make_cases(rng):
    B, T, L, N = 64, 25, 25, 21
    H, Co, K = 128, 256, 7
    rec = rng.standard_normal((N, 36000))
    x_seq = rng.standard_normal((B, T, N))
    w_conv = rng.standard_normal((K, N, Co)) * 0.1
    b_conv = rng.standard_normal(Co) * 0.1
    dy_conv = rng.standard_normal((B, T, Co))
    x_pool = rng.standard_normal((B, T, Co))
    x_lstm = rng.standard_normal((B, T, Co))
    wx = rng.standard_normal((Co, 4 * H)) * 0.05
    wh = rng.standard_normal((H, 4 * H)) * 0.05
    b_lstm = rng.standard_normal(4 * H) * 0.05
    dh = rng.standard_normal((B, H))

    cases = {}
    cases["lag_embed"] = lambda impl: impl.lag_embed(rec, L - 1, 30000, L)
    cases["conv1d_fwd"] = lambda impl: impl.conv1d_fwd(x_seq, w_conv, b_conv)
    cases["conv1d_bwd"] = lambda impl: impl.conv1d_bwd(x_seq, w_conv, dy_conv)
    cases["maxpool_fwd"] = lambda impl: impl.maxpool_fwd(x_pool, 5)

    def pool_bwd(impl):
        y, idx = impl.maxpool_fwd(x_pool, 5)
        dy = np.ones_like(y)
        return impl.maxpool_bwd(dy, idx, T)

    cases["maxpool_bwd"] = pool_bwd
    cases["lstm_fwd"] = lambda impl: impl.lstm_fwd(x_lstm, wx, wh, b_lstm)

    def lstm_bwd(impl):
        _, hs, cs, gates = impl.lstm_fwd(x_lstm, wx, wh, b_lstm)
        return impl.lstm_bwd(x_lstm, wx, wh, hs, cs, gates, dh)

    cases["lstm_bwd"] = lstm_bwd
    return cases


def check_agreement(cases, numpy_impl, numba_impl):
    for name, fn in cases.items():
        a = fn(numpy_impl)
        b = fn(numba_impl)
        a = a if isinstance(a, tuple) else (a,)
        b = b if isinstance(b, tuple) else (b,)
        for x, y in zip(a, b):
            if not np.allclose(x, y, rtol=1e-10, atol=1e-10):
                raise AssertionError(f"lanes disagree on {name}")


def bench(fn, impl, repeats):
    fn(impl)   # warmup; also triggers JIT on the numba lane
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(impl)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timed repetitions per kernel (best-of)")
    args = parser.parse_args()

    numpy_impl = get_impl("numpy")
    try:
        numba_impl = get_impl("numba")
    except ImportError:
        print("numba is not importable; nothing to compare")
        return

    rng = np.random.default_rng(0)
    cases = make_cases(rng)
    check_agreement(cases, numpy_impl, numba_impl)

    print(f"{'kernel':<12} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, fn in cases.items():
        t_np = bench(fn, numpy_impl, args.repeats)
        t_nb = bench(fn, numba_impl, args.repeats)
        print(f"{name:<12} {t_np * 1e3:>9.2f}ms {t_nb * 1e3:>9.2f}ms "
              f"{t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
