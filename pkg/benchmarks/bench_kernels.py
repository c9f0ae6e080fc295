#!/usr/bin/env python3
"""Benchmark the compiled value-iteration kernel against the numpy fallback.

The workload mirrors the optimality-preservation search: batches of
deterministic dynamics on small graphs, iterated to a 1e-12 sup-norm change.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""
import argparse
import time

import numpy as np

from rewardcalc._kernels import fallback

try:
    from rewardcalc._kernels import _valiter as compiled
except ImportError:
    compiled = None


def make_batch(rng, n_dyn, n_states, actions_per_state):
    n_sa = n_states * actions_per_state
    succ = rng.integers(0, n_states, size=(n_dyn, n_sa)).astype(np.int32)
    rewards = rng.uniform(-5, 5, size=(n_dyn, n_sa))
    offsets = np.arange(0, n_sa + 1, actions_per_state, dtype=np.int32)
    return succ, rewards, offsets


def timeit(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    cases = [
        ("tiny graphs, huge batch", 10_000, 4, 2),
        ("small graphs, large batch", 2_000, 8, 3),
        ("medium graphs", 200, 32, 4),
    ]
    gamma, stop_tol, max_iter = 0.9, 1e-12, 400

    print(f"{'case':<28} {'n_dyn':>7} {'fallback':>12} {'compiled':>12} {'speedup':>9}")
    for name, n_dyn, n_states, aps in cases:
        batch = make_batch(rng, n_dyn, n_states, aps)
        call = (*batch, gamma, stop_tol, max_iter)
        t_fb = timeit(fallback.value_iteration_batch, call, args.repeats)
        if compiled is None:
            print(f"{name:<28} {n_dyn:>7} {t_fb * 1e3:>10.2f}ms {'n/a':>12} {'n/a':>9}")
            continue
        t_cy = timeit(compiled.value_iteration_batch, call, args.repeats)
        q_fb, _ = fallback.value_iteration_batch(*call)
        q_cy, _ = compiled.value_iteration_batch(*call)
        assert np.array_equal(q_fb, q_cy), "backends disagree"
        print(
            f"{name:<28} {n_dyn:>7} {t_fb * 1e3:>10.2f}ms {t_cy * 1e3:>10.2f}ms "
            f"{t_fb / t_cy:>8.1f}x"
        )
    if compiled is None:
        print("\ncompiled kernel not built; install with `pip install -e .` to compare")


if __name__ == "__main__":
    main()
