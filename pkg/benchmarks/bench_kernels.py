"""Timing comparison of the compiled and pure-numpy batch kernels.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--samples N] [--repeats R]

Builds the bundled example system, generates a batch of random states,
and times batch_quadform, batch_kappa, and max_step_ratio on both code
paths.  The compiled path is warmed up first so JIT compilation is not
billed to the measurement.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from petctraffic import kernels, ratlin
from petctraffic.cli import load_config, make_disc


def stacks(disc):
    m_stack = np.stack([ratlin.to_float_matrix(disc.M[k])
                        for k in disc.K_range])
    n_stack = np.stack([ratlin.to_float_matrix(disc.N[k])
                        for k in range(1, disc.k_bar)])
    p = ratlin.to_float_matrix(disc.P_rat)
    return m_stack, n_stack, p


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=2_000_000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    disc = make_disc(load_config(None))
    m_stack, n_stack, p = stacks(disc)
    rng = np.random.default_rng(0)
    xs = rng.normal(size=(args.samples, disc.n_x))

    cases = [
        ("batch_quadform", lambda f: f(p, xs),
         kernels._batch_quadform_np,
         getattr(kernels, "_batch_quadform_nb", None)),
        ("batch_kappa", lambda f: f(n_stack, xs),
         kernels._batch_kappa_np,
         getattr(kernels, "_batch_kappa_nb", None)),
        ("max_step_ratio", lambda f: f(m_stack, n_stack, p, xs),
         kernels._max_step_ratio_np,
         getattr(kernels, "_max_step_ratio_nb", None)),
    ]

    print(f"samples: {args.samples:,}  repeats: {args.repeats}  "
          f"numba available: {kernels.USE_NUMBA}")
    header = f"{'kernel':<16} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, call, np_fn, nb_fn in cases:
        t_np = best_of(lambda: call(np_fn), args.repeats) * 1e3
        if nb_fn is None:
            print(f"{name:<16} {t_np:>12.2f} {'n/a':>12} {'n/a':>9}")
            continue
        call(nb_fn)  # warm-up: trigger compilation
        t_nb = best_of(lambda: call(nb_fn), args.repeats) * 1e3
        print(f"{name:<16} {t_np:>12.2f} {t_nb:>12.2f} {t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
