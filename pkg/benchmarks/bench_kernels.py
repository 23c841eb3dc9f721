#!/usr/bin/env python3
"""Timing comparison of the compiled kernels against the numpy fallback.

Runs the partition recursion and the path sampler through the public API
under each backend on identical inputs, checks that the outputs agree to
the last bit, and prints per-case timings with the speedup factor.
"""

import argparse
import time

import numpy as np

from ldbayes import _backend
from ldbayes.core import Alphabet
from ldbayes.gibbs import FiniteRangePotential, build_gibbs_model
from ldbayes.posterior import LossSpec, log_partition_curve
from ldbayes.simulate import sample_markov


def best_of(fn, repeats):
    value, best = None, float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - t0)
    return value, best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t", type=int, default=16384, help="partition horizon")
    ap.add_argument("--path-t", type=int, default=500000, help="sampler horizon")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    if not _backend.compiled_available():
        raise SystemExit("compiled extension not importable; nothing to compare")

    ab = Alphabet(("0", "1"))
    model = build_gibbs_model(
        FiniteRangePotential(ab, 2, 0.8 * np.array([1.0, 0.0, 0.0, 1.0]))
    )
    loss = LossSpec(ab, ab, 1, np.array([[0.0, 1.0], [1.0, 0.0]]))
    y = sample_markov(model.markov, args.t, seed=0, origin="observation")

    cases = [
        (f"partition t={args.t}", lambda: log_partition_curve(model, loss, y, [args.t])),
        (
            f"sampler t={args.path_t}",
            lambda: sample_markov(model.markov, args.path_t, seed=1).symbols,
        ),
    ]
    rows = []
    for label, fn in cases:
        _backend.use("compiled")
        v_c, t_c = best_of(fn, args.repeats)
        _backend.use("python")
        v_p, t_p = best_of(fn, args.repeats)
        rows.append((label, t_c, t_p, np.array_equal(np.asarray(v_c), np.asarray(v_p))))
    _backend.use("auto")

    print(f"{'case':<22} {'compiled':>10} {'python':>10} {'speedup':>8}  identical")
    for label, t_c, t_p, same in rows:
        print(f"{label:<22} {t_c:>9.4f}s {t_p:>9.4f}s {t_p / t_c:>7.1f}x  {same}")
    if not all(r[3] for r in rows):
        raise SystemExit("backend outputs differ")


if __name__ == "__main__":
    main()
