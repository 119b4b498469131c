"""Benchmark the raking kernels: compiled extension vs numpy fallback.

The raking loop is the hot spot of the solver: every Fisher iteration
rakes one table per subject per observed time-pair.  This script times
both kernels on identical batched workloads and, when the package data
is available, the end-to-end arthritis fit under each backend.

Run:  python benchmarks/bench_ipf.py
"""
import time

import numpy as np

from lorgee import _raking_py

try:
    from lorgee import _raking
    KERNELS = [_raking_py, _raking]
except ImportError:
    KERNELS = [_raking_py]
    print("note: compiled kernel not built; benchmarking the fallback only")


def _workload(rng, J, batch):
    seed = rng.uniform(0.2, 3.0, (J, J))
    rows = rng.uniform(0.2, 1.0, (batch, J))
    rows /= rows.sum(axis=1, keepdims=True)
    cols = rng.uniform(0.2, 1.0, (batch, J))
    cols /= cols.sum(axis=1, keepdims=True)
    return seed, rows, cols


def _best_of(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels():
    rng = np.random.default_rng(0)
    print(f"{'J':>3} {'batch':>7} " +
          " ".join(f"{k.NAME:>12}" for k in KERNELS) +
          ("  speedup" if len(KERNELS) == 2 else ""))
    for J in (3, 5, 8):
        for batch in (100, 1000, 10000):
            seed, rows, cols = _workload(rng, J, batch)
            times = []
            for kernel in KERNELS:
                times.append(_best_of(
                    lambda k=kernel: k.rake_batch(seed, rows, cols,
                                                  1e-6, 200)))
            line = f"{J:>3} {batch:>7} " + \
                " ".join(f"{t * 1e3:>10.2f}ms" for t in times)
            if len(times) == 2:
                line += f"  {times[0] / times[1]:>6.1f}x"
            print(line)
    if len(KERNELS) == 2:
        a, _, _ = KERNELS[0].rake_batch(seed, rows, cols, 1e-6, 200)
        b, _, _ = KERNELS[1].rake_batch(seed, rows, cols, 1e-6, 200)
        print(f"max |python - compiled| on last workload: "
              f"{np.max(np.abs(a - b)):.2e}")


def bench_arthritis_fit():
    from lorgee import (AssociationStructure, MarginalModelSpec, load_dataset,
                        solve_gee)
    from lorgee.data import _read_table
    from lorgee.datasets import arthritis_path
    from lorgee.design import expand_covariates, parse_covariate_specs
    from lorgee.links import CUMULATIVE_LOGIT
    import lorgee.ipf as ipf_mod

    _, cols = _read_table(arthritis_path())
    names, expanded = expand_covariates(
        cols, parse_covariate_specs("factor:time,factor:trt,factor:baseline"))
    data = load_dataset({**cols, **expanded}, "y", "id", "time", names)
    spec = MarginalModelSpec(CUMULATIVE_LOGIT, data.n_categories,
                             data.n_covariates)
    st = AssociationStructure(kind="uniform")
    print()
    for kernel in KERNELS:
        ipf_mod._kernel = kernel
        t = _best_of(lambda: solve_gee(spec, data, structure=st), repeats=3)
        print(f"arthritis uniform fit, {kernel.NAME:>8} kernel: "
              f"{t * 1e3:7.1f}ms")
    ipf_mod._kernel = KERNELS[-1]


if __name__ == "__main__":
    bench_kernels()
    bench_arthritis_fit()
