#!/usr/bin/env python3
"""Benchmark the compiled stepping kernel against the numpy fallback.

Times the raw kernels on a bank-stepping workload shaped like the
M=300 benchmark configuration, then times the full Monte Carlo risk
pipeline under each backend, and checks the backends agree numerically.

Run from the repository root:

    python benchmarks/bench_kernels.py
"""

import argparse
import time

import numpy as np


def time_call(fn, *args, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_raw(batches, steps, banks):
    from mfhawkes import _kernels, _kernels_py

    rng = np.random.default_rng(0)
    x0 = rng.normal(size=banks)
    a = np.full(banks, 0.5)
    drive = rng.normal(scale=0.05, size=(batches, steps, banks))

    t_c = time_call(_kernels.step_network_batch, x0, a, 0.01, drive)
    t_p = time_call(_kernels_py.step_network_batch, x0, a, 0.01, drive)
    out_c = _kernels.step_network_batch(x0, a, 0.01, drive)
    out_p = _kernels_py.step_network_batch(x0, a, 0.01, drive)
    gap = float(np.abs(out_c - out_p).max())

    updates = batches * steps * banks
    print(f"raw kernel   ({batches}x{steps}x{banks} = {updates:.2e} updates)")
    print(f"  compiled : {t_c * 1e3:8.1f} ms   {updates / t_c / 1e6:8.0f} M upd/s")
    print(f"  python   : {t_p * 1e3:8.1f} ms   {updates / t_p / 1e6:8.0f} M upd/s")
    print(f"  speedup  : {t_p / t_c:8.1f}x")
    print(f"  max |difference|: {gap:.3e}")
    if gap > 1e-10:
        raise SystemExit("backends disagree beyond tolerance")


def bench_pipeline(n_runs):
    import os
    import subprocess
    import sys

    code = (
        "import time, warnings; warnings.simplefilter('ignore');"
        "from mfhawkes.limits import LimitParams;"
        "from mfhawkes.risk import mean_field_network_spec, mc_risk_report;"
        "import mfhawkes;"
        "p = LimitParams(mu=0.01, alpha=1.0, beta=1.2, a=0.5, sigma=0.5,"
        " c=-0.2, x=0.5);"
        "spec = mean_field_network_spec(p, M=300, T=1.0, steps=100);"
        "t0 = time.perf_counter();"
        f"mc_risk_report(spec, {n_runs}, 101, workers=1);"
        "dt = time.perf_counter() - t0;"
        "print(f'{mfhawkes.USING_COMPILED} {dt:.3f}')"
    )
    results = {}
    for backend in ("compiled", "python"):
        env = dict(os.environ, MFHAWKES_BACKEND=backend)
        out = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True, check=True)
        used_compiled, dt = out.stdout.split()
        results[backend] = float(dt)
        print(f"pipeline ({n_runs} runs, M=300): {backend:8s} "
              f"{float(dt):6.2f} s (compiled={used_compiled})")
    print(f"  pipeline speedup: {results['python'] / results['compiled']:.2f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--batches", type=int, default=64)
    parser.add_argument("--steps", type=int, default=100)
    parser.add_argument("--banks", type=int, default=300)
    parser.add_argument("--runs", type=int, default=1000)
    args = parser.parse_args()
    bench_raw(args.batches, args.steps, args.banks)
    print()
    bench_pipeline(args.runs)


if __name__ == "__main__":
    main()
