"""Benchmark the compiled kernels against the NumPy fallback.

Runs the two hot operations (nonlocal stencil application and the pair sum
behind the fractional seminorm) plus a full Euler-Maruyama step at several
grid sizes, checks both backends agree, and prints a timing table.

    python benchmarks/bench_kernels.py [--repeats 50]
"""

import argparse
import time

import numpy as np

from fracshock import _kernels_py

try:
    from fracshock import _kernels as _compiled
except ImportError:
    _compiled = None

from fracshock.fractional import build_kernel
from fracshock.grid import Grid
from fracshock.model import bump_profile, burgers_flux, ramp_diffusion
from fracshock.solver import Problem, SolverConfig, Stepper
from fracshock.stochastic import geometric_noise


def time_call(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(n, repeats):
    grid = Grid.from_window(n, -8, 8, "periodic")
    kernel = build_kernel(grid, 0.5, 1.0, 0.5)
    rng = np.random.default_rng(0)
    u = rng.normal(size=n)
    v = rng.normal(size=n)
    w = kernel.weights_full
    out = np.empty_like(u)
    rows = []
    impls = [("python", _kernels_py)]
    if _compiled is not None:
        impls.append(("compiled", _compiled))
    results = {}
    for name, impl in impls:
        t_apply = time_call(lambda: impl.nonlocal_apply(u, w, 0.0, True, out),
                            repeats)
        results[name, "apply"] = (t_apply, out.copy())
        t_pair = time_call(lambda: impl.pair_sum(u, v, w, 0.0, True), repeats)
        results[name, "pair"] = (t_pair, impl.pair_sum(u, v, w, 0.0, True))
        rows.append((name, t_apply, t_pair))
    agree = ""
    if _compiled is not None:
        da = np.max(np.abs(results["python", "apply"][1]
                           - results["compiled", "apply"][1]))
        dp = abs(results["python", "pair"][1] - results["compiled", "pair"][1])
        scale = max(1.0, abs(results["python", "pair"][1]))
        assert da <= 1e-10 and dp / scale <= 1e-12, (da, dp)
        agree = f"  (max disagreement: apply {da:.1e}, pair {dp:.1e})"
    print(f"n = {n}{agree}")
    base = dict((r[0], r) for r in rows)
    for name, t_apply, t_pair in rows:
        speed = ""
        if name == "compiled":
            speed = (f"  [{base['python'][1] / t_apply:5.1f}x /"
                     f" {base['python'][2] / t_pair:5.1f}x]")
        print(f"  {name:9s} nonlocal_apply {1e6 * t_apply:9.1f} us"
              f"   pair_sum {1e6 * t_pair:9.1f} us{speed}")


def bench_step(n, repeats):
    grid = Grid.from_window(n, -8, 8, "periodic")
    u0 = bump_profile(grid.centers, 1.0, 0.0, 2.0)
    prob = Problem(grid, burgers_flux(2.0), ramp_diffusion(0.25, 1.0),
                   geometric_noise(0.25, 16), u0, 0.5)
    stepper = Stepper(prob, SolverConfig(epsilon=2**-4, t_end=0.5))
    db = np.random.default_rng(1).normal(0, np.sqrt(stepper.dt), 16)
    t = time_call(lambda: stepper.step(u0, db), repeats)
    print(f"  full EM step ({'compiled' if _compiled else 'python'} backend)"
          f" {1e6 * t:9.1f} us")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=50)
    args = ap.parse_args()
    if _compiled is None:
        print("compiled extension not available; timing the fallback only")
    for n in (256, 512, 1024):
        bench_kernels(n, args.repeats)
    bench_step(512, args.repeats)


if __name__ == "__main__":
    main()
