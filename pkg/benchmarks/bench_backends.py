#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Times the full stepping loop (transforms + pointwise kernels) for a
linear and a cubic problem in both state precisions, e.g.:

    python benchmarks/bench_backends.py --n 128 --steps 20000
"""

import argparse
import math
import time

from splitwave import (
    NonlinearitySpec,
    PotentialSpec,
    SchemeSpec,
    get_kernels,
    linear_problem,
    make_grid,
    nlse_problem,
)
from splitwave.integrators import evolve
from splitwave.registry import initial_fn


def build_problems(n):
    grid = make_grid([(0.0, 2.0 * math.pi, n)])
    psi0 = initial_fn("inv-sin2")
    lin = linear_problem(grid, PotentialSpec.closed_form("sinx"), 1.0, psi0)
    nl = nlse_problem(grid, NonlinearitySpec(sign=+1), 0.5, psi0)
    return {"linear": lin, "nlse": nl}


def time_run(problem, steps, kernels, precision):
    t0 = time.perf_counter()
    evolve(
        problem,
        SchemeSpec.strang(),
        1e-3,
        steps,
        precision=precision,
        kernels=kernels,
        check_finite=True,
    )
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--steps", type=int, default=20000)
    args = ap.parse_args()

    backends = {"python": get_kernels("python")}
    try:
        backends["cython"] = get_kernels("cython")
    except ImportError:
        print("compiled kernels not built; timing the fallback only")

    problems = build_problems(args.n)
    print(f"N = {args.n}, steps = {args.steps}")
    print(f"{'case':<8} {'precision':<9} " + " ".join(f"{b:>12}" for b in backends) + "  speedup")
    for case, problem in problems.items():
        for precision in ("extended", "double"):
            times = {}
            for name, kern in backends.items():
                times[name] = time_run(problem, args.steps, kern, precision)
            cols = " ".join(
                f"{args.steps / times[b]:>9.0f}/s" for b in backends
            )
            speedup = (
                f"{times['python'] / times['cython']:.2f}x"
                if "cython" in times
                else "-"
            )
            print(f"{case:<8} {precision:<9} {cols}  {speedup}")


if __name__ == "__main__":
    main()
