"""Time the compiled kernels against the NumPy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--omega 4000] [--steps 20000]

Both implementations get identical inputs; the script also reports the
largest relative difference between their outputs.
"""
from __future__ import annotations

import argparse
import sys
import timeit

import numpy as np

from photomech import _kernels, baseline_fig2
from photomech.dynamics import model_for
from photomech.oracle import discretize


def _inputs(n_omega: int, n_traj: int, n_steps: int, seed: int):
    _, m = model_for(baseline_fig2().with_normalized(gamma2_ratio=1.0, tau=3.0))
    A = np.ascontiguousarray(m.drift())
    C = np.ascontiguousarray(m.noise_factor())
    omega = np.linspace(0.0, 5.0, n_omega)
    Phi, L = discretize(m, 0.01)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_traj, n_steps, 5))
    x0 = np.zeros((n_traj, 5))
    return (omega, A, C), (Phi, L, x0, z, 100)


def _best(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--omega", type=int, default=4000, help="frequency points for the spectral kernel")
    ap.add_argument("--trajectories", type=int, default=8)
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    if _kernels.compiled is None:
        print("compiled extension not built; only the fallback is available", file=sys.stderr)
        return 1
    spec_args, prop_args = _inputs(args.omega, args.trajectories, args.steps, args.seed)
    impls = {"compiled": _kernels.compiled, "python": _kernels.fallback}

    print(f"{'kernel':<18}{'backend':<10}{'best [ms]':>12}{'speedup':>10}")
    for kernel, kargs in (("spectral_density", spec_args), ("propagate", prop_args)):
        times = {k: _best(lambda m=m: getattr(m, kernel)(*kargs), args.repeat) for k, m in impls.items()}
        for k, t in times.items():
            print(f"{kernel:<18}{k:<10}{1e3 * t:>12.2f}{times['python'] / t:>10.1f}")
        a = impls["compiled"].__dict__[kernel](*kargs)
        b = impls["python"].__dict__[kernel](*kargs)
        a0, b0 = (a[1], b[1]) if kernel == "propagate" else (a, b)
        rel = np.max(np.abs(a0 - b0)) / np.max(np.abs(b0))
        print(f"{'':<18}max relative difference {rel:.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
