"""Compare the jitted kernels against the pure-numpy fallback.

Times the two hot paths on representative workloads: the slope fixed point
(thousands of small alternating-minimization iterations) and the exhaustive
encoder scan. Run from the repo root:

    python3 benchmarks/bench_backends.py

The selected backend follows IRDF_NUMBA; both implementations are timed here
regardless of which one the package picked.
"""

import time

import numpy as np

from irdf import BscModel, DistortionMatrix, FTransform, build_amended, sweep_curve
from irdf import kernels
from irdf.kernels import (
    _ba_fixed_slope_loop,
    _ba_fixed_slope_numpy,
    _best_code_fold_loop,
    _best_code_fold_numpy,
)


def time_fn(fn, *args, repeat=5):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_ba():
    rng = np.random.default_rng(1)
    e = rng.random((4, 4))
    pz = rng.dirichlet(np.ones(4))
    slopes = -np.geomspace(0.01, 100.0, 200)

    impls = {"numpy": _ba_fixed_slope_numpy}
    if kernels.BACKEND == "numba":
        jitted = kernels.ba_fixed_slope_loop
        jitted(e, pz, -1.0, 10, 1e-12, 1e-12, 1e-300)  # compile outside the timer
        impls["numba"] = jitted
    else:
        impls["python-loop"] = _ba_fixed_slope_loop

    print("slope fixed point, 200 slopes on a random 4x4 problem (tol 1e-12):")
    for name, fn in impls.items():
        def sweep(fn=fn):
            acc = 0.0
            for s in slopes:
                acc += fn(e, pz, float(s), 20000, 1e-12, 1e-12, 1e-300)[3]
            return acc
        elapsed, total = time_fn(sweep, repeat=3)
        print(f"  {name:12s} {elapsed * 1e3:9.2f} ms   (sum of rates {total:.6f})")


def bench_code_scan():
    m = BscModel(0.15)
    src, d = m.source(), m.distortion()
    f = FTransform.identity()
    am = build_amended(src, d, f)
    n = 3
    pj = np.kron(np.kron(src.joint, src.joint), src.joint)
    fd = f.apply(d.values)
    acc = np.array([[0.0]])
    for _ in range(n):
        acc = (acc[:, None, :, None] + fd[None, :, None, :]).reshape(
            acc.shape[0] * 2, acc.shape[1] * 2
        )
    cost = pj.T @ f.invert(acc / n)
    total = 2 ** cost.shape[0]

    impls = {"numpy": _best_code_fold_numpy}
    if kernels.BACKEND == "numba":
        jitted = kernels.best_code_fold_loop
        jitted(cost, 2, 4)  # compile outside the timer
        impls["numba"] = jitted
    else:
        impls["python-loop"] = _best_code_fold_loop

    print(f"encoder scan, {total} encoders at (n={n}, M=2):")
    for name, fn in impls.items():
        elapsed, out = time_fn(fn, cost, 2, total, repeat=3)
        print(f"  {name:12s} {elapsed * 1e3:9.2f} ms   (best value {out[0]:.6f})")


def bench_end_to_end():
    f = FTransform.exponential(9.2)
    m = BscModel(0.01, f)
    src, d = m.source(), m.distortion()
    sweep_curve(src, d, f, 5)  # warm
    t0 = time.perf_counter()
    curve = sweep_curve(src, d, f, 40)
    elapsed = time.perf_counter() - t0
    print(
        f"end-to-end 40-point sweep (exponential pooling), backend={kernels.BACKEND}: "
        f"{elapsed * 1e3:.1f} ms, all converged={curve.all_converged}"
    )


if __name__ == "__main__":
    print(f"selected backend: {kernels.BACKEND}")
    bench_ba()
    bench_code_scan()
    bench_end_to_end()
