"""Benchmark the compiled hot-path kernels against the pure-numpy fallback.

Run:  python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from qcorr import backend
from qcorr import _kernels_py as pure
from qcorr.channels import projective_basis_povm
from qcorr.optimize import OptimizerConfig, haar_unitary, random_density

try:
    from qcorr import _ckern
except ImportError:
    _ckern = None


def _time(fn, *args, repeat=2000):
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def bench_kernels():
    rng = np.random.default_rng(0)
    print(f"active backend: {backend.BACKEND}")
    if _ckern is None:
        print("compiled kernels unavailable; benchmarking fallback only")
    header = f"{'kernel':<18}{'dims':<10}{'numpy':>12}{'cython':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for d_a, d_b in [(2, 2), (2, 3), (3, 3), (4, 4)]:
        rho = random_density((d_a, d_b), d_a * d_b, rng).matrix
        ma = projective_basis_povm(haar_unitary(d_a, rng)).as_array()
        mb = projective_basis_povm(haar_unitary(d_b, rng)).as_array()
        cases = [
            ("cc_joint_probs", (rho, ma, mb)),
            ("cq_blocks", (rho, ma)),
        ]
        for name, args in cases:
            t_py = _time(getattr(pure, name), *args)
            if _ckern is not None:
                t_cy = _time(getattr(_ckern, name), *args)
                print(f"{name:<18}{f'{d_a}x{d_b}':<10}"
                      f"{t_py * 1e6:>10.2f}us{t_cy * 1e6:>10.2f}us"
                      f"{t_py / t_cy:>9.2f}x")
            else:
                print(f"{name:<18}{f'{d_a}x{d_b}':<10}{t_py * 1e6:>10.2f}us")
    p = rng.random(64)
    p /= p.sum()
    t_py = _time(pure.shannon_bits, p)
    if _ckern is not None:
        t_cy = _time(_ckern.shannon_bits, p)
        print(f"{'shannon_bits':<18}{'64':<10}{t_py * 1e6:>10.2f}us"
              f"{t_cy * 1e6:>10.2f}us{t_py / t_cy:>9.2f}x")
    else:
        print(f"{'shannon_bits':<18}{'64':<10}{t_py * 1e6:>10.2f}us")


def bench_end_to_end():
    """Full measurement optimization with each backend (subprocess-free:
    compares the active backend to direct fallback timings above)."""
    from qcorr.correlations import optimize_icc
    from qcorr.qstate import bell_phi_plus

    cfg = OptimizerConfig(seed=0, restarts=4, max_evals=400)
    t0 = time.perf_counter()
    opt = optimize_icc(bell_phi_plus(), cfg)
    dt = time.perf_counter() - t0
    print(f"\noptimize_icc on the two-qubit maximally entangled state "
          f"({backend.BACKEND} backend): value={opt.value:.6f}, {dt:.2f}s")
    print("set QCORR_PURE_PYTHON=1 and rerun to time the fallback end to end")


if __name__ == "__main__":
    bench_kernels()
    bench_end_to_end()
