"""Compare the compiled kernels against the pure-numpy fallback.

Times the four hot kernels on gate stacks of the sizes the optimizer
actually sees (one full circuit at n = 3, 4, 5) plus an end-to-end
gradient evaluation.  Run from the repo root:

    python3 benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time
import timeit

import numpy as np

from unitfold import _kernels_py
from unitfold.circuit import ParameterVector, preset_topology
from unitfold.objective import ObjectiveKind, ObjectiveSpec, gradient

try:
    from unitfold import _speedups
except ImportError:
    _speedups = None


def random_stack(k: int, dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    stack = rng.normal(size=(k, dim, dim)) + 1j * rng.normal(size=(k, dim, dim))
    q = np.linalg.qr(stack)[0]
    return np.ascontiguousarray(q)


def best_of(fn, repeats: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeats))


def bench_kernels(repeats: int) -> None:
    backends = [("python", _kernels_py)]
    if _speedups is not None:
        backends.append(("compiled", _speedups))

    cases = [("n=3 unit stack", 6, 8),
             ("n=3 full stack", 48, 8),
             ("n=4 full stack", 192, 16),
             ("n=5 full stack", 384, 32)]
    print(f"{'case':16s} {'kernel':14s} " +
          " ".join(f"{name:>12s}" for name, _ in backends) +
          ("  speedup" if len(backends) == 2 else ""))
    for label, k, dim in cases:
        stack = random_stack(k, dim, seed=k * dim)
        for kernel in ("chain_product", "prefix_suffix"):
            times = []
            for _, impl in backends:
                fn = getattr(impl, kernel)
                times.append(best_of(lambda: fn(stack), repeats * 3))
            row = f"{label:16s} {kernel:14s} " + \
                  " ".join(f"{t * 1e6:10.1f}us" for t in times)
            if len(times) == 2:
                row += f"  {times[0] / times[1]:6.2f}x"
            print(row)


def bench_gradient(repeats: int) -> None:
    print()
    print("end-to-end finite-difference gradient (distance objective):")
    import unitfold.kernels as kernels

    saved = (kernels.chain_product, kernels.prefix_suffix,
             kernels.trace_product, kernels.sandwich, kernels.BACKEND)
    backends = [("python", _kernels_py)]
    if _speedups is not None:
        backends.append(("compiled", _speedups))
    try:
        for name in ("chain3", "ring4"):
            topo = preset_topology(name)
            rng = np.random.default_rng(1)
            target = np.eye(topo.dim, dtype=complex)
            spec = ObjectiveSpec(ObjectiveKind.TARGET_DISTANCE, topo, target)
            params = ParameterVector.full(
                rng.uniform(-np.pi, np.pi, topo.full_param_count))
            times = []
            for _, impl in backends:
                kernels.chain_product = impl.chain_product
                kernels.prefix_suffix = impl.prefix_suffix
                kernels.trace_product = impl.trace_product
                kernels.sandwich = impl.sandwich
                t0 = time.perf_counter()
                for _ in range(repeats):
                    gradient(spec, params)
                times.append((time.perf_counter() - t0) / repeats)
            row = f"{name:16s} " + " ".join(
                f"{label} {t * 1e3:8.2f}ms" for (label, _), t in zip(backends, times))
            if len(times) == 2:
                row += f"  speedup {times[0] / times[1]:.2f}x"
            print(row)
    finally:
        (kernels.chain_product, kernels.prefix_suffix,
         kernels.trace_product, kernels.sandwich, kernels.BACKEND) = saved


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    if _speedups is None:
        print("compiled extension not built; timing the python fallback only")
    bench_kernels(args.repeats)
    bench_gradient(args.repeats)


if __name__ == "__main__":
    main()
