"""Long-running 5-qubit benchmark: the two device coupling maps.

Compares compiling-time efficiency of the qx2 and qx4 presets (256 CNOTs
each, 1536 adjustable angles) on a shared set of Haar-random targets.
This is hours of CPU time and is intentionally not part of the test
suite; the expectations are qualitative:

  * a preset whose layout has full Jacobian rank (qx4) passes the
    universality check and compiles every target;
  * a rank-deficient layout stalls above the distance threshold, showing
    up as a failed universality check or non-compiling rows;
  * between two compiling layouts, median iterations per target differ
    by a roughly constant factor — the coupling map changes the
    efficiency, not the possibility.

Run from the repo root:

    python3 benchmarks/bench_qx.py [--targets 5] [--seed 0]

Append --quick for a smoke-test-sized run (one target, loose tolerance).
"""

import argparse

from unitfold.circuit import preset_topology
from unitfold.compiler import DEFAULT_CONFIG, bench_efficiency


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--targets", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tol", type=float, default=1e-4)
    parser.add_argument("--quick", action="store_true",
                        help="one target, tolerance 1e-2 (smoke test)")
    args = parser.parse_args()
    n_targets = 1 if args.quick else args.targets
    tol = 1e-2 if args.quick else args.tol

    topologies = [preset_topology("qx2"), preset_topology("qx4")]
    rows = bench_efficiency(topologies, n_targets=n_targets, final_tol=tol,
                            config=DEFAULT_CONFIG.with_(seed=args.seed),
                            universality_targets=3)
    print(f"{'preset':8s} {'compiling':10s} {'median iters':>12s} "
          f"{'median s':>10s} {'compiled':>9s}")
    for row in rows:
        iters = "-" if row.median_iterations is None else f"{row.median_iterations:.0f}"
        secs = "-" if row.median_seconds is None else f"{row.median_seconds:.1f}"
        print(f"{row.name:8s} {str(row.compiling):10s} {iters:>12s} "
              f"{secs:>10s} {row.targets_compiled:>9d}")
    compiling = [r for r in rows if r.compiling]
    if len(compiling) == 2:
        a, b = compiling
        ratio = a.median_iterations / b.median_iterations
        print(f"\nefficiency ratio {a.name}/{b.name}: {ratio:.2f} "
              "(iterations to reach the tolerance)")


if __name__ == "__main__":
    main()
