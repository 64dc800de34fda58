"""Command-line front end.

Verbs: bounds, presets, find-unity, check-universal, compile, bench.
Every output file gets a sibling `<name>.manifest.json` recording the
resolved arguments, seeds, input hashes and tool version; re-running the
manifest's argv reproduces the output byte for byte.

Exit codes: 0 success, 2 usage, 3 parse/validation failure,
4 convergence or certification failure.
"""

import argparse
import hashlib
import json
import os
import sys
import tempfile
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .circuit import (TopologyError, gate_budget, load_topology, preset_names,
                      preset_topology)
from .compiler import (DEFAULT_CONFIG, LegFailureError, UnityMismatchError,
                       UnityNotFoundError, bench_efficiency, compile_target,
                       find_unity, load_unity, test_universality)
from .linalg import LinalgError, haar_random, is_unitary
from .optimize import OptimizerConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_CONVERGENCE = 4

OUT_DIR_ENV = "UNITFOLD_OUT_DIR"


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _out_path(name: str | None, default: str) -> str:
    path = name or default
    if not os.path.dirname(path):
        base = os.environ.get(OUT_DIR_ENV, ".")
        path = os.path.join(base, path)
    return path


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _file_hash(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def _write_result(path: str, payload: dict, argv: list, input_files: list) -> None:
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    manifest = {
        "command": argv[0] if argv else "",
        "argv": argv,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "inputs": {os.path.basename(p): _file_hash(p) for p in input_files},
        "output": os.path.basename(path),
        "output_sha256": hashlib.sha256(
            (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode()).hexdigest(),
    }
    _atomic_write(path + ".manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def replay_manifest(path: str) -> int:
    """Re-run the command recorded in a manifest; the output file is
    regenerated at the same relative location."""
    with open(path) as fh:
        manifest = json.load(fh)
    return main(manifest["argv"])


def _resolve_topology(args):
    if getattr(args, "preset", None):
        return preset_topology(args.preset), []
    if getattr(args, "topology", None):
        return load_topology(args.topology), [args.topology]
    raise CliError("one of --preset or --topology is required", EXIT_USAGE)


def _config_from(args, **overrides) -> OptimizerConfig:
    cfg = DEFAULT_CONFIG.with_(seed=getattr(args, "seed", 0))
    if getattr(args, "max_iterations", None):
        cfg = cfg.with_(max_iterations=args.max_iterations)
    return cfg.with_(**overrides) if overrides else cfg


def write_matrix_file(path: str, matrix: np.ndarray) -> None:
    """Plain-text layout: first line the dimension, then dim^2 lines of
    're im' in row-major order at full precision."""
    dim = matrix.shape[0]
    lines = [str(dim)]
    for row in matrix:
        for entry in row:
            lines.append(f"{float(entry.real)!r} {float(entry.imag)!r}")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_matrix_file(path: str) -> np.ndarray:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    try:
        dim = int(lines[0])
        values = [complex(float(a), float(b))
                  for a, b in (ln.split() for ln in lines[1:])]
    except (ValueError, IndexError) as exc:
        raise CliError(f"malformed matrix file {path}: {exc}", EXIT_VALIDATION) from exc
    if len(values) != dim * dim:
        raise CliError(
            f"matrix file {path}: expected {dim*dim} entries, found {len(values)}",
            EXIT_VALIDATION)
    return np.array(values, dtype=complex).reshape(dim, dim)


def qft_matrix(n: int) -> np.ndarray:
    dim = 2**n
    j = np.arange(dim)
    return np.exp(2j * np.pi * np.outer(j, j) / dim) / np.sqrt(dim)


def _resolve_target(args, dim: int):
    """Target sources: --haar (seeded), a named builtin (id, qftN), or a
    matrix file path."""
    files = []
    if getattr(args, "haar", False):
        target = haar_random(dim, args.seed)
        label = f"haar(seed={args.seed})"
    else:
        name = args.target
        if name is None:
            raise CliError("one of --target or --haar is required", EXIT_USAGE)
        if name == "id":
            target = np.eye(dim, dtype=complex)
            label = "id"
        elif name.startswith("qft") and name[3:].isdigit():
            target = qft_matrix(int(name[3:]))
            label = name
        else:
            target = read_matrix_file(name)
            label = os.path.basename(name)
            files.append(name)
    if target.shape[0] != dim:
        raise CliError(
            f"target dimension {target.shape[0]} does not match circuit dimension {dim}",
            EXIT_VALIDATION)
    if not is_unitary(target, 1e-8):
        raise CliError(f"target {label} is not unitary within 1e-8", EXIT_VALIDATION)
    return target, label, files


def cmd_bounds(args, argv) -> int:
    if not (2 <= args.n <= 7):
        raise CliError("bounds supports 2 <= n <= 7", EXIT_USAGE)
    b = gate_budget(args.n)
    print(f"n = {b.n}")
    print(f"minimum CNOTs per unit      : {b.min_cnots_per_unit}")
    print(f"theoretical minimum CNOTs   : {b.min_cnots_total}")
    print(f"preset CNOTs per unit       : {b.chosen_cnots_per_unit}")
    print(f"preset total CNOTs          : {b.total_cnots}")
    print(f"minimum rotations per unit  : {b.min_rots_per_unit}")
    print(f"preset rotations per unit   : {b.chosen_rots_per_unit}")
    print(f"preset total rotations      : {b.total_rots}")
    print(f"adjustable angles           : {3 * b.total_rots}")
    return EXIT_OK


def cmd_presets(args, argv) -> int:
    for name in preset_names():
        t = preset_topology(name)
        print(f"{name:12s} n={t.n}  {t.cnots_per_unit} CNOTs + {t.rots_per_unit} rotations "
              f"per unit  ({t.n_units * t.cnots_per_unit} CNOTs total)")
        if args.verbose:
            print(t.text_listing())
    return EXIT_OK


def cmd_find_unity(args, argv) -> int:
    topology, files = _resolve_topology(args)
    config = _config_from(args)
    try:
        unity = find_unity(topology, config=config,
                           max_restarts=args.restarts, unity_tol=args.tol)
    except UnityNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    out = _out_path(args.out, f"unity-{topology.name or 'topology'}.json")
    _write_result(out, unity.to_dict(), argv, files)
    print(f"unity residual {unity.residual_cost:.3e} after {unity.restarts_used} "
          f"restart(s); wrote {out}")
    return EXIT_OK


def cmd_check_universal(args, argv) -> int:
    topology, files = _resolve_topology(args)
    unity = load_unity(args.unity)
    files = files + [args.unity]
    config = _config_from(args)
    report = test_universality(
        topology, unity, n_targets=args.targets,
        target_distance_scale=args.scale, gamma_min=args.gamma_min,
        distance_max=args.distance_max, config=config)
    out = _out_path(args.out, f"universality-{topology.name or 'topology'}.json")
    _write_result(out, report.to_dict(), argv, files)
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{verdict}: median gamma {report.median_gamma:.4f}, "
          f"median final distance {report.median_final_distance:.3e}; wrote {out}")
    return EXIT_OK if report.passed else EXIT_CONVERGENCE


def cmd_compile(args, argv) -> int:
    topology, files = _resolve_topology(args)
    unity = load_unity(args.unity)
    files = files + [args.unity]
    target, label, target_files = _resolve_target(args, topology.dim)
    files += target_files
    config = _config_from(args)
    try:
        result = compile_target(
            topology, unity, target, m=args.m, mid_tol=args.mid_tol,
            final_tol=args.final_tol, config=config,
            keep_intermediates=args.keep_intermediates)
    except LegFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    payload = result.to_dict()
    payload["target"] = label
    out = _out_path(args.out, f"compiled-{topology.name or 'topology'}.json")
    _write_result(out, payload, argv, files)
    if args.trace_csv:
        for leg in result.legs:
            leg_path = f"{args.trace_csv}.leg{leg.j:03d}.csv"
            _atomic_write(leg_path, leg.trace.to_csv())
    print(f"compiled {label}: final distance {result.final_distance:.3e} in "
          f"{result.total_iterations} iterations over {result.schedule.m} legs; wrote {out}")
    return EXIT_OK


def cmd_bench(args, argv) -> int:
    if not args.preset and not args.topology:
        raise CliError("bench needs at least one --preset or --topology", EXIT_USAGE)
    topologies = [preset_topology(p) for p in (args.preset or [])]
    files = list(args.topology or [])
    topologies += [load_topology(p) for p in files]
    config = _config_from(args)
    rows = bench_efficiency(topologies, n_targets=args.targets,
                            final_tol=args.tol, config=config, m=args.m)
    header = f"{'topology':14s} {'compiling':10s} {'median iters':>12s} {'median s':>10s}"
    print(header)
    csv_lines = ["topology,compiling,median_iterations,median_seconds,targets_compiled"]
    for row in rows:
        iters = f"{row.median_iterations:.0f}" if row.median_iterations is not None else "-"
        secs = f"{row.median_seconds:.2f}" if row.median_seconds is not None else "-"
        print(f"{row.name:14s} {str(row.compiling):10s} {iters:>12s} {secs:>10s}")
        csv_lines.append(
            f"{row.name},{row.compiling},"
            f"{'' if row.median_iterations is None else row.median_iterations},"
            f"{'' if row.median_seconds is None else row.median_seconds},"
            f"{row.targets_compiled}")
    if args.out:
        out = _out_path(args.out, "bench.csv")
        _atomic_write(out, "\n".join(csv_lines) + "\n")
        print(f"wrote {out}")
    return EXIT_OK


def _add_topology_args(p):
    p.add_argument("--preset", help="named preset topology")
    p.add_argument("--topology", help="topology JSON file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unitfold",
        description="Compile n-qubit unitaries onto fixed 2^n-fold repetitive circuits.")
    parser.add_argument("--version", action="version", version=f"unitfold {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="gate-count minima and preset totals")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("presets", help="list built-in topologies")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("find-unity", help="stage 1: engineer a non-trivial unity")
    _add_topology_args(p)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iterations", type=int, dest="max_iterations")
    p.add_argument("--out")
    p.set_defaults(func=cmd_find_unity)

    p = sub.add_parser("check-universal", help="certify compiling universality")
    _add_topology_args(p)
    p.add_argument("--unity", required=True)
    p.add_argument("--targets", type=int, default=10)
    p.add_argument("--scale", type=float, default=0.1)
    p.add_argument("--gamma-min", type=float, default=0.005, dest="gamma_min")
    p.add_argument("--distance-max", type=float, default=1e-6, dest="distance_max")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iterations", type=int, dest="max_iterations")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check_universal)

    p = sub.add_parser("compile", help="stage 2: compile a target unitary")
    _add_topology_args(p)
    p.add_argument("--unity", required=True)
    p.add_argument("--target", help="matrix file, 'id', or a builtin like qft3")
    p.add_argument("--haar", action="store_true", help="Haar-random target from --seed")
    p.add_argument("--m", type=int, help="schedule length (default from target distance)")
    p.add_argument("--mid-tol", type=float, default=0.01, dest="mid_tol")
    p.add_argument("--final-tol", type=float, default=1e-6, dest="final_tol")
    p.add_argument("--keep-intermediates", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iterations", type=int, dest="max_iterations")
    p.add_argument("--trace-csv", dest="trace_csv",
                   help="path stem for per-leg iteration,cost CSV traces")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("bench", help="compiling-time efficiency comparison")
    p.add_argument("--preset", action="append")
    p.add_argument("--topology", action="append")
    p.add_argument("--targets", type=int, default=5)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iterations", type=int, dest="max_iterations")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args, argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (TopologyError, UnityMismatchError, LinalgError, ValueError,
            OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
