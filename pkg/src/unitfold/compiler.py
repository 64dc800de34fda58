"""The two-stage compilation pipeline.

Stage 1 (once per circuit): drive one circuit unit to a non-trivial N-th
root of identity and certify compiling universality by descending to a few
random targets near the identity and checking for exponential convergence.

Stage 2 (per target): extract the target's Hermitian generator, walk the
sqrt(j/M) schedule of intermediate unitaries, and run one bounded descent
per leg, each leg warm-started from the previous one.
"""

import hashlib
import json
import math
import statistics
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import __version__
from .circuit import CircuitTopology, ParameterVector, replicate_params, unit_unitary
from .linalg import (LinalgError, as_square, char_poly_coeffs, expm_hermitian,
                     is_hermitian, logm_unitary, random_hermitian)
from .objective import ObjectiveKind, ObjectiveSpec, distance, evaluate
from .optimize import (ConvergenceTrace, Mode, OptimizerConfig, Termination,
                       TraceFitError, fit_decay_rate, minimize)
from .seeding import child_seed

# The pipeline defaults to the quasi-Newton mode: plain gradient descent
# with a backtracking line search decays these objectives far too slowly
# (fitted rate ~3e-4/iteration on 3-qubit targets versus ~2e-2 for
# quasi-Newton), stalling certification well above its thresholds.  The
# unit trial step lets the curvature model set the scale (backtracking
# still guards the first iterations), and the longer history pays off on
# the larger ill-conditioned n >= 4 problems.
DEFAULT_CONFIG = OptimizerConfig(mode=Mode.QUASI_NEWTON, initial_step=1.0,
                                 history_size=25)

DEFAULT_UNITY_TOL = 1e-10
DEFAULT_MAX_RESTARTS = 10
DEFAULT_MID_TOL = 0.01
DEFAULT_NEIGHBORHOOD_DISTANCE = 0.1
DEFAULT_GAMMA_MIN = 0.005
DEFAULT_DISTANCE_MAX = 1e-6
DEFAULT_N_TARGETS = 10
BRANCH_CUT_MARGIN = 1e-3


class UnityNotFoundError(RuntimeError):
    def __init__(self, restarts: int, best_residual: float):
        self.restarts = restarts
        self.best_residual = best_residual
        super().__init__(
            f"no unity below tolerance after {restarts} restarts; "
            f"best residual {best_residual:.3e}")


class UnityMismatchError(ValueError):
    """A unity solution does not belong to the given topology."""


class LegFailureError(RuntimeError):
    def __init__(self, leg: int, best_distance: float, result):
        self.leg = leg
        self.best_distance = best_distance
        self.result = result
        super().__init__(
            f"leg {leg} did not reach its tolerance; best distance {best_distance:.3e}")


def topology_hash(topology: CircuitTopology) -> str:
    canonical = json.dumps(topology.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class UnitySolution:
    """Unit-level angles whose circuit unit is an N-th root of identity up
    to the global phase chi (the phase of the characteristic polynomial's
    constant term)."""

    unit_params: ParameterVector
    residual_cost: float
    chi: float
    restarts_used: int
    topology_name: str = ""
    topology_hash: str = ""
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": "unity_solution",
            "version": __version__,
            "topology_name": self.topology_name,
            "topology_hash": self.topology_hash,
            "angles": list(self.unit_params.angles),
            "residual_cost": self.residual_cost,
            "chi": self.chi,
            "restarts_used": self.restarts_used,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(data: dict) -> "UnitySolution":
        return UnitySolution(
            unit_params=ParameterVector.unit(data["angles"]),
            residual_cost=float(data["residual_cost"]),
            chi=float(data["chi"]),
            restarts_used=int(data["restarts_used"]),
            topology_name=data.get("topology_name", ""),
            topology_hash=data.get("topology_hash", ""),
            seed=int(data.get("seed", 0)),
        )


def check_unity_matches(topology: CircuitTopology, unity: UnitySolution) -> None:
    if unity.topology_hash and unity.topology_hash != topology_hash(topology):
        raise UnityMismatchError(
            f"unity was found for topology {unity.topology_name!r} "
            f"(hash {unity.topology_hash}), not for {topology.name!r} "
            f"(hash {topology_hash(topology)})")
    if len(unity.unit_params) != topology.unit_param_count:
        raise UnityMismatchError(
            f"unity has {len(unity.unit_params)} angles, topology needs "
            f"{topology.unit_param_count}")


def find_unity(topology: CircuitTopology,
               config: OptimizerConfig = DEFAULT_CONFIG,
               max_restarts: int = DEFAULT_MAX_RESTARTS,
               unity_tol: float = DEFAULT_UNITY_TOL) -> UnitySolution:
    """Stage 1: search restart-by-restart for unit angles whose circuit
    unit has the full set of equally spaced eigenphases.

    Restart r draws its initial angles uniformly from [-pi, pi) with a
    child seed of config.seed.  Internally the descent runs on the squared
    coefficient moduli, which is smooth at the solution where the literal
    sum of moduli is a cone; a second polish pass with a finer difference
    step closes the last two orders of magnitude.  The reported residual
    is always the literal sum of moduli.
    """
    spec_search = ObjectiveSpec(ObjectiveKind.UNITY_COST, topology, squared_unity=True)
    spec_report = ObjectiveSpec(ObjectiveKind.UNITY_COST, topology)
    # sum |l_j| <= sqrt((N-1) sum |l_j|^2), so this bound implies unity_tol.
    squared_tol = unity_tol**2 / max(topology.dim - 1, 1)
    # The unity landscape rewards short, cautious steps: large trial steps
    # keep jumping between basins and blow up restart counts, so the
    # search pins its own step scale instead of inheriting the pipeline's.
    search_cfg = config.with_(cost_tolerance=squared_tol, initial_step=0.1,
                              history_size=10)
    polish_cfg = search_cfg.with_(gradient_step=config.gradient_step * 1e-2,
                                  initial_step=0.01, max_iterations=2000)
    best = math.inf
    for restart in range(max_restarts):
        rng = np.random.default_rng(child_seed(config.seed, "unity-restart", restart))
        start = ParameterVector.unit(
            rng.uniform(-np.pi, np.pi, topology.unit_param_count))
        params, trace = minimize(spec_search, start, search_cfg)
        if trace.final_cost <= 1e-12:
            params, trace = minimize(spec_search, params, polish_cfg)
        residual = evaluate(spec_report, params)
        if residual <= unity_tol:
            coeffs = char_poly_coeffs(unit_unitary(topology, params))
            return UnitySolution(
                unit_params=params,
                residual_cost=residual,
                chi=float(np.angle(coeffs.constant)),
                restarts_used=restart + 1,
                topology_name=topology.name,
                topology_hash=topology_hash(topology),
                seed=config.seed,
            )
        best = min(best, residual)
    raise UnityNotFoundError(max_restarts, best)


def near_identity_target(dim: int, seed: int,
                         target_distance: float = DEFAULT_NEIGHBORHOOD_DISTANCE) -> np.ndarray:
    """Seeded unitary exp(iH) with H scaled so that D(target, I) matches
    `target_distance`."""
    h = random_hermitian(dim, 1.0, seed)

    def gap(scale):
        return distance(expm_hermitian(h, scale), np.eye(dim)) - target_distance

    hi = 0.5
    while gap(hi) < 0:
        hi *= 2
        if hi > 64:
            raise RuntimeError("could not bracket the neighborhood distance")
    scale = brentq(gap, 0.0, hi, xtol=1e-12)
    return expm_hermitian(h, scale)


@dataclass(frozen=True)
class TargetOutcome:
    seed: int
    gamma: float
    r_squared: float
    final_distance: float
    iterations: int
    degenerate: bool


@dataclass(frozen=True)
class UniversalityReport:
    per_target: tuple
    median_gamma: float
    median_r_squared: float
    median_final_distance: float
    passed: bool
    gamma_min: float
    distance_max: float
    target_distance_scale: float
    n_targets: int
    seed: int
    topology_name: str = ""
    topology_hash: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": "universality_report",
            "version": __version__,
            "topology_name": self.topology_name,
            "topology_hash": self.topology_hash,
            "passed": self.passed,
            "median_gamma": self.median_gamma,
            "median_r_squared": self.median_r_squared,
            "median_final_distance": self.median_final_distance,
            "gamma_min": self.gamma_min,
            "distance_max": self.distance_max,
            "target_distance_scale": self.target_distance_scale,
            "n_targets": self.n_targets,
            "seed": self.seed,
            "per_target": [
                {
                    "seed": o.seed,
                    "gamma": o.gamma,
                    "r_squared": o.r_squared,
                    "final_distance": o.final_distance,
                    "iterations": o.iterations,
                    "degenerate": o.degenerate,
                }
                for o in self.per_target
            ],
        }


def test_universality(topology: CircuitTopology, unity: UnitySolution,
                      n_targets: int = DEFAULT_N_TARGETS,
                      target_distance_scale: float = DEFAULT_NEIGHBORHOOD_DISTANCE,
                      gamma_min: float = DEFAULT_GAMMA_MIN,
                      distance_max: float = DEFAULT_DISTANCE_MAX,
                      config: OptimizerConfig = DEFAULT_CONFIG) -> UniversalityReport:
    """Certify the architecture: descend from the unity to seeded targets
    near the identity and require exponentially decaying distance.

    A degenerate decay fit (flat or too-short trace) counts as a failing
    target with gamma 0.
    """
    check_unity_matches(topology, unity)
    start = replicate_params(unity.unit_params, topology.n)
    outcomes = []
    for i in range(n_targets):
        seed_i = child_seed(config.seed, "universality-target", i)
        target = near_identity_target(topology.dim, seed_i, target_distance_scale)
        spec = ObjectiveSpec(ObjectiveKind.TARGET_DISTANCE, topology, target=target)
        params, trace = minimize(spec, start, config.with_(cost_tolerance=distance_max))
        try:
            fit = fit_decay_rate(trace)
            outcomes.append(TargetOutcome(seed_i, fit.gamma, fit.r_squared,
                                          trace.final_cost, trace.iterations, False))
        except TraceFitError:
            outcomes.append(TargetOutcome(seed_i, 0.0, 0.0,
                                          trace.final_cost, trace.iterations, True))
    median_gamma = statistics.median(o.gamma for o in outcomes)
    median_r2 = statistics.median(o.r_squared for o in outcomes)
    median_final = statistics.median(o.final_distance for o in outcomes)
    return UniversalityReport(
        per_target=tuple(outcomes),
        median_gamma=median_gamma,
        median_r_squared=median_r2,
        median_final_distance=median_final,
        passed=(median_gamma >= gamma_min) and (median_final <= distance_max),
        gamma_min=gamma_min,
        distance_max=distance_max,
        target_distance_scale=target_distance_scale,
        n_targets=n_targets,
        seed=config.seed,
        topology_name=topology.name,
        topology_hash=topology_hash(topology),
    )


@dataclass(frozen=True)
class PathSchedule:
    """Exponents sqrt(j/M), j = 1..M, of the intermediate-target walk."""

    m: int
    exponents: np.ndarray

    @staticmethod
    def make(m: int) -> "PathSchedule":
        if m < 1:
            raise ValueError("schedule length M must be >= 1")
        return PathSchedule(m=m, exponents=np.sqrt(np.arange(1, m + 1) / m))


def suggested_m(target, dim: int | None = None) -> int:
    """Default schedule length: max(10, ceil(20 * D(target, I)))."""
    target = as_square(target)
    d = distance(target, np.eye(target.shape[0]))
    return max(10, math.ceil(20 * d))


def path_targets(h_target, schedule: PathSchedule) -> list:
    """Intermediate unitaries exp(i sqrt(j/M) H), j = 1..M; the last one
    is the original target."""
    h_target = as_square(h_target)
    if not is_hermitian(h_target):
        raise LinalgError("path_targets requires a Hermitian generator")
    return [expm_hermitian(h_target, s) for s in schedule.exponents]


@dataclass(frozen=True)
class LegRecord:
    j: int
    trace: ConvergenceTrace
    achieved_distance: float


@dataclass
class CompilationResult:
    full_params: ParameterVector
    final_distance: float
    legs: list
    schedule: PathSchedule
    intermediate_params: list | None = None
    near_branch_cut: bool = False
    topology_name: str = ""
    topology_hash: str = ""
    seed: int = 0
    mid_tol: float = DEFAULT_MID_TOL
    final_tol: float = DEFAULT_DISTANCE_MAX

    @property
    def total_iterations(self) -> int:
        return sum(leg.trace.iterations for leg in self.legs)

    def to_dict(self) -> dict:
        out = {
            "kind": "compilation_result",
            "version": __version__,
            "topology_name": self.topology_name,
            "topology_hash": self.topology_hash,
            "angles": list(self.full_params.angles),
            "final_distance": self.final_distance,
            "schedule_m": self.schedule.m,
            "mid_tol": self.mid_tol,
            "final_tol": self.final_tol,
            "near_branch_cut": self.near_branch_cut,
            "seed": self.seed,
            "total_iterations": self.total_iterations,
            "legs": [
                {
                    "j": leg.j,
                    "iterations": leg.trace.iterations,
                    "achieved_distance": leg.achieved_distance,
                    "terminated_by": leg.trace.terminated_by.value,
                }
                for leg in self.legs
            ],
        }
        if self.intermediate_params is not None:
            out["intermediate_angles"] = [list(p.angles) for p in self.intermediate_params]
        return out


def compile_target(topology: CircuitTopology, unity: UnitySolution, target,
                   m: int | None = None,
                   mid_tol: float = DEFAULT_MID_TOL,
                   final_tol: float = DEFAULT_DISTANCE_MAX,
                   config: OptimizerConfig = DEFAULT_CONFIG,
                   keep_intermediates: bool = False) -> CompilationResult:
    """Stage 2: walk the sqrt(j/M) schedule toward the target, one bounded
    descent per leg, each warm-started from the previous leg's angles.

    Legs j < M stop at mid_tol; the last leg stops at final_tol.  Raises
    LegFailureError (carrying the partial result) if a leg hits its
    iteration cap above tolerance.
    """
    check_unity_matches(topology, unity)
    target = as_square(target)
    generator = logm_unitary(target)
    phases = np.linalg.eigvalsh(generator)
    near_cut = bool(np.any(np.abs(np.abs(phases) - np.pi) < BRANCH_CUT_MARGIN))
    if m is None:
        m = suggested_m(target)
    schedule = PathSchedule.make(m)
    legs_targets = path_targets(generator, schedule)

    params = replicate_params(unity.unit_params, topology.n)
    legs = []
    intermediates = [] if keep_intermediates else None
    for j, leg_target in enumerate(legs_targets, start=1):
        tol = final_tol if j == m else mid_tol
        spec = ObjectiveSpec(ObjectiveKind.TARGET_DISTANCE, topology, target=leg_target)
        params, trace = minimize(spec, params, config.with_(cost_tolerance=tol))
        legs.append(LegRecord(j=j, trace=trace, achieved_distance=trace.final_cost))
        if intermediates is not None:
            intermediates.append(params)
        if trace.final_cost > tol:
            partial = CompilationResult(
                full_params=params, final_distance=trace.final_cost, legs=legs,
                schedule=schedule, intermediate_params=intermediates,
                near_branch_cut=near_cut, topology_name=topology.name,
                topology_hash=topology_hash(topology), seed=config.seed,
                mid_tol=mid_tol, final_tol=final_tol)
            raise LegFailureError(j, trace.final_cost, partial)

    return CompilationResult(
        full_params=params,
        final_distance=legs[-1].achieved_distance,
        legs=legs,
        schedule=schedule,
        intermediate_params=intermediates,
        near_branch_cut=near_cut,
        topology_name=topology.name,
        topology_hash=topology_hash(topology),
        seed=config.seed,
        mid_tol=mid_tol,
        final_tol=final_tol,
    )


@dataclass(frozen=True)
class BenchRow:
    name: str
    compiling: bool
    median_iterations: float | None
    median_seconds: float | None
    targets_compiled: int


def bench_efficiency(topologies: list, n_targets: int = 5,
                     final_tol: float = DEFAULT_DISTANCE_MAX,
                     config: OptimizerConfig = DEFAULT_CONFIG,
                     unities: dict | None = None,
                     universality_targets: int = 3,
                     m: int | None = None) -> list:
    """Compiling-time comparison over a shared seeded target set.

    Every topology compiles the same Haar targets (drawn per qubit count);
    a topology that fails the universality check, or whose unity search
    fails, is reported as non-compiling instead of benchmarked.
    """
    from .linalg import haar_random

    rows = []
    for topo in topologies:
        key = topo.name or topology_hash(topo)
        try:
            if unities and key in unities:
                unity = unities[key]
            else:
                unity = find_unity(topo, config=config)
            report = test_universality(topo, unity, n_targets=universality_targets,
                                       config=config)
        except UnityNotFoundError:
            rows.append(BenchRow(key, False, None, None, 0))
            continue
        if not report.passed:
            rows.append(BenchRow(key, False, None, None, 0))
            continue
        iters, seconds = [], []
        compiled = 0
        for i in range(n_targets):
            seed_i = child_seed(config.seed, "bench-target", topo.n, i)
            target = haar_random(topo.dim, seed_i)
            t0 = time.perf_counter()
            try:
                result = compile_target(topo, unity, target, m=m,
                                        final_tol=final_tol, config=config)
            except LegFailureError:
                continue
            seconds.append(time.perf_counter() - t0)
            iters.append(result.total_iterations)
            compiled += 1
        if compiled:
            rows.append(BenchRow(key, True, float(statistics.median(iters)),
                                 float(statistics.median(seconds)), compiled))
        else:
            rows.append(BenchRow(key, False, None, None, 0))
    return rows


def save_json(obj, path) -> None:
    """Serialize a result object (anything with to_dict) byte-stably."""
    with open(path, "w") as fh:
        json.dump(obj.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_unity(path) -> UnitySolution:
    with open(path) as fh:
        data = json.load(fh)
    if data.get("kind") != "unity_solution":
        raise ValueError(f"{path} is not a unity-solution file")
    return UnitySolution.from_dict(data)
