"""Deterministic descent with Armijo backtracking, an optional
limited-memory quasi-Newton mode, convergence traces, and exponential
decay-rate fitting."""

import math
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .circuit import ParameterVector
from .objective import DEFAULT_GRADIENT_STEP, ObjectiveSpec, evaluate, gradient

MIN_LINE_SEARCH_STEP = 1e-12


class OptimizeError(RuntimeError):
    pass


class TraceFitError(ValueError):
    """Trace has too few usable records or is degenerate for a decay fit."""


class Mode(Enum):
    GRADIENT_DESCENT = "gd"
    QUASI_NEWTON = "qn"


class Termination(Enum):
    TOLERANCE = "tolerance"
    MAX_ITER = "max_iter"
    STALL = "stall"


@dataclass(frozen=True)
class OptimizerConfig:
    mode: Mode = Mode.GRADIENT_DESCENT
    initial_step: float = 0.1
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    max_iterations: int = 5000
    cost_tolerance: float = 1e-10
    gradient_step: float = DEFAULT_GRADIENT_STEP
    history_size: int = 10
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.armijo_c < 1):
            raise ValueError("armijo_c must lie in (0, 1)")
        if not (0 < self.backtrack_factor < 1):
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.cost_tolerance <= 0 or self.gradient_step <= 0 or self.initial_step <= 0:
            raise ValueError("steps and tolerances must be positive")

    def with_(self, **kwargs) -> "OptimizerConfig":
        return replace(self, **kwargs)


@dataclass
class ConvergenceTrace:
    records: list = field(default_factory=list)  # (iteration, cost)
    terminated_by: Termination = Termination.MAX_ITER

    @property
    def final_cost(self) -> float:
        return self.records[-1][1]

    @property
    def iterations(self) -> int:
        return self.records[-1][0]

    def to_csv(self) -> str:
        lines = ["iteration,cost"]
        lines.extend(f"{k},{c!r}" for k, c in self.records)
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv())


def _lbfgs_direction(g: np.ndarray, history: deque) -> np.ndarray:
    """Two-loop recursion over (s, y) pairs; falls back to -g when the
    history is empty or the result is not a descent direction."""
    if not history:
        return -g
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(history):
        a = rho * np.dot(s, q)
        alphas.append(a)
        q -= a * y
    s_last, y_last, _ = history[-1]
    q *= np.dot(s_last, y_last) / np.dot(y_last, y_last)
    for (s, y, rho), a in zip(history, reversed(alphas)):
        b = rho * np.dot(y, q)
        q += (a - b) * s
    d = -q
    if np.dot(g, d) >= 0:
        return -g
    return d


def minimize(objective: ObjectiveSpec, start: ParameterVector,
             config: OptimizerConfig = OptimizerConfig()):
    """Armijo-backtracked descent on the objective.

    Accepted costs are monotone non-increasing.  Returns the final
    parameters and the convergence trace; the trace always includes the
    starting cost as iteration 0.
    """
    theta = start.angles.copy()
    make = (ParameterVector.unit if start.scope.value == "unit" else ParameterVector.full)
    f = evaluate(objective, make(theta))
    trace = ConvergenceTrace(records=[(0, f)])
    if f <= config.cost_tolerance:
        trace.terminated_by = Termination.TOLERANCE
        return make(theta), trace

    history: deque = deque(maxlen=config.history_size)
    for it in range(1, config.max_iterations + 1):
        g = gradient(objective, make(theta), config.gradient_step)
        gnorm2 = float(np.dot(g, g))
        if gnorm2 == 0.0 or not math.isfinite(gnorm2):
            trace.terminated_by = Termination.STALL
            return make(theta), trace

        if config.mode is Mode.QUASI_NEWTON:
            d = _lbfgs_direction(g, history)
        else:
            d = -g
        slope = float(np.dot(g, d))

        t = config.initial_step
        accepted = None
        while t >= MIN_LINE_SEARCH_STEP:
            cand = theta + t * d
            f_new = evaluate(objective, make(cand))
            if f_new <= f + config.armijo_c * t * slope:
                accepted = (cand, f_new, t)
                break
            t *= config.backtrack_factor
        if accepted is None:
            trace.terminated_by = Termination.STALL
            return make(theta), trace

        cand, f_new, t = accepted
        if config.mode is Mode.QUASI_NEWTON:
            g_new = gradient(objective, make(cand), config.gradient_step)
            s = cand - theta
            y = g_new - g
            sy = float(np.dot(s, y))
            if sy > 1e-12:
                history.append((s, y, 1.0 / sy))
        theta, f = cand, f_new
        trace.records.append((it, f))
        if f <= config.cost_tolerance:
            trace.terminated_by = Termination.TOLERANCE
            return make(theta), trace

    trace.terminated_by = Termination.MAX_ITER
    return make(theta), trace


@dataclass(frozen=True)
class DecayFit:
    gamma: float
    r_squared: float
    window: tuple


def fit_decay_rate(trace: ConvergenceTrace, window_fraction: float = 0.8) -> DecayFit:
    """Least-squares fit of log(cost) against iteration over the trailing
    `window_fraction` of positive-cost records; gamma is the negated slope.

    Raises TraceFitError when fewer than 5 positive records exist or the
    window is degenerate (constant cost or a single iteration value).
    """
    positive = [(k, c) for k, c in trace.records if c > 0]
    if len(positive) < 5:
        raise TraceFitError(f"need >= 5 positive-cost records, have {len(positive)}")
    start = int(len(positive) * (1.0 - window_fraction))
    window = positive[start:]
    ks = np.array([k for k, _ in window], dtype=float)
    ys = np.log(np.array([c for _, c in window]))
    if len(window) < 2 or np.ptp(ks) == 0:
        raise TraceFitError("degenerate fit window: no iteration spread")
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    if ss_tot == 0.0:
        raise TraceFitError("degenerate fit window: constant cost")
    slope, intercept = np.polyfit(ks, ys, 1)
    residuals = ys - (slope * ks + intercept)
    r_squared = 1.0 - float(np.sum(residuals**2)) / ss_tot
    return DecayFit(gamma=-float(slope), r_squared=r_squared,
                    window=(int(ks[0]), int(ks[-1])))
