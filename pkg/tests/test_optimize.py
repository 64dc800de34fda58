import numpy as np
import pytest

from unitfold.circuit import CircuitTopology, GateSlot, ParameterVector
from unitfold.objective import ObjectiveKind, ObjectiveSpec, evaluate
from unitfold.optimize import (ConvergenceTrace, DecayFit, Mode,
                               OptimizerConfig, Termination, TraceFitError,
                               fit_decay_rate, minimize)


def one_qubit_unity():
    """Single rotation slot, N=2: closed-form solutions exist, e.g.
    phi = (pi/2, 0, 0) gives eigenvalues +-i."""
    topo = CircuitTopology(n=1, slots=(GateSlot.rot(1),), name="r1")
    return ObjectiveSpec(ObjectiveKind.UNITY_COST, topo)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            OptimizerConfig(armijo_c=0)
        with pytest.raises(ValueError):
            OptimizerConfig(backtrack_factor=1.0)
        with pytest.raises(ValueError):
            OptimizerConfig(max_iterations=0)
        with pytest.raises(ValueError):
            OptimizerConfig(cost_tolerance=0)

    def test_with_override(self):
        cfg = OptimizerConfig().with_(max_iterations=7)
        assert cfg.max_iterations == 7
        assert OptimizerConfig().max_iterations == 5000


class TestMinimize:
    def test_already_converged(self):
        spec = one_qubit_unity()
        start = ParameterVector.unit([np.pi / 2, 0, 0])
        params, trace = minimize(spec, start, OptimizerConfig(cost_tolerance=1e-8))
        assert trace.terminated_by is Termination.TOLERANCE
        assert trace.iterations == 0
        assert np.array_equal(params.angles, start.angles)

    def test_one_qubit_unity_from_random_start(self):
        spec = one_qubit_unity()
        rng = np.random.default_rng(3)
        start = ParameterVector.unit(rng.uniform(-np.pi, np.pi, 3))
        cfg = OptimizerConfig(cost_tolerance=1e-10, max_iterations=500)
        params, trace = minimize(spec, start, cfg)
        assert trace.final_cost <= 1e-10
        assert evaluate(spec, params) <= 1e-10

    def test_costs_monotone_nonincreasing(self):
        spec = one_qubit_unity()
        start = ParameterVector.unit([0.3, -0.2, 2.8])
        for mode in Mode:
            _, trace = minimize(spec, start,
                                OptimizerConfig(mode=mode, max_iterations=60))
            costs = [c for _, c in trace.records]
            assert all(b <= a + 1e-15 for a, b in zip(costs, costs[1:]))

    def test_iterations_strictly_increasing_and_start_recorded(self):
        spec = one_qubit_unity()
        _, trace = minimize(spec, ParameterVector.unit([1.0, 0.5, -0.5]),
                            OptimizerConfig(max_iterations=20))
        its = [k for k, _ in trace.records]
        assert its[0] == 0
        assert all(b == a + 1 for a, b in zip(its, its[1:]))

    def test_determinism(self):
        spec = one_qubit_unity()
        start = ParameterVector.unit([0.9, 0.1, -1.2])
        cfg = OptimizerConfig(max_iterations=40)
        p1, t1 = minimize(spec, start, cfg)
        p2, t2 = minimize(spec, start, cfg)
        assert np.array_equal(p1.angles, p2.angles)
        assert t1.records == t2.records

    def test_quasi_newton_not_worse(self):
        # soft benchmark on a smooth instance: QN with double budget should
        # not end above GD on most seeds
        topo = CircuitTopology(n=1, slots=(GateSlot.rot(1),), name="r1")
        spec = ObjectiveSpec(ObjectiveKind.UNITY_COST, topo, squared_unity=True)
        rng = np.random.default_rng(5)
        wins = 0
        for trial in range(10):
            start = ParameterVector.unit(rng.uniform(-np.pi, np.pi, 3))
            _, gd = minimize(spec, start, OptimizerConfig(max_iterations=50))
            _, qn = minimize(spec, start, OptimizerConfig(
                mode=Mode.QUASI_NEWTON, max_iterations=100))
            if qn.final_cost <= max(gd.final_cost, 1e-8):
                wins += 1
        assert wins >= 8

    def test_trace_csv(self):
        trace = ConvergenceTrace(records=[(0, 1.0), (1, 0.5)])
        text = trace.to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == "iteration,cost"
        assert lines[1] == "0,1.0"


class TestDecayFit:
    def test_synthetic_exponential(self):
        ks = np.arange(40)
        trace = ConvergenceTrace(records=[(int(k), float(np.exp(-0.05 * k)))
                                          for k in ks])
        fit = fit_decay_rate(trace)
        assert np.isclose(fit.gamma, 0.05, atol=1e-12)
        assert np.isclose(fit.r_squared, 1.0)

    def test_constant_trace_degenerate(self):
        trace = ConvergenceTrace(records=[(k, 0.5) for k in range(10)])
        with pytest.raises(TraceFitError):
            fit_decay_rate(trace)

    def test_too_few_records(self):
        trace = ConvergenceTrace(records=[(0, 1.0), (1, 0.5), (2, 0.0), (3, 0.0)])
        with pytest.raises(TraceFitError):
            fit_decay_rate(trace)

    def test_window_skips_transient(self):
        # flat transient then clean decay: the trailing window sees the decay
        records = [(k, 1.0 - 1e-9 * k) for k in range(5)]
        records += [(k, float(np.exp(-0.1 * (k - 4)))) for k in range(5, 50)]
        fit = fit_decay_rate(ConvergenceTrace(records=records))
        assert abs(fit.gamma - 0.1) <= 0.01
