"""Cost functionals for both compilation stages and their gradients.

Stage 1 drives the circuit unit toward an N-th root of identity by zeroing
the non-trivial characteristic-polynomial coefficients; stage 2 minimizes
a phase-invariant distance to a target unitary.  Gradients are central
finite differences; coordinate probes reuse cached prefix/suffix products
of the slot matrices, which is algebraically identical to re-synthesizing
the whole circuit per probe.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .circuit import (CircuitTopology, ParameterVector, Scope, SlotKind,
                      TopologyError, check_params, cnot_matrix,
                      fast_embed_single, rotation_gate)
from .linalg import LinalgError, as_square, char_poly_coeffs, is_unitary

DEFAULT_GRADIENT_STEP = 1e-5


def unity_cost(u, squared: bool = False) -> float:
    """Sum of |lambda_j| over the non-constant, non-leading characteristic
    polynomial coefficients; zero exactly on N-th roots of identity
    (up to global phase)."""
    coeffs = char_poly_coeffs(u)
    mods = np.abs(coeffs.lambdas)
    if squared:
        return float(np.sum(mods**2))
    return float(np.sum(mods))


def distance(a, b) -> float:
    """Phase-invariant infidelity 1 - |tr(a b†)|^2 / dim^2."""
    a, b = as_square(a), as_square(b)
    if a.shape != b.shape:
        raise LinalgError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    dim = a.shape[0]
    t = np.einsum("ij,ij->", a, b.conj())
    d = 1.0 - (abs(t) / dim) ** 2
    return float(max(d, 0.0))


class ObjectiveKind(Enum):
    UNITY_COST = "unity_cost"
    TARGET_DISTANCE = "target_distance"


@dataclass(frozen=True)
class ObjectiveSpec:
    kind: ObjectiveKind
    topology: CircuitTopology
    target: np.ndarray | None = None
    squared_unity: bool = False

    def __post_init__(self):
        if self.kind is ObjectiveKind.TARGET_DISTANCE:
            if self.target is None:
                raise TopologyError("TARGET_DISTANCE requires a target matrix")
            t = as_square(self.target)
            if t.shape[0] != self.topology.dim:
                raise TopologyError(
                    f"target dimension {t.shape[0]} != circuit dimension {self.topology.dim}"
                )
            if not is_unitary(t, 1e-8):
                raise LinalgError("target matrix is not unitary")
            object.__setattr__(self, "target", t)

    @property
    def scope(self) -> Scope:
        return Scope.UNIT if self.kind is ObjectiveKind.UNITY_COST else Scope.FULL

    def param_count(self) -> int:
        if self.scope is Scope.UNIT:
            return self.topology.unit_param_count
        return self.topology.full_param_count


@dataclass(frozen=True)
class _RotSlot:
    stack_index: int
    qubit: int
    param_offset: int


def _build_stack(spec: ObjectiveSpec, angles: np.ndarray):
    """Slot matrices for the whole evaluated circuit (one unit for
    UNITY_COST, 2^n units for TARGET_DISTANCE) plus the rotation-slot map."""
    topo = spec.topology
    n_units = 1 if spec.scope is Scope.UNIT else topo.n_units
    cnot_cache: dict = {}
    mats = []
    rots = []
    offset = 0
    for _ in range(n_units):
        for slot in topo.slots:
            if slot.kind is SlotKind.CNOT:
                key = (slot.control, slot.target)
                if key not in cnot_cache:
                    cnot_cache[key] = cnot_matrix(topo.n, *key)
                mats.append(cnot_cache[key])
            else:
                gate = rotation_gate(angles[offset], angles[offset + 1], angles[offset + 2])
                mats.append(fast_embed_single(gate, slot.qubit, topo.n))
                rots.append(_RotSlot(len(mats) - 1, slot.qubit, offset))
                offset += 3
    if mats:
        stack = np.ascontiguousarray(np.stack(mats))
    else:
        stack = np.empty((0, topo.dim, topo.dim), dtype=complex)
    return stack, rots


def _cost_of_matrix(spec: ObjectiveSpec, u: np.ndarray) -> float:
    if spec.kind is ObjectiveKind.UNITY_COST:
        return unity_cost(u, squared=spec.squared_unity)
    return distance(u, spec.target)


def evaluate(spec: ObjectiveSpec, params: ParameterVector) -> float:
    if params.scope is not spec.scope:
        raise TopologyError(f"objective expects {spec.scope.value}-scope parameters")
    check_params(spec.topology, params)
    stack, _ = _build_stack(spec, params.angles)
    return _cost_of_matrix(spec, kernels.chain_product(stack))


def _qubit_partial_trace(g: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """2x2 reduction t[b, a] = sum over the other qubits of
    g[(rest, b), (rest, a)], so that tr(embed(r, qubit) @ g) = tr(r @ t)."""
    left = 2 ** (qubit - 1)
    right = 2 ** (n - qubit)
    g6 = g.reshape(left, 2, right, left, 2, right)
    return np.einsum("lbrlar->ba", g6)


def gradient(spec: ObjectiveSpec, params: ParameterVector,
             step: float = DEFAULT_GRADIENT_STEP) -> np.ndarray:
    """Central finite difference (f(x+h e_k) - f(x-h e_k)) / 2h per angle."""
    if step <= 0:
        raise ValueError("finite-difference step must be positive")
    if params.scope is not spec.scope:
        raise TopologyError(f"objective expects {spec.scope.value}-scope parameters")
    check_params(spec.topology, params)
    angles = params.angles
    grad = np.zeros(len(angles))
    if len(angles) == 0:
        return grad

    topo = spec.topology
    dim = topo.dim
    stack, rots = _build_stack(spec, angles)
    prefix, suffix = kernels.prefix_suffix(stack)

    for rot in rots:
        i, q, p = rot.stack_index, rot.qubit, rot.param_offset
        phi = angles[p : p + 3]
        if spec.kind is ObjectiveKind.TARGET_DISTANCE:
            g_i = prefix[i] @ spec.target.conj().T @ suffix[i + 1]
            t2 = np.ascontiguousarray(_qubit_partial_trace(g_i, q, topo.n))
            for a in range(3):
                probes = []
                for sign in (+1.0, -1.0):
                    shifted = phi.copy()
                    shifted[a] += sign * step
                    r = np.ascontiguousarray(rotation_gate(*shifted))
                    t = kernels.trace_product(r, t2)
                    probes.append(max(1.0 - (abs(t) / dim) ** 2, 0.0))
                grad[p + a] = (probes[0] - probes[1]) / (2 * step)
        else:
            left = np.ascontiguousarray(suffix[i + 1])
            right = np.ascontiguousarray(prefix[i])
            for a in range(3):
                probes = []
                for sign in (+1.0, -1.0):
                    shifted = phi.copy()
                    shifted[a] += sign * step
                    m = fast_embed_single(rotation_gate(*shifted), q, topo.n)
                    u = kernels.sandwich(left, m, right)
                    probes.append(unity_cost(u, squared=spec.squared_unity))
                grad[p + a] = (probes[0] - probes[1]) / (2 * step)
    return grad
