"""Circuit units, their 2^n-fold repetition, and gate-count budgets.

Basis convention: qubit 1 is the most significant bit of the computational
basis index.  The first slot listed in a topology acts first on states, so
the synthesized matrix is the right-to-left product over the slot list.
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .linalg import PAULI_X, PAULI_Y, PAULI_Z


class TopologyError(ValueError):
    """A gate layout or parameter vector violated its invariants."""


class SlotKind(Enum):
    CNOT = "cnot"
    ROT = "rot"


@dataclass(frozen=True)
class GateSlot:
    kind: SlotKind
    control: int = 0
    target: int = 0
    qubit: int = 0

    @staticmethod
    def cnot(control: int, target: int) -> "GateSlot":
        return GateSlot(SlotKind.CNOT, control=control, target=target)

    @staticmethod
    def rot(qubit: int) -> "GateSlot":
        return GateSlot(SlotKind.ROT, qubit=qubit)


@dataclass(frozen=True)
class CircuitTopology:
    """One circuit unit: qubit count plus the ordered gate slots.

    The full circuit repeats this unit 2^n times with independent angles.
    `coupling` optionally restricts CNOT placement to a set of directed
    (control, target) edges.
    """

    n: int
    slots: tuple
    name: str = ""
    coupling: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise TopologyError("qubit count must be >= 1")
        for i, slot in enumerate(self.slots):
            if slot.kind is SlotKind.CNOT:
                if not (1 <= slot.control <= self.n) or not (1 <= slot.target <= self.n):
                    raise TopologyError(f"slot {i}: CNOT qubit index out of range 1..{self.n}")
                if slot.control == slot.target:
                    raise TopologyError(f"slot {i}: CNOT control equals target")
                if self.coupling and (slot.control, slot.target) not in self.coupling:
                    raise TopologyError(
                        f"slot {i}: CNOT ({slot.control},{slot.target}) not in coupling graph"
                    )
            else:
                if not (1 <= slot.qubit <= self.n):
                    raise TopologyError(f"slot {i}: rotation qubit index out of range 1..{self.n}")

    @property
    def dim(self) -> int:
        return 2**self.n

    @property
    def n_units(self) -> int:
        return 2**self.n

    @property
    def cnots_per_unit(self) -> int:
        return sum(1 for s in self.slots if s.kind is SlotKind.CNOT)

    @property
    def rots_per_unit(self) -> int:
        return sum(1 for s in self.slots if s.kind is SlotKind.ROT)

    @property
    def unit_param_count(self) -> int:
        return 3 * self.rots_per_unit

    @property
    def full_param_count(self) -> int:
        return self.unit_param_count * self.n_units

    def to_dict(self) -> dict:
        slots = []
        for s in self.slots:
            if s.kind is SlotKind.CNOT:
                slots.append({"kind": "cnot", "control": s.control, "target": s.target})
            else:
                slots.append({"kind": "rot", "qubit": s.qubit})
        return {"n": self.n, "name": self.name, "slots": slots}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def text_listing(self) -> str:
        lines = [f"# {self.name or 'topology'}: n={self.n}, "
                 f"{self.cnots_per_unit} CNOTs + {self.rots_per_unit} rotations per unit"]
        for i, s in enumerate(self.slots):
            if s.kind is SlotKind.CNOT:
                lines.append(f"{i:3d}  CNOT  control={s.control} target={s.target}")
            else:
                lines.append(f"{i:3d}  ROT   qubit={s.qubit}")
        return "\n".join(lines)


def topology_from_dict(data: dict) -> CircuitTopology:
    try:
        n = int(data["n"])
        raw_slots = data["slots"]
    except (KeyError, TypeError) as exc:
        raise TopologyError(f"topology object missing field: {exc}") from exc
    slots = []
    for i, s in enumerate(raw_slots):
        kind = s.get("kind")
        try:
            if kind == "cnot":
                slots.append(GateSlot.cnot(int(s["control"]), int(s["target"])))
            elif kind == "rot":
                slots.append(GateSlot.rot(int(s["qubit"])))
            else:
                raise TopologyError(f"slot {i}: unknown kind {kind!r}")
        except (KeyError, TypeError, ValueError) as exc:
            raise TopologyError(f"slot {i}: {exc}") from exc
    return CircuitTopology(n=n, slots=tuple(slots), name=str(data.get("name", "")))


def load_topology(path) -> CircuitTopology:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TopologyError(f"invalid topology JSON in {path}: {exc}") from exc
    return topology_from_dict(data)


class Scope(Enum):
    UNIT = "unit"
    FULL = "full"


@dataclass(frozen=True)
class ParameterVector:
    """Flat rotation-angle vector (radians), 3 angles per rotation slot.

    UNIT scope covers one circuit unit; FULL covers all 2^n units, unit 1
    first.
    """

    angles: np.ndarray
    scope: Scope

    def __post_init__(self):
        object.__setattr__(self, "angles", np.asarray(self.angles, dtype=float))

    def __len__(self) -> int:
        return len(self.angles)

    @staticmethod
    def unit(angles) -> "ParameterVector":
        return ParameterVector(np.asarray(angles, dtype=float), Scope.UNIT)

    @staticmethod
    def full(angles) -> "ParameterVector":
        return ParameterVector(np.asarray(angles, dtype=float), Scope.FULL)


def check_params(topology: CircuitTopology, params: ParameterVector) -> None:
    expected = (topology.unit_param_count if params.scope is Scope.UNIT
                else topology.full_param_count)
    if len(params) != expected:
        raise TopologyError(
            f"parameter length {len(params)} != expected {expected} for scope {params.scope.value}"
        )


def replicate_params(unit: ParameterVector, n: int) -> ParameterVector:
    if unit.scope is not Scope.UNIT:
        raise TopologyError("replicate_params requires UNIT scope")
    return ParameterVector.full(np.tile(unit.angles, 2**n))


def rotation_gate(phi_x: float, phi_y: float, phi_z: float) -> np.ndarray:
    """exp(i(phi_x sx + phi_y sy + phi_z sz)) in closed axis-angle form:
    cos(t) I + i sin(t) (phi . sigma)/t with t = |phi|; t = 0 gives I."""
    theta = math.sqrt(phi_x * phi_x + phi_y * phi_y + phi_z * phi_z)
    out = np.empty((2, 2), dtype=complex)
    if theta == 0.0:
        out[0, 0] = out[1, 1] = 1.0
        out[0, 1] = out[1, 0] = 0.0
        return out
    c = math.cos(theta)
    s = math.sin(theta) / theta
    out[0, 0] = complex(c, s * phi_z)
    out[0, 1] = complex(s * phi_y, s * phi_x)
    out[1, 0] = complex(-s * phi_y, s * phi_x)
    out[1, 1] = complex(c, -s * phi_z)
    return out


def embed_single(gate, qubit: int, n: int) -> np.ndarray:
    """I x ... x gate x ... x I with the gate at `qubit` (1 = leftmost factor)."""
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (2, 2):
        raise TopologyError("embed_single requires a 2x2 gate")
    if not (1 <= qubit <= n):
        raise TopologyError(f"qubit index {qubit} out of range 1..{n}")
    left = np.eye(2 ** (qubit - 1), dtype=complex)
    right = np.eye(2 ** (n - qubit), dtype=complex)
    return np.kron(np.kron(left, gate), right)


# Index scaffolding for fast single-qubit embeddings, keyed by (n, qubit):
# the basis indices whose qubit bit is 0, paired with their bit-flipped twins.
_EMBED_INDEX_CACHE: dict = {}


def _embed_indices(n: int, qubit: int):
    key = (n, qubit)
    if key not in _EMBED_INDEX_CACHE:
        bit = 1 << (n - qubit)
        idx = np.arange(2**n)
        low = idx[(idx & bit) == 0]
        _EMBED_INDEX_CACHE[key] = (low, low | bit)
    return _EMBED_INDEX_CACHE[key]


def fast_embed_single(gate: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """embed_single without the kron round-trip; gate must be 2x2 complex."""
    low, high = _embed_indices(n, qubit)
    m = np.zeros((2**n, 2**n), dtype=complex)
    m[low, low] = gate[0, 0]
    m[low, high] = gate[0, 1]
    m[high, low] = gate[1, 0]
    m[high, high] = gate[1, 1]
    return m


def cnot_matrix(n: int, control: int, target: int) -> np.ndarray:
    """2^n-dimensional CNOT: flips the target bit where the control bit is 1."""
    if not (1 <= control <= n) or not (1 <= target <= n) or control == target:
        raise TopologyError(f"invalid CNOT indices ({control},{target}) for n={n}")
    dim = 2**n
    cbit = n - control  # qubit 1 is the most significant bit
    tbit = n - target
    perm = np.arange(dim)
    controlled = (perm >> cbit) & 1 == 1
    perm = np.where(controlled, perm ^ (1 << tbit), perm)
    m = np.zeros((dim, dim), dtype=complex)
    m[perm, np.arange(dim)] = 1.0
    return m


def slot_matrices(topology: CircuitTopology, unit_angles: np.ndarray,
                  cnot_cache: dict | None = None) -> list:
    """Full-dimension matrix per slot of one unit, in slot order."""
    mats = []
    k = 0
    for slot in topology.slots:
        if slot.kind is SlotKind.CNOT:
            key = (slot.control, slot.target)
            if cnot_cache is not None:
                if key not in cnot_cache:
                    cnot_cache[key] = cnot_matrix(topology.n, *key)
                mats.append(cnot_cache[key])
            else:
                mats.append(cnot_matrix(topology.n, *key))
        else:
            gate = rotation_gate(unit_angles[k], unit_angles[k + 1], unit_angles[k + 2])
            mats.append(fast_embed_single(gate, slot.qubit, topology.n))
            k += 3
    return mats


def unit_unitary(topology: CircuitTopology, params: ParameterVector) -> np.ndarray:
    """Unitary of one circuit unit; first-listed slot acts first."""
    if params.scope is not Scope.UNIT:
        raise TopologyError("unit_unitary requires UNIT-scope parameters")
    check_params(topology, params)
    u = np.eye(topology.dim, dtype=complex)
    for m in slot_matrices(topology, params.angles):
        u = m @ u
    return u


def circuit_unitary(topology: CircuitTopology, params: ParameterVector) -> np.ndarray:
    """Unitary of the full circuit: 2^n units, unit 1 applied first."""
    if params.scope is not Scope.FULL:
        raise TopologyError("circuit_unitary requires FULL-scope parameters")
    check_params(topology, params)
    block = topology.unit_param_count
    u = np.eye(topology.dim, dtype=complex)
    cache: dict = {}
    for j in range(topology.n_units):
        angles = params.angles[j * block : (j + 1) * block]
        for m in slot_matrices(topology, angles, cache):
            u = m @ u
    return u


@dataclass(frozen=True)
class GateBudget:
    n: int
    min_cnots_total: int
    min_cnots_per_unit: int
    min_rots_per_unit: int
    chosen_cnots_per_unit: int
    chosen_rots_per_unit: int
    total_cnots: int
    total_rots: int
    meets_cnot_minimum: bool
    meets_rot_minimum: bool


def gate_budget(n: int, chosen_cnots: int | None = None,
                chosen_rots: int | None = None) -> GateBudget:
    """Gate-count bounds for an n-qubit 2^n-fold repetitive circuit.

    The theoretical CNOT minimum for arbitrary n-qubit unitaries is
    ceil((4^n - 3n - 1)/4) in total, i.e. ceil((4^n - 3n - 1)/2^{n+2})
    per unit; the three-angle rotation minimum per unit is ceil(2^n/3).
    Defaults: chosen_cnots = the per-unit minimum, chosen_rots = 2^{n-1}.
    """
    if n < 2:
        raise TopologyError("gate_budget requires n >= 2")
    min_per_unit = math.ceil((4**n - 3 * n - 1) / 2 ** (n + 2))
    min_total = math.ceil((4**n - 3 * n - 1) / 4)
    min_rots = math.ceil(2**n / 3)
    if chosen_cnots is None:
        chosen_cnots = min_per_unit
    if chosen_rots is None:
        chosen_rots = 2 ** (n - 1)
    return GateBudget(
        n=n,
        min_cnots_total=min_total,
        min_cnots_per_unit=min_per_unit,
        min_rots_per_unit=min_rots,
        chosen_cnots_per_unit=chosen_cnots,
        chosen_rots_per_unit=chosen_rots,
        total_cnots=2**n * chosen_cnots,
        total_rots=2**n * chosen_rots,
        meets_cnot_minimum=chosen_cnots >= min_per_unit,
        meets_rot_minimum=chosen_rots >= min_rots,
    )


def _unit_from_seq(n: int, seq: list, name: str, coupling=None) -> CircuitTopology:
    """Build a unit from a compact gate list of ("R", qubit) and
    ("C", control, target) entries, first-listed acting first."""
    slots = []
    for item in seq:
        if item[0] == "R":
            slots.append(GateSlot.rot(item[1]))
        else:
            slots.append(GateSlot.cnot(item[1], item[2]))
    coupling = frozenset(coupling) if coupling else frozenset()
    return CircuitTopology(n=n, slots=tuple(slots), name=name, coupling=coupling)


# Directed coupling maps of the published IBM 5-qubit devices, 1-based.
QX2_EDGES = [(1, 2), (1, 3), (2, 3), (4, 3), (4, 5), (5, 3)]
QX4_EDGES = [(2, 1), (3, 1), (3, 2), (4, 3), (4, 5), (5, 3)]


def _preset_catalog() -> dict:
    """Preset layouts: per-unit CNOT minimum, 2^{n-1} three-angle rotation
    slots, CNOTs drawn from the named coupling graph.

    Gate order matters: an unlucky order lets rotations merge across slot
    or unit boundaries, leaving the circuit short of the 4^n - 1 parameter
    directions it needs for arbitrary targets.  Each layout below was
    picked by randomized search for full Jacobian rank of the synthesized
    circuit at generic angles (scripts/layout_search.py); entries marked
    deficient never reached full rank in that search and are kept for the
    negative-result comparison.
    """
    return {
        # n=3: minimal 2 CNOTs per unit over each connectivity choice.
        # All three verified at Jacobian rank 63 = 4^3 - 1.
        "chain3": (3, [("R", 1), ("C", 1, 2), ("R", 2), ("C", 2, 3),
                       ("R", 3), ("R", 2)], None),
        "triangle3-a": (3, [("R", 1), ("R", 3), ("C", 1, 2), ("R", 1),
                            ("R", 2), ("C", 1, 3)],
                        [(1, 2), (1, 3), (2, 3)]),
        "triangle3-b": (3, [("R", 1), ("C", 1, 2), ("R", 2), ("C", 3, 2),
                            ("R", 3), ("R", 2)],
                        [(1, 2), (3, 2), (1, 3)]),
        # n=4: minimal 4 CNOTs per unit.  ring4 is verified at rank
        # 255 = 4^4 - 1; chain4 and star4 plateaued below it (best found
        # 234 and 246), matching the report that some minimal 4-qubit
        # units are not compiling universal.
        "chain4": (4, [("R", 2), ("R", 3), ("R", 1), ("C", 3, 4), ("R", 4),
                       ("C", 2, 1), ("C", 4, 3), ("R", 1), ("R", 4),
                       ("R", 3), ("R", 2), ("C", 2, 3)], None),
        "ring4": (4, [("R", 4), ("R", 1), ("C", 4, 1), ("R", 3), ("R", 1),
                      ("R", 4), ("C", 3, 4), ("R", 2), ("C", 2, 1),
                      ("R", 3), ("R", 2), ("C", 2, 3)], None),
        "star4": (4, [("R", 3), ("R", 1), ("C", 3, 1), ("C", 1, 2), ("R", 2),
                      ("R", 1), ("R", 4), ("C", 2, 1), ("R", 1), ("C", 1, 4),
                      ("R", 4), ("R", 2)], None),
        # n=5: minimal 8 CNOTs per unit drawn from the device coupling maps.
        # qx4 is verified at rank 1023 = 4^5 - 1 (scripts/layout_climb.py);
        # qx2 plateaued at 967 under the same climb, kept as best found.
        "qx2": (5, [("R", 1), ("R", 5), ("R", 4), ("R", 3), ("C", 1, 3),
                    ("R", 1), ("R", 3), ("R", 2), ("C", 5, 3), ("R", 3),
                    ("C", 2, 3), ("C", 1, 2), ("C", 4, 5), ("R", 3), ("R", 3),
                    ("R", 5), ("R", 2), ("C", 5, 3), ("R", 1), ("R", 3),
                    ("R", 4), ("C", 1, 3), ("R", 1), ("C", 1, 2)], QX2_EDGES),
        "qx4": (5, [("R", 3), ("C", 5, 3), ("R", 5), ("R", 1), ("R", 3),
                    ("R", 4), ("R", 2), ("C", 4, 5), ("R", 4), ("C", 2, 1),
                    ("R", 1), ("C", 3, 1), ("R", 1), ("R", 3), ("R", 2),
                    ("R", 5), ("C", 3, 2), ("R", 3), ("C", 5, 3), ("R", 3),
                    ("R", 5), ("C", 4, 3), ("R", 3), ("C", 3, 1)], QX4_EDGES),
    }


def preset_names() -> list:
    return sorted(_preset_catalog())


def preset_topology(name: str) -> CircuitTopology:
    """Named circuit-unit layouts with the per-unit CNOT minimum and
    2^{n-1} three-angle rotation slots."""
    catalog = _preset_catalog()
    if name not in catalog:
        raise TopologyError(f"unknown preset {name!r}; available: {', '.join(sorted(catalog))}")
    n, seq, coupling = catalog[name]
    return _unit_from_seq(n, seq, name, coupling)
