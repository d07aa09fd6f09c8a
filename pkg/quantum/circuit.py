"""
Gate library and circuit intermediate representation.

A Circuit is an immutable, ordered program over logical qubits. Gate
parameters are either literal angles (radians) or references into a
trainable parameter vector theta; ``bind`` resolves the references.
"""
from dataclasses import dataclass, field
from enum import Enum
import json
import logging
import math

import numpy as np

from middleware.errors import CircuitValidationError, DataFileError, UnboundParameterError, ValidationError

logger = logging.getLogger(__name__)


class GateKind(str, Enum):
    I = "I"
    X = "X"
    U3 = "U3"
    RZ = "RZ"
    RY = "RY"
    CNOT = "CNOT"
    CZ = "CZ"

    @property
    def arity(self):
        return 2 if self in (GateKind.CNOT, GateKind.CZ) else 1

    @property
    def n_params(self):
        return {GateKind.U3: 3, GateKind.RZ: 1, GateKind.RY: 1}.get(self, 0)


@dataclass(frozen=True)
class Literal:
    value: float

    def to_dict(self):
        return {"lit": float(self.value)}


@dataclass(frozen=True)
class Ref:
    index: int

    def to_dict(self):
        return {"ref": int(self.index)}


def param_from_dict(data):
    if "ref" in data:
        return Ref(int(data["ref"]))
    if "lit" in data:
        return Literal(float(data["lit"]))
    raise ValidationError(f"parameter slot must hold 'ref' or 'lit', got {data}")


@dataclass(frozen=True)
class Instruction:
    kind: GateKind
    qubits: tuple
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(
            p if isinstance(p, (Literal, Ref)) else Literal(float(p)) for p in self.params))
        if len(self.qubits) != self.kind.arity:
            raise ValidationError(f"{self.kind.value} acts on {self.kind.arity} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValidationError(f"{self.kind.value} needs distinct qubits, got {self.qubits}")
        if len(self.params) != self.kind.n_params:
            raise ValidationError(f"{self.kind.value} takes {self.kind.n_params} parameter(s), got {len(self.params)}")

    @property
    def is_bound(self):
        return all(isinstance(p, Literal) for p in self.params)

    def angles(self):
        if not self.is_bound:
            raise UnboundParameterError(f"{self.kind.value} on {self.qubits} has unbound parameters")
        return [p.value for p in self.params]

    def to_dict(self):
        return {
            "gate": self.kind.value,
            "qubits": list(self.qubits),
            "params": [p.to_dict() for p in self.params],
        }


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    instructions: tuple = field(default_factory=tuple)
    n_params: int = 0

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        for i, inst in enumerate(self.instructions):
            if any(q < 0 or q >= self.n_qubits for q in inst.qubits):
                raise ValidationError(f"instruction {i}: qubits {inst.qubits} outside a {self.n_qubits}-qubit circuit")
            for p in inst.params:
                if isinstance(p, Ref) and not 0 <= p.index < self.n_params:
                    raise ValidationError(f"instruction {i}: parameter ref {p.index} outside theta of length {self.n_params}")

    @property
    def is_bound(self):
        return all(inst.is_bound for inst in self.instructions)

    def ref_count(self):
        return sum(isinstance(p, Ref) for inst in self.instructions for p in inst.params)

    def two_qubit_pairs(self):
        return [(i, inst.qubits) for i, inst in enumerate(self.instructions) if inst.kind.arity == 2]

    def to_dict(self):
        return {
            "n_qubits": self.n_qubits,
            "n_params": self.n_params,
            "ops": [inst.to_dict() for inst in self.instructions],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            ops = [
                Instruction(GateKind(op["gate"]), tuple(op["qubits"]),
                            tuple(param_from_dict(p) for p in op.get("params", [])))
                for op in data["ops"]
            ]
            return cls(int(data["n_qubits"]), tuple(ops), int(data.get("n_params", 0)))
        except (KeyError, TypeError) as e:
            raise ValidationError(f"malformed circuit document: {e}") from e


def save_circuit(circuit, path):
    with open(path, "w") as f:
        json.dump(circuit.to_dict(), f, indent=2, sort_keys=True)


def load_circuit(path):
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise DataFileError(f"invalid JSON: {e}", path=path) from e
    return Circuit.from_dict(data)


# ---------------- Gate matrices ----------------

def u3_matrix(theta, phi, lam):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([
        [c, -np.exp(1j * lam) * s],
        [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
    ], dtype=np.complex128)


_FIXED = {
    GateKind.I: np.eye(2, dtype=np.complex128),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=np.complex128),
    GateKind.CNOT: np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(np.complex128),
}


def gate_matrix(kind, params=()):
    """
    Unitary of a gate. Two-qubit matrices index the control (first listed
    qubit) as the more significant bit.
    """
    kind = GateKind(kind)
    params = [float(p) for p in params]
    if len(params) != kind.n_params:
        raise ValidationError(f"{kind.value} takes {kind.n_params} parameter(s), got {len(params)}")
    if kind in _FIXED:
        return _FIXED[kind].copy()
    if kind is GateKind.U3:
        return u3_matrix(*params)
    if kind is GateKind.RY:
        return u3_matrix(params[0], 0.0, 0.0)
    # RZ
    return np.diag([1.0, np.exp(1j * params[0])]).astype(np.complex128)


# ---------------- Transformations ----------------

def bind(circuit, theta):
    """Replace every Ref with theta[index]; structure stays identical."""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != circuit.n_params:
        raise ValidationError(f"theta has length {theta.size}, circuit expects {circuit.n_params}")
    if circuit.ref_count() == 0:
        return circuit
    ops = tuple(
        Instruction(inst.kind, inst.qubits, tuple(
            Literal(float(theta[p.index])) if isinstance(p, Ref) else p for p in inst.params))
        for inst in circuit.instructions
    )
    return Circuit(circuit.n_qubits, ops, circuit.n_params)


def compose(*circuits):
    """
    Concatenate circuits in order. Parameter vectors are stacked, so refs of
    later circuits shift by the parameter count of earlier ones.
    """
    n_qubits = max(c.n_qubits for c in circuits)
    ops = []
    offset = 0
    for c in circuits:
        for inst in c.instructions:
            ops.append(Instruction(inst.kind, inst.qubits, tuple(
                Ref(p.index + offset) if isinstance(p, Ref) else p for p in inst.params)))
        offset += c.n_params
    return Circuit(n_qubits, tuple(ops), offset)


def lower(circuit, native_1q_gates):
    """Rewrite RY(theta) as U3(theta, 0, 0) unless RY is native."""
    native = {GateKind(g) for g in native_1q_gates}
    if GateKind.RY in native:
        return circuit
    ops = tuple(
        Instruction(GateKind.U3, inst.qubits, (inst.params[0], Literal(0.0), Literal(0.0)))
        if inst.kind is GateKind.RY else inst
        for inst in circuit.instructions
    )
    return Circuit(circuit.n_qubits, ops, circuit.n_params)


@dataclass(frozen=True)
class Violation:
    index: int
    reason: str
    detail: str

    def __str__(self):
        return f"instruction {self.index}: {self.reason} ({self.detail})"


def validate(circuit, device, layout=None):
    """
    Coupling-constraint check.

    ``layout`` maps logical qubit i to physical qubit layout[i] (identity
    when omitted). Returns a list of Violation; empty means the circuit
    runs on the device without routing.
    """
    layout = list(range(circuit.n_qubits)) if layout is None else [int(q) for q in layout]
    edges = {tuple(e) for e in device.edges}
    violations = []
    if len(layout) < circuit.n_qubits:
        violations.append(Violation(-1, "layout", f"{len(layout)} physical qubits for {circuit.n_qubits} logical"))
        return violations
    if len(set(layout)) != len(layout):
        violations.append(Violation(-1, "layout", f"layout {layout} is not injective"))
    for i, inst in enumerate(circuit.instructions):
        phys = [layout[q] for q in inst.qubits]
        if any(p < 0 or p >= device.n_qubits for p in phys):
            violations.append(Violation(i, "qubit_range", f"physical qubits {phys} on a {device.n_qubits}-qubit device"))
            continue
        if inst.kind.arity == 2:
            c, t = phys
            if (c, t) in edges:
                continue
            if (t, c) in edges:
                violations.append(Violation(i, "direction", f"{c}->{t} only allowed as {t}->{c}"))
            else:
                violations.append(Violation(i, "missing_edge", f"no coupling between {c} and {t}"))
    return violations


def require_valid(circuit, device, layout=None):
    violations = validate(circuit, device, layout)
    if violations:
        raise CircuitValidationError(
            "circuit violates device constraints: " + "; ".join(str(v) for v in violations), violations)
    return circuit
