"""
Classical-to-quantum encoders.

Basis encoding writes a bit pattern with X gates (I on unset qubits).
Amplitude encoding stores a normalized 4-vector in the amplitudes of two
qubits with Y rotations and controlled-Y blocks lowered to CNOTs.
"""
from dataclasses import asdict, dataclass
import logging
import math

import numpy as np

from config import config
from middleware.errors import ValidationError
from quantum.circuit import Circuit, GateKind, Instruction, Literal

logger = logging.getLogger(__name__)

STANDARD = "standard"
SQUARED_NUMERATOR = "squared-numerator"
ANGLE_VARIANTS = (STANDARD, SQUARED_NUMERATOR)


def normalize(x):
    x = np.asarray(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise ValidationError(f"feature vector has non-finite entries: {x.tolist()}")
    norm = np.linalg.norm(x)
    if norm == 0:
        raise ValidationError("cannot normalize the zero vector")
    return x / norm


def bits_of(value, n):
    """Bit i of ``value`` at position i (least significant first)."""
    return [(int(value) >> i) & 1 for i in range(n)]


def basis_encode(bits):
    """X on every qubit whose bit is 1, I elsewhere; bit i drives qubit i."""
    bits = list(bits)
    if not bits:
        raise ValidationError("basis encoding needs at least one bit")
    ops = []
    for q, b in enumerate(bits):
        if b not in (0, 1):
            raise ValidationError(f"bit {q} is {b!r}, expected 0 or 1")
        ops.append(Instruction(GateKind.X if b else GateKind.I, (q,)))
    return Circuit(len(bits), tuple(ops), 0)


@dataclass(frozen=True)
class PrepAngles:
    a1: float
    a2: float
    a3: float
    a4: float
    a5: float
    beta0: float
    beta1: float
    beta2: float

    @classmethod
    def from_betas(cls, beta0, beta1, beta2):
        return cls(
            a1=beta2,
            a2=-beta1 / 2.0, a3=beta1 / 2.0,
            a4=-beta0 / 2.0, a5=beta0 / 2.0,
            beta0=beta0, beta1=beta1, beta2=beta2,
        )

    def to_dict(self):
        return asdict(self)


def _half_angle(numerator, denominator):
    # conditioned amplitude mass of zero: any angle works, 0 is deterministic
    if denominator == 0:
        return 0.0
    return 2.0 * math.asin(min(1.0, max(-1.0, numerator / denominator)))


def amplitude_angles(x, variant=STANDARD):
    """
    Rotation angles that prepare sum_i x[i]|i> on two qubits.

    ``variant="squared-numerator"`` squares the numerators of the two
    conditioned angles; it does not reproduce x and exists for comparison.
    """
    if variant not in ANGLE_VARIANTS:
        raise ValidationError(f"angle variant must be one of {ANGLE_VARIANTS}, got '{variant}'")
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != 4:
        raise ValidationError(f"amplitude encoding takes 4 features, got {x.size}")
    norm = float(np.linalg.norm(x))
    if abs(norm - 1.0) > config.ATOL_TRACE:
        raise ValidationError(f"feature vector norm {norm:.12f} is not 1; normalize first")
    low = math.hypot(x[0], x[1])
    high = math.hypot(x[2], x[3])
    power = 2 if variant == SQUARED_NUMERATOR else 1
    beta0 = _half_angle(x[1] ** power, low)
    beta1 = _half_angle(x[3] ** power, high)
    beta2 = _half_angle(high, norm)
    return PrepAngles.from_betas(beta0, beta1, beta2)


def _ry(q, angle):
    return Instruction(GateKind.RY, (q,), (Literal(angle),))


def _cnot():
    return Instruction(GateKind.CNOT, (1, 0))


def amplitude_prep_circuit(angles):
    """
    Two-qubit state preparation (qubit 1 most significant).

    RY(A1) on q1 splits the mass between the q1=0 and q1=1 halves. Each
    controlled rotation on q0 runs RY(a), CNOT, RY(b), CNOT in time order and
    rotates by a - b when the control is 1, by a + b = 0 otherwise. The q1=0
    branch reuses the block between X gates on the control.
    """
    ops = [
        _ry(1, angles.a1),
        _ry(0, angles.a3), _cnot(), _ry(0, angles.a2), _cnot(),
        Instruction(GateKind.X, (1,)),
        _ry(0, angles.a5), _cnot(), _ry(0, angles.a4), _cnot(),
        Instruction(GateKind.X, (1,)),
    ]
    return Circuit(2, tuple(ops), 0)


def amplitude_encode(x, variant=STANDARD):
    return amplitude_prep_circuit(amplitude_angles(normalize(x), variant))
