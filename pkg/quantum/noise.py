"""
Kraus-operator constructors for gate error, T1 relaxation and T2 dephasing.
"""
from dataclasses import dataclass
from itertools import product
import logging
import math

import numpy as np

from middleware.errors import ChannelError
from quantum.qmath import I2, PAULIS, X, Y, Z

logger = logging.getLogger(__name__)

PAIR_DEPOLARIZING = "pair_depolarizing"
INDEPENDENT_LOCAL = "independent_local"
TQ_NOISE_MODES = (PAIR_DEPOLARIZING, INDEPENDENT_LOCAL)


def _check_probability(name, p):
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ChannelError(f"{name} must be in [0, 1], got {p}")
    return p


@dataclass(frozen=True)
class ChannelSpec:
    """One of the three simulated channels with its strength."""
    kind: str
    strength: float

    def __post_init__(self):
        if self.kind not in _BUILDERS:
            raise ChannelError(f"unknown channel kind '{self.kind}'")
        _check_probability(self.kind, self.strength)

    def kraus(self):
        return _BUILDERS[self.kind](self.strength)


def survival_probability(t_ns, T_ns):
    """exp(-t/T): probability that no relaxation/dephasing event happens during t."""
    if T_ns <= 0:
        raise ChannelError(f"time constant must be positive, got {T_ns}")
    if t_ns < 0:
        raise ChannelError(f"duration must be non-negative, got {t_ns}")
    return math.exp(-t_ns / T_ns)


def depolarizing_kraus(p):
    p = _check_probability("depolarizing probability", p)
    a = math.sqrt(1.0 - p)
    b = math.sqrt(p / 3.0)
    return [a * I2, b * X, b * Y, b * Z]


def amplitude_damping_kraus(gamma):
    gamma = _check_probability("damping strength", gamma)
    e0 = np.array([[1, 0], [0, math.sqrt(1.0 - gamma)]], dtype=np.complex128)
    e1 = np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=np.complex128)
    return [e0, e1]


def phase_damping_kraus(lam):
    lam = _check_probability("dephasing strength", lam)
    e0 = np.array([[1, 0], [0, math.sqrt(1.0 - lam)]], dtype=np.complex128)
    e1 = np.array([[0, 0], [0, math.sqrt(lam)]], dtype=np.complex128)
    return [e0, e1]


def two_qubit_gate_error_kraus(p):
    """Symmetric two-qubit depolarizing: the 15 non-identity Pauli pairs share p."""
    p = _check_probability("two-qubit error probability", p)
    ops = [math.sqrt(1.0 - p) * np.kron(I2, I2)]
    w = math.sqrt(p / 15.0)
    for a, b in product(range(4), repeat=2):
        if a == 0 and b == 0:
            continue
        ops.append(w * np.kron(PAULIS[a], PAULIS[b]))
    return ops


def t1_kraus(t_ns, t1_ns):
    return amplitude_damping_kraus(1.0 - survival_probability(t_ns, t1_ns))


def t2_kraus(t_ns, t2_ns):
    return phase_damping_kraus(1.0 - survival_probability(t_ns, t2_ns))


def check_coherence_times(t1_us, t2_us, label=""):
    """T2 above 2*T1 is unphysical; it is accepted as reported."""
    if t2_us > 2.0 * t1_us:
        logger.warning(f"T2={t2_us:.2f}us exceeds 2*T1={2 * t1_us:.2f}us {label}; using as reported")
        return False
    return True


_BUILDERS = {
    "depolarizing": depolarizing_kraus,
    "amplitude_damping": amplitude_damping_kraus,
    "phase_damping": phase_damping_kraus,
}
