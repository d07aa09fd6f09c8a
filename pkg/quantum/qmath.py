"""
Dense complex linear algebra for n-qubit states.

Qubit 0 is the least-significant bit of a computational-basis index, so the
basis string Q3Q2Q1Q0 reads left to right from the highest qubit down.
Matrices are plain ``numpy.ndarray`` values of dtype complex128 and are
never modified in place.
"""
import logging

import numpy as np

from config import config
from middleware.errors import ChannelError, ValidationError

logger = logging.getLogger(__name__)

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = (I2, X, Y, Z)


def tensor(a, b):
    """Kronecker product; ``a`` occupies the more significant qubits."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def tensor_all(*mats):
    out = np.ones((1, 1), dtype=np.complex128)
    for m in mats:
        out = tensor(out, m)
    return out


def num_qubits(dim):
    n = int(dim).bit_length() - 1
    if dim < 1 or 2 ** n != dim:
        raise ValidationError(f"dimension {dim} is not a power of two")
    return n


def embed(op, targets, n):
    """
    Lift a k-qubit operator onto n qubits.

    ``targets[0]`` is the most significant qubit of ``op``'s own index, so
    ``embed(CNOT, [control, target], n)`` is the usual controlled-NOT.
    Every other qubit sees the identity.
    """
    op = np.asarray(op, dtype=np.complex128)
    targets = [int(t) for t in targets]
    k = len(targets)
    if len(set(targets)) != k:
        raise ValidationError(f"duplicate target qubits {targets}")
    if any(t < 0 or t >= n for t in targets):
        raise ValidationError(f"target qubits {targets} out of range for {n} qubits")
    if op.shape != (2 ** k, 2 ** k):
        raise ValidationError(f"operator of shape {op.shape} does not act on {k} qubits")
    if k == n and targets == list(range(n - 1, -1, -1)):
        return op.copy()

    rest = [q for q in range(n - 1, -1, -1) if q not in targets]
    order = targets + rest
    full = np.kron(op, np.eye(2 ** (n - k), dtype=np.complex128))
    # axis p of the standard layout holds qubit n-1-p
    perm = [order.index(n - 1 - p) for p in range(n)]
    t = full.reshape([2] * (2 * n)).transpose(perm + [n + a for a in perm])
    return t.reshape(2 ** n, 2 ** n)


def ground_state(n):
    """|0...0><0...0| on n qubits"""
    rho = np.zeros((2 ** n, 2 ** n), dtype=np.complex128)
    rho[0, 0] = 1.0
    return rho


def density_from_state(psi):
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > config.ATOL_ENTRY:
        raise ValidationError(f"state vector norm {norm:.12f} is not 1")
    num_qubits(psi.size)
    return np.outer(psi, psi.conj())


def is_unitary(u, atol=None):
    atol = config.ATOL_ENTRY if atol is None else atol
    u = np.asarray(u, dtype=np.complex128)
    return np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=atol, rtol=0.0)


def check_density(rho, atol_trace=None, atol_entry=None):
    """Raise ValidationError unless rho has unit trace, is Hermitian and PSD."""
    atol_trace = config.ATOL_TRACE if atol_trace is None else atol_trace
    atol_entry = config.ATOL_ENTRY if atol_entry is None else atol_entry
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"density matrix must be square, got {rho.shape}")
    num_qubits(rho.shape[0])
    trace = np.trace(rho)
    if abs(trace - 1.0) > atol_trace:
        raise ValidationError(f"trace {trace.real:.12f} differs from 1")
    if np.max(np.abs(rho - rho.conj().T)) > atol_entry:
        raise ValidationError("density matrix is not Hermitian")
    min_eig = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if min_eig < -atol_trace:
        raise ValidationError(f"density matrix has negative eigenvalue {min_eig:.3e}")
    return rho


def completeness_error(ops):
    """max |sum_k E_k^dagger E_k - I| over entries"""
    ops = [np.asarray(E, dtype=np.complex128) for E in ops]
    if not ops:
        return np.inf
    acc = sum(E.conj().T @ E for E in ops)
    return float(np.max(np.abs(acc - np.eye(acc.shape[0]))))


def check_completeness(ops, atol=None):
    atol = config.ATOL_ENTRY if atol is None else atol
    err = completeness_error(ops)
    if err > atol:
        raise ChannelError(f"Kraus operators violate completeness by {err:.3e}")
    return ops


def apply_kraus(rho, ops, check=True):
    """Operator-sum map rho -> sum_k E_k rho E_k^dagger"""
    if check:
        check_completeness(ops)
    rho = np.asarray(rho, dtype=np.complex128)
    out = np.zeros_like(rho)
    for E in ops:
        E = np.asarray(E, dtype=np.complex128)
        out += E @ rho @ E.conj().T
    return out


def apply_unitary(rho, u):
    return u @ rho @ u.conj().T


def superoperator(ops):
    """
    Row-major Liouville form of a Kraus set: vec(E rho E^dagger) = (E kron conj(E)) vec(rho).
    """
    ops = [np.asarray(E, dtype=np.complex128) for E in ops]
    return sum(np.kron(E, E.conj()) for E in ops)


def apply_superoperator(rho, sop):
    d = rho.shape[0]
    return (sop @ rho.reshape(d * d)).reshape(d, d)


def apply_local_superoperator(rho, sop, targets, n):
    """
    Apply a k-qubit superoperator (from ``superoperator``) to ``targets`` of
    an n-qubit density matrix without building the 4^n x 4^n map.
    """
    k = len(targets)
    row_axes = [n - 1 - q for q in targets]
    col_axes = [2 * n - 1 - q for q in targets]
    src = row_axes + col_axes
    t = np.moveaxis(rho.reshape([2] * (2 * n)), src, list(range(2 * k)))
    shape = t.shape
    t = (sop @ t.reshape(4 ** k, -1)).reshape(shape)
    return np.moveaxis(t, list(range(2 * k)), src).reshape(2 ** n, 2 ** n)


def apply_kraus_on(rho, ops, targets, n, check=True):
    """Operator-sum map of a k-qubit Kraus set acting on ``targets``."""
    if check:
        check_completeness(ops)
    return apply_local_superoperator(rho, superoperator(ops), targets, n)


def basis_probabilities(rho):
    """Computational-basis outcome probabilities: the real diagonal of rho."""
    return np.real(np.diagonal(np.asarray(rho))).copy()


def expectation_z(rho, target):
    """<Z> on one qubit: +1 weight for basis indices whose target bit is 0."""
    probs = basis_probabilities(rho)
    n = num_qubits(probs.size)
    if target < 0 or target >= n:
        raise ValidationError(f"target qubit {target} out of range for {n} qubits")
    bits = (np.arange(probs.size) >> target) & 1
    return float(np.sum(probs * (1 - 2 * bits)))
