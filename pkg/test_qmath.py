import numpy as np
from numpy.testing import assert_allclose
import pytest

from middleware.errors import ChannelError, ValidationError
from quantum import qmath
from quantum.circuit import GateKind, gate_matrix
from quantum.noise import depolarizing_kraus


def random_density(rng, n, mix=3):
    d = 2 ** n
    rho = np.zeros((d, d), dtype=np.complex128)
    weights = rng.random(mix)
    weights /= weights.sum()
    for w in weights:
        psi = rng.normal(size=d) + 1j * rng.normal(size=d)
        psi /= np.linalg.norm(psi)
        rho += w * np.outer(psi, psi.conj())
    return rho


def basis_state(index, n):
    rho = np.zeros((2 ** n, 2 ** n), dtype=np.complex128)
    rho[index, index] = 1.0
    return rho


def test_tensor_of_identities():
    assert_allclose(qmath.tensor(qmath.I2, qmath.I2), np.eye(4))


def test_tensor_bit_flip_on_both_qubits():
    psi = np.zeros(4)
    psi[0] = 1.0
    out = qmath.tensor(qmath.X, qmath.X) @ psi
    assert_allclose(out, [0, 0, 0, 1])


def test_embed_single_qubit():
    rho = qmath.ground_state(2)
    out = qmath.apply_unitary(rho, qmath.embed(qmath.X, [0], 2))
    assert_allclose(qmath.basis_probabilities(out), [0, 1, 0, 0])


def test_embed_basis_pattern_nine():
    u = qmath.embed(qmath.X, [3], 4) @ qmath.embed(qmath.X, [0], 4)
    out = qmath.apply_unitary(qmath.ground_state(4), u)
    probs = qmath.basis_probabilities(out)
    assert probs[9] == pytest.approx(1.0)


def test_embed_cnot_matches_truth_table():
    n = 3
    expected = np.zeros((8, 8))
    for i in range(8):
        j = i ^ 1 if (i >> 2) & 1 else i
        expected[j, i] = 1.0
    assert_allclose(qmath.embed(gate_matrix(GateKind.CNOT), [2, 0], n), expected)


def test_embed_rejects_bad_targets():
    with pytest.raises(ValidationError):
        qmath.embed(qmath.X, [2], 2)
    with pytest.raises(ValidationError):
        qmath.embed(gate_matrix(GateKind.CNOT), [1, 1], 3)


def test_disjoint_embeddings_commute():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = gate_matrix(GateKind.U3, rng.uniform(0, 2 * np.pi, 3))
        b = gate_matrix(GateKind.U3, rng.uniform(0, 2 * np.pi, 3))
        i, j = rng.choice(3, size=2, replace=False)
        ea, eb = qmath.embed(a, [i], 3), qmath.embed(b, [j], 3)
        assert_allclose(ea @ eb, eb @ ea, atol=1e-12)


def test_apply_kraus_identity_and_unitary():
    rng = np.random.default_rng(0)
    rho = random_density(rng, 1)
    assert_allclose(qmath.apply_kraus(rho, [qmath.I2]), rho)
    u = gate_matrix(GateKind.U3, [0.3, 1.1, -0.4])
    assert_allclose(qmath.apply_kraus(rho, [u]), u @ rho @ u.conj().T, atol=1e-12)


def test_depolarizing_on_ground_state():
    out = qmath.apply_kraus(qmath.ground_state(1), depolarizing_kraus(0.3))
    assert_allclose(out, np.diag([0.8, 0.2]), atol=1e-12)
    assert_allclose(qmath.basis_probabilities(out), [0.8, 0.2], atol=1e-12)


def test_apply_kraus_rejects_incomplete_set():
    with pytest.raises(ChannelError):
        qmath.apply_kraus(qmath.ground_state(1), [0.5 * qmath.I2])


def test_apply_kraus_preserves_density_invariants():
    rng = np.random.default_rng(11)
    for trial in range(1000):
        n = 1 + trial % 3
        rho = random_density(rng, n)
        ops = [qmath.embed(E, [int(rng.integers(n))], n) for E in depolarizing_kraus(rng.random())]
        out = qmath.apply_kraus(rho, ops)
        assert abs(np.trace(out) - 1.0) < 1e-9
        assert np.max(np.abs(out - out.conj().T)) < 1e-10


def test_local_superoperator_matches_full_embedding():
    rng = np.random.default_rng(5)
    rho = random_density(rng, 3)
    ops = depolarizing_kraus(0.2)
    local = qmath.apply_kraus_on(rho, ops, [1], 3)
    full = qmath.apply_kraus(rho, [qmath.embed(E, [1], 3) for E in ops])
    assert_allclose(local, full, atol=1e-12)

    cnot = gate_matrix(GateKind.CNOT)
    local = qmath.apply_local_superoperator(rho, qmath.superoperator([cnot]), [2, 0], 3)
    full = qmath.apply_unitary(rho, qmath.embed(cnot, [2, 0], 3))
    assert_allclose(local, full, atol=1e-12)


def test_expectation_anchor():
    rho = qmath.density_from_state([0.8, 0.6])
    assert abs(qmath.expectation_z(rho, 0) - 0.28) < 1e-12


def test_expectation_ground_and_mixed():
    assert qmath.expectation_z(qmath.ground_state(1), 0) == pytest.approx(1.0)
    assert qmath.expectation_z(np.eye(2) / 2, 0) == pytest.approx(0.0)


def test_expectation_equals_trace_with_embedded_z():
    rng = np.random.default_rng(8)
    for _ in range(20):
        rho = random_density(rng, 3)
        for t in range(3):
            z = qmath.embed(qmath.Z, [t], 3)
            assert qmath.expectation_z(rho, t) == pytest.approx(np.trace(rho @ z).real, abs=1e-12)


def test_expectation_target_out_of_range():
    with pytest.raises(ValidationError):
        qmath.expectation_z(qmath.ground_state(2), 2)


def test_basis_probabilities_examples():
    assert_allclose(qmath.basis_probabilities(basis_state(2, 2)), [0, 0, 1, 0])
    bell = qmath.density_from_state(np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert_allclose(qmath.basis_probabilities(bell), [0.5, 0, 0, 0.5], atol=1e-12)


def test_check_density():
    qmath.check_density(qmath.ground_state(2))
    with pytest.raises(ValidationError):
        qmath.check_density(np.diag([0.5, 0.6]))
    with pytest.raises(ValidationError):
        qmath.check_density(np.diag([1.5, -0.5]))
