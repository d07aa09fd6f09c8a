import math

import numpy as np
from numpy.testing import assert_allclose
import pytest

from middleware.errors import ChannelError
from quantum import qmath
from quantum.noise import (
    ChannelSpec, amplitude_damping_kraus, check_coherence_times, depolarizing_kraus,
    phase_damping_kraus, survival_probability, t1_kraus, two_qubit_gate_error_kraus,
)

CONSTRUCTORS = [depolarizing_kraus, amplitude_damping_kraus, phase_damping_kraus, two_qubit_gate_error_kraus]


def plus_state():
    return qmath.density_from_state(np.array([1.0, 1.0]) / math.sqrt(2))


def test_survival_probability():
    assert survival_probability(0, 50.0) == 1.0
    assert survival_probability(50.0, 50.0) == pytest.approx(0.36788, abs=1e-5)
    assert survival_probability(60.0, 50_000.0) == pytest.approx(0.998801, abs=1e-6)


def test_survival_probability_rejects_bad_times():
    with pytest.raises(ChannelError):
        survival_probability(10.0, 0.0)
    with pytest.raises(ChannelError):
        survival_probability(-1.0, 10.0)


@pytest.mark.parametrize("make", CONSTRUCTORS)
def test_completeness(make):
    for p in np.linspace(0, 1, 11):
        assert qmath.completeness_error(make(p)) < 1e-12


@pytest.mark.parametrize("make", CONSTRUCTORS)
def test_out_of_range_strength(make):
    with pytest.raises(ChannelError):
        make(1.2)
    with pytest.raises(ChannelError):
        make(-0.1)


def test_depolarizing_examples():
    rho = qmath.ground_state(1)
    assert_allclose(qmath.apply_kraus(rho, depolarizing_kraus(0.0)), rho)
    out = qmath.apply_kraus(rho, depolarizing_kraus(0.3))
    assert_allclose(out, np.diag([0.8, 0.2]), atol=1e-12)
    assert qmath.expectation_z(out, 0) == pytest.approx(0.6)


def test_depolarizing_composition_matches_composed_kraus_set():
    rng = np.random.default_rng(4)
    a, b = depolarizing_kraus(0.1), depolarizing_kraus(0.25)
    composed = [B @ A for A in a for B in b]
    for _ in range(20):
        psi = rng.normal(size=2) + 1j * rng.normal(size=2)
        rho = qmath.density_from_state(psi / np.linalg.norm(psi))
        twice = qmath.apply_kraus(qmath.apply_kraus(rho, a), b)
        assert_allclose(twice, qmath.apply_kraus(rho, composed), atol=1e-10)


def test_amplitude_damping_examples():
    excited = np.diag([0.0, 1.0]).astype(np.complex128)
    assert_allclose(qmath.apply_kraus(excited, amplitude_damping_kraus(0.0)), excited)
    assert_allclose(qmath.apply_kraus(excited, amplitude_damping_kraus(1.0)), qmath.ground_state(1), atol=1e-12)
    out = qmath.apply_kraus(excited, amplitude_damping_kraus(1 - math.exp(-1)))
    assert_allclose(np.diag(out).real, [0.63212, 0.36788], atol=1e-5)


def test_t1_kraus_at_one_time_constant():
    excited = np.diag([0.0, 1.0]).astype(np.complex128)
    out = qmath.apply_kraus(excited, t1_kraus(50_000.0, 50_000.0))
    assert_allclose(np.diag(out).real, [0.63212, 0.36788], atol=1e-5)


def test_amplitude_damping_fixes_ground():
    for gamma in np.linspace(0, 1, 7):
        assert_allclose(qmath.apply_kraus(qmath.ground_state(1), amplitude_damping_kraus(gamma)),
                        qmath.ground_state(1), atol=1e-15)


def test_amplitude_damping_monotone_in_gamma():
    excited = np.diag([0.0, 1.0]).astype(np.complex128)
    values = [qmath.expectation_z(qmath.apply_kraus(excited, amplitude_damping_kraus(g)), 0)
              for g in np.linspace(0, 1, 100)]
    assert np.all(np.diff(values) > 0)


def test_phase_damping_examples():
    rho = plus_state()
    assert_allclose(qmath.apply_kraus(rho, phase_damping_kraus(0.0)), rho)
    assert_allclose(qmath.apply_kraus(rho, phase_damping_kraus(1.0)), np.eye(2) / 2, atol=1e-12)
    out = qmath.apply_kraus(rho, phase_damping_kraus(0.19))
    assert out[0, 1].real == pytest.approx(0.45)
    assert_allclose(np.diag(out).real, [0.5, 0.5])


def test_phase_damping_fixes_diagonal_states():
    rho = np.diag([0.3, 0.7]).astype(np.complex128)
    assert_allclose(qmath.apply_kraus(rho, phase_damping_kraus(0.6)), rho, atol=1e-15)


def test_two_qubit_gate_error_on_ground():
    ops = two_qubit_gate_error_kraus(0.15)
    assert len(ops) == 16
    out = qmath.apply_kraus(qmath.ground_state(2), ops)
    assert np.trace(out).real == pytest.approx(1.0)
    assert_allclose(qmath.basis_probabilities(out), [0.88, 0.04, 0.04, 0.04], atol=1e-12)


def test_two_qubit_gate_error_zero_is_identity():
    rng = np.random.default_rng(2)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    rho = qmath.density_from_state(psi / np.linalg.norm(psi))
    assert_allclose(qmath.apply_kraus(rho, two_qubit_gate_error_kraus(0.0)), rho, atol=1e-12)


def test_channel_spec():
    spec = ChannelSpec("depolarizing", 0.3)
    assert len(spec.kraus()) == 4
    with pytest.raises(ChannelError):
        ChannelSpec("thermal", 0.1)
    with pytest.raises(ChannelError):
        ChannelSpec("phase_damping", 2.0)


def test_coherence_time_warning(caplog):
    assert check_coherence_times(50.0, 80.0)
    assert not check_coherence_times(30.0, 80.0, label="on qubit 3")
    assert "exceeds" in caplog.text
