import math

import numpy as np
from numpy.testing import assert_allclose
import pytest

from calibration.device import ibmqx4, noiseless
from calibration.series import CalibrationSeries, default_series, synth_series
from classifier.ansatz import AnsatzSpec, Topology
from classifier.datasets import iris_dataset, parity_dataset
from classifier.evalx import (
    EvaluationReport, RatioObservation, classify, correct_ratio, evaluate, expected_bit,
    fidelity_series, observe, ratio_cdf, relative_gap, replay,
)
from classifier.train import APP02, APP03, TrainConfig, cost, fit
from middleware.errors import ValidationError
from quantum import qmath
from quantum.circuit import Circuit, GateKind, Instruction
from quantum.simulator import ratio


@pytest.fixture(scope="module")
def parity_model():
    return fit(parity_dataset(), AnsatzSpec(Topology.TTN, 4, 1), TrainConfig(strategy=APP02, iterations=0, seed=7))


def random_density(rng, n):
    psi = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    mixed = np.eye(2 ** n) / 2 ** n
    w = rng.random()
    return w * qmath.density_from_state(psi / np.linalg.norm(psi)) + (1 - w) * mixed


def test_classify_examples():
    decision = classify({"0000": 762, "0001": 262}, 0)
    assert decision.label == 0
    assert decision.ratio == pytest.approx(0.34, abs=0.005)
    decision = classify({"0001": 1024}, 0)
    assert decision.label == 1 and math.isinf(decision.ratio)
    decision = classify({"0": 512, "1": 512}, 0)
    assert decision.tie and decision.label is None


def test_correct_ratio_examples():
    counts = {"0000": 762, "0001": 262}
    assert correct_ratio(counts, 1, 0) == pytest.approx(2.908, abs=1e-3)
    assert correct_ratio(counts, -1, 0) == pytest.approx(ratio(counts, 0))
    assert math.isinf(correct_ratio({"0000": 1024}, 1, 0))


def test_correct_ratio_orientation_matches_tally():
    rng = np.random.default_rng(3)
    counts = {format(i, "03b"): int(rng.integers(1, 40)) for i in range(8)}
    for target in range(3):
        ones = sum(c for b, c in counts.items() if b[2 - target] == "1")
        zeros = sum(counts.values()) - ones
        assert correct_ratio(counts, 1, target) == pytest.approx(zeros / ones)
        assert correct_ratio(counts, -1, target) == pytest.approx(ones / zeros)


def test_exact_ratio_agrees_with_expectation_sign():
    rng = np.random.default_rng(5)
    for _ in range(20):
        rho = random_density(rng, 2)
        for target in range(2):
            class_one = correct_ratio(rho, -1, target) > 1
            assert class_one == (qmath.expectation_z(rho, target) < 0)


def test_observe_and_expected_bit():
    obs = observe({"10": 30, "00": 70}, -1, target=1, input_id=4)
    assert (obs.correct_count, obs.incorrect_count, obs.shots) == (30, 70, 100)
    assert obs.r == pytest.approx(30 / 70)
    assert expected_bit(1) == 0 and expected_bit(-1) == 1
    with pytest.raises(ValidationError):
        expected_bit(0)
    with pytest.raises(ValidationError):
        RatioObservation(0, 1, 10, 3, 4)


def test_ratio_cdf_examples():
    assert ratio_cdf([2.0]) == [(2.0, 1.0)]
    points = dict(ratio_cdf([1.0, 2.0, 3.0, 4.0]))
    assert points[2.0] == 0.5
    with pytest.raises(ValidationError):
        ratio_cdf([])


def test_ratio_cdf_shape():
    values = [3.0, math.inf, 1.5, 3.0, 0.2, math.inf]
    points = ratio_cdf(values)
    rs = [r for r, _ in points]
    cps = [cp for _, cp in points]
    assert rs == [0.2, 1.5, 3.0, math.inf]
    assert cps == sorted(cps)
    assert cps[-1] == 1.0
    assert cps[2] == pytest.approx(4 / 6)


def test_evaluation_report_buckets():
    observations = (
        RatioObservation(0, 1, 10, 10, 0),
        RatioObservation(1, 1, 10, 8, 2),
        RatioObservation(2, -1, 10, 2, 8),
    )
    report = EvaluationReport(observations, shots=10, seed=1)
    assert report.perfect == 1
    assert report.mean_r == pytest.approx((4.0 + 0.25) / 2)
    assert report.accuracy == pytest.approx(2 / 3)
    doc = report.to_dict()
    assert doc["observations"][0]["r"] == math.inf
    assert doc["cdf"][-1] == [math.inf, 1.0]


def test_replay_on_identical_snapshots(parity_model):
    series = CalibrationSeries(tuple((f"day{i}", ibmqx4()) for i in range(3)))
    report = replay(parity_model, parity_dataset(), series)
    assert report.days == ("day0", "day1", "day2")
    assert len(set(report.costs)) == 1
    assert report.min == report.max == report.mean
    frame = report.to_frame()
    assert list(frame.columns) == ["day", "cost", "accuracy"]
    assert len(frame) == 3


def test_replay_single_day_equals_cost(parity_model):
    device = ibmqx4()
    report = replay(parity_model, parity_dataset(), CalibrationSeries((("only", device),)))
    expected = cost(np.asarray(parity_model.theta), parity_dataset().prepared(), parity_model.spec, device=device)
    assert report.cost_on("only") == pytest.approx(expected, abs=1e-12)


def test_replay_zero_noise_day_matches_noiseless_cost(parity_model):
    series = CalibrationSeries((("noisy", ibmqx4()), ("quiet", noiseless(ibmqx4()))))
    report = replay(parity_model, parity_dataset(), series, n_jobs=2)
    clean = cost(np.asarray(parity_model.theta), parity_dataset().prepared(), parity_model.spec)
    assert report.cost_on("quiet") == pytest.approx(clean, abs=1e-8)
    assert report.cost_on("noisy") != pytest.approx(clean, abs=1e-8)


def test_relative_gap():
    assert relative_gap(1.2353, 1.0) == pytest.approx(0.2353)
    with pytest.raises(ValidationError):
        relative_gap(1.0, 0.0)


def test_evaluate_is_seeded(parity_model):
    a = evaluate(parity_model, parity_dataset(), ibmqx4(), shots=128, seed=3, observations=8)
    b = evaluate(parity_model, parity_dataset(), ibmqx4(), shots=128, seed=3, observations=8)
    assert a.to_dict() == b.to_dict()
    assert len(a.observations) == 8
    assert all(o.shots == 128 for o in a.observations)
    assert all(0 <= o.input_id < 16 for o in a.observations)


def test_fidelity_series():
    circuit = Circuit(4, (Instruction(GateKind.X, (0,)), Instruction(GateKind.X, (3,))), 0)
    series = synth_series(ibmqx4(), 3, 0.2, seed=4)
    rows = fidelity_series(circuit, "1001", series)
    assert [day for day, _ in rows] == series.days
    for _, p in rows:
        assert 0.95 < p <= 1.0
    with pytest.raises(ValidationError):
        fidelity_series(circuit, "101", series)


def test_noiseless_fidelity_is_one():
    circuit = Circuit(2, (Instruction(GateKind.X, (1,)),), 0)
    series = CalibrationSeries((("d", noiseless(ibmqx4())),))
    assert_allclose([p for _, p in fidelity_series(circuit, "10", series)], [1.0], atol=1e-8)


def averaged_noise_wins(dataset, spec, batch_size, series, seeds):
    """Seeds for which the app03 model replays cheaper than the app02 model."""
    wins = 0
    for seed in seeds:
        means = {}
        for strategy in (APP02, APP03):
            train_config = TrainConfig(strategy=strategy, iterations=100, batch_size=batch_size, seed=seed)
            means[strategy] = replay(fit(dataset, spec, train_config, series), dataset, series).mean
        wins += means[APP03] < means[APP02]
    return wins


@pytest.mark.slow
def test_averaged_noise_training_drifts_better_on_parity():
    wins = averaged_noise_wins(parity_dataset(), AnsatzSpec(Topology.TTN, 4, 1), 1, default_series(), range(10))
    assert wins >= 8


@pytest.mark.slow
def test_averaged_noise_training_drifts_better_on_iris():
    wins = averaged_noise_wins(iris_dataset(), AnsatzSpec(Topology.IRIS_LAYER, 2, 4), 5, default_series(), range(10))
    assert wins >= 8


@pytest.mark.slow
def test_single_day_model_is_best_on_its_own_day():
    full = default_series()
    days = full.days[0:40:4]
    series = CalibrationSeries(tuple((day, full.snapshot(day)) for day in days))
    spec = AnsatzSpec(Topology.TTN, 4, 1)
    # costs[i][j]: model trained on days[i], replayed on days[j]
    costs = []
    for day in days:
        train_config = TrainConfig(strategy=f"app01:{day}", iterations=100, seed=7)
        costs.append(replay(fit(parity_dataset(), spec, train_config, series), parity_dataset(), series).costs)
    costs = np.array(costs)
    fresh = 0
    for i in range(len(days)):
        stale = np.delete(costs[:, i], i)
        fresh += costs[i, i] <= stale.mean()
    assert len(days) == 10
    assert fresh >= 8
