import numpy as np
from numpy.testing import assert_allclose
import pytest

from calibration.device import DeviceModel, ibmqx4, load_device, save_device
from calibration.series import (
    CalibrationSeries, average_device, day_label, default_series, iqr_filter,
    load_series, save_series, series_stats, synth_series,
)
from config import config
from middleware.errors import CalibrationError, ValidationError

HEADER = "day,kind,index,t1_us,t2_us,err_1q,readout_err,err_2q\n"


def write_one_day(tmp_path, t1_q1="52.0", name="calib.csv"):
    lines = [HEADER]
    t1 = ["48.0", t1_q1, "45.0", "40.0", "55.0"]
    for q in range(5):
        lines.append(f"day01,qubit,{q},{t1[q]},30.0,0.001,0.05,\n")
    for c, t in ((1, 0), (2, 0), (2, 1), (3, 2), (3, 4), (4, 2)):
        lines.append(f"day01,edge,{c}-{t},,,,,0.03\n")
    path = tmp_path / name
    path.write_text("".join(lines))
    return path


def test_iqr_filter_examples():
    assert iqr_filter([1, 2, 3, 4]) == [1, 2, 3, 4]
    assert iqr_filter([1, 2, 3, 4, 100]) == [1, 2, 3, 4]
    assert np.mean(iqr_filter([1, 2, 3, 4, 100])) == pytest.approx(2.5)
    assert iqr_filter([5, 5, 5, 5]) == [5, 5, 5, 5]


def test_iqr_filter_short_input_passes_through(caplog):
    assert iqr_filter([1.0, 50.0]) == [1.0, 50.0]
    assert "at least 4" in caplog.text


def test_iqr_filter_preserves_order_and_bounds():
    rng = np.random.default_rng(6)
    for _ in range(100):
        values = rng.normal(size=int(rng.integers(4, 30))).tolist()
        kept = iqr_filter(values)
        assert kept
        assert kept == [v for v in values if v in kept]
        assert min(kept) >= min(values) and max(kept) <= max(values)


def test_iqr_filter_ignores_order():
    rng = np.random.default_rng(10)
    for _ in range(1000):
        values = rng.lognormal(size=int(rng.integers(4, 20))).tolist()
        shuffled = list(rng.permutation(values))
        assert sorted(iqr_filter(shuffled)) == sorted(iqr_filter(values))


def test_iqr_filter_is_stable_on_pinned_lists():
    for values in ([1, 2, 3, 4, 100], [50, 52, 48, 51, 5], [5, 5, 5, 5]):
        once = iqr_filter(values)
        assert iqr_filter(once) == once


def test_average_device_filters_each_metric():
    base = ibmqx4()
    t1_values = [50.0, 52.0, 48.0, 51.0, 5.0]
    snapshots = []
    for i, t1 in enumerate(t1_values):
        t1s = list(base.t1_us)
        t1s[2] = t1
        snapshots.append((day_label(i), base.with_metrics(t1_us=tuple(t1s))))
    avg = average_device(CalibrationSeries(tuple(snapshots)))
    assert avg.t1_us[2] == pytest.approx(50.25)
    # T2 on the outlier day still counts
    assert avg.t2_us[2] == pytest.approx(base.t2_us[2])
    assert avg.edges == base.edges
    assert avg.gate_time_2q_ns == base.gate_time_2q_ns


def test_average_device_ignores_day_order():
    series = synth_series(ibmqx4(), 12, 0.3, seed=5)
    avg = average_device(series)
    rng = np.random.default_rng(9)
    for _ in range(5):
        order = rng.permutation(len(series))
        shuffled = average_device(CalibrationSeries(tuple(series.snapshots[i] for i in order)))
        for name in ("t1_us", "t2_us", "err_1q", "readout_err"):
            assert_allclose(getattr(shuffled, name), getattr(avg, name), rtol=1e-12)
        assert_allclose([shuffled.err_2q[e] for e in avg.edges], [avg.err_2q[e] for e in avg.edges], rtol=1e-12)


def test_average_of_single_snapshot():
    base = ibmqx4()
    assert average_device(CalibrationSeries((("d", base),))) == base


def test_series_invariants():
    base = ibmqx4()
    with pytest.raises(ValidationError):
        CalibrationSeries(())
    with pytest.raises(ValidationError):
        CalibrationSeries((("a", base), ("a", base)))
    other = DeviceModel(n_qubits=2, edges=((1, 0),), t1_us=(1.0, 1.0), t2_us=(1.0, 1.0),
                        err_1q=(0.0, 0.0), err_2q={(1, 0): 0.0})
    with pytest.raises(ValidationError):
        CalibrationSeries((("a", base), ("b", other)))
    with pytest.raises(ValidationError):
        CalibrationSeries((("a", base),)).snapshot("b")


def test_load_one_day(tmp_path):
    series = load_series(write_one_day(tmp_path), template=ibmqx4())
    assert len(series) == 1
    assert series.n_qubits == 5
    assert len(series.edges) == 6
    assert series.snapshot("day01").t1_us[1] == 52.0
    assert series.snapshot("day01").gate_time_2q_ns == ibmqx4().gate_time_2q_ns


def test_load_negative_t1_names_the_cell(tmp_path):
    with pytest.raises(CalibrationError) as info:
        load_series(write_one_day(tmp_path, t1_q1="-3"))
    assert info.value.row == 3
    assert info.value.column == "t1_us"
    assert "row 3" in str(info.value)


def test_load_non_numeric_cell(tmp_path):
    with pytest.raises(CalibrationError) as info:
        load_series(write_one_day(tmp_path, t1_q1="fast"))
    assert info.value.column == "t1_us"


def test_load_missing_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("day,kind,index,t1_us\nday01,qubit,0,40\n")
    with pytest.raises(CalibrationError, match="missing columns"):
        load_series(path)


def test_load_inconsistent_qubit_counts(tmp_path):
    path = write_one_day(tmp_path)
    with open(path, "a") as f:
        f.write("day02,qubit,0,48.0,30.0,0.001,0.05,\n")
    with pytest.raises(CalibrationError):
        load_series(path)


def test_save_and_load_series(tmp_path):
    series = synth_series(ibmqx4(), 3, 0.2, seed=1)
    path = tmp_path / "series.csv"
    save_series(series, path)
    loaded = load_series(path, template=ibmqx4())
    assert loaded.days == series.days
    for a, b in zip(loaded.devices, series.devices):
        assert_allclose(a.t1_us, b.t1_us)
        assert_allclose(a.readout_err, b.readout_err)
        assert_allclose([a.err_2q[e] for e in a.edges], [b.err_2q[e] for e in a.edges])


def test_device_json_round_trip(tmp_path):
    path = tmp_path / "device.json"
    save_device(ibmqx4(), path)
    assert load_device(path) == ibmqx4()


def test_shipped_device_fixture_matches_builder():
    assert load_device(config.DEVICE_JSON) == ibmqx4()


def test_device_rejects_bad_values():
    base = ibmqx4()
    with pytest.raises(CalibrationError):
        base.with_metrics(err_1q=(0.1, 0.1, 1.5, 0.1, 0.1))
    with pytest.raises(CalibrationError):
        base.with_metrics(t1_us=(0.0, 1.0, 1.0, 1.0, 1.0))
    with pytest.raises(CalibrationError):
        base.with_metrics(err_2q={(1, 0): 0.1})


def test_synth_series_is_deterministic():
    a = synth_series(ibmqx4(), 10, 0.2, seed=3)
    b = synth_series(ibmqx4(), 10, 0.2, seed=3)
    assert a == b
    assert a.days[0] == "day01" and a.days[-1] == "day10"


def test_synth_series_without_drift():
    base = ibmqx4()
    series = synth_series(base, 5, 0.0, seed=1)
    assert all(d == base for d in series.devices)


def test_synth_series_spread():
    base = ibmqx4()
    hits = 0
    for seed in range(100):
        series = synth_series(base, 43, 0.2, seed=seed)
        t1 = np.array([d.t1_us[0] for d in series.devices])
        if 0.1 <= t1.std(ddof=1) / t1.mean() <= 0.35:
            hits += 1
    assert hits >= 95


def test_default_series_shape():
    series = default_series()
    assert len(series) == 43
    assert series.n_qubits == 5
    assert len(series.edges) == 6


def test_series_stats_counts_outliers():
    base = ibmqx4()
    snapshots = []
    for i, t1 in enumerate([50.0, 52.0, 48.0, 51.0, 5.0]):
        t1s = list(base.t1_us)
        t1s[2] = t1
        snapshots.append((day_label(i), base.with_metrics(t1_us=tuple(t1s))))
    stats = series_stats(CalibrationSeries(tuple(snapshots)))
    row = stats[(stats["metric"] == "t1_us") & (stats["index"] == "2")].iloc[0]
    assert row["outliers"] == 1
    assert row["filtered_mean"] == pytest.approx(50.25)
    assert row["min"] == 5.0
    assert set(stats["metric"]) == {"t1_us", "t2_us", "err_1q", "readout_err", "err_2q"}
