"""
Calibration history: a day-ordered sequence of DeviceModel snapshots.

CSV layout, one row per (day, qubit) and per (day, edge):

    day,kind,index,t1_us,t2_us,err_1q,readout_err,err_2q
    day01,qubit,0,48.0,38.0,0.0012,0.05,
    day01,edge,1-0,,,,,0.032

Qubit rows leave ``err_2q`` empty, edge rows leave the qubit metrics empty.
``readout_err`` may be empty on every row; any other missing cell is an error.
"""
from dataclasses import dataclass, replace
import logging
import math

import numpy as np
import pandas as pd

from calibration.device import DeviceModel, edge_key, ibmqx4, parse_edge_key
from config import config
from middleware.errors import CalibrationError, DataFileError, ValidationError

logger = logging.getLogger(__name__)

COLUMNS = ["day", "kind", "index", "t1_us", "t2_us", "err_1q", "readout_err", "err_2q"]
QUBIT_METRICS = ("t1_us", "t2_us", "err_1q")
TIME_METRICS = ("t1_us", "t2_us")
EXCURSION_PROBABILITY = 0.05
EXCURSION_SIGMAS = 3.0


def day_label(i):
    return f"day{i + 1:02d}"


@dataclass(frozen=True)
class CalibrationSeries:
    """Ordered (day_label, DeviceModel) pairs sharing one topology."""
    snapshots: tuple

    def __post_init__(self):
        object.__setattr__(self, "snapshots", tuple((str(d), m) for d, m in self.snapshots))
        if not self.snapshots:
            raise ValidationError("calibration series is empty")
        first = self.snapshots[0][1]
        labels = set()
        for day, device in self.snapshots:
            if day in labels:
                raise ValidationError(f"day '{day}' appears twice")
            labels.add(day)
            if device.n_qubits != first.n_qubits or set(device.edges) != set(first.edges):
                raise ValidationError(f"day '{day}' has a different topology than '{self.snapshots[0][0]}'")

    def __len__(self):
        return len(self.snapshots)

    def __iter__(self):
        return iter(self.snapshots)

    @property
    def days(self):
        return [d for d, _ in self.snapshots]

    @property
    def devices(self):
        return [m for _, m in self.snapshots]

    @property
    def n_qubits(self):
        return self.snapshots[0][1].n_qubits

    @property
    def edges(self):
        return self.snapshots[0][1].edges

    def snapshot(self, day):
        for d, device in self.snapshots:
            if d == day:
                return device
        raise ValidationError(f"unknown day '{day}'; series holds {self.days[0]}..{self.days[-1]}")


# ---------------- CSV I/O ----------------

def _cell(row, column, line, path, required=True, lower=None, upper=None, positive=False):
    raw = str(row.get(column, "")).strip()
    if raw == "":
        if required:
            raise CalibrationError("missing value", path=path, row=line, column=column)
        return None
    try:
        value = float(raw)
    except ValueError:
        raise CalibrationError(f"'{raw}' is not a number", path=path, row=line, column=column) from None
    if math.isnan(value) or math.isinf(value):
        raise CalibrationError(f"'{raw}' is not finite", path=path, row=line, column=column)
    if positive and value <= 0:
        raise CalibrationError(f"{value} must be positive", path=path, row=line, column=column)
    if lower is not None and (value < lower or value > upper):
        raise CalibrationError(f"{value} outside [{lower}, {upper}]", path=path, row=line, column=column)
    return value


def load_series(path, template=None):
    """
    Parse a calibration CSV into a CalibrationSeries, days in file order.

    Gate times and native gates are not calibration variables; they come
    from ``template`` (a DeviceModel) or the configured defaults.
    """
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataFileError(f"unreadable CSV: {e}", path=path) from e

    required = [c for c in COLUMNS if c != "readout_err"]
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise CalibrationError(f"missing columns {missing}", path=path)

    days = {}
    for i, row in enumerate(df.to_dict("records")):
        line = i + 2  # header is line 1
        day = str(row["day"]).strip()
        if not day:
            raise CalibrationError("missing value", path=path, row=line, column="day")
        entry = days.setdefault(day, {"qubits": {}, "edges": {}})
        kind = str(row["kind"]).strip().lower()
        index = str(row["index"]).strip()
        if kind == "qubit":
            try:
                q = int(index)
            except ValueError:
                raise CalibrationError(f"'{index}' is not a qubit id", path=path, row=line, column="index") from None
            if q in entry["qubits"]:
                raise CalibrationError(f"qubit {q} listed twice for {day}", path=path, row=line, column="index")
            entry["qubits"][q] = {
                "t1_us": _cell(row, "t1_us", line, path, positive=True),
                "t2_us": _cell(row, "t2_us", line, path, positive=True),
                "err_1q": _cell(row, "err_1q", line, path, lower=0.0, upper=1.0),
                "readout_err": _cell(row, "readout_err", line, path, required=False, lower=0.0, upper=1.0),
            }
        elif kind == "edge":
            try:
                edge = parse_edge_key(index)
            except CalibrationError as e:
                raise CalibrationError(str(e), path=path, row=line, column="index") from None
            if edge in entry["edges"]:
                raise CalibrationError(f"edge {index} listed twice for {day}", path=path, row=line, column="index")
            entry["edges"][edge] = _cell(row, "err_2q", line, path, lower=0.0, upper=1.0)
        else:
            raise CalibrationError(f"kind must be 'qubit' or 'edge', got '{kind}'", path=path, row=line, column="kind")

    if not days:
        raise CalibrationError("no calibration rows", path=path)

    base = template or DeviceModel(
        n_qubits=1, edges=(), t1_us=(1.0,), t2_us=(1.0,), err_1q=(0.0,), err_2q={})
    snapshots = []
    n_expected = None
    for day, entry in days.items():
        qubits = entry["qubits"]
        n = len(qubits)
        if sorted(qubits) != list(range(n)):
            raise CalibrationError(f"{day}: qubit ids {sorted(qubits)} are not 0..{n - 1}", path=path, column="index")
        if n_expected is None:
            n_expected = n
        elif n != n_expected:
            raise CalibrationError(f"{day}: {n} qubits, earlier days have {n_expected}", path=path, column="index")
        readout = [qubits[q]["readout_err"] for q in range(n)]
        try:
            device = DeviceModel(
                n_qubits=n,
                edges=tuple(entry["edges"]),
                t1_us=[qubits[q]["t1_us"] for q in range(n)],
                t2_us=[qubits[q]["t2_us"] for q in range(n)],
                err_1q=[qubits[q]["err_1q"] for q in range(n)],
                err_2q=entry["edges"],
                gate_time_1q_ns=base.gate_time_1q_ns,
                gate_time_2q_ns=base.gate_time_2q_ns,
                native_1q_gates=base.native_1q_gates,
                readout_err=None if any(r is None for r in readout) else readout,
                gate_time_overrides_ns=dict(base.gate_time_overrides_ns),
                edge_gate_time_ns=dict(base.edge_gate_time_ns),
            )
        except CalibrationError as e:
            raise CalibrationError(f"{day}: {e}", path=path) from e
        snapshots.append((day, device))
    try:
        series = CalibrationSeries(tuple(snapshots))
    except ValidationError as e:
        raise CalibrationError(str(e), path=path) from e
    logger.info(f"Loaded {len(series)} calibration days ({n_expected} qubits) from {path}")
    return series


def series_frame(series):
    """The CSV rows of a series as a DataFrame (columns in COLUMNS order)."""
    rows = []
    for day, d in series:
        for q in range(d.n_qubits):
            rows.append({
                "day": day, "kind": "qubit", "index": str(q),
                "t1_us": d.t1_us[q], "t2_us": d.t2_us[q], "err_1q": d.err_1q[q],
                "readout_err": None if d.readout_err is None else d.readout_err[q],
                "err_2q": None,
            })
        for e in d.edges:
            rows.append({
                "day": day, "kind": "edge", "index": edge_key(e),
                "t1_us": None, "t2_us": None, "err_1q": None, "readout_err": None,
                "err_2q": d.err_2q[e],
            })
    return pd.DataFrame(rows, columns=COLUMNS)


def save_series(series, path):
    series_frame(series).to_csv(path, index=False)
    logger.info(f"Wrote {len(series)} calibration days to {path}")


# ---------------- Outlier filtering and averaging ----------------

def iqr_bounds(values, k=None):
    k = config.IQR_K if k is None else float(k)
    q1, q3 = np.percentile(np.asarray(values, dtype=float), [25, 75])
    spread = q3 - q1
    return q1 - k * spread, q3 + k * spread


def iqr_filter(values, k=None):
    """
    Keep values inside [Q1 - k*IQR, Q3 + k*IQR], order and multiplicity preserved.

    Quartiles interpolate linearly between order statistics. Fewer than four
    values, or a rule that would drop everything, pass through unchanged.
    """
    values = [float(v) for v in values]
    if len(values) < 4:
        logger.warning(f"IQR filter needs at least 4 values, got {len(values)}; keeping all")
        return values
    low, high = iqr_bounds(values, k)
    kept = [v for v in values if low <= v <= high]
    if not kept:
        logger.warning("IQR filter removed every value; keeping all")
        return values
    return kept


def _filtered_mean(values, k):
    return float(np.mean(iqr_filter(values, k)))


def average_device(series, k=None):
    """
    Per-metric mean of the IQR-filtered daily values. Each metric on each
    qubit or edge is filtered on its own; topology and gate times come from
    the first snapshot.
    """
    devices = series.devices
    first = devices[0]
    n = first.n_qubits
    metrics = {
        name: tuple(_filtered_mean([getattr(d, name)[q] for d in devices], k) for q in range(n))
        for name in QUBIT_METRICS
    }
    metrics["err_2q"] = {e: _filtered_mean([d.err_2q[e] for d in devices], k) for e in first.edges}
    if all(d.readout_err is not None for d in devices):
        metrics["readout_err"] = tuple(_filtered_mean([d.readout_err[q] for d in devices], k) for q in range(n))
    else:
        metrics["readout_err"] = None
    logger.debug(f"Averaged {len(devices)} snapshots")
    return first.with_metrics(**metrics)


def series_stats(series, k=None):
    """
    Per-metric mean/min/max and IQR outlier count across days, one row per
    (metric, qubit or edge).
    """
    df = series_frame(series)
    rows = []
    for metric in QUBIT_METRICS + ("readout_err", "err_2q"):
        kind = "edge" if metric == "err_2q" else "qubit"
        subset = df[df["kind"] == kind]
        for index, group in subset.groupby("index", sort=False):
            values = group[metric].dropna().astype(float).tolist()
            if not values:
                continue
            kept = iqr_filter(values, k) if len(values) >= 4 else values
            rows.append({
                "metric": metric,
                "index": index,
                "mean": float(np.mean(values)),
                "min": float(np.min(values)),
                "max": float(np.max(values)),
                "outliers": len(values) - len(kept),
                "filtered_mean": float(np.mean(kept)),
            })
    return pd.DataFrame(rows, columns=["metric", "index", "mean", "min", "max", "outliers", "filtered_mean"])


# ---------------- Synthetic history ----------------

def _drift_factors(rng, size, drift):
    z = rng.standard_normal(size)
    excursion = rng.random(size) < EXCURSION_PROBABILITY
    signs = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    z = np.where(excursion, EXCURSION_SIGMAS * signs, z)
    return np.exp(drift * z)


def synth_series(base, days, drift, seed):
    """
    Log-normal multiplicative drift of every calibration metric around
    ``base``, with occasional 3-sigma excursions. Deterministic in ``seed``.
    """
    if drift < 0:
        raise ValidationError(f"drift must be non-negative, got {drift}")
    if days < 1:
        raise ValidationError(f"days must be at least 1, got {days}")
    rng = np.random.default_rng(seed)
    n = base.n_qubits
    edges = base.edges
    has_readout = base.readout_err is not None
    snapshots = []
    for i in range(days):
        t1 = np.asarray(base.t1_us) * _drift_factors(rng, n, drift)
        t2 = np.asarray(base.t2_us) * _drift_factors(rng, n, drift)
        e1 = np.clip(np.asarray(base.err_1q) * _drift_factors(rng, n, drift), 0.0, 1.0)
        e2 = np.clip(np.asarray([base.err_2q[e] for e in edges]) * _drift_factors(rng, len(edges), drift), 0.0, 1.0)
        ro = np.clip(np.asarray(base.readout_err) * _drift_factors(rng, n, drift), 0.0, 1.0) if has_readout else None
        device = replace(
            base,
            t1_us=tuple(float(v) for v in t1),
            t2_us=tuple(float(v) for v in t2),
            err_1q=tuple(float(v) for v in e1),
            err_2q={e: float(v) for e, v in zip(edges, e2)},
            readout_err=None if ro is None else tuple(float(v) for v in ro),
        )
        snapshots.append((day_label(i), device))
    logger.info(f"Synthesized {days} calibration days (drift={drift}, seed={seed})")
    return CalibrationSeries(tuple(snapshots))


def default_series():
    """The shipped 43-day history: the fixture CSV when present, else regenerated from its seed."""
    path = config.FIXTURES_DIR / "ibmqx4_series.csv"
    template = ibmqx4()
    if path.exists():
        return load_series(path, template=template)
    return synth_series(template, config.SYNTH_DAYS, config.SYNTH_DRIFT, config.FIXTURE_SEED)
