"""
Device noise snapshot: coupling graph, coherence times, gate errors and gate times.
"""
from dataclasses import dataclass, field, replace
import json
import logging
import math

from config import config
from middleware.errors import CalibrationError, DataFileError
from quantum.circuit import GateKind

logger = logging.getLogger(__name__)


def edge_key(edge):
    return f"{int(edge[0])}-{int(edge[1])}"


def parse_edge_key(key):
    try:
        c, t = str(key).split("-")
        return int(c), int(t)
    except ValueError as e:
        raise CalibrationError(f"edge '{key}' is not a 'control-target' pair") from e


@dataclass(frozen=True, eq=True)
class DeviceModel:
    n_qubits: int
    edges: tuple
    t1_us: tuple
    t2_us: tuple
    err_1q: tuple
    err_2q: dict
    gate_time_1q_ns: float = config.GATE_TIME_1Q_NS
    gate_time_2q_ns: float = config.GATE_TIME_2Q_NS
    native_1q_gates: tuple = ("U3",)
    readout_err: tuple = None
    gate_time_overrides_ns: dict = field(default_factory=dict)
    edge_gate_time_ns: dict = field(default_factory=dict)

    __hash__ = None

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(c), int(t)) for c, t in self.edges))
        for name in ("t1_us", "t2_us", "err_1q"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        object.__setattr__(self, "err_2q", {(int(c), int(t)): float(p) for (c, t), p in self.err_2q.items()})
        object.__setattr__(self, "native_1q_gates", tuple(GateKind(g).value for g in self.native_1q_gates))
        if self.readout_err is not None:
            object.__setattr__(self, "readout_err", tuple(float(v) for v in self.readout_err))
        self._check()

    def _check(self):
        n = self.n_qubits
        if n < 1:
            raise CalibrationError(f"device needs at least one qubit, got {n}")
        for name in ("t1_us", "t2_us", "err_1q"):
            if len(getattr(self, name)) != n:
                raise CalibrationError(f"{name} has {len(getattr(self, name))} entries for {n} qubits")
        if self.readout_err is not None and len(self.readout_err) != n:
            raise CalibrationError(f"readout_err has {len(self.readout_err)} entries for {n} qubits")
        for c, t in self.edges:
            if not (0 <= c < n and 0 <= t < n) or c == t:
                raise CalibrationError(f"edge {c}-{t} is not a pair of distinct qubits below {n}")
        if set(self.err_2q) != set(self.edges):
            raise CalibrationError("err_2q must hold exactly one value per coupling edge")
        for q in range(n):
            if not (self.t1_us[q] > 0 and self.t2_us[q] > 0) or math.isinf(self.t1_us[q]):
                raise CalibrationError(f"qubit {q}: coherence times must be positive and finite")
            if not 0.0 <= self.err_1q[q] <= 1.0:
                raise CalibrationError(f"qubit {q}: err_1q {self.err_1q[q]} outside [0, 1]")
        for e, p in self.err_2q.items():
            if not 0.0 <= p <= 1.0:
                raise CalibrationError(f"edge {edge_key(e)}: err_2q {p} outside [0, 1]")
        if self.gate_time_1q_ns <= 0 or self.gate_time_2q_ns <= 0:
            raise CalibrationError("gate times must be positive")

    def duration_ns(self, kind, qubits=None):
        """Duration of one gate. 2q gates honour a per-edge override when present."""
        kind = GateKind(kind)
        if kind.arity == 2:
            if qubits is not None:
                override = self.edge_gate_time_ns.get(edge_key(qubits))
                if override is not None:
                    return float(override)
            return float(self.gate_time_2q_ns)
        return float(self.gate_time_overrides_ns.get(kind.value, self.gate_time_1q_ns))

    def to_dict(self):
        qubits = []
        for q in range(self.n_qubits):
            entry = {"t1_us": self.t1_us[q], "t2_us": self.t2_us[q], "err_1q": self.err_1q[q]}
            if self.readout_err is not None:
                entry["readout_err"] = self.readout_err[q]
            qubits.append(entry)
        data = {
            "n_qubits": self.n_qubits,
            "edges": [list(e) for e in self.edges],
            "gate_time_1q_ns": self.gate_time_1q_ns,
            "gate_time_2q_ns": self.gate_time_2q_ns,
            "native_1q_gates": list(self.native_1q_gates),
            "qubits": qubits,
            "edge_err": {edge_key(e): self.err_2q[e] for e in self.edges},
        }
        if self.gate_time_overrides_ns:
            data["gate_time_overrides_ns"] = dict(self.gate_time_overrides_ns)
        if self.edge_gate_time_ns:
            data["edge_gate_time_ns"] = dict(self.edge_gate_time_ns)
        return data

    @classmethod
    def from_dict(cls, data):
        try:
            qubits = data["qubits"]
            readout = [q.get("readout_err") for q in qubits]
            return cls(
                n_qubits=int(data["n_qubits"]),
                edges=tuple(tuple(e) for e in data["edges"]),
                t1_us=[q["t1_us"] for q in qubits],
                t2_us=[q["t2_us"] for q in qubits],
                err_1q=[q["err_1q"] for q in qubits],
                err_2q={parse_edge_key(k): v for k, v in data["edge_err"].items()},
                gate_time_1q_ns=float(data.get("gate_time_1q_ns", config.GATE_TIME_1Q_NS)),
                gate_time_2q_ns=float(data.get("gate_time_2q_ns", config.GATE_TIME_2Q_NS)),
                native_1q_gates=tuple(data.get("native_1q_gates", ["U3"])),
                readout_err=None if any(r is None for r in readout) else readout,
                gate_time_overrides_ns=dict(data.get("gate_time_overrides_ns", {})),
                edge_gate_time_ns=dict(data.get("edge_gate_time_ns", {})),
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, CalibrationError):
                raise
            raise CalibrationError(f"malformed device document: {e}") from e

    def with_metrics(self, **metrics):
        return replace(self, **metrics)


def load_device(path):
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise DataFileError(f"invalid JSON: {e}", path=path) from e
    try:
        return DeviceModel.from_dict(data)
    except CalibrationError as e:
        e.path = path
        raise


def save_device(device, path):
    with open(path, "w") as f:
        json.dump(device.to_dict(), f, indent=2, sort_keys=True)


IBMQX4_EDGES = ((1, 0), (2, 0), (2, 1), (3, 2), (3, 4), (4, 2))


def ibmqx4():
    """Representative IBMQX4 (Tenerife) snapshot; same numbers as fixtures/ibmqx4.json."""
    return DeviceModel(
        n_qubits=5,
        edges=IBMQX4_EDGES,
        t1_us=(48.0, 52.0, 45.0, 40.0, 55.0),
        t2_us=(38.0, 45.0, 30.0, 25.0, 42.0),
        err_1q=(0.0012, 0.0015, 0.0018, 0.0021, 0.0014),
        err_2q={(1, 0): 0.032, (2, 0): 0.028, (2, 1): 0.035, (3, 2): 0.041, (3, 4): 0.038, (4, 2): 0.030},
        gate_time_1q_ns=120.0,
        gate_time_2q_ns=400.0,
        native_1q_gates=("U3",),
        readout_err=(0.05, 0.06, 0.04, 0.07, 0.05),
    )


def noiseless(device):
    """Same topology and timing with every error source switched off."""
    return replace(
        device,
        t1_us=tuple(1e9 for _ in range(device.n_qubits)),
        t2_us=tuple(1e9 for _ in range(device.n_qubits)),
        err_1q=tuple(0.0 for _ in range(device.n_qubits)),
        err_2q={e: 0.0 for e in device.edges},
    )
