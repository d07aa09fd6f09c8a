"""
Cost, finite-difference gradients and the gradient-descent trainer.

Three strategies choose the noise model seen during training:

    app01:<day>  the calibration snapshot of one day
    app02        no noise
    app03        IQR-filtered average of the whole calibration series
"""
from dataclasses import asdict, dataclass
import logging
import math

from joblib import Parallel, delayed
import numpy as np

from calibration.series import average_device
from classifier.ansatz import AnsatzSpec, build, resolve_mapping
from config import config
from middleware.errors import ValidationError
from quantum import qmath
from quantum.circuit import Circuit, bind, require_valid
from quantum.noise import TQ_NOISE_MODES
from quantum.simulator import NOISE_OFF, NoisySimulator, RunConfig
from utils.io import parse_float, read_json, write_json
from utils.manifest import derive_seed

logger = logging.getLogger(__name__)

APP01 = "app01"
APP02 = "app02"
APP03 = "app03"
STRATEGIES = (APP01, APP02, APP03)


def parse_strategy(strategy):
    """'app01:day03' -> ('app01', 'day03'); 'app02' -> ('app02', None)"""
    tag, _, day = str(strategy).partition(":")
    tag = tag.strip().lower()
    day = day.strip() or None
    if tag not in STRATEGIES:
        raise ValidationError(f"unknown strategy '{strategy}'; use app01:<day>, app02 or app03")
    if tag == APP01 and day is None:
        raise ValidationError("app01 needs a day label, e.g. app01:day01")
    if tag != APP01 and day is not None:
        raise ValidationError(f"{tag} takes no day label")
    return tag, day


@dataclass(frozen=True)
class TrainConfig:
    strategy: str = APP02
    iterations: int = config.ITERATIONS
    batch_size: int = 1
    learning_rate: float = config.LEARNING_RATE
    fd_step: float = config.FD_STEP
    seed: int = config.DEFAULT_SEED
    tq_noise_mode: str = config.TQ_NOISE_MODE
    idle_decoherence: bool = config.IDLE_DECOHERENCE
    n_jobs: int = config.N_JOBS

    def __post_init__(self):
        parse_strategy(self.strategy)
        if self.iterations < 0:
            raise ValidationError(f"iterations must be non-negative, got {self.iterations}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be at least 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ValidationError(f"learning_rate must be positive, got {self.learning_rate}")
        if not self.fd_step > 0:
            raise ValidationError(f"fd_step must be positive, got {self.fd_step}")
        if self.tq_noise_mode not in TQ_NOISE_MODES:
            raise ValidationError(f"tq_noise_mode must be one of {TQ_NOISE_MODES}, got '{self.tq_noise_mode}'")

    def run_config(self, device):
        if device is None:
            return NOISE_OFF
        return RunConfig(noise=True, idle_decoherence=self.idle_decoherence, tq_noise_mode=self.tq_noise_mode)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)


class Objective:
    """
    Mean squared residual between labels and the target-qubit expectation
    of prep(x) followed by the model circuit.

    Prepared input states are simulated once and reused for every
    parameter vector.
    """

    def __init__(self, model, items, target, device=None, run_config=None, layout=None, n_jobs=None):
        items = list(items)
        if not items:
            raise ValidationError("batch is empty")
        self.model = model
        self.target = int(target)
        self.labels = np.array([y for _, y in items], dtype=float)
        self.n_jobs = config.N_JOBS if n_jobs is None else n_jobs
        cfg = run_config or (RunConfig() if device is not None else NOISE_OFF)
        self.simulator = NoisySimulator(device, cfg, n_qubits=model.n_qubits, layout=layout)
        if device is not None:
            require_valid(model, device, self.simulator.layout)
        self._prepared = [self.simulator.run(prep) for prep, _ in items]

    def __len__(self):
        return len(self._prepared)

    def _indices(self, indices):
        return range(len(self)) if indices is None else indices

    def state(self, theta, index):
        return self.simulator.run(bind(self.model, theta), initial=self._prepared[index])

    def expectations(self, theta, indices=None):
        bound = bind(self.model, theta)
        return np.array([
            qmath.expectation_z(self.simulator.run(bound, initial=self._prepared[i]), self.target)
            for i in self._indices(indices)
        ])

    def cost(self, theta, indices=None):
        idx = list(self._indices(indices))
        residual = self.labels[idx] - self.expectations(theta, idx)
        return float(np.mean(residual ** 2))

    def accuracy(self, theta, indices=None):
        """Fraction of items whose expectation has the sign of the label."""
        idx = list(self._indices(indices))
        return float(np.mean(np.sign(self.expectations(theta, idx)) == self.labels[idx]))

    def gradient(self, theta, indices=None, fd_step=None):
        """Central differences, (J(theta + h e_i) - J(theta - h e_i)) / 2h."""
        h = config.FD_STEP if fd_step is None else float(fd_step)
        if not h > 0:
            raise ValidationError(f"fd_step must be positive, got {h}")
        theta = np.asarray(theta, dtype=float)
        shifted = []
        for i in range(theta.size):
            for sign in (1.0, -1.0):
                t = theta.copy()
                t[i] += sign * h
                shifted.append(t)
        values = Parallel(n_jobs=self.n_jobs, prefer="threads")(
            delayed(self.cost)(t, indices) for t in shifted)
        values = np.asarray(values)
        return (values[0::2] - values[1::2]) / (2.0 * h)


def _objective(batch, model, device, target, run_config, layout):
    if isinstance(model, AnsatzSpec):
        target = model.target_qubit if target is None else target
        layout = model.mapping if layout is None else layout
        model = build(model)
    elif not isinstance(model, Circuit):
        raise ValidationError(f"model must be an AnsatzSpec or Circuit, got {type(model).__name__}")
    return Objective(model, batch, 0 if target is None else target, device, run_config, layout)


def cost(theta, batch, model, device=None, target=None, run_config=None, layout=None):
    """
    Mean squared residual over ``batch``, a list of (prep circuit, label).
    ``device=None`` simulates without noise.
    """
    return _objective(batch, model, device, target, run_config, layout).cost(theta)


def gradient(theta, batch, model, device=None, target=None, run_config=None, layout=None, fd_step=None):
    return _objective(batch, model, device, target, run_config, layout).gradient(theta, fd_step=fd_step)


@dataclass(frozen=True)
class TrainedModel:
    task: str
    spec: AnsatzSpec
    theta: tuple
    strategy: str
    cost_trace: tuple
    config: dict
    device: dict
    angles: str = "standard"

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))
        object.__setattr__(self, "cost_trace", tuple(float(c) for c in self.cost_trace))
        if len(self.theta) != self.spec.n_params:
            raise ValidationError(f"theta has {len(self.theta)} entries, the ansatz needs {self.spec.n_params}")

    @property
    def train_config(self):
        return TrainConfig.from_dict(self.config)

    def circuit(self):
        return bind(build(self.spec), self.theta)

    def objective(self, dataset, device=None, n_jobs=None):
        """Objective of this model's ansatz on ``dataset`` under ``device`` (None: no noise)."""
        if dataset.n_qubits != self.spec.n_qubits:
            raise ValidationError(f"{dataset.task} needs {dataset.n_qubits} qubits, model has {self.spec.n_qubits}")
        return Objective(build(self.spec), dataset.prepared(), self.spec.target_qubit, device,
                         self.train_config.run_config(device), self.spec.mapping, n_jobs)

    def to_dict(self):
        return {
            "task": self.task,
            "spec": self.spec.to_dict(),
            "theta": list(self.theta),
            "strategy": self.strategy,
            "cost_trace": list(self.cost_trace),
            "config": dict(self.config),
            "device": dict(self.device),
            "angles": self.angles,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                task=data["task"],
                spec=AnsatzSpec.from_dict(data["spec"]),
                theta=tuple(parse_float(t) for t in data["theta"]),
                strategy=data["strategy"],
                cost_trace=tuple(parse_float(c) for c in data["cost_trace"]),
                config=dict(data.get("config", {})),
                device=dict(data.get("device", {})),
                angles=data.get("angles", "standard"),
            )
        except (KeyError, TypeError) as e:
            raise ValidationError(f"malformed model document: {e}") from e


def save_model(model, path, manifest=None):
    return write_json(path, model.to_dict(), manifest)


def load_model(path):
    return TrainedModel.from_dict(read_json(path))


def training_device(strategy, series):
    """(device or None, provenance) for a strategy string."""
    tag, day = parse_strategy(strategy)
    if tag == APP02:
        return None, {"source": "noiseless"}
    if series is None:
        raise ValidationError(f"{tag} needs a calibration series")
    if tag == APP01:
        return series.snapshot(day), {"source": "snapshot", "day": day}
    return average_device(series), {"source": "average", "days": len(series), "iqr_k": config.IQR_K}


def fit(dataset, spec, train_config, series=None, topology_device=None, mapping_index=0):
    """
    Gradient descent over ``train_config.iterations`` epochs. Each epoch
    reshuffles the dataset (seeded) and steps once per batch; the trace
    holds the full-dataset cost before training and after every epoch.
    """
    device, provenance = training_device(train_config.strategy, series)
    if spec.mapping is None:
        reference = device or topology_device or (series.devices[0] if series is not None else None)
        if reference is not None:
            spec = resolve_mapping(spec, reference, mapping_index)
    if dataset.n_qubits != spec.n_qubits:
        raise ValidationError(f"{dataset.task} needs {dataset.n_qubits} qubits, ansatz has {spec.n_qubits}")

    objective = Objective(build(spec), dataset.prepared(), spec.target_qubit, device,
                          train_config.run_config(device), spec.mapping, train_config.n_jobs)
    init_rng = np.random.default_rng(derive_seed(train_config.seed, "theta-init"))
    shuffle_rng = np.random.default_rng(derive_seed(train_config.seed, "shuffle"))
    theta = init_rng.uniform(0.0, 2.0 * math.pi, size=spec.n_params)

    trace = [objective.cost(theta)]
    m = len(dataset)
    logger.info(f"Training {dataset.task}/{spec.topology.value}-{spec.layers}L with {train_config.strategy}: "
                f"{spec.n_params} parameters, initial cost {trace[0]:.4f}")
    for iteration in range(1, train_config.iterations + 1):
        order = shuffle_rng.permutation(m)
        for start in range(0, m, train_config.batch_size):
            batch = order[start:start + train_config.batch_size]
            theta = theta - train_config.learning_rate * objective.gradient(theta, batch, train_config.fd_step)
        trace.append(objective.cost(theta))
        if iteration % 10 == 0 or iteration == train_config.iterations:
            logger.info(f"iteration {iteration}/{train_config.iterations}: cost {trace[-1]:.4f}")

    return TrainedModel(
        task=dataset.task,
        spec=spec,
        theta=tuple(theta),
        strategy=train_config.strategy,
        cost_trace=tuple(trace),
        config=train_config.to_dict(),
        device=provenance,
        angles=dataset.angles,
    )


