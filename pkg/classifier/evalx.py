"""
Post-training evaluation: drift replay, shot-ratio statistics,
classification decisions and CDF summaries.

Label orientation: label +1 expects the target qubit to read 0
(expectation +1), label -1 expects it to read 1.
"""
from dataclasses import dataclass
import logging
import math

from joblib import Parallel, delayed
import numpy as np
import pandas as pd

from config import config
from middleware.errors import ValidationError
from quantum import qmath
from quantum.circuit import require_valid
from quantum.simulator import NoisySimulator, RunConfig, ratio, sample, target_bit_counts
from utils.manifest import derive_seed

logger = logging.getLogger(__name__)


def expected_bit(label):
    if label not in (-1, 1):
        raise ValidationError(f"label {label} is not +1 or -1")
    return 0 if label == 1 else 1


def _safe_ratio(numerator, denominator):
    if denominator == 0:
        return math.inf if numerator > 0 else math.nan
    return numerator / denominator


# ---------------- Drift replay ----------------

@dataclass(frozen=True)
class ReplayReport:
    """Full-dataset cost and accuracy of fixed parameters on each calibration day."""
    days: tuple
    costs: tuple
    accuracies: tuple

    def __post_init__(self):
        if not (len(self.days) == len(self.costs) == len(self.accuracies)):
            raise ValidationError("replay report needs one cost and accuracy per day")

    @property
    def mean(self):
        return float(np.mean(self.costs))

    @property
    def min(self):
        return float(np.min(self.costs))

    @property
    def max(self):
        return float(np.max(self.costs))

    def cost_on(self, day):
        return self.costs[self.days.index(day)]

    def summary(self):
        return {"mean": self.mean, "min": self.min, "max": self.max,
                "mean_accuracy": float(np.mean(self.accuracies)), "days": len(self.days)}

    def to_frame(self):
        return pd.DataFrame({"day": list(self.days), "cost": list(self.costs), "accuracy": list(self.accuracies)})


def _replay_day(model, dataset, device):
    objective = model.objective(dataset, device, n_jobs=1)
    theta = np.asarray(model.theta)
    return objective.cost(theta), objective.accuracy(theta)


def replay(model, dataset, series, n_jobs=None):
    """
    Cost of ``model`` on ``dataset`` under every snapshot of ``series``.
    Days may run concurrently; the report keeps series order.
    """
    require_valid(model.circuit(), series.devices[0], model.spec.mapping)
    n_jobs = config.N_JOBS if n_jobs is None else n_jobs
    results = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_replay_day)(model, dataset, device) for _, device in series)
    report = ReplayReport(
        days=tuple(series.days),
        costs=tuple(c for c, _ in results),
        accuracies=tuple(a for _, a in results),
    )
    logger.info(f"Replayed {model.strategy} over {len(series)} days: mean cost {report.mean:.4f}")
    return report


def relative_gap(a, b):
    """(a - b) / b, e.g. how much larger one mean cost is than another."""
    if b == 0:
        raise ValidationError("relative gap against zero is undefined")
    return (a - b) / b


# ---------------- Shot statistics ----------------

@dataclass(frozen=True)
class Decision:
    label: int
    ratio: float
    tie: bool = False


def classify(counts, target):
    """
    Class 1 when the target reads 1 more often than 0, class 0 when less
    often; an exact split is a tie with label None.
    """
    r = ratio(counts, target)
    if r > 1:
        return Decision(1, r)
    if r < 1:
        return Decision(0, r)
    return Decision(None, r, tie=True)


@dataclass(frozen=True)
class RatioObservation:
    input_id: int
    label: int
    shots: int
    correct_count: int
    incorrect_count: int

    def __post_init__(self):
        if self.correct_count + self.incorrect_count != self.shots:
            raise ValidationError(f"counts {self.correct_count}+{self.incorrect_count} do not sum to {self.shots} shots")

    @property
    def r(self):
        return _safe_ratio(self.correct_count, self.incorrect_count)

    def to_dict(self):
        return {
            "input_id": self.input_id,
            "label": self.label,
            "shots": self.shots,
            "correct_count": self.correct_count,
            "incorrect_count": self.incorrect_count,
            "r": self.r,
        }


def observe(counts, label, target, input_id=0):
    zeros, ones = target_bit_counts(counts, target)
    correct, incorrect = (zeros, ones) if expected_bit(label) == 0 else (ones, zeros)
    return RatioObservation(input_id, label, zeros + ones, correct, incorrect)


def correct_ratio(source, label, target):
    """
    Correct over incorrect target readings. ``source`` is a shot-count
    mapping or a density matrix (exact probabilities).
    """
    if isinstance(source, dict):
        return observe(source, label, target).r
    probs = qmath.basis_probabilities(source)
    bits = (np.arange(probs.size) >> target) & 1
    p1 = float(np.clip(probs[bits == 1].sum(), 0.0, None))
    p0 = float(np.clip(probs[bits == 0].sum(), 0.0, None))
    return _safe_ratio(p0, p1) if expected_bit(label) == 0 else _safe_ratio(p1, p0)


def ratio_cdf(observations):
    """
    Empirical CDF of r as (r, cumulative probability) at each distinct r,
    ascending, infinite r last.
    """
    values = [o.r if isinstance(o, RatioObservation) else float(o) for o in observations]
    if not values:
        raise ValidationError("ratio CDF needs at least one observation")
    values = sorted(v for v in values if not math.isnan(v))
    n = len(values)
    points = []
    for i, v in enumerate(values):
        if i + 1 < n and values[i + 1] == v:
            continue
        points.append((v, (i + 1) / n))
    return points


@dataclass(frozen=True)
class EvaluationReport:
    observations: tuple
    shots: int
    seed: int

    @property
    def cdf(self):
        return ratio_cdf(self.observations)

    @property
    def mean_r(self):
        """Mean of the finite ratios (perfect observations are counted separately)."""
        finite = [o.r for o in self.observations if math.isfinite(o.r)]
        return float(np.mean(finite)) if finite else math.inf

    @property
    def perfect(self):
        return sum(1 for o in self.observations if math.isinf(o.r))

    @property
    def accuracy(self):
        return float(np.mean([o.correct_count > o.incorrect_count for o in self.observations]))

    def to_dict(self):
        return {
            "shots": self.shots,
            "seed": self.seed,
            "observations": [o.to_dict() for o in self.observations],
            "cdf": [[r, cp] for r, cp in self.cdf],
            "mean_r": self.mean_r,
            "perfect": self.perfect,
            "accuracy": self.accuracy,
        }


def evaluate(model, dataset, device, shots=None, seed=None, observations=None):
    """
    Run randomly chosen inputs (uniform over the dataset, seeded) for
    ``shots`` shots each and record the correct/incorrect ratio.
    """
    shots = config.DEFAULT_SHOTS if shots is None else int(shots)
    seed = config.DEFAULT_SEED if seed is None else int(seed)
    observations = config.EVAL_OBSERVATIONS if observations is None else int(observations)
    if shots < 1 or observations < 1:
        raise ValidationError("evaluation needs at least one shot and one observation")
    objective = model.objective(dataset, device)
    theta = np.asarray(model.theta)
    picks = np.random.default_rng(derive_seed(seed, "eval-inputs")).integers(0, len(dataset), size=observations)
    states = {}
    found = []
    for k, i in enumerate(picks):
        i = int(i)
        if i not in states:
            states[i] = objective.state(theta, i)
        counts = sample(states[i], shots, derive_seed(seed, f"eval-shots-{k}"))
        found.append(observe(counts, dataset.items[i][1], model.spec.target_qubit, input_id=i))
    report = EvaluationReport(tuple(found), shots, seed)
    logger.info(f"Evaluated {observations} inputs x {shots} shots: mean r {report.mean_r:.3f}, {report.perfect} perfect")
    return report


def fidelity_series(circuit, expected_bitstring, series, run_config=None, layout=None):
    """
    Probability of ``expected_bitstring`` (qubit 0 rightmost) for a fixed
    bound circuit on each calibration day.
    """
    n = circuit.n_qubits
    if len(expected_bitstring) != n or set(expected_bitstring) - {"0", "1"}:
        raise ValidationError(f"expected outcome '{expected_bitstring}' is not a {n}-bit string")
    index = int(expected_bitstring, 2)
    cfg = run_config or RunConfig()
    rows = []
    for day, device in series:
        rho = NoisySimulator(device, cfg, n_qubits=n, layout=layout).run(circuit)
        rows.append((day, float(qmath.basis_probabilities(rho)[index])))
    return rows
