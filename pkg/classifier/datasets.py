"""
Labeled datasets for the two classification tasks.

parity: all 16 four-bit patterns, basis encoded; odd parity is labeled +1.
iris:   the 100 Setosa/Versicolour samples, amplitude encoded; Setosa is +1.
"""
from dataclasses import dataclass
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from classifier.encode import STANDARD, amplitude_angles, amplitude_prep_circuit, basis_encode, bits_of, normalize
from config import config
from middleware.errors import DataFileError, ValidationError

logger = logging.getLogger(__name__)

PARITY = "parity"
IRIS = "iris"
TASKS = (PARITY, IRIS)

IRIS_COLUMNS = ["sepal_len", "sepal_wid", "petal_len", "petal_wid", "label"]
IRIS_LABELS = {"setosa": 1, "versicolor": -1}


@dataclass(frozen=True)
class LabeledDataset:
    """(input, label) items; labels are +1 or -1."""
    task: str
    items: tuple
    n_qubits: int
    angles: str = STANDARD

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValidationError(f"unknown task '{self.task}'; choose from {TASKS}")
        object.__setattr__(self, "items", tuple((tuple(x), int(y)) for x, y in self.items))
        if not self.items:
            raise ValidationError("dataset is empty")
        for i, (_, y) in enumerate(self.items):
            if y not in (-1, 1):
                raise ValidationError(f"item {i}: label {y} is not +1 or -1")

    def __len__(self):
        return len(self.items)

    @property
    def labels(self):
        return np.array([y for _, y in self.items], dtype=float)

    def prep_circuit(self, x):
        if self.task == PARITY:
            return basis_encode(x)
        return amplitude_prep_circuit(amplitude_angles(x, self.angles))

    def prepared(self):
        """(state-preparation circuit, label) per item"""
        return [(self.prep_circuit(x), y) for x, y in self.items]

    def subset(self, indices):
        return LabeledDataset(self.task, tuple(self.items[i] for i in indices), self.n_qubits, self.angles)


def parity_label(bits):
    return 1 if sum(bits) % 2 == 1 else -1


def parity_dataset(n_bits=4):
    items = []
    for value in range(2 ** n_bits):
        bits = bits_of(value, n_bits)
        items.append((bits, parity_label(bits)))
    return LabeledDataset(PARITY, tuple(items), n_bits)


def iris_frame():
    """The 100 Setosa/Versicolour rows of the bundled scikit-learn copy of iris."""
    from sklearn.datasets import load_iris

    iris = load_iris()
    df = pd.DataFrame(iris.data, columns=IRIS_COLUMNS[:4])
    df["label"] = [iris.target_names[t] for t in iris.target]
    return df[df["label"].isin(list(IRIS_LABELS))].reset_index(drop=True)


def iris_dataset(path=None, angles=STANDARD):
    """
    Load the iris fixture CSV (sepal_len,sepal_wid,petal_len,petal_wid,label)
    and normalize each sample. Without a fixture on disk the rows come from
    scikit-learn.
    """
    path = Path(path) if path is not None else config.IRIS_CSV
    if path.exists():
        try:
            df = pd.read_csv(path)
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise DataFileError(f"unreadable CSV: {e}", path=path) from e
        missing = [c for c in IRIS_COLUMNS if c not in df.columns]
        if missing:
            raise DataFileError(f"missing columns {missing}", path=path)
    else:
        logger.info(f"{path} not found; using scikit-learn's iris data")
        df = iris_frame()

    items = []
    for i, row in enumerate(df.to_dict("records")):
        label = str(row["label"]).strip().lower().replace("iris-", "")
        if label not in IRIS_LABELS:
            raise DataFileError(f"label '{row['label']}' is not setosa or versicolor", path=path, row=i + 2, column="label")
        try:
            x = normalize([float(row[c]) for c in IRIS_COLUMNS[:4]])
        except (TypeError, ValueError) as e:
            raise DataFileError(str(e), path=path, row=i + 2) from e
        items.append((x.tolist(), IRIS_LABELS[label]))
    return LabeledDataset(IRIS, tuple(items), 2, angles)


def load_dataset(task, path=None, angles=STANDARD):
    if task == PARITY:
        return parity_dataset()
    if task == IRIS:
        return iris_dataset(path, angles)
    raise ValidationError(f"unknown task '{task}'; choose from {TASKS}")
