"""
Run manifests: what produced an output file and from which inputs.

A manifest carries no timestamps, so two runs with the same flags and the
same input bytes write identical files.
"""
from dataclasses import dataclass, field
import hashlib
import logging
from pathlib import Path
import zlib

import numpy as np

from config import config
from quantum.simulator import RNG_ALGORITHM

logger = logging.getLogger(__name__)


def file_digest(path):
    """sha256 of a file's bytes, as hex."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def derive_seed(seed, tag):
    """
    Independent child seed for one component. Adding a new tag never
    changes the seeds handed to existing ones.
    """
    sequence = np.random.SeedSequence([int(seed), zlib.crc32(str(tag).encode("utf-8"))])
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    seed: int = None
    inputs: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    artifact_version: str = config.ARTIFACT_VERSION
    rng: str = RNG_ALGORITHM

    def add_input(self, path):
        if path is not None:
            self.inputs[str(path)] = file_digest(path)

    def add_output(self, path):
        name = str(path)
        if name not in self.outputs:
            self.outputs.append(name)

    def to_dict(self):
        return {
            "subcommand": self.subcommand,
            "config": self.config,
            "seed": self.seed,
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": list(self.outputs),
            "artifact_version": self.artifact_version,
            "rng": self.rng,
        }


def manifest_path(output_path):
    output_path = Path(output_path)
    return output_path.with_name(output_path.name + ".manifest.json")
