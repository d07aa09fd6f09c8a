"""
Model-circuit builders: a parametric U3 sub-layer on every qubit followed by
an entanglement sub-layer of CNOTs, repeated per layer.

CNOT patterns for the fixed-size topologies are pinned in
fixtures/topologies.json in site coordinates (site 0 is the target qubit).
"""
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from itertools import permutations
import json
import logging

from config import config
from middleware.errors import CircuitValidationError, DataFileError, ValidationError
from quantum.circuit import Circuit, GateKind, Instruction, Ref, validate

logger = logging.getLogger(__name__)


class Topology(str, Enum):
    TTN = "ttn"
    ALT = "alt"
    MERA = "mera"
    IRIS_LAYER = "iris_layer"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        if key == "iris":
            key = cls.IRIS_LAYER.value
        try:
            return cls(key)
        except ValueError:
            raise ValidationError(f"unknown topology '{name}'; choose from {[t.value for t in cls]}") from None


@lru_cache(maxsize=None)
def _golden_patterns(path):
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise DataFileError(f"invalid JSON: {e}", path=path) from e
    return {k: (int(v["n_qubits"]), tuple(tuple(p) for p in v["cnots"])) for k, v in data.items() if not k.startswith("_")}


def alt_pattern(n):
    """n-1 rows alternating even bricks (2k+1 -> 2k) and odd bricks (2k+2 -> 2k+1)."""
    pairs = []
    for row in range(n - 1):
        start = 0 if row % 2 == 0 else 1
        pairs.extend((k + 1, k) for k in range(start, n - 1, 2))
    return tuple(pairs)


def site_pattern(topology, n_qubits):
    topology = Topology.parse(topology)
    golden = _golden_patterns(str(config.TOPOLOGIES_JSON))
    size, pairs = golden.get(topology.value, (None, ()))
    if size == n_qubits:
        return pairs
    if topology is Topology.ALT and n_qubits >= 2:
        return alt_pattern(n_qubits)
    raise ValidationError(f"{topology.value} is defined on {size} qubits, got {n_qubits}")


@dataclass(frozen=True)
class AnsatzSpec:
    """
    Shape of a model circuit. ``mapping[i]`` is the device qubit hosting
    logical qubit i; None until resolved against a device.
    """
    topology: Topology
    n_qubits: int
    layers: int = 1
    target_qubit: int = 0
    mapping: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology.parse(self.topology))
        if self.layers < 1:
            raise ValidationError(f"layers must be at least 1, got {self.layers}")
        if not 0 <= self.target_qubit < self.n_qubits:
            raise ValidationError(f"target qubit {self.target_qubit} outside {self.n_qubits} qubits")
        if self.topology is Topology.IRIS_LAYER and self.target_qubit != 0:
            # amplitude preparation fixes CNOT(1, 0); a relabeled funnel would need the reverse edge
            raise ValidationError("iris_layer reads its result on qubit 0; target qubit must be 0")
        if self.mapping is not None:
            mapping = tuple(int(q) for q in self.mapping)
            if len(mapping) != self.n_qubits or len(set(mapping)) != len(mapping) or min(mapping) < 0:
                raise ValidationError(f"mapping {mapping} is not an injective assignment of {self.n_qubits} qubits")
            object.__setattr__(self, "mapping", mapping)

    @property
    def n_params(self):
        return 3 * self.n_qubits * self.layers

    def to_dict(self):
        return {
            "topology": self.topology.value,
            "n_qubits": self.n_qubits,
            "layers": self.layers,
            "target_qubit": self.target_qubit,
            "mapping": None if self.mapping is None else list(self.mapping),
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                topology=data["topology"],
                n_qubits=int(data["n_qubits"]),
                layers=int(data["layers"]),
                target_qubit=int(data.get("target_qubit", 0)),
                mapping=None if data.get("mapping") is None else tuple(data["mapping"]),
            )
        except (KeyError, TypeError) as e:
            raise ValidationError(f"malformed ansatz document: {e}") from e


def build(spec):
    """Circuit over logical qubits with 3 Refs per qubit per layer."""
    t = spec.target_qubit

    def logical(site):
        if site == 0:
            return t
        return 0 if site == t else site

    cnots = [(logical(c), logical(x)) for c, x in site_pattern(spec.topology, spec.n_qubits)]
    ops = []
    slot = 0
    for _ in range(spec.layers):
        for q in range(spec.n_qubits):
            ops.append(Instruction(GateKind.U3, (q,), (Ref(slot), Ref(slot + 1), Ref(slot + 2))))
            slot += 3
        ops.extend(Instruction(GateKind.CNOT, pair) for pair in cnots)
    return Circuit(spec.n_qubits, tuple(ops), slot)


def available_mappings(spec, device):
    """Every injective logical->physical assignment whose CNOTs all sit on device edges, lexicographic."""
    circuit = build(spec)
    found = [
        layout for layout in permutations(range(device.n_qubits), spec.n_qubits)
        if not validate(circuit, device, layout)
    ]
    logger.debug(f"{spec.topology.value}: {len(found)} direct mappings on a {device.n_qubits}-qubit device")
    return found


def resolve_mapping(spec, device, k=0):
    """Spec with its mapping set to the k-th available mapping."""
    mappings = available_mappings(spec, device)
    if not mappings:
        raise CircuitValidationError(f"{spec.topology.value} on {spec.n_qubits} qubits has no direct mapping on the device")
    if not 0 <= k < len(mappings):
        raise ValidationError(f"mapping index {k} outside the {len(mappings)} available mappings")
    return replace(spec, mapping=mappings[k])
