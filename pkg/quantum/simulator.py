"""
Noisy density-matrix execution of bound circuits.

Each instruction applies its ideal unitary, then (noise on) the gate-error
channel, T1 amplitude damping and T2 phase damping on the qubits it acts
on, with the gate's duration as the exposure time. The noise of one
instruction is folded with its unitary into a single local superoperator.
"""
from dataclasses import asdict, dataclass
import logging

import numpy as np

from config import config
from middleware.errors import UnboundParameterError, ValidationError
from quantum import qmath
from quantum.circuit import GateKind, gate_matrix, lower, require_valid
from quantum.noise import (
    PAIR_DEPOLARIZING, TQ_NOISE_MODES,
    check_coherence_times, depolarizing_kraus, t1_kraus, t2_kraus, two_qubit_gate_error_kraus,
)

logger = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy.random.PCG64"


@dataclass(frozen=True)
class RunConfig:
    noise: bool = True
    idle_decoherence: bool = config.IDLE_DECOHERENCE
    tq_noise_mode: str = config.TQ_NOISE_MODE
    shots: int = config.DEFAULT_SHOTS
    seed: int = config.DEFAULT_SEED

    def __post_init__(self):
        if self.tq_noise_mode not in TQ_NOISE_MODES:
            raise ValidationError(f"tq_noise_mode must be one of {TQ_NOISE_MODES}, got '{self.tq_noise_mode}'")
        if self.shots < 1:
            raise ValidationError(f"shots must be at least 1, got {self.shots}")

    def to_dict(self):
        return asdict(self)


NOISE_OFF = RunConfig(noise=False)



def _lift(ops, position):
    """Embed 1q Kraus ops into the local 2q space (position 1 = first listed qubit)."""
    return [qmath.embed(E, [position], 2) for E in ops]


class NoisySimulator:
    """
    Executes circuits over a compact register of ``n_qubits`` logical qubits.

    ``layout[i]`` names the physical device qubit hosting logical qubit i;
    it selects the calibration values and coupling edges that apply. All
    noise superoperators are built at construction, so one instance can be
    shared by many concurrent runs.
    """

    def __init__(self, device=None, cfg=None, n_qubits=None, layout=None):
        self.device = device
        self.cfg = cfg or RunConfig(noise=device is not None)
        if self.cfg.noise and device is None:
            raise ValidationError("noise-on simulation needs a device model")
        if n_qubits is None:
            if device is None:
                raise ValidationError("n_qubits is required without a device")
            n_qubits = device.n_qubits
        self.n_qubits = int(n_qubits)
        self.layout = tuple(range(self.n_qubits)) if layout is None else tuple(int(q) for q in layout)
        if len(self.layout) < self.n_qubits:
            raise ValidationError(f"layout {self.layout} too short for {self.n_qubits} qubits")
        self._noise_1q = {}
        self._noise_2q = {}
        self._idle = {}
        if self.cfg.noise:
            self._build_noise()

    # ---------------- noise compilation ----------------

    def _relax(self, q, t_ns):
        p = self.layout[q]
        return t1_kraus(t_ns, self.device.t1_us[p] * 1e3), t2_kraus(t_ns, self.device.t2_us[p] * 1e3)

    def _build_noise(self):
        d = self.device
        for q in range(self.n_qubits):
            p = self.layout[q]
            check_coherence_times(d.t1_us[p], d.t2_us[p], label=f"on qubit {p}")
        one_qubit_kinds = [k for k in GateKind if k.arity == 1]
        for q in range(self.n_qubits):
            for kind in one_qubit_kinds:
                t = d.duration_ns(kind)
                amp, phase = self._relax(q, t)
                gate_err = depolarizing_kraus(d.err_1q[self.layout[q]])
                self._noise_1q[(kind, q)] = (
                    qmath.superoperator(phase) @ qmath.superoperator(amp) @ qmath.superoperator(gate_err)
                )
        phys_to_logical = {p: q for q, p in enumerate(self.layout[:self.n_qubits])}
        for (pc, pt) in d.edges:
            if pc not in phys_to_logical or pt not in phys_to_logical:
                continue
            c, t = phys_to_logical[pc], phys_to_logical[pt]
            t_ns = d.duration_ns(GateKind.CNOT, (pc, pt))
            perr = d.err_2q[(pc, pt)]
            if self.cfg.tq_noise_mode == PAIR_DEPOLARIZING:
                sop = qmath.superoperator(two_qubit_gate_error_kraus(perr))
            else:
                local = depolarizing_kraus(perr)
                sop = qmath.superoperator(_lift(local, 0)) @ qmath.superoperator(_lift(local, 1))
            # control first, then target
            for q, position in ((c, 1), (t, 0)):
                amp, phase = self._relax(q, t_ns)
                sop = qmath.superoperator(_lift(amp, position)) @ sop
                sop = qmath.superoperator(_lift(phase, position)) @ sop
            self._noise_2q[(c, t)] = sop
        if self.cfg.idle_decoherence:
            durations = {d.duration_ns(k) for k in one_qubit_kinds}
            durations |= {d.duration_ns(GateKind.CNOT, e) for e in d.edges}
            for q in range(self.n_qubits):
                for t_ns in durations:
                    amp, phase = self._relax(q, t_ns)
                    self._idle[(q, t_ns)] = qmath.superoperator(phase) @ qmath.superoperator(amp)

    # ---------------- execution ----------------

    def _prepare(self, circuit):
        if circuit.n_qubits > self.n_qubits:
            raise ValidationError(f"circuit needs {circuit.n_qubits} qubits, simulator has {self.n_qubits}")
        if not circuit.is_bound:
            raise UnboundParameterError("circuit has unbound parameters; call bind() first")
        if self.device is not None:
            require_valid(circuit, self.device, self.layout)
            circuit = lower(circuit, self.device.native_1q_gates)
        return circuit

    def run(self, circuit, initial=None):
        """
        Output density matrix of ``circuit`` started from ``initial``
        (|0...0><0...0| when omitted).
        """
        circuit = self._prepare(circuit)
        n = self.n_qubits
        rho = qmath.ground_state(n) if initial is None else np.array(initial, dtype=np.complex128)
        for inst in circuit.instructions:
            u = gate_matrix(inst.kind, inst.angles())
            sop = np.kron(u, u.conj())
            if self.cfg.noise:
                if inst.kind.arity == 2:
                    sop = self._noise_2q[inst.qubits] @ sop
                else:
                    sop = self._noise_1q[(inst.kind, inst.qubits[0])] @ sop
            rho = qmath.apply_local_superoperator(rho, sop, inst.qubits, n)
            if self.cfg.noise and self.cfg.idle_decoherence:
                t_ns = self.device.duration_ns(
                    inst.kind, tuple(self.layout[q] for q in inst.qubits) if inst.kind.arity == 2 else None)
                for q in range(n):
                    if q not in inst.qubits:
                        rho = qmath.apply_local_superoperator(rho, self._idle[(q, t_ns)], [q], n)
        return rho

    def expectation(self, circuit, target, initial=None):
        return qmath.expectation_z(self.run(circuit, initial), target)


def run(circuit, device, cfg, layout=None, initial=None):
    sim = NoisySimulator(device, cfg, n_qubits=circuit.n_qubits, layout=layout)
    return sim.run(circuit, initial)


def expectation(circuit, device, cfg, target, layout=None):
    return qmath.expectation_z(run(circuit, device, cfg, layout), target)


def sample(rho, shots, seed):
    """Multinomial shot counts keyed by bitstring (qubit 0 is the rightmost character)."""
    if shots < 1:
        raise ValidationError(f"shots must be at least 1, got {shots}")
    probs = qmath.basis_probabilities(rho)
    n = qmath.num_qubits(probs.size)
    if probs.min() < 0:
        if probs.min() < -config.ATOL_TRACE:
            logger.warning(f"clamping probability {probs.min():.3e} to 0")
        probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.multinomial(int(shots), probs)
    return {format(i, f"0{n}b"): int(c) for i, c in enumerate(draws) if c > 0}


def target_bit_counts(counts, target):
    """(# shots with target bit 0, # shots with target bit 1)"""
    zeros = ones = 0
    for bits, c in counts.items():
        if not 0 <= target < len(bits):
            raise ValidationError(f"target qubit {target} outside the {len(bits)}-bit outcome '{bits}'")
        if bits[len(bits) - 1 - target] == "1":
            ones += c
        else:
            zeros += c
    return zeros, ones


def ratio(counts, target):
    """Shots with target bit 1 over shots with target bit 0 (inf when no zeros)."""
    zeros, ones = target_bit_counts(counts, target)
    if zeros + ones < 1:
        raise ValidationError("counts hold no shots")
    if zeros == 0:
        return float("inf")
    return ones / zeros
