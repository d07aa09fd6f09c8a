"""
drift-pqc - train parameterized quantum circuits against calibration-driven
noise models and replay them over a calibration history.

Every subcommand writes files only; progress goes to standard error.
"""
import argparse
import logging
import sys

import pandas as pd

import train_model
from calibration.device import load_device
from calibration.series import default_series, load_series, save_series, series_stats, synth_series
from classifier import evalx
from classifier.ansatz import AnsatzSpec, Topology, build, resolve_mapping
from classifier.datasets import IRIS, TASKS, load_dataset
from classifier.encode import ANGLE_VARIANTS, STANDARD
from classifier.train import TrainConfig, fit, load_model, save_model
from config import config
from middleware.errors import EXIT_OK, EXIT_VALIDATION, ValidationError, error_boundary
from quantum import qmath
from quantum.circuit import load_circuit, save_circuit
from quantum.noise import TQ_NOISE_MODES
from quantum.simulator import RNG_ALGORITHM, NoisySimulator, RunConfig, sample
from utils.io import write_csv, write_json, write_manifest
from utils.manifest import RunManifest

logger = logging.getLogger("drift-pqc")


# ---------------- Logging ----------------

def configure_logging(level=None):
    logging.basicConfig(
        level=getattr(logging, (level or config.LOG_LEVEL).upper()),
        format=config.LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )


class UsageError(ValidationError):
    """Command line could not be parsed"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _on_off(value):
    value = value.lower()
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return value == "on"


def _int_list(value):
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{value}'") from None


def _run_config(args):
    return RunConfig(
        noise=getattr(args, "noise", True),
        idle_decoherence=args.idle_decoherence,
        tq_noise_mode=args.tq_noise_mode,
        shots=getattr(args, "shots", config.DEFAULT_SHOTS),
        seed=getattr(args, "seed", config.DEFAULT_SEED),
    )


def _series(args):
    if args.calib:
        template = load_device(args.device) if getattr(args, "device", None) else None
        return load_series(args.calib, template=template)
    logger.info("No --calib given; using the shipped synthetic calibration history")
    return default_series()


# ---------------- Commands ----------------

@error_boundary
def cmd_simulate(args):
    circuit = load_circuit(args.circuit)
    device = load_device(args.device)
    cfg = _run_config(args)
    manifest = RunManifest("simulate", {"run": cfg.to_dict(), "targets": args.target}, seed=args.seed)
    manifest.add_input(args.circuit)
    manifest.add_input(args.device)

    rho = NoisySimulator(device, cfg, n_qubits=circuit.n_qubits).run(circuit)
    probs = qmath.basis_probabilities(rho)
    n = circuit.n_qubits
    targets = args.target or [0]
    write_json(args.out, {
        "probabilities": {format(i, f"0{n}b"): float(p) for i, p in enumerate(probs)},
        "expectation": {str(t): qmath.expectation_z(rho, t) for t in targets},
        "counts": sample(rho, cfg.shots, cfg.seed),
        "config": cfg.to_dict(),
        "rng": RNG_ALGORITHM,
    }, manifest)


@error_boundary
def cmd_ansatz(args):
    spec = AnsatzSpec(Topology.parse(args.topology), args.qubits, args.layers, args.target)
    manifest = RunManifest("ansatz", {"spec": spec.to_dict(), "mapping_index": args.mapping})
    if args.device:
        manifest.add_input(args.device)
        spec = resolve_mapping(spec, load_device(args.device), args.mapping)
        logger.info(f"Mapping logical qubits onto device qubits {spec.mapping}")
    save_circuit(build(spec), args.out)
    write_json(f"{args.out}.spec.json", spec.to_dict(), manifest)
    write_manifest(manifest, args.out)


@error_boundary
def cmd_train(args):
    dataset = load_dataset(args.task, args.iris_csv, args.angles)
    spec = AnsatzSpec(Topology.parse(args.topology), dataset.n_qubits, args.layers, args.target)
    train_config = TrainConfig(
        strategy=args.strategy,
        iterations=args.iterations,
        batch_size=args.batch_size or (5 if args.task == IRIS else 1),
        learning_rate=args.lr,
        fd_step=args.fd_step,
        seed=args.seed,
        tq_noise_mode=args.tq_noise_mode,
        idle_decoherence=args.idle_decoherence,
        n_jobs=args.jobs,
    )
    topology_device = load_device(args.device) if args.device else None
    needs_series = not train_config.strategy.startswith("app02")
    series = _series(args) if needs_series or args.calib else None
    manifest = RunManifest("train", {"train": train_config.to_dict(), "spec": spec.to_dict(),
                                     "task": args.task, "angles": args.angles}, seed=args.seed)
    for path in (args.calib, args.device, args.iris_csv):
        manifest.add_input(path)
    model = fit(dataset, spec, train_config, series, topology_device, args.mapping)
    save_model(model, args.out, manifest)


@error_boundary
def cmd_replay(args):
    model = load_model(args.model)
    dataset = load_dataset(model.task, args.iris_csv, model.angles)
    series = _series(args)
    manifest = RunManifest("replay", {"model": args.model}, seed=model.config.get("seed"))
    for path in (args.model, args.calib, args.iris_csv):
        manifest.add_input(path)
    report = evalx.replay(model, dataset, series, n_jobs=args.jobs)
    write_csv(args.out, report.to_frame(), manifest)


@error_boundary
def cmd_evaluate(args):
    model = load_model(args.model)
    dataset = load_dataset(model.task, args.iris_csv, model.angles)
    device = load_device(args.device)
    manifest = RunManifest("evaluate", {"model": args.model, "shots": args.shots,
                                        "observations": args.observations}, seed=args.seed)
    for path in (args.model, args.device, args.iris_csv):
        manifest.add_input(path)
    report = evalx.evaluate(model, dataset, device, args.shots, args.seed, args.observations)
    write_json(args.out, report.to_dict(), manifest)


@error_boundary
def cmd_calib_stats(args):
    series = load_series(args.csv)
    stats = series_stats(series, args.iqr_k)
    print(stats.to_string(index=False))
    if args.out:
        manifest = RunManifest("calib stats", {"iqr_k": args.iqr_k or config.IQR_K})
        manifest.add_input(args.csv)
        write_csv(args.out, stats, manifest)


@error_boundary
def cmd_calib_synth(args):
    base = load_device(args.base)
    manifest = RunManifest("calib synth", {"days": args.days, "drift": args.drift}, seed=args.seed)
    manifest.add_input(args.base)
    series = synth_series(base, args.days, args.drift, args.seed)
    save_series(series, args.out)
    write_manifest(manifest, args.out)


@error_boundary
def cmd_calib_fidelity(args):
    circuit = load_circuit(args.circuit)
    series = _series(args)
    cfg = _run_config(args)
    rows = evalx.fidelity_series(circuit, args.expect, series, cfg)
    for day, p in rows:
        print(f"{day}\t{p:.6f}")
    if args.out:
        manifest = RunManifest("calib fidelity", {"expect": args.expect, "run": cfg.to_dict()})
        manifest.add_input(args.circuit)
        manifest.add_input(args.calib)
        write_csv(args.out, pd.DataFrame(rows, columns=["day", "probability"]), manifest)


@error_boundary
def cmd_repro(args):
    if args.study == "parity":
        train_model.repro_parity(args.out, seed=args.seed, iterations=args.iterations, layers=args.layers,
                                 calib=args.calib, train_day=args.train_day, n_jobs=args.jobs)
    else:
        train_model.repro_iris(args.out, seed=args.seed, iterations=args.iterations, layers=args.layers,
                               calib=args.calib, iris_csv=args.iris_csv, n_jobs=args.jobs)


# ---------------- Parser ----------------

def _noise_flags(p):
    p.add_argument("--tq-noise-mode", choices=TQ_NOISE_MODES, default=config.TQ_NOISE_MODE)
    p.add_argument("--idle-decoherence", action="store_true", default=config.IDLE_DECOHERENCE,
                   help="also decohere qubits that sit out an instruction")


def build_parser():
    parser = _Parser(prog="drift-pqc", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a bound circuit on a device model")
    p.add_argument("--circuit", required=True)
    p.add_argument("--device", default=str(config.DEVICE_JSON))
    p.add_argument("--noise", type=_on_off, default=True, metavar="on|off")
    p.add_argument("--shots", type=int, default=config.DEFAULT_SHOTS)
    p.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    p.add_argument("--target", type=int, action="append", help="qubit for an expectation value (repeatable)")
    p.add_argument("--out", required=True)
    _noise_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ansatz", help="emit a model circuit with symbolic parameters")
    p.add_argument("--topology", required=True, choices=[t.value for t in Topology] + ["iris"])
    p.add_argument("--qubits", type=int, required=True)
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--target", type=int, default=0)
    p.add_argument("--device", default=None)
    p.add_argument("--mapping", type=int, default=0, help="index into the available direct mappings")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ansatz)

    p = sub.add_parser("train", help="fit a classifier with one training strategy")
    p.add_argument("--task", required=True, choices=TASKS)
    p.add_argument("--topology", required=True, choices=[t.value for t in Topology] + ["iris"])
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--target", type=int, default=0)
    p.add_argument("--strategy", required=True, help="app01:<day>, app02 or app03")
    p.add_argument("--calib", default=None)
    p.add_argument("--device", default=None)
    p.add_argument("--mapping", type=int, default=0)
    p.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    p.add_argument("--iterations", type=int, default=config.ITERATIONS)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--lr", type=float, default=config.LEARNING_RATE)
    p.add_argument("--fd-step", type=float, default=config.FD_STEP)
    p.add_argument("--angles", choices=ANGLE_VARIANTS, default=STANDARD)
    p.add_argument("--iris-csv", default=None)
    p.add_argument("--jobs", type=int, default=config.N_JOBS)
    p.add_argument("--out", required=True)
    _noise_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("replay", help="cost of a trained model on every calibration day")
    p.add_argument("--model", required=True)
    p.add_argument("--calib", default=None)
    p.add_argument("--device", default=None, help="gate-time template for the calibration CSV")
    p.add_argument("--iris-csv", default=None)
    p.add_argument("--jobs", type=int, default=config.N_JOBS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("evaluate", help="shot-based correct/incorrect ratios on one device")
    p.add_argument("--model", required=True)
    p.add_argument("--device", default=str(config.DEVICE_JSON))
    p.add_argument("--shots", type=int, default=config.DEFAULT_SHOTS)
    p.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    p.add_argument("--observations", type=int, default=config.EVAL_OBSERVATIONS)
    p.add_argument("--iris-csv", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    calib = sub.add_parser("calib", help="calibration history tools")
    csub = calib.add_subparsers(dest="calib_command", required=True)

    p = csub.add_parser("stats", help="per-metric mean/min/max/outlier count")
    p.add_argument("csv")
    p.add_argument("--iqr-k", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_calib_stats)

    p = csub.add_parser("synth", help="synthesize a drifting calibration history")
    p.add_argument("--base", default=str(config.DEVICE_JSON))
    p.add_argument("--days", type=int, default=config.SYNTH_DAYS)
    p.add_argument("--drift", type=float, default=config.SYNTH_DRIFT)
    p.add_argument("--seed", type=int, default=config.FIXTURE_SEED)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_calib_synth)

    p = csub.add_parser("fidelity", help="probability of an expected outcome on each day")
    p.add_argument("--circuit", required=True)
    p.add_argument("--calib", default=None)
    p.add_argument("--device", default=None)
    p.add_argument("--expect", required=True, help="bitstring, qubit 0 rightmost")
    p.add_argument("--out", default=None)
    _noise_flags(p)
    p.set_defaults(func=cmd_calib_fidelity)

    p = sub.add_parser("repro", help="end-to-end reproduction of the parity or iris study")
    p.add_argument("study", choices=["parity", "iris"])
    p.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    p.add_argument("--out", required=True)
    p.add_argument("--layers", type=_int_list, default=None, help="comma-separated layer counts")
    p.add_argument("--iterations", type=int, default=config.ITERATIONS)
    p.add_argument("--calib", default=None)
    p.add_argument("--train-day", default=None, help="day used by app01 (parity only)")
    p.add_argument("--iris-csv", default=None)
    p.add_argument("--jobs", type=int, default=config.N_JOBS)
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        configure_logging()
        logger.error(f"usage error: {e}")
        return EXIT_VALIDATION
    except SystemExit as e:
        # --help
        return EXIT_OK if e.code in (None, 0) else EXIT_VALIDATION
    configure_logging(args.log_level)
    logger.info(f"drift-pqc {args.command} started")
    code = args.func(args)
    logger.info(f"drift-pqc {args.command} finished with exit code {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
