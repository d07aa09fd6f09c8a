"""
End-to-end reproduction of the drift study.

parity: TTN and ALT model circuits, 1 and 2 layers, each trained with
        app01 (one day), app02 (noiseless) and app03 (averaged noise)
iris:   the layered 2-qubit circuit, 4 and 6 layers, app02 vs app03

Each run writes a model, its per-day replay CSV and a shot-based
evaluation; summary.json holds the headline comparisons.
"""
import logging
from pathlib import Path
import sys

from calibration.device import ibmqx4
from calibration.series import default_series, load_series
from classifier.ansatz import AnsatzSpec, Topology
from classifier.datasets import iris_dataset, parity_dataset
from classifier.evalx import evaluate, relative_gap, replay
from classifier.train import APP02, APP03, TrainConfig, fit, parse_strategy, save_model
from config import config
from utils.io import write_csv, write_json
from utils.manifest import RunManifest

logger = logging.getLogger(__name__)

PARITY_TOPOLOGIES = (Topology.TTN, Topology.ALT)
PARITY_LAYERS = (1, 2)
IRIS_LAYERS = (4, 6)


def _load_series(calib):
    if calib:
        return load_series(calib, template=ibmqx4())
    return default_series()


def _run_study(study, dataset, plans, series, out_dir, seed, iterations, batch_size, n_jobs,
               shots, observations, manifest):
    """
    plans: (run name prefix, AnsatzSpec, [strategies]). Evaluation uses the
    last calibration day, which app01 never trains on unless asked to.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    eval_day = series.days[-1]
    eval_device = series.snapshot(eval_day)
    runs = {}
    for prefix, spec, strategies in plans:
        per_strategy = {}
        for strategy in strategies:
            tag, _ = parse_strategy(strategy)
            name = f"{prefix}_{tag}"
            logger.info(f"[{study}] {name}: training with {strategy}")
            train_config = TrainConfig(strategy=strategy, iterations=iterations, batch_size=batch_size,
                                       seed=seed, n_jobs=n_jobs)
            model = fit(dataset, spec, train_config, series)
            save_model(model, out_dir / f"{name}.model.json", manifest)

            report = replay(model, dataset, series, n_jobs=n_jobs)
            write_csv(out_dir / f"{name}.replay.csv", report.to_frame(), manifest)

            evaluation = evaluate(model, dataset, eval_device, shots, seed, observations)
            write_json(out_dir / f"{name}.eval.json", {**evaluation.to_dict(), "day": eval_day}, manifest)

            per_strategy[tag] = {
                "strategy": strategy,
                "final_train_cost": model.cost_trace[-1],
                "replay": report.summary(),
                "mean_r": evaluation.mean_r,
                "perfect": evaluation.perfect,
                "eval_accuracy": evaluation.accuracy,
            }
        entry = {"runs": per_strategy}
        if APP02 in per_strategy and APP03 in per_strategy:
            entry["replay_gap_app02_vs_app03"] = relative_gap(
                per_strategy[APP02]["replay"]["mean"], per_strategy[APP03]["replay"]["mean"])
        runs[prefix] = entry

    summary = {
        "study": study,
        "seed": seed,
        "iterations": iterations,
        "calibration_days": len(series),
        "eval_day": eval_day,
        "results": runs,
    }
    write_json(out_dir / "summary.json", summary, manifest)
    return summary


def repro_parity(out_dir, seed=None, iterations=None, layers=None, calib=None, train_day=None,
                 n_jobs=None, shots=None, observations=None):
    seed = config.DEFAULT_SEED if seed is None else seed
    iterations = config.ITERATIONS if iterations is None else iterations
    series = _load_series(calib)
    train_day = train_day or series.days[0]
    series.snapshot(train_day)
    strategies = [f"app01:{train_day}", APP02, APP03]
    plans = [
        (f"parity_{topology.value}{n}L", AnsatzSpec(topology, 4, n, 0), strategies)
        for topology in PARITY_TOPOLOGIES for n in (layers or PARITY_LAYERS)
    ]
    manifest = RunManifest("repro parity", {"iterations": iterations, "train_day": train_day,
                                            "layers": list(layers or PARITY_LAYERS)}, seed=seed)
    manifest.add_input(calib)
    return _run_study("parity", parity_dataset(), plans, series, out_dir, seed, iterations,
                      batch_size=1, n_jobs=n_jobs, shots=shots, observations=observations, manifest=manifest)


def repro_iris(out_dir, seed=None, iterations=None, layers=None, calib=None, iris_csv=None,
               n_jobs=None, shots=None, observations=None):
    seed = config.DEFAULT_SEED if seed is None else seed
    iterations = config.ITERATIONS if iterations is None else iterations
    series = _load_series(calib)
    dataset = iris_dataset(iris_csv)
    plans = [
        (f"iris_{n}L", AnsatzSpec(Topology.IRIS_LAYER, 2, n, 0), [APP02, APP03])
        for n in (layers or IRIS_LAYERS)
    ]
    manifest = RunManifest("repro iris", {"iterations": iterations, "layers": list(layers or IRIS_LAYERS)}, seed=seed)
    manifest.add_input(calib)
    manifest.add_input(iris_csv)
    return _run_study("iris", dataset, plans, series, out_dir, seed, iterations,
                      batch_size=5, n_jobs=n_jobs, shots=shots, observations=observations, manifest=manifest)


if __name__ == "__main__":
    import app

    sys.exit(app.main(["repro"] + sys.argv[1:]))
