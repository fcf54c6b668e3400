"""Benchmarks over the optdigits classes: reconstruction fidelity, QAE, classification."""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import partial
from pathlib import Path

import numpy as np

from . import classifier, dataio, qae
from .compressor import build_compressor, roundtrip, roundtrip_fidelities
from .schmidt import Bipartition

LABELS = tuple(range(10))
NUM_QUBITS = 6


@dataclass
class ExperimentConfig:
    dataset: str | None = None
    seed: int = 0
    seeds: int = 20  # independent splits for fidelity benchmarks
    trash_qubits: tuple[int, ...] = (3, 4, 5)
    policies: tuple[str, ...] = ("zero", "opt1", "opt2")
    labels: tuple[int, ...] = LABELS
    train_size: int = 160
    test_size: int = 20
    qae: bool = False
    qae_optimizer: str = "cobyla"
    qae_budget: int = 1000
    qae_trash: tuple[int, ...] = (0, 1, 2)
    repetitions: int = 10
    classifier_trash: tuple[int, ...] = (4, 5)
    classifier_train_size: int = 150
    learning_rate: float = 0.01
    iterations: int = 1000
    batch_size: int = 25
    shots: int | None = None
    workers: int = 1
    out: str | None = None

    def resolved(self) -> "ExperimentConfig":
        path = self.dataset or str(dataio.default_dataset_path())
        return ExperimentConfig(**{**asdict(self), "dataset": path})

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def split_seeds(cfg: ExperimentConfig) -> list[int]:
    return classifier.repetition_seeds(cfg.seed, cfg.seeds)


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _sqc_label(label: int, cfg: ExperimentConfig, samples) -> dict:
    part = Bipartition.from_trash(NUM_QUBITS, cfg.trash_qubits)
    fids = {p: [] for p in cfg.policies}
    for seed in split_seeds(cfg):
        sets = dataio.preprocess(samples, seed=seed, train_size=cfg.train_size,
                                 test_size=cfg.test_size, labels=[label])
        model = build_compressor(dataio.typical_state(sets[label].train), part)
        for p in cfg.policies:
            if cfg.shots is None or p == "zero":
                fids[p].extend(roundtrip_fidelities(model, sets[label].test, p).tolist())
            else:
                rng = np.random.default_rng([seed, label])
                fids[p].extend(roundtrip(model, x, p, shots=cfg.shots, rng=rng).fidelity
                               for x in sets[label].test)
    return {p: {"avg": float(np.mean(v)), "std": float(np.std(v)), "values": v} for p, v in fids.items()}


def _qae_label(label: int, cfg: ExperimentConfig, samples) -> dict:
    layout = qae.AnsatzLayout()
    fids = []
    objectives = []
    for seed in split_seeds(cfg):
        sets = dataio.preprocess(samples, seed=seed, train_size=cfg.train_size,
                                 test_size=cfg.test_size, labels=[label])
        state = qae.train_qae(sets[label].train, layout, cfg.qae_optimizer, cfg.qae_budget,
                              seed=seed, trash=cfg.qae_trash)
        objectives.append(state.best)
        fids.extend(qae.qae_roundtrip_fidelities(state.theta, layout, sets[label].test, cfg.qae_trash).tolist())
    return {"avg": float(np.mean(fids)), "std": float(np.std(fids)), "values": fids,
            "train_objective": objectives}


def fidelity_bench(cfg: ExperimentConfig, samples=None) -> dict:
    """Per-label reconstruction fidelity for each reference policy (and QAE)."""
    cfg = cfg.resolved()
    samples = dataio.ingest(cfg.dataset) if samples is None else samples
    sqc = _map(partial(_sqc_label, cfg=cfg, samples=samples), cfg.labels, cfg.workers)
    result = {"config": cfg.to_dict(), "labels": {}}
    for label, entry in zip(cfg.labels, sqc):
        result["labels"][label] = {"sqc": entry}
    if cfg.qae:
        qres = _map(partial(_qae_label, cfg=cfg, samples=samples), cfg.labels, cfg.workers)
        for label, entry in zip(cfg.labels, qres):
            result["labels"][label]["qae"] = entry
    return result


_POLICY_COLUMNS = {"zero": "SQC", "opt1": "Opt1", "opt2": "Opt2"}


def fidelity_table(result: dict) -> str:
    cfg = result["config"]
    header = ["Label"]
    if cfg["qae"]:
        header += ["QAE Avg", "QAE Std"]
    for p in cfg["policies"]:
        header += [f"{_POLICY_COLUMNS[p]} Avg", f"{_POLICY_COLUMNS[p]} Std"]
    rows = []
    for label, entry in result["labels"].items():
        row = [label]
        if cfg["qae"]:
            row += [entry["qae"]["avg"], entry["qae"]["std"]]
        for p in cfg["policies"]:
            row += [entry["sqc"][p]["avg"], entry["sqc"][p]["std"]]
        rows.append(row)
    return _csv(header, rows)


def classify_bench(cfg: ExperimentConfig, samples=None) -> dict:
    cfg = cfg.resolved()
    samples = dataio.ingest(cfg.dataset) if samples is None else samples
    train_cfg = classifier.TrainConfig(learning_rate=cfg.learning_rate, iterations=cfg.iterations,
                                       batch_size=cfg.batch_size)
    fn = partial(classifier.evaluate, samples, trash=cfg.classifier_trash, repetitions=cfg.repetitions,
                 root_seed=cfg.seed, config=train_cfg, test_size=cfg.test_size,
                 train_size=cfg.classifier_train_size)
    results = _map(fn, cfg.labels, cfg.workers)
    return {"config": cfg.to_dict(), "labels": {r["label"]: r for r in results}}


def classify_table(result: dict) -> str:
    rows = [[label, r["phi_mean"], r["phi_std"]] for label, r in result["labels"].items()]
    return _csv(["Label", "Avg", "Std"], rows)


def qae_table(result: dict) -> str:
    rows = []
    for label, entry in result["labels"].items():
        rows.append([label, entry["qae"]["avg"], entry["qae"]["std"],
                     entry["sqc"]["zero"]["avg"], entry["sqc"]["zero"]["std"]])
    return _csv(["Label", "QAE Avg", "QAE Std", "SQC Avg", "SQC Std"], rows)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.6f}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def write_outputs(out_dir, name: str, result: dict, table: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(result["config"], indent=2, sort_keys=True) + "\n")
    (out / f"{name}.json").write_text(json.dumps(result, indent=2, sort_keys=True, default=float) + "\n")
    (out / f"{name}.csv").write_text(table)
