"""optdigits ingestion, preprocessing, splits and typical states."""
from __future__ import annotations

import gzip
import json
import logging
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

NUM_FEATURES = 64
DATASET_ENV = "SQC_DATASET"


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class Sample:
    features: np.ndarray
    label: int


@dataclass
class PreparedSet:
    class_label: int
    train: np.ndarray  # (n_train, 64) normalized states
    test: np.ndarray
    stats: dict = field(repr=False)
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "class_label": self.class_label,
            "seed": self.seed,
            "train": self.train.tolist(),
            "test": self.test.tolist(),
            "stats": {k: np.asarray(v).tolist() for k, v in self.stats.items()},
        }


def default_dataset_path() -> Path:
    """Dataset path from ``$SQC_DATASET``, else the bundled optdigits copy."""
    env = os.environ.get(DATASET_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("schmidt_compressor") / "data" / "optdigits.csv.gz"))


def _open_text(path: Path):
    if path.suffix == ".gz":
        return gzip.open(path, "rt")
    return open(path, "r")


def ingest(path=None) -> list[Sample]:
    """Parse rows of 64 pixel counts followed by a digit label."""
    path = Path(path) if path is not None else default_dataset_path()
    if not path.exists():
        raise FileNotFoundError(
            f"dataset not found at {path}; pass --dataset or set ${DATASET_ENV}"
        )
    samples = []
    errors = []
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != NUM_FEATURES + 1:
                errors.append(f"line {lineno}: expected {NUM_FEATURES + 1} fields, got {len(fields)}")
                continue
            try:
                values = [int(f) for f in fields]
            except ValueError:
                errors.append(f"line {lineno}: non-integer field")
                continue
            label = values[-1]
            if not 0 <= label <= 9 or min(values[:-1]) < 0:
                errors.append(f"line {lineno}: label or pixel out of range")
                continue
            samples.append(Sample(np.array(values[:-1], dtype=float), label))
    if errors:
        shown = "; ".join(errors[:5])
        more = f" (+{len(errors) - 5} more)" if len(errors) > 5 else ""
        raise DatasetError(f"{path}: {shown}{more}")
    return samples


def to_arrays(samples: Sequence[Sample]) -> tuple[np.ndarray, np.ndarray]:
    x = np.array([s.features for s in samples], dtype=float).reshape(-1, NUM_FEATURES)
    y = np.array([s.label for s in samples], dtype=int)
    return x, y


def scale_features(x: np.ndarray) -> tuple[np.ndarray, dict]:
    """Per-feature standardization followed by per-feature min-max to [0, 1].

    Zero-variance and zero-range features map to 0.
    """
    x = np.asarray(x, dtype=float)
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    safe_std = np.where(std > 0, std, 1.0)
    z = (x - mean) / safe_std
    lo, hi = z.min(axis=0), z.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    scaled = (z - lo) / span
    return scaled, {"mean": mean, "std": std, "min": lo, "max": hi}


def normalize_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise DatasetError("a sample is all zeros after scaling")
    return x / norms


def split_indices(count: int, train_size: int, test_size: int, rng: np.random.Generator):
    """Shuffle, take ``test_size`` for test and up to ``train_size`` for train."""
    if count <= test_size:
        raise DatasetError(f"class has {count} samples, need more than test size {test_size}")
    order = rng.permutation(count)
    test = order[:test_size]
    train = order[test_size : test_size + train_size]
    if len(train) < train_size:
        log.warning("only %d training samples available (requested %d)", len(train), train_size)
    return train, test


def preprocess(
    samples: Sequence[Sample],
    seed: int = 0,
    train_size: int = 160,
    test_size: int = 20,
    labels: Iterable[int] | None = None,
) -> dict[int, PreparedSet]:
    """Scale the whole dataset, normalize each sample, and split every class.

    Scaling statistics come from all ingested samples; the split of each class
    is drawn from its own generator seeded by ``(seed, label)``.
    """
    x, y = to_arrays(samples)
    if len(x) == 0:
        raise DatasetError("no samples")
    scaled, stats = scale_features(x)
    states = normalize_rows(scaled)
    labels = sorted(set(y.tolist())) if labels is None else list(labels)
    out = {}
    for label in labels:
        members = np.flatnonzero(y == label)
        if len(members) == 0:
            raise DatasetError(f"no samples with label {label}")
        rng = np.random.default_rng([seed, label])
        train, test = split_indices(len(members), train_size, test_size, rng)
        out[label] = PreparedSet(
            class_label=label,
            train=states[members[train]],
            test=states[members[test]],
            stats=stats,
            seed=seed,
        )
    return out


def save_prepared(path, sets: dict[int, PreparedSet]) -> None:
    payload = {str(k): v.to_dict() for k, v in sorted(sets.items())}
    Path(path).write_text(json.dumps(payload))


def load_prepared(path) -> dict[int, PreparedSet]:
    payload = json.loads(Path(path).read_text())
    out = {}
    for key, d in payload.items():
        out[int(key)] = PreparedSet(
            class_label=d["class_label"],
            train=np.array(d["train"], dtype=float),
            test=np.array(d["test"], dtype=float),
            stats={k: np.array(v) for k, v in d["stats"].items()},
            seed=d["seed"],
        )
    return out


def typical_state(train) -> np.ndarray:
    """Renormalized component-wise mean of real nonnegative states."""
    train = np.asarray(train)
    if train.ndim != 2 or len(train) == 0:
        raise DatasetError("need a nonempty 2-D array of states")
    if np.iscomplexobj(train) and np.abs(train.imag).max() > 0:
        raise DatasetError("typical state by averaging needs real amplitudes")
    train = np.real(train)
    if train.min() < -1e-12:
        raise DatasetError("typical state by averaging needs nonnegative amplitudes")
    mean = train.mean(axis=0)
    norm = np.linalg.norm(mean)
    if norm == 0:
        raise DatasetError("mean of the training states is the zero vector")
    return mean / norm


def incremental_update(average, count: int, new_state) -> np.ndarray:
    """Running (unnormalized) mean after adding one state to ``count`` others.

    Normalize the result to obtain the typical state; the normalized vector
    alone does not carry enough information to continue the average.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    return (count * np.asarray(average) + np.asarray(new_state)) / (count + 1)


@dataclass
class RunningTypicalState:
    """Streaming typical state."""

    average: np.ndarray | None = None
    count: int = 0

    def update(self, state) -> None:
        state = np.asarray(state, dtype=float)
        if self.count == 0:
            self.average = state.copy()
        else:
            self.average = incremental_update(self.average, self.count, state)
        self.count += 1

    def state(self) -> np.ndarray:
        if self.count == 0:
            raise DatasetError("no states seen")
        return self.average / np.linalg.norm(self.average)


def total_distance(candidate, states) -> float:
    """Sum of squared L2 distances from ``candidate`` to every state."""
    diff = np.asarray(states) - np.asarray(candidate)
    return float(np.sum(np.abs(diff) ** 2))
