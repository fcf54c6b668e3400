"""One-class classification from trash-register tomography.

Each trash qubit contributes the real and imaginary parts of its 2x2 reduced
density matrix (row-major), 8 numbers per qubit. A single sigmoid unit is
trained on those features with Adam and binary cross-entropy.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .compressor import CompressorModel, build_compressor, tomography_trash
from .dataio import preprocess, typical_state
from .schmidt import Bipartition

FEATURES_PER_QUBIT = 8


def _flatten_qubit(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex).reshape(-1)
    return np.stack([rho.real, rho.imag], axis=-1).reshape(-1)


def extract_features(model: CompressorModel, state, shots: int | None = None, rng=None) -> np.ndarray:
    _, singles = tomography_trash(model, state, shots=shots, rng=rng)
    return np.concatenate([_flatten_qubit(r) for r in singles])


def decode_features(features) -> list[np.ndarray]:
    """Inverse of the feature encoding: one 2x2 matrix per trash qubit."""
    f = np.asarray(features, dtype=float).reshape(-1, 4, 2)
    return [(blk[:, 0] + 1j * blk[:, 1]).reshape(2, 2) for blk in f]


def trash_features(model: CompressorModel, states) -> np.ndarray:
    """Exact features for a batch of states, shape ``(N, 8 * n_b)``."""
    states = np.atleast_2d(np.asarray(states, dtype=complex))
    d_a, d_b = model.dims
    n_b = model.bipartition.n_b
    block = np.stack([model.to_block(x) for x in states], axis=1)
    c = (model.matrix @ block).reshape(d_a, d_b, -1)
    rho_t = np.einsum("abN,acN->Nbc", c, c.conj())
    t = rho_t.reshape((-1,) + (2,) * (2 * n_b))
    out = []
    for q in range(n_b):
        rest = [i for i in range(n_b) if i != q]
        perm = [0, 1 + q] + [1 + i for i in rest] + [1 + n_b + q] + [1 + n_b + i for i in rest]
        r = t.transpose(perm).reshape(len(states), 2, 2 ** (n_b - 1), 2, 2 ** (n_b - 1))
        r = np.einsum("Najbj->Nab", r)
        out.append(np.stack([r.real, r.imag], axis=-1).reshape(len(states), -1))
    return np.concatenate(out, axis=1)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 25
    iterations: int = 1000
    replication: int = 9
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ClassifierModel:
    weights: np.ndarray
    bias: float
    config: TrainConfig = field(default_factory=TrainConfig)
    loss_trace: list[float] = field(default_factory=list, repr=False)

    def predict_proba(self, features) -> np.ndarray:
        return sigmoid(np.atleast_2d(features) @ self.weights + self.bias)

    def predict(self, features, threshold: float = 0.5) -> np.ndarray:
        return self.predict_proba(features) > threshold


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z)))


def loss_and_grad(weights, bias, x, y):
    """Mean binary cross-entropy and its gradient w.r.t. (weights, bias)."""
    x = np.atleast_2d(x)
    y = np.asarray(y, dtype=float)
    z = x @ weights + bias
    # log(1 + e^z) - y z, stable for large |z|
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    r = sigmoid(z) - y
    return loss, x.T @ r / len(y), float(r.mean())


def build_pool(target_features, other_features: Sequence[np.ndarray], replication: int = 9):
    """Balanced training pool: target class replicated, other classes once each."""
    target_features = np.asarray(target_features)
    if len(target_features) == 0 or not other_features or any(len(o) == 0 for o in other_features):
        raise ValueError("every class needs at least one training sample")
    pos = np.tile(target_features, (replication, 1))
    neg = np.concatenate(other_features)
    x = np.concatenate([pos, neg])
    y = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    return x, y


def train(x, y, config: TrainConfig = TrainConfig()) -> ClassifierModel:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.any(y == 1) and np.any(y == 0)):
        raise ValueError("training data needs both classes")
    rng = np.random.default_rng(config.seed)
    w = np.zeros(x.shape[1])
    b = 0.0
    m_w, v_w = np.zeros_like(w), np.zeros_like(w)
    m_b = v_b = 0.0
    b1, b2 = config.beta1, config.beta2
    trace = []
    batch = min(config.batch_size, len(y))
    for t in range(1, config.iterations + 1):
        idx = rng.choice(len(y), size=batch, replace=False)
        loss, g_w, g_b = loss_and_grad(w, b, x[idx], y[idx])
        trace.append(loss)
        m_w = b1 * m_w + (1 - b1) * g_w
        v_w = b2 * v_w + (1 - b2) * g_w**2
        m_b = b1 * m_b + (1 - b1) * g_b
        v_b = b2 * v_b + (1 - b2) * g_b**2
        c1, c2 = 1 - b1**t, 1 - b2**t
        w = w - config.learning_rate * (m_w / c1) / (np.sqrt(v_w / c2) + config.eps)
        b = b - config.learning_rate * (m_b / c1) / (math.sqrt(v_b / c2) + config.eps)
    final = loss_and_grad(w, b, x, y)[0]
    if not math.isfinite(final):
        raise FloatingPointError("training diverged")
    trace.append(final)
    return ClassifierModel(w, float(b), config, trace)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @classmethod
    def from_predictions(cls, truth, predicted) -> "ConfusionCounts":
        truth = np.asarray(truth, dtype=bool)
        predicted = np.asarray(predicted, dtype=bool)
        return cls(
            int(np.sum(truth & predicted)),
            int(np.sum(~truth & predicted)),
            int(np.sum(~truth & ~predicted)),
            int(np.sum(truth & ~predicted)),
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def phi_coefficient(c: ConfusionCounts) -> float:
    """Matthews correlation; 0 when any marginal is empty."""
    denom = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn)
    if denom == 0:
        return 0.0
    return (c.tp * c.tn - c.fp * c.fn) / math.sqrt(denom)


def run_once(samples, target: int, trash: Sequence[int], seed: int, config: TrainConfig,
             train_size: int = 150, test_size: int = 20, threshold: float = 0.5, n: int = 6):
    """One repetition: split, build the target-class compressor, train, test."""
    sets = preprocess(samples, seed=seed, train_size=train_size, test_size=test_size)
    if target not in sets or len(sets) < 2:
        raise ValueError(f"need label {target} and at least one other class")
    part = Bipartition.from_trash(n, trash)
    model = build_compressor(typical_state(sets[target].train), part)
    feats = {k: trash_features(model, s.train) for k, s in sets.items()}
    x, y = build_pool(feats[target], [feats[k] for k in sorted(feats) if k != target], config.replication)
    clf = train(x, y, config)
    x_test = np.concatenate([trash_features(model, sets[k].test) for k in sorted(sets)])
    y_test = np.concatenate([np.full(len(sets[k].test), k == target) for k in sorted(sets)])
    counts = ConfusionCounts.from_predictions(y_test, clf.predict(x_test, threshold))
    return phi_coefficient(counts), counts, clf


def repetition_seeds(root_seed: int, repetitions: int) -> list[int]:
    seq = np.random.SeedSequence(root_seed)
    return [int(s.generate_state(1)[0]) for s in seq.spawn(repetitions)]


def evaluate(samples, target: int, trash: Sequence[int] = (4, 5), repetitions: int = 10,
             root_seed: int = 0, config: TrainConfig = TrainConfig(), test_size: int = 20,
             train_size: int = 150, threshold: float = 0.5) -> dict:
    """Mean and std of phi over reseeded repetitions for one target label."""
    if test_size < 1:
        raise ValueError("insufficient test samples")
    phis, counts = [], []
    for seed in repetition_seeds(root_seed, repetitions):
        cfg = TrainConfig(**{**config.to_dict(), "seed": seed})
        phi, c, _ = run_once(samples, target, trash, seed, cfg, train_size, test_size, threshold)
        phis.append(phi)
        counts.append(asdict(c))
    return {
        "label": target,
        "phi_mean": float(np.mean(phis)),
        "phi_std": float(np.std(phis)),
        "phis": phis,
        "confusion": counts,
    }
