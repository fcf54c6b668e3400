"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, shown in the terminal summary.
Reference values are the expected per-label results of the optdigits experiments.
"""
import itertools
import math
import time

import numpy as np
import pytest

from schmidt_compressor import linalg
from schmidt_compressor.classifier import ConfusionCounts, loss_and_grad, phi_coefficient
from schmidt_compressor.compressor import build_compressor, estimate_density, roundtrip, roundtrip_fidelities
from schmidt_compressor.costmodel import cnot_count, unitary_cnots
from schmidt_compressor.dataio import preprocess, total_distance, typical_state
from schmidt_compressor.experiments import ExperimentConfig, classify_bench, fidelity_bench
from schmidt_compressor.schmidt import Bipartition, schmidt_decompose, truncate
from conftest import random_density, random_state, record

LABELS = range(10)
SQC_ZERO = [0.841, 0.679, 0.736, 0.725, 0.709, 0.706, 0.772, 0.689, 0.713, 0.671]
SQC_OPT1 = [0.859, 0.794, 0.780, 0.740, 0.736, 0.730, 0.792, 0.718, 0.746, 0.703]
QAE = [0.815, 0.700, 0.715, 0.699, 0.694, 0.705, 0.744, 0.703, 0.694, 0.633]
PHI_MEAN = [0.8850, 0.4825, 0.5622, 0.6943, 0.8341, 0.6975, 0.7927, 0.7354, 0.5296, 0.5792]
PHI_STD = [0.0334, 0.0141, 0.0124, 0.0217, 0.0222, 0.0230, 0.0243, 0.0156, 0.0228, 0.0148]


def _fmt(values):
    return "[" + ", ".join(f"{v:+.3f}" for v in values) + "]"


@pytest.fixture(scope="module")
def bench(samples):
    start = time.perf_counter()
    result = fidelity_bench(ExperimentConfig(), samples)
    return result, time.perf_counter() - start


def test_criterion_1_typical_state_is_lossless(samples):
    start = time.perf_counter()
    sets = preprocess(samples, seed=0)
    part = Bipartition.from_trash(6, (3, 4, 5))
    worst = 1.0
    for label in LABELS:
        psi = typical_state(sets[label].train)
        worst = min(worst, roundtrip(build_compressor(psi, part), psi).fidelity)
    elapsed = time.perf_counter() - start
    ok = worst >= 1 - 1e-10 and elapsed < 1.0
    assert record(1, ok, f"min typical-state fidelity {worst:.15f}, {elapsed:.2f} s")


def test_criterion_2_sqc_fidelity_table(bench):
    result, elapsed = bench
    got = [result["labels"][k]["sqc"]["zero"]["avg"] for k in LABELS]
    dev = np.subtract(got, SQC_ZERO)
    seeds = result["config"]["seeds"]
    ok = np.all(np.abs(dev) <= 0.05) and seeds >= 5 and elapsed < 60
    assert record(2, ok, f"zero-policy deviation {_fmt(dev)} over {seeds} splits, {elapsed:.1f} s")


def test_criterion_3_reference_policy_ordering(bench):
    result, _ = bench
    labels = [result["labels"][k]["sqc"] for k in LABELS]
    ordered = all(e["opt1"]["avg"] >= e["opt2"]["avg"] >= e["zero"]["avg"] - 0.005 for e in labels)
    dev = np.subtract([e["opt1"]["avg"] for e in labels], SQC_OPT1)
    ok = ordered and np.all(np.abs(dev) <= 0.05)
    assert record(3, ok, f"ordering {'holds' if ordered else 'violated'}, opt1 deviation {_fmt(dev)}")


def test_criterion_4_cost_model():
    total = cnot_count(3, 3, 3).total_ceil
    gaps = [abs(2 * unitary_cnots(s) / 4**s - 23 / 24) for s in range(2, 11)]
    converging = all(b < a for a, b in zip(gaps, gaps[1:]))
    ok = total == 43 and 40 <= total <= 43 and converging
    assert record(4, ok, f"cnot_count(3,3,3) = {total}, ratio gap at s=10 {gaps[-1]:.2e}")


def test_criterion_5_classification_table(samples):
    start = time.perf_counter()
    result = classify_bench(ExperimentConfig(), samples)
    elapsed = time.perf_counter() - start
    means = [result["labels"][k]["phi_mean"] for k in LABELS]
    stds = [result["labels"][k]["phi_std"] for k in LABELS]
    dev = np.subtract(means, PHI_MEAN)
    # "same order": within a factor of ten of the reference spread
    same_order = all(0.1 * p <= s <= 10 * p for s, p in zip(stds, PHI_STD))
    ok = np.all(np.abs(dev) <= 0.08) and same_order and elapsed < 300
    detail = f"phi deviation {_fmt(dev)}, std order {'ok' if same_order else 'off'}, {elapsed:.0f} s"
    assert record(5, ok, detail)


@pytest.mark.slow
def test_criterion_6_qae_baseline(samples):
    start = time.perf_counter()
    result = fidelity_bench(ExperimentConfig(seeds=1, policies=("zero",), qae=True), samples)
    elapsed = time.perf_counter() - start
    dev = np.subtract([result["labels"][k]["qae"]["avg"] for k in LABELS], QAE)
    misses = int(np.sum(np.abs(dev) > 0.08))
    ok = misses <= 2 and elapsed < 1800
    assert record(6, ok, f"QAE deviation {_fmt(dev)}, {misses} labels outside 0.08, {elapsed:.0f} s")


def _spectral_checks(rng):
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 7))
        psi = random_state(rng, n)
        trash = tuple(sorted(rng.choice(n, int(rng.integers(1, n)), replace=False)))
        part = Bipartition.from_trash(n, trash)
        form = schmidt_decompose(psi, part)
        worst = max(worst, np.linalg.norm(form.reconstruct() - psi))
        rho_a = linalg.partial_trace(linalg.density_matrix(psi), list(part.block_a))
        w, v = linalg.hermitian_eig(rho_a)
        worst = max(worst, np.linalg.norm(rho_a @ v - v * w))
        k = min(len(w), len(form.lambdas))
        worst = max(worst, np.abs(w[:k] - form.lambdas[:k] ** 2).max(), np.abs(w[k:]).max(initial=0))
    return worst


def _truncation_checks(rng):
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 7))
        n_b = int(rng.integers(1, n // 2 + 1))
        psi = random_state(rng, n)
        part = Bipartition.trailing(n, n_b)
        form = schmidt_decompose(psi, part)
        r = int(rng.integers(1, form.rank + 1))
        cut, loss = truncate(form, r)
        worst = max(worst, abs(loss - (1 - abs(np.vdot(psi, cut.reconstruct())) ** 2)))
    return worst


def _compressor_checks(rng):
    bad = 0
    for _ in range(500):
        n = int(rng.integers(2, 7))
        trash = tuple(sorted(rng.choice(n, int(rng.integers(1, n // 2 + 1)), replace=False)))
        model = build_compressor(random_state(rng, n), Bipartition.from_trash(n, trash))
        f = roundtrip_fidelities(model, [random_state(rng, n), model.typical_state], "zero")
        if not (linalg.is_unitary(model.matrix, 1e-10) and 0 <= f[0] <= 1 and f[1] >= 1 - 1e-10):
            bad += 1
    return bad


def _average_checks(rng):
    bad = 0
    for _ in range(100):
        states = np.abs(rng.normal(size=(int(rng.integers(2, 30)), 16)))
        states /= np.linalg.norm(states, axis=1, keepdims=True)
        mean = states.mean(axis=0)
        base = total_distance(mean, states)
        bad += sum(total_distance(mean + 1e-3 * rng.normal(size=16), states) <= base for _ in range(10))
    return bad


def _gradient_check(rng):
    x = rng.normal(size=(50, 16))
    y = (rng.random(50) > 0.5).astype(float)
    w, b = rng.normal(size=16), -0.2
    _, g_w, g_b = loss_and_grad(w, b, x, y)
    worst, h = 0.0, 1e-6
    for i in range(17):
        e = np.zeros(16)
        if i < 16:
            e[i] = h
            fd = (loss_and_grad(w + e, b, x, y)[0] - loss_and_grad(w - e, b, x, y)[0]) / (2 * h)
            g = g_w[i]
        else:
            fd = (loss_and_grad(w, b + h, x, y)[0] - loss_and_grad(w, b - h, x, y)[0]) / (2 * h)
            g = g_b
        worst = max(worst, abs(fd - g) / max(1.0, abs(fd)))
    return worst


def _phi_check():
    worst = 0.0
    for tp, fp, tn, fn in itertools.product(range(21), repeat=4):
        n = tp + fp + tn + fn
        if n == 0:
            continue
        pt, pp = (tp + fn) / n, (tp + fp) / n
        var = pt * (1 - pt) * pp * (1 - pp)
        oracle = 0.0 if var == 0 else (tp / n - pt * pp) / math.sqrt(var)
        worst = max(worst, abs(phi_coefficient(ConfusionCounts(tp, fp, tn, fn)) - oracle))
    return worst


def _shot_check(rng):
    rho = random_density(rng, 3)
    errs = [np.mean([np.linalg.norm(estimate_density(rho, s, rng) - rho) for _ in range(20)])
            for s in (10**3, 10**4, 10**5)]
    scaled = np.array(errs) * np.sqrt([1e3, 1e4, 1e5])
    return errs, scaled.max() / scaled.min()


def test_criterion_7_property_suite():
    rng = np.random.default_rng(7)
    spectral = _spectral_checks(rng)
    trunc = _truncation_checks(rng)
    comp_bad = _compressor_checks(rng)
    avg_bad = _average_checks(rng)
    grad = _gradient_check(rng)
    phi = _phi_check()
    errs, spread = _shot_check(rng)
    checks = {
        "spectral": spectral <= 1e-10,
        "truncation": trunc <= 1e-12,
        "compressor": comp_bad == 0,
        "average": avg_bad == 0,
        "gradient": grad <= 1e-6,
        "phi": phi <= 1e-12,
        "shots": errs[0] > errs[1] > errs[2] and spread < 2.0,
    }
    failed = [k for k, v in checks.items() if not v]
    detail = (f"spectral {spectral:.1e}, truncation {trunc:.1e}, compressor misses {comp_bad}, "
              f"average misses {avg_bad}, gradient {grad:.1e}, phi {phi:.1e}, shot-scaling spread {spread:.2f}")
    assert record(7, not failed, detail + (f"; failed: {failed}" if failed else ""))
