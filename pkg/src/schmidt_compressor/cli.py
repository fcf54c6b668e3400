"""Command-line entry point: ``sqc <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import costmodel, experiments
from .compressor import build_state_preparation
from .linalg import LinalgError, as_state, num_qubits
from .schmidt import schmidt_decompose, search_min_bond

log = logging.getLogger("sqc")


def _indices(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated qubit indices, got {text!r}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", help="optdigits CSV (default: $SQC_DATASET or the bundled copy)")
    p.add_argument("--seed", type=int, default=0, help="root seed")
    p.add_argument("--labels", type=_indices, default=experiments.LABELS)
    p.add_argument("--test-size", type=int, default=20)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output directory for CSV/JSON/config")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqc", description="Schmidt quantum compressor experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fidelity-bench", help="reconstruction fidelity per label and reference policy")
    _common(p)
    p.add_argument("--seeds", type=int, default=20, help="number of independent splits")
    p.add_argument("--trash-qubits", type=_indices, default=(3, 4, 5))
    p.add_argument("--policy", action="append", choices=["zero", "opt1", "opt2"],
                   help="repeatable; default is all three")
    p.add_argument("--train-size", type=int, default=160)
    p.add_argument("--shots", type=int, help="shot-based trash tomography for opt1/opt2")
    p.add_argument("--with-qae", action="store_true", help="add QAE baseline columns")
    p.add_argument("--qae-optimizer", choices=["cobyla", "nelder-mead"], default="cobyla")
    p.add_argument("--qae-budget", type=int, default=1000)

    p = sub.add_parser("qae-bench", help="QAE versus SQC reconstruction fidelity")
    _common(p)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--trash-qubits", type=_indices, default=(3, 4, 5))
    p.add_argument("--train-size", type=int, default=160)
    p.add_argument("--qae-optimizer", choices=["cobyla", "nelder-mead"], default="cobyla")
    p.add_argument("--qae-budget", type=int, default=1000)

    p = sub.add_parser("classify", help="one-class classification from trash tomography")
    _common(p)
    p.add_argument("--repetitions", type=int, default=10)
    p.add_argument("--trash-qubits", type=_indices, default=(4, 5))
    p.add_argument("--train-size", type=int, default=150)
    p.add_argument("--learning-rate", type=float, default=0.01)
    p.add_argument("--iterations", type=int, default=1000)

    p = sub.add_parser("cost", help="analytic CNOT count")
    p.add_argument("n_a", type=int)
    p.add_argument("n_b", type=int)
    p.add_argument("m", type=int)

    p = sub.add_parser("prep-verify", help="search a bipartition and verify state preparation")
    p.add_argument("state_file", help=".npy, .json, or text file with one amplitude per line")
    p.add_argument("--n-b", type=int, help="trash block size (default: n // 2)")
    return parser


def load_state_file(path) -> np.ndarray:
    path = Path(path)
    if path.suffix == ".npy":
        data = np.load(path)
    elif path.suffix == ".json":
        raw = json.loads(path.read_text())
        data = [complex(*v) if isinstance(v, list) else complex(v) for v in raw]
    else:
        data = [complex(line.strip().replace(" ", "")) for line in path.read_text().splitlines() if line.strip()]
    return np.asarray(data, dtype=complex).ravel()


def prep_verify(state, n_b: int | None = None) -> dict:
    psi = as_state(state)
    n = num_qubits(psi.size)
    if n < 2:
        raise LinalgError("need at least 2 qubits")
    n_b = n // 2 if n_b is None else n_b
    part, rank = search_min_bond(psi, n_b)
    prep = build_state_preparation(psi, part)
    zero = np.zeros(psi.size, dtype=complex)
    zero[0] = 1
    fid = abs(np.vdot(psi, prep @ zero)) ** 2
    form = schmidt_decompose(psi, part)
    cost = costmodel.cost_of_schmidt(form)
    return {
        "num_qubits": n,
        "block_a": list(part.block_a),
        "block_b": list(part.block_b),
        "rank": rank,
        "measure": form.measure,
        "fidelity": float(fid),
        "cost": cost.to_dict(),
    }


def _config(args, **extra) -> experiments.ExperimentConfig:
    return experiments.ExperimentConfig(
        dataset=args.dataset, seed=args.seed, labels=tuple(args.labels), test_size=args.test_size,
        workers=args.workers, out=args.out, **extra,
    )


def _emit(args, name, result, table) -> None:
    if args.out:
        experiments.write_outputs(args.out, name, result, table)
    sys.stdout.write(table)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "cost":
            print(json.dumps(costmodel.cnot_count(args.n_a, args.n_b, args.m).to_dict(), indent=2))
        elif args.command == "prep-verify":
            print(json.dumps(prep_verify(load_state_file(args.state_file), args.n_b), indent=2))
        elif args.command == "fidelity-bench":
            cfg = _config(args, seeds=args.seeds, trash_qubits=args.trash_qubits,
                          policies=tuple(args.policy or ("zero", "opt1", "opt2")),
                          train_size=args.train_size, shots=args.shots, qae=args.with_qae,
                          qae_optimizer=args.qae_optimizer, qae_budget=args.qae_budget)
            result = experiments.fidelity_bench(cfg)
            _emit(args, "fidelity", result, experiments.fidelity_table(result))
        elif args.command == "qae-bench":
            cfg = _config(args, seeds=args.seeds, trash_qubits=args.trash_qubits, policies=("zero",),
                          train_size=args.train_size, qae=True, qae_optimizer=args.qae_optimizer,
                          qae_budget=args.qae_budget)
            result = experiments.fidelity_bench(cfg)
            _emit(args, "qae", result, experiments.qae_table(result))
        elif args.command == "classify":
            cfg = _config(args, repetitions=args.repetitions, classifier_trash=args.trash_qubits,
                          classifier_train_size=args.train_size, learning_rate=args.learning_rate,
                          iterations=args.iterations)
            result = experiments.classify_bench(cfg)
            _emit(args, "classify", result, experiments.classify_table(result))
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
