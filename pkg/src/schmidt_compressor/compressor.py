"""Schmidt compressor: construction, compression/decompression and fidelities.

The compressor built from a typical state ``psi`` is

    C = (prod_i CNOT_i) (U ⊗ V*)^-1

where ``U`` and ``V*`` hold the Schmidt vectors of ``psi`` (completed to
unitaries) and ``CNOT_i`` couples the i-th least significant qubit of the
latent block to the i-th least significant qubit of the trash block, for
``i < m`` with ``m`` the Schmidt measure. ``C psi = |lambda>_A |0>_B``.

All matrices of a :class:`CompressorModel` live in the *block frame*, where
the latent qubits occupy the most significant positions. Helpers translate to
and from the caller's qubit order.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import linalg
from .linalg import LinalgError, as_state, complete_isometry, inverse_permutation, permute_operator, permute_qubits
from .schmidt import Bipartition, SchmidtForm, schmidt_decompose

MAX_QUBITS = 12

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class ReferencePolicy(str, enum.Enum):
    """State injected into the trash register before decompression."""

    ZERO = "zero"
    OPT1 = "opt1"  # top eigenvector of the whole trash state
    OPT2 = "opt2"  # product of per-qubit top eigenvectors

    @classmethod
    def parse(cls, value) -> "ReferencePolicy":
        if isinstance(value, cls):
            return value
        aliases = {"top-eigenvector": cls.OPT1, "per-qubit-eigenvector": cls.OPT2}
        value = str(value).lower()
        return aliases.get(value) or cls(value)


def cnot_pairs(part: Bipartition, m: int) -> list[tuple[int, int]]:
    """(control, target) qubits, LSB-aligned within each block."""
    a, b = part.block_a, part.block_b
    return [(a[len(a) - 1 - i], b[len(b) - 1 - i]) for i in range(m)]


def _cnot_layer(n_a: int, n_b: int, m: int) -> np.ndarray:
    """Permutation matrix of the CNOT layer in the block frame."""
    dim = 2 ** (n_a + n_b)
    idx = np.arange(dim)
    a, b = idx >> n_b, idx & (2**n_b - 1)
    mask = 2**m - 1
    dest = (a << n_b) | (b ^ (a & mask))
    layer = np.zeros((dim, dim))
    layer[dest, idx] = 1.0
    return layer


@dataclass(frozen=True)
class CompressorModel:
    typical_state: np.ndarray
    bipartition: Bipartition
    schmidt: SchmidtForm
    u_inv: np.ndarray  # U^dagger on block A, 2**n_a square
    v_inv: np.ndarray  # (V*)^dagger = V^T on block B, 2**n_b square
    cnot_pairs: list[tuple[int, int]]
    matrix: np.ndarray  # C in the block frame
    policy: ReferencePolicy = ReferencePolicy.ZERO

    @property
    def num_qubits(self) -> int:
        return self.bipartition.num_qubits

    @property
    def measure(self) -> int:
        return self.schmidt.measure

    @property
    def dims(self) -> tuple[int, int]:
        return 2**self.bipartition.n_a, 2**self.bipartition.n_b

    @property
    def full_matrix_c(self) -> np.ndarray:
        """C acting on states in the original qubit order."""
        return permute_operator(self.matrix, inverse_permutation(self.bipartition.order))

    def to_block(self, state) -> np.ndarray:
        return permute_qubits(state, self.bipartition.order)

    def from_block(self, state) -> np.ndarray:
        return permute_qubits(state, inverse_permutation(self.bipartition.order))

    def with_policy(self, policy) -> "CompressorModel":
        return CompressorModel(
            self.typical_state,
            self.bipartition,
            self.schmidt,
            self.u_inv,
            self.v_inv,
            self.cnot_pairs,
            self.matrix,
            ReferencePolicy.parse(policy),
        )


def _assemble(u_inv, v_inv, part: Bipartition, m: int) -> np.ndarray:
    return _cnot_layer(part.n_a, part.n_b, m) @ np.kron(u_inv, v_inv)


def build_compressor(typical, part: Bipartition, policy=ReferencePolicy.ZERO) -> CompressorModel:
    psi = as_state(typical)
    n = linalg.num_qubits(psi.size)
    if n > MAX_QUBITS:
        raise linalg.DimensionError(f"{n} qubits exceeds the dense-matrix cap of {MAX_QUBITS}")
    form = schmidt_decompose(psi, part)
    u_full = complete_isometry(form.u)
    v_full = complete_isometry(form.v)
    u_inv = u_full.conj().T
    v_inv = v_full.conj().T
    matrix = _assemble(u_inv, v_inv, part, form.measure)
    return CompressorModel(
        typical_state=psi,
        bipartition=part,
        schmidt=form,
        u_inv=u_inv,
        v_inv=v_inv,
        cnot_pairs=cnot_pairs(part, form.measure),
        matrix=matrix,
        policy=ReferencePolicy.parse(policy),
    )


def latent_amplitudes(model: CompressorModel) -> np.ndarray:
    """The vector ``|lambda>`` on the latent block, padded to ``2**n_a``."""
    lam = np.zeros(model.dims[0], dtype=complex)
    k = model.schmidt.columns
    lam[:k] = model.schmidt.lambdas[:k]
    return lam


def build_state_preparation(typical, part: Bipartition) -> np.ndarray:
    """Unitary ``(U ⊗ V*) CNOTs (S ⊗ I)`` mapping ``|0...0>`` to ``typical``.

    ``S`` is the completion of the Schmidt-coefficient vector to a unitary on
    block A. The returned matrix acts in the original qubit order.
    """
    model = build_compressor(typical, part)
    loader = complete_isometry(latent_amplitudes(model).reshape(-1, 1))
    prep = model.matrix.conj().T @ np.kron(loader, np.eye(model.dims[1]))
    return permute_operator(prep, inverse_permutation(part.order))


def _check_input(model: CompressorModel, state) -> np.ndarray:
    x = np.asarray(state, dtype=complex).ravel()
    if x.size != 2**model.num_qubits:
        raise LinalgError(f"input has {x.size} amplitudes, model expects {2 ** model.num_qubits}")
    return as_state(x)


def compressed_block(model: CompressorModel, state) -> np.ndarray:
    """``C x`` in the block frame, reshaped to (latent, trash)."""
    x = _check_input(model, state)
    return (model.matrix @ model.to_block(x)).reshape(model.dims)


def compress(model: CompressorModel, state) -> tuple[np.ndarray, np.ndarray]:
    """Latent and trash density matrices of ``C x``.

    Qubits of each result follow the order of their block.
    """
    c = compressed_block(model, state)
    rho_l = c @ c.conj().T
    rho_t = c.T @ c.conj()
    return rho_l, rho_t


def single_qubit_reductions(rho) -> list[np.ndarray]:
    n = linalg.num_qubits(np.asarray(rho).shape[0])
    return [linalg.partial_trace(rho, [q]) for q in range(n)]


def top_eigenvector(rho) -> np.ndarray:
    _, vecs = linalg.hermitian_eig(rho)
    return vecs[:, 0]


def _project_physical(rho) -> np.ndarray:
    """Closest-by-eigenvalue-clipping density matrix."""
    rho = (rho + rho.conj().T) / 2
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0, None)
    if w.sum() <= 0:
        return np.eye(rho.shape[0], dtype=complex) / rho.shape[0]
    w = w / w.sum()
    return (v * w) @ v.conj().T


def pauli_strings(n: int):
    for labels in np.ndindex(*(4,) * n):
        name = "".join("IXYZ"[i] for i in labels)
        op = np.array([[1.0 + 0j]])
        for ch in name:
            op = np.kron(op, _PAULI[ch])
        yield name, op


def estimate_density(rho, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Pauli tomography of ``rho`` with ``shots`` binomial samples per Pauli string."""
    if shots is None or int(shots) < 1:
        raise ValueError("shots must be a positive integer")
    shots = int(shots)
    dim = rho.shape[0]
    n = linalg.num_qubits(dim)
    est = np.zeros_like(rho, dtype=complex)
    for name, op in pauli_strings(n):
        if set(name) == {"I"}:
            est += op
            continue
        expect = float(np.clip(np.real(np.trace(rho @ op)), -1.0, 1.0))
        plus = rng.binomial(shots, (1 + expect) / 2)
        est += (2 * plus / shots - 1) * op
    return _project_physical(est / dim)


def tomography_trash(model: CompressorModel, state, shots: int | None = None, rng=None):
    """Trash-register density matrix and its single-qubit reductions.

    Without ``shots`` both are exact. With ``shots`` the full matrix is
    estimated from all Pauli strings and each single-qubit matrix from its own
    X/Y/Z measurements; estimates are projected to valid density matrices.
    """
    _, rho_t = compress(model, state)
    singles = single_qubit_reductions(rho_t)
    if shots is None:
        return rho_t, singles
    if int(shots) < 1:
        raise ValueError("shots must be a positive integer")
    rng = np.random.default_rng(rng)
    full = estimate_density(rho_t, shots, rng)
    singles = [estimate_density(r, shots, rng) for r in singles]
    return full, singles


def reference_state(model: CompressorModel, rho_t, policy, singles=None) -> np.ndarray:
    policy = ReferencePolicy.parse(policy)
    d_b = model.dims[1]
    if policy is ReferencePolicy.ZERO:
        ref = np.zeros((d_b, d_b), dtype=complex)
        ref[0, 0] = 1.0
        return ref
    if policy is ReferencePolicy.OPT1:
        e = top_eigenvector(rho_t)
        return np.outer(e, e.conj())
    singles = single_qubit_reductions(rho_t) if singles is None else singles
    ref = np.array([[1.0 + 0j]])
    for r in singles:
        e = top_eigenvector(r)
        ref = np.kron(ref, np.outer(e, e.conj()))
    return ref


@dataclass(frozen=True)
class RoundtripResult:
    rho_l: np.ndarray
    rho_t: np.ndarray
    rho_f: np.ndarray  # original qubit order
    fidelity: float
    rho_ref: np.ndarray = field(repr=False, default=None)


def fidelity(state, rho, atol: float = 1e-10) -> float:
    """``<x|rho|x>`` clamped to [0, 1] after checking the imaginary residual."""
    x = np.asarray(state, dtype=complex).ravel()
    value = np.vdot(x, rho @ x)
    if abs(value.imag) > atol:
        raise LinalgError(f"fidelity has imaginary part {value.imag:.3e}")
    return float(min(max(value.real, 0.0), 1.0))


def roundtrip(model: CompressorModel, state, policy=None, shots: int | None = None, rng=None) -> RoundtripResult:
    """Compress, swap in the reference state, decompress, and score the result."""
    x = _check_input(model, state)
    policy = model.policy if policy is None else ReferencePolicy.parse(policy)
    rho_l, rho_t = compress(model, x)
    if shots is None or policy is ReferencePolicy.ZERO:
        est, singles = rho_t, None
    else:
        est, singles = tomography_trash(model, x, shots=shots, rng=rng)
    ref = reference_state(model, est, policy, singles)
    mid = np.kron(rho_l, ref)
    rho_f_block = model.matrix.conj().T @ mid @ model.matrix
    rho_f = permute_operator(rho_f_block, inverse_permutation(model.bipartition.order))
    return RoundtripResult(rho_l, rho_t, rho_f, fidelity(x, rho_f), ref)


def roundtrip_fidelities(model: CompressorModel, states, policy=None) -> np.ndarray:
    """Exact roundtrip fidelities for many inputs at once."""
    policy = model.policy if policy is None else ReferencePolicy.parse(policy)
    states = np.asarray(states, dtype=complex)
    out = np.empty(len(states))
    for i, x in enumerate(states):
        c = compressed_block(model, x)
        rho_l = c @ c.conj().T
        rho_t = c.T @ c.conj()
        ref = reference_state(model, rho_t, policy)
        value = np.einsum("ab,ac,bd,cd->", c.conj(), rho_l, ref, c)
        if abs(value.imag) > 1e-10:
            raise LinalgError(f"fidelity has imaginary part {value.imag:.3e}")
        out[i] = min(max(value.real, 0.0), 1.0)
    return out


def save_model(path, model: CompressorModel) -> None:
    """Write the model to an ``.npz`` container (binary64 exact)."""
    part = model.bipartition
    meta = {
        "format": "schmidt-compressor/1",
        "num_qubits": model.num_qubits,
        "block_a": list(part.block_a),
        "block_b": list(part.block_b),
        "swapped": part.swapped,
        "rank": model.schmidt.rank,
        "measure": model.schmidt.measure,
        "cnot_pairs": [list(p) for p in model.cnot_pairs],
        "policy": model.policy.value,
    }
    with open(path, "wb") as fh:
        np.savez(
            fh,
            meta=np.array(json.dumps(meta)),
            typical_state=model.typical_state,
            lambdas=model.schmidt.lambdas,
            u=model.schmidt.u,
            v=model.schmidt.v,
            u_inv=model.u_inv,
            v_inv=model.v_inv,
        )


def load_model(path) -> CompressorModel:
    with np.load(Path(path), allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("format") != "schmidt-compressor/1":
            raise ValueError(f"unrecognized model format {meta.get('format')!r}")
        part = Bipartition(tuple(meta["block_a"]), tuple(meta["block_b"]), meta["swapped"])
        form = SchmidtForm(
            u=data["u"], v=data["v"], lambdas=data["lambdas"],
            rank=meta["rank"], measure=meta["measure"], bipartition=part,
        )
        u_inv, v_inv = data["u_inv"], data["v_inv"]
        return CompressorModel(
            typical_state=data["typical_state"],
            bipartition=part,
            schmidt=form,
            u_inv=u_inv,
            v_inv=v_inv,
            cnot_pairs=[tuple(p) for p in meta["cnot_pairs"]],
            matrix=_assemble(u_inv, v_inv, part, form.measure),
            policy=ReferencePolicy(meta["policy"]),
        )
