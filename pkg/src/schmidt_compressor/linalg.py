"""Dense linear algebra and qubit-register helpers.

Conventions used throughout the package:

* A pure state on ``n`` qubits is a complex vector of length ``2**n``.
* Qubit 0 is the most significant bit of the amplitude index, so the basis
  state ``|q0 q1 ... q(n-1)>`` sits at index ``q0*2**(n-1) + ... + q(n-1)``.
* Singular values and eigenvalues are returned in descending order.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

RANK_RTOL = 1e-9
NORM_ATOL = 1e-10
MAX_DIM = 2**14


class LinalgError(ValueError):
    """Raised for invalid numerical input (shape, finiteness, structure)."""


class ConvergenceError(LinalgError):
    """Raised when an iterative decomposition does not converge."""


class DimensionError(LinalgError):
    """Raised when a result would exceed the configured dimension cap."""


def _as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or 0 in m.shape:
        raise LinalgError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise LinalgError("matrix has non-finite entries")
    return m


def num_qubits(dim: int) -> int:
    """Number of qubits for a register of dimension ``dim`` (must be a power of two)."""
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise LinalgError(f"dimension {dim} is not a power of two")
    return n


def as_state(state, atol: float = NORM_ATOL) -> np.ndarray:
    """Validate and return ``state`` as a normalized complex amplitude vector."""
    psi = np.asarray(state, dtype=complex).ravel()
    num_qubits(psi.size)
    if not np.all(np.isfinite(psi)):
        raise LinalgError("state has non-finite amplitudes")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > atol:
        raise LinalgError(f"state is not normalized (norm = {norm:.16g})")
    return psi


def normalize(vector) -> np.ndarray:
    v = np.asarray(vector)
    norm = np.linalg.norm(v)
    if norm == 0 or not np.isfinite(norm):
        raise LinalgError("cannot normalize a zero or non-finite vector")
    return v / norm


def svd(m):
    """Thin SVD ``m = u @ diag(s) @ vh`` with ``s`` sorted descending."""
    m = _as_matrix(m)
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        # LAPACK does not expose the sweep count; report what it gives us.
        raise ConvergenceError(f"SVD did not converge for {m.shape} matrix: {exc}") from exc
    return u, s, vh


def numerical_rank(s, rtol: float = RANK_RTOL) -> int:
    """Count singular values above ``rtol * max(s)``."""
    s = np.asarray(s, dtype=float)
    if s.size == 0 or s[0] <= 0:
        return 0
    return int(np.count_nonzero(s >= rtol * s.max()))


def hermitian_eig(h, atol: float = 1e-8):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Ties keep the order produced by the underlying solver, so the result is
    deterministic for a given input.
    """
    h = _as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise LinalgError(f"matrix is not square: {h.shape}")
    defect = np.linalg.norm(h - h.conj().T)
    if defect > atol:
        raise LinalgError(f"matrix is not Hermitian (||H - H^dagger||_F = {defect:.3e})")
    h = (h + h.conj().T) / 2
    w, v = np.linalg.eigh(h)
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def kron(a, b, max_dim: int = MAX_DIM) -> np.ndarray:
    a = _as_matrix(a)
    b = _as_matrix(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > max_dim:
        raise DimensionError(f"kron result {rows}x{cols} exceeds cap {max_dim}")
    return np.kron(a, b)


def _check_perm(perm: Sequence[int], n: int) -> list[int]:
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(n)):
        raise LinalgError(f"{perm} is not a permutation of range({n})")
    return perm


def permute_qubits(state, perm: Sequence[int]) -> np.ndarray:
    """Reorder qubits so that new qubit ``j`` is old qubit ``perm[j]``.

    Works on any vector of length ``2**n``; no normalization is enforced so the
    same routine serves unnormalized data.
    """
    psi = np.asarray(state).ravel()
    n = num_qubits(psi.size)
    perm = _check_perm(perm, n)
    return psi.reshape((2,) * n).transpose(perm).reshape(-1) if n else psi.copy()


def inverse_permutation(perm: Sequence[int]) -> list[int]:
    return [int(i) for i in np.argsort(perm)]


def permute_operator(op, perm: Sequence[int]) -> np.ndarray:
    """Apply the qubit reordering of :func:`permute_qubits` to an operator."""
    op = np.asarray(op)
    n = num_qubits(op.shape[0])
    perm = _check_perm(perm, n)
    t = op.reshape((2,) * (2 * n))
    return t.transpose(perm + [p + n for p in perm]).reshape(op.shape)


def density_matrix(state) -> np.ndarray:
    psi = np.asarray(state, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def check_density(rho, atol: float = NORM_ATOL) -> np.ndarray:
    """Validate a density matrix (Hermitian, unit trace, PSD) and return it."""
    rho = _as_matrix(rho)
    num_qubits(rho.shape[0])
    if rho.shape[0] != rho.shape[1]:
        raise LinalgError(f"density matrix is not square: {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > atol:
        raise LinalgError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1) > atol:
        raise LinalgError(f"density matrix trace is {tr:.16g}, expected 1")
    if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -atol:
        raise LinalgError("density matrix is not positive semidefinite")
    return rho


def partial_trace(rho, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix on the qubits in ``keep``.

    The kept qubits appear in the result in the order given by ``keep``.
    """
    rho = _as_matrix(rho)
    n = num_qubits(rho.shape[0])
    keep = [int(q) for q in keep]
    if not keep:
        raise LinalgError("keep set is empty")
    if len(set(keep)) != len(keep) or min(keep) < 0 or max(keep) >= n:
        raise LinalgError(f"invalid keep set {keep} for {n} qubits")
    traced = [q for q in range(n) if q not in keep]
    perm = keep + traced
    dk, dt = 2 ** len(keep), 2 ** len(traced)
    t = permute_operator(rho, perm).reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def reduced_state(state, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of a pure state, without forming the full projector."""
    psi = np.asarray(state, dtype=complex).ravel()
    n = num_qubits(psi.size)
    keep = [int(q) for q in keep]
    if not keep or len(set(keep)) != len(keep) or min(keep) < 0 or max(keep) >= n:
        raise LinalgError(f"invalid keep set {keep} for {n} qubits")
    traced = [q for q in range(n) if q not in keep]
    m = permute_qubits(psi, keep + traced).reshape(2 ** len(keep), -1)
    return m @ m.conj().T


def complete_isometry(w, target_cols: int | None = None, tol: float = 1e-8) -> np.ndarray:
    """Extend orthonormal columns ``w`` to a square unitary.

    Candidates are the canonical basis vectors in index order; each is
    orthogonalized (twice) against the columns collected so far and skipped when
    its residual norm falls below ``tol``. The first columns equal ``w``
    exactly.
    """
    w = _as_matrix(w)
    rows, cols = w.shape
    target_cols = rows if target_cols is None else int(target_cols)
    if target_cols != rows:
        raise LinalgError(f"completion must be square: target {target_cols} != rows {rows}")
    if cols > rows:
        raise LinalgError(f"cannot have {cols} orthonormal columns in dimension {rows}")
    gram_defect = np.abs(w.conj().T @ w - np.eye(cols)).max()
    if gram_defect > NORM_ATOL:
        raise LinalgError(f"input columns are not orthonormal (defect {gram_defect:.3e})")
    out = np.zeros((rows, rows), dtype=complex)
    out[:, :cols] = w
    k = cols
    for i in range(rows):
        if k == rows:
            break
        v = np.zeros(rows, dtype=complex)
        v[i] = 1.0
        basis = out[:, :k]
        for _ in range(2):
            v = v - basis @ (basis.conj().T @ v)
        norm = np.linalg.norm(v)
        if norm < tol:
            continue
        out[:, k] = v / norm
        k += 1
    if k != rows:
        raise LinalgError("isometry completion failed: input is rank deficient")
    return out


def is_unitary(u, atol: float = NORM_ATOL) -> bool:
    u = np.asarray(u)
    return bool(np.abs(u.conj().T @ u - np.eye(u.shape[1])).max() <= atol)
