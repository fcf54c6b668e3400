"""Schmidt decomposition of pure states over arbitrary qubit bipartitions."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import LinalgError, as_state, inverse_permutation, num_qubits, numerical_rank, permute_qubits, svd


class BipartitionError(ValueError):
    pass


@dataclass(frozen=True)
class Bipartition:
    """Split of the register into block A (latent) and block B (trash).

    ``swapped`` records that :meth:`canonical` exchanged the blocks so that
    block A is the larger one.
    """

    block_a: tuple[int, ...]
    block_b: tuple[int, ...]
    swapped: bool = False

    def __post_init__(self):
        a = tuple(int(q) for q in self.block_a)
        b = tuple(int(q) for q in self.block_b)
        object.__setattr__(self, "block_a", a)
        object.__setattr__(self, "block_b", b)
        if not a or not b:
            raise BipartitionError("both blocks must be nonempty")
        everything = a + b
        if len(set(everything)) != len(everything):
            raise BipartitionError(f"blocks overlap: A={a}, B={b}")
        if sorted(everything) != list(range(len(everything))):
            raise BipartitionError(f"blocks must cover 0..{len(everything) - 1}: A={a}, B={b}")

    @classmethod
    def from_trash(cls, n: int, trash: Sequence[int]) -> "Bipartition":
        trash = tuple(int(q) for q in trash)
        return cls(tuple(q for q in range(n) if q not in trash), trash)

    @classmethod
    def trailing(cls, n: int, n_b: int) -> "Bipartition":
        """Latent block = leading qubits, trash block = the last ``n_b`` qubits."""
        return cls(tuple(range(n - n_b)), tuple(range(n - n_b, n)))

    @property
    def num_qubits(self) -> int:
        return len(self.block_a) + len(self.block_b)

    @property
    def n_a(self) -> int:
        return len(self.block_a)

    @property
    def n_b(self) -> int:
        return len(self.block_b)

    @property
    def order(self) -> list[int]:
        """Qubit permutation that puts block A in the most significant positions."""
        return list(self.block_a + self.block_b)

    def canonical(self) -> "Bipartition":
        if self.n_a >= self.n_b:
            return self
        return Bipartition(self.block_b, self.block_a, swapped=not self.swapped)

    def check(self, n: int) -> None:
        if self.num_qubits != n:
            raise BipartitionError(f"bipartition covers {self.num_qubits} qubits, state has {n}")


def schmidt_measure(rank: int) -> int:
    """``ceil(log2(rank))``; a product state (rank 1) has measure 0."""
    if rank < 1:
        raise ValueError("rank must be positive")
    return math.ceil(math.log2(rank))


@dataclass(frozen=True)
class SchmidtForm:
    """Schmidt data of a state for one bipartition.

    ``u`` and ``v`` hold the Schmidt vectors of block A and block B as columns
    (``2**measure`` of each), so the state in block order is
    ``sum_i lambdas[i] * kron(u[:, i], v[:, i])``. ``v`` is therefore the
    complex conjugate of the right singular vectors of the reshaped state.
    ``lambdas`` keeps the full singular spectrum; entries beyond ``rank`` are
    numerical zeros.
    """

    u: np.ndarray
    v: np.ndarray
    lambdas: np.ndarray
    rank: int
    measure: int
    bipartition: Bipartition = field(compare=False)

    @property
    def columns(self) -> int:
        return self.u.shape[1]

    def block_state(self) -> np.ndarray:
        """State vector with block A in the leading qubits."""
        k = self.columns
        return np.einsum("i,ai,bi->ab", self.lambdas[:k], self.u, self.v).reshape(-1)

    def reconstruct(self) -> np.ndarray:
        """State vector in the original qubit order."""
        return permute_qubits(self.block_state(), inverse_permutation(self.bipartition.order))


def reshape_state(state, part: Bipartition) -> np.ndarray:
    """Matrix with rows indexed by block-A bits and columns by block-B bits."""
    psi = np.asarray(state, dtype=complex).ravel()
    part.check(num_qubits(psi.size))
    return permute_qubits(psi, part.order).reshape(2**part.n_a, 2**part.n_b)


def unreshape_state(matrix, part: Bipartition) -> np.ndarray:
    """Inverse of :func:`reshape_state`."""
    return permute_qubits(np.asarray(matrix).reshape(-1), inverse_permutation(part.order))


def schmidt_decompose(state, part: Bipartition) -> SchmidtForm:
    psi = as_state(state)
    u, s, vh = svd(reshape_state(psi, part))
    rank = numerical_rank(s)
    m = schmidt_measure(rank)
    k = 2**m
    return SchmidtForm(
        u=u[:, :k].copy(),
        v=vh[:k, :].T.copy(),
        lambdas=s.copy(),
        rank=rank,
        measure=m,
        bipartition=part,
    )


def truncate(form: SchmidtForm, r: int) -> tuple[SchmidtForm, float]:
    """Keep the ``r`` leading Schmidt terms.

    Returns the renormalized form and the fidelity loss, i.e. the sum of the
    dropped squared coefficients.
    """
    if not 1 <= r <= form.rank:
        raise ValueError(f"r must be in [1, {form.rank}], got {r}")
    lam = form.lambdas
    loss = float(np.sum(lam[r:] ** 2))
    kept = np.zeros_like(lam)
    kept[:r] = lam[:r] / np.linalg.norm(lam[:r])
    m = schmidt_measure(r)
    k = 2**m
    return (
        SchmidtForm(
            u=form.u[:, :k].copy(),
            v=form.v[:, :k].copy(),
            lambdas=kept,
            rank=r,
            measure=m,
            bipartition=form.bipartition,
        ),
        loss,
    )


def bond_rank(state, part: Bipartition) -> int:
    """Number of nonzero Schmidt coefficients across ``part``."""
    s = np.linalg.svd(reshape_state(state, part), compute_uv=False)
    return numerical_rank(s)


def search_min_bond(state, n_b: int) -> tuple[Bipartition, int]:
    """Exhaustive search over all ``C(n, n_b)`` trash blocks for the lowest rank.

    Ties go to the lexicographically smallest trash block.
    """
    psi = as_state(state)
    n = num_qubits(psi.size)
    if not 1 <= n_b <= n // 2:
        raise ValueError(f"n_b must be in [1, {n // 2}], got {n_b}")
    best = None
    for trash in itertools.combinations(range(n), n_b):
        part = Bipartition.from_trash(n, trash)
        rank = bond_rank(psi, part)
        if best is None or rank < best[1]:
            best = (part, rank)
    return best


__all__ = [
    "Bipartition",
    "BipartitionError",
    "LinalgError",
    "SchmidtForm",
    "bond_rank",
    "reshape_state",
    "schmidt_decompose",
    "schmidt_measure",
    "search_min_bond",
    "truncate",
    "unreshape_state",
]
