"""Variational quantum autoencoder baseline.

Hardware-efficient ansatz: layers of R_y rotations on every qubit separated
by nearest-neighbour entangling layers. The default layout (6 qubits, 10
rotation layers, 9 CNOT chains) has 60 parameters and 45 CNOTs. Training
maximizes the overlap of the trash register with ``|0...0>``, which is the
quantity a SWAP test against that reference estimates.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize


@dataclass(frozen=True)
class AnsatzLayout:
    num_qubits: int = 6
    layers: int = 10  # rotation layers; entangling layers sit between them
    entangler: str = "cnot"  # or "cz"
    ring: bool = False

    def __post_init__(self):
        if self.entangler not in ("cnot", "cz"):
            raise ValueError(f"unknown entangler {self.entangler!r}")
        if self.num_qubits < 1 or self.layers < 1:
            raise ValueError("need at least one qubit and one layer")

    @property
    def pairs(self) -> list[tuple[int, int]]:
        n = self.num_qubits
        pairs = [(q, q + 1) for q in range(n - 1)]
        if self.ring and n > 2:
            pairs.append((n - 1, 0))
        return pairs

    @property
    def parameter_count(self) -> int:
        return self.layers * self.num_qubits

    @property
    def entangler_count(self) -> int:
        return (self.layers - 1) * len(self.pairs)

    def to_dict(self) -> dict:
        return asdict(self)


def _ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


def _apply_1q(psi: np.ndarray, gate: np.ndarray, q: int, n: int) -> np.ndarray:
    t = psi.reshape((2,) * n + (-1,))
    t = np.moveaxis(np.tensordot(gate, t, axes=([1], [q])), 0, q)
    return t.reshape(2**n, -1)


def _entangle(psi: np.ndarray, layout: AnsatzLayout) -> np.ndarray:
    n = layout.num_qubits
    idx = np.arange(2**n)
    for c, t in layout.pairs:
        cbit = (idx >> (n - 1 - c)) & 1
        if layout.entangler == "cnot":
            psi = psi[idx ^ (cbit << (n - 1 - t))]
        else:
            tbit = (idx >> (n - 1 - t)) & 1
            psi = psi * np.where(cbit & tbit, -1.0, 1.0)[:, None]
    return psi


def apply_ansatz(layout: AnsatzLayout, theta, states) -> np.ndarray:
    """Apply the ansatz to the columns of ``states`` (shape ``(2**n, N)``)."""
    theta = np.asarray(theta, dtype=float)
    if theta.size != layout.parameter_count:
        raise ValueError(f"theta has {theta.size} entries, layout needs {layout.parameter_count}")
    n = layout.num_qubits
    psi = np.asarray(states)
    psi = psi.reshape(2**n, -1)
    dtype = np.result_type(psi.dtype, float)
    psi = psi.astype(dtype, copy=True)
    th = theta.reshape(layout.layers, n)
    for layer in range(layout.layers):
        if layer:
            psi = _entangle(psi, layout)
        for q in range(n):
            psi = _apply_1q(psi, _ry(th[layer, q]), q, n)
    return psi


def ansatz_unitary(layout: AnsatzLayout, theta) -> np.ndarray:
    return apply_ansatz(layout, theta, np.eye(2**layout.num_qubits))


def _trash_first(states_out: np.ndarray, n: int, trash: Sequence[int]) -> np.ndarray:
    """Reshape ``(2**n, N)`` outputs to ``(d_trash, d_latent, N)``."""
    trash = list(trash)
    latent = [q for q in range(n) if q not in trash]
    t = states_out.reshape((2,) * n + (-1,)).transpose(trash + latent + [n])
    return t.reshape(2 ** len(trash), 2 ** len(latent), -1)


def trash_overlaps(unitary_out: np.ndarray, n: int, trash: Sequence[int]) -> np.ndarray:
    """``<0|rho_t|0>`` for each output column."""
    c = _trash_first(unitary_out, n, trash)
    return np.sum(np.abs(c[0]) ** 2, axis=0)


def trash_objective(theta, states, layout: AnsatzLayout = AnsatzLayout(), trash: Sequence[int] = (0, 1, 2)) -> float:
    """Mean overlap of the trash register with ``|0...0>`` over ``states`` (rows)."""
    out = apply_ansatz(layout, theta, np.asarray(states).T)
    return float(np.mean(trash_overlaps(out, layout.num_qubits, trash)))


def swap_test_estimate(theta, states, layout: AnsatzLayout = AnsatzLayout(), trash=(0, 1, 2),
                       shots: int = 10_000, rng=None) -> float:
    """Sampled SWAP test against ``|0...0>``, averaged over the states.

    The ancilla reads 0 with probability ``(1 + Tr(rho_t rho_ref)) / 2``; each
    state gets ``shots`` samples and the overlap is recovered as ``2p - 1``.
    """
    rng = np.random.default_rng(rng)
    out = apply_ansatz(layout, theta, np.asarray(states).T)
    p0 = (1 + trash_overlaps(out, layout.num_qubits, trash)) / 2
    hits = rng.binomial(shots, np.clip(p0, 0, 1))
    return float(np.mean(2 * hits / shots - 1))


@dataclass
class TrainState:
    theta: np.ndarray
    objective_trace: list[float] = field(default_factory=list)  # best-so-far per evaluation
    optimizer: str = "cobyla"
    evaluations: int = 0
    initial_theta: np.ndarray | None = field(default=None, repr=False)

    @property
    def best(self) -> float:
        return self.objective_trace[-1] if self.objective_trace else float("nan")


class _Budget(Exception):
    pass


def train_qae(states, layout: AnsatzLayout = AnsatzLayout(), optimizer: str = "cobyla",
              budget: int = 1000, seed: int = 0, trash: Sequence[int] = (0, 1, 2),
              rhobeg: float = 1.0) -> TrainState:
    """Maximize :func:`trash_objective` with a derivative-free optimizer.

    ``budget`` caps objective evaluations. ``"cobyla"`` runs one COBYLA pass;
    ``"nelder-mead"`` restarts from the incumbent whenever the simplex stalls.
    """
    states = np.asarray(states)
    if len(states) == 0:
        raise ValueError("need at least one training state")
    rng = np.random.default_rng(seed)
    theta0 = rng.uniform(-np.pi, np.pi, layout.parameter_count)
    result = TrainState(theta0.copy(), [], optimizer, 0, theta0.copy())
    if budget <= 0:
        return result
    best = [-np.inf, theta0.copy()]

    def negative(theta):
        if result.evaluations >= budget:
            raise _Budget
        value = trash_objective(theta, states, layout, trash)
        result.evaluations += 1
        if value > best[0]:
            best[0], best[1] = value, np.array(theta, copy=True)
        result.objective_trace.append(best[0])
        return -value

    try:
        if optimizer == "cobyla":
            minimize(negative, theta0, method="COBYLA",
                     options={"maxiter": budget, "rhobeg": rhobeg, "tol": 1e-10})
        elif optimizer == "nelder-mead":
            start = theta0
            while result.evaluations < budget:
                before = result.evaluations
                minimize(negative, start, method="Nelder-Mead",
                         options={"maxfev": budget - result.evaluations, "xatol": 1e-8, "fatol": 1e-10,
                                  "adaptive": True})
                if result.evaluations == before:
                    break
                start = best[1]
        else:
            raise ValueError(f"unknown optimizer {optimizer!r}")
    except _Budget:
        pass
    result.theta = best[1]
    return result


def qae_roundtrip_fidelity(theta, layout: AnsatzLayout, state, trash: Sequence[int] = (0, 1, 2)) -> float:
    """Fidelity after encoding, resetting the trash to ``|0...0>`` and decoding."""
    return float(qae_roundtrip_fidelities(theta, layout, np.atleast_2d(state), trash)[0])


def qae_roundtrip_fidelities(theta, layout: AnsatzLayout, states, trash: Sequence[int] = (0, 1, 2)) -> np.ndarray:
    n = layout.num_qubits
    out = apply_ansatz(layout, theta, np.asarray(states, dtype=complex).T)
    c = _trash_first(out, n, trash)  # (trash, latent, N)
    rho_l = np.einsum("tlN,tmN->lmN", c, c.conj())
    values = np.einsum("lN,lmN,mN->N", c[0].conj(), rho_l, c[0])
    return np.clip(values.real, 0.0, 1.0)
