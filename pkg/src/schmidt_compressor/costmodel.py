"""Analytic CNOT counts for Schmidt compressor circuits.

Leading-order counts only: a general ``s``-qubit unitary costs
``23/48 4^s - 3/2 2^s + 4/3`` CNOTs and an isometry from ``m`` to ``s > m``
qubits costs ``2^(m+s) - 2^s / 24`` CNOTs. The ``O(s^2) 2^m`` correction of
the isometry bound has no published constant and is left out, so isometry
counts are underestimates.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

ISO_ISO = "iso-iso"
ISO_UNI = "iso-uni"
UNI_UNI = "uni-uni"


@dataclass(frozen=True)
class CostReport:
    case: str
    n_a: int
    n_b: int
    m: int
    cnot_a: float
    cnot_b: float
    cnot_entangle: int
    total_ceil: int

    def to_dict(self) -> dict:
        return asdict(self)


def unitary_cnots(s: int) -> float:
    return 23 / 48 * 4**s - 3 / 2 * 2**s + 4 / 3


def isometry_cnots(m: int, s: int) -> float:
    return 2 ** (m + s) - 2**s / 24


def cnot_count(n_a: int, n_b: int, m: int) -> CostReport:
    if n_b < 1 or n_a < n_b:
        raise ValueError(f"need 1 <= n_b <= n_a, got n_a={n_a}, n_b={n_b}")
    if not 0 <= m <= n_b:
        raise ValueError(f"need 0 <= m <= n_b, got m={m}, n_b={n_b}")
    if m < n_b:
        case = ISO_ISO
        cnot_a, cnot_b = isometry_cnots(m, n_a), isometry_cnots(m, n_b)
    elif n_b < n_a:
        case = ISO_UNI
        # m = n_b, so 2^(m + n_a) = 2^n
        cnot_a, cnot_b = isometry_cnots(m, n_a), unitary_cnots(n_b)
    else:
        case = UNI_UNI
        cnot_a = cnot_b = unitary_cnots(n_b)
    total = math.ceil(_snap(cnot_a)) + math.ceil(_snap(cnot_b)) + m
    return CostReport(case, n_a, n_b, m, cnot_a, cnot_b, m, total)


def _snap(x: float) -> float:
    # 23/48 * 64 - 12 + 4/3 lands a few ulps above 20
    r = round(x)
    return float(r) if abs(x - r) < 1e-9 else x


def cost_of_schmidt(form) -> CostReport:
    part = form.bipartition.canonical()
    return cnot_count(part.n_a, part.n_b, form.measure)


def cost_of_model(model) -> CostReport:
    return cost_of_schmidt(model.schmidt)
