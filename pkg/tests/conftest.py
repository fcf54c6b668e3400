import numpy as np
import pytest

from schmidt_compressor import dataio


def random_state(rng, n, real=False):
    dim = 2**n
    psi = rng.normal(size=dim)
    if not real:
        psi = psi + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def random_density(rng, n, rank=None):
    dim = 2**n
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def brute_partial_trace(rho, n, keep):
    """Sum over explicit basis indices; slow but obviously correct."""
    keep = list(keep)
    traced = [q for q in range(n) if q not in keep]
    dk = 2 ** len(keep)
    out = np.zeros((dk, dk), dtype=complex)

    def index(kbits, tbits):
        bits = [0] * n
        for q, b in zip(keep, kbits):
            bits[q] = b
        for q, b in zip(traced, tbits):
            bits[q] = b
        return int("".join(map(str, bits)), 2) if n else 0

    def bits_of(i, width):
        return [(i >> (width - 1 - j)) & 1 for j in range(width)]

    for i in range(dk):
        for j in range(dk):
            for t in range(2 ** len(traced)):
                tb = bits_of(t, len(traced))
                out[i, j] += rho[index(bits_of(i, len(keep)), tb), index(bits_of(j, len(keep)), tb)]
    return out


def ghz(n):
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return psi


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def samples():
    return dataio.ingest()


@pytest.fixture(scope="session")
def prepared(samples):
    return dataio.preprocess(samples, seed=0)


ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
