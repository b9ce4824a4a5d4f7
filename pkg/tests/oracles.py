"""Brute-force reference computations, deliberately independent of steerkit."""
import numpy as np

SIGMA = [
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]], dtype=complex),
]


def fib_grid(n: int) -> np.ndarray:
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    r = np.sqrt(1 - z * z)
    phi = np.pi * (3 - np.sqrt(5)) * k
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def criterion_values(xs, v, T, e):
    p = np.abs(xs @ v)
    return (1 - e) * p + 0.5 * e * (1 + p * p) + np.linalg.norm(xs @ T.T, axis=1)


def grid_max(v, T, e, n=10**6, chunk=200_000):
    xs = fib_grid(n)
    return max(criterion_values(xs[i : i + chunk], v, T, e).max() for i in range(0, n, chunk))


def werner(mu):
    psi = np.array([0, 1, -1, 0]) / np.sqrt(2)
    return mu * np.outer(psi, psi) + (1 - mu) / 4 * np.eye(4)


def pauli_expectations(rho):
    i2 = np.eye(2)
    a = np.array([np.trace(rho @ np.kron(s, i2)).real for s in SIGMA])
    b = np.array([np.trace(rho @ np.kron(i2, s)).real for s in SIGMA])
    T = np.array([[np.trace(rho @ np.kron(s, t)).real for t in SIGMA] for s in SIGMA])
    return a, b, T


def sqrtm_psd(m):
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def uhlmann(rho, sigma):
    s = sqrtm_psd(rho)
    return float(np.trace(sqrtm_psd(s @ sigma @ s)).real ** 2)


def wishart_state(rng, dim=4, rank=None):
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def haar_su2(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
