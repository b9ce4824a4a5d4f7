"""State reconstruction from coincidence counts and Poisson Monte Carlo errors."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .criteria import n_povm
from .errors import EstimatorError, InsufficientDataError, SteerkitError
from .expsim import CountTable, heralding_efficiency, steering_data
from .qstate import bloch_assemble, bloch_decompose, canonical_form, check_state, closest_werner
from .steering_game import steering_parameter

AXES = np.eye(3)
DEFAULT_SAMPLES = 200
MAX_FAILED_FRACTION = 0.05


def _tomography_block(table: CountTable) -> np.ndarray:
    """(3, 3, 2, 2) coincidence counts for Alice axis i, Bob axis j."""
    out = np.zeros((3, 3, 2, 2))
    for i in range(3):
        for j in range(3):
            c = table.coincidences()[table.find_pair(AXES[i], AXES[j])]
            if c.sum() == 0:
                raise InsufficientDataError(f"no coincidences for axis pair ({'xyz'[i]}, {'xyz'[j]})")
            out[i, j] = c
    return out


def linear_inversion(table: CountTable) -> np.ndarray:
    """Unit-trace Hermitian estimate from Pauli correlators of the nine axis
    pairs (36 projector pairs). May have negative eigenvalues."""
    block = _tomography_block(table)
    freq = block / block.sum(axis=(2, 3), keepdims=True)
    signs = np.array([1.0, -1.0])
    T = np.einsum("ijab,a,b->ij", freq, signs, signs)
    a = np.einsum("ijab,a->ij", freq, signs).mean(axis=1)
    b = np.einsum("ijab,b->ij", freq, signs).mean(axis=0)
    return bloch_assemble(a, b, T)


def project_simplex(w: np.ndarray) -> np.ndarray:
    """Euclidean projection of ``w`` onto the probability simplex."""
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, len(w) + 1)
    r = np.flatnonzero(u - css / k > 0)[-1]
    return np.clip(w - css[r] / (r + 1), 0.0, None)


def project_to_states(m) -> np.ndarray:
    """Frobenius-nearest density matrix: eigenvalues are shifted by a common
    amount and clipped at zero so they sum to one."""
    m = np.asarray(m, dtype=complex)
    m = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(m)
    out = (v * project_simplex(w)) @ v.conj().T
    return (out + out.conj().T) / 2


def reconstruct(table: CountTable) -> np.ndarray:
    return check_state(project_to_states(linear_inversion(table)))


@dataclass(frozen=True)
class Estimator:
    name: str
    fn: Callable[[np.ndarray | None, CountTable], float]
    needs_state: bool = True


def _mu(rho, table):
    return closest_werner(rho)[0]


def _fid(rho, table):
    return closest_werner(rho)[1]


def _n_povm(rho, table, epsilon=None):
    eps = heralding_efficiency(table).eps_b if epsilon is None else epsilon
    return n_povm(canonical_form(bloch_decompose(rho)), eps).n_value


def _steering(rho, table):
    return steering_parameter(steering_data(table))[0]


ESTIMATORS: dict[str, Estimator] = {
    "mu": Estimator("mu", _mu),
    "fidelity": Estimator("fidelity", _fid),
    "n_povm": Estimator("n_povm", _n_povm),
    "S": Estimator("S", _steering, needs_state=False),
}


def n_povm_estimator(epsilon: float | None = None) -> Estimator:
    """N_POVM for Bob steering Alice; ``epsilon`` defaults to the Klyshko
    estimate of Bob's efficiency from the (resampled) table."""
    return Estimator("n_povm", lambda rho, t: _n_povm(rho, t, epsilon))


@dataclass(frozen=True)
class McSummary:
    estimator: str
    mean: float
    sd: float
    n_samples: int
    seed: int
    n_failed: int = 0
    failure_policy: str = f"abort if more than {MAX_FAILED_FRACTION:.0%} of samples fail"

    def to_dict(self) -> dict:
        return asdict(self)


def max_workers() -> int:
    env = os.environ.get("STEERKIT_THREADS")
    return max(1, int(env)) if env else 1


def mc_uncertainty(
    table: CountTable,
    estimator: str | Estimator,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    threads: int | None = None,
) -> McSummary:
    """Parametric bootstrap: every count is redrawn as Poisson with mean equal
    to the observed count, the state is reconstructed and the estimator
    re-evaluated. Sample ``s`` uses the generator seeded with ``(seed, s)``.
    """
    est = ESTIMATORS[estimator] if isinstance(estimator, str) else estimator
    if n_samples < 2:
        raise ValueError("need at least two Monte Carlo samples")

    def one(s: int) -> float:
        rng = np.random.default_rng([seed, s])
        cells = rng.poisson(table.cells)
        cells[:, 2, 2] = 0
        sample = table.with_cells(cells)
        try:
            rho = reconstruct(sample) if est.needs_state else None
            value = float(est.fn(rho, sample))
        except (SteerkitError, ValueError, np.linalg.LinAlgError):
            return np.nan
        return value if np.isfinite(value) else np.nan

    workers = threads or max_workers()
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            values = np.array(list(ex.map(one, range(n_samples))))
    else:
        values = np.array([one(s) for s in range(n_samples)])
    failed = int(np.count_nonzero(np.isnan(values)))
    if failed > MAX_FAILED_FRACTION * n_samples:
        raise EstimatorError(f"{failed} of {n_samples} Monte Carlo samples failed for estimator {est.name!r}")
    ok = values[~np.isnan(values)]
    return McSummary(est.name, float(np.mean(ok)), float(np.std(ok, ddof=1)), n_samples, int(seed), failed)
