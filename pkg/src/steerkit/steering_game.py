"""n-setting steering test with detection-efficiency-dependent bound.

A cheating Alice holds no qubit: she sends Bob a pure state with Bloch vector
r and, for each setting k, either announces an outcome (the sign of u_k.r is
optimal) or declares a no-click. Bob post-selects on her announcements. The
bound is the largest post-selected S reachable when every setting is answered
with the same probability eps_A.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog

from .errors import DomainError, InsufficientDataError, SolverError, ValidationError
from .qstate import BlochForm
from .sphere import fibonacci_sphere

PHI = (1 + np.sqrt(5)) / 2


@dataclass(frozen=True)
class MeasurementSet:
    dirs: np.ndarray

    def __post_init__(self):
        d = np.array(self.dirs, dtype=float)
        if d.ndim != 2 or d.shape[1] != 3 or len(d) < 1:
            raise ValidationError("measurement directions must have shape (n, 3)")
        if np.max(np.abs(np.linalg.norm(d, axis=1) - 1)) > 1e-12:
            raise ValidationError("measurement directions must be unit vectors")
        gram = np.abs(d @ d.T) - np.eye(len(d))
        if len(d) > 1 and np.max(gram) >= 1 - 1e-9:
            raise ValidationError("two measurement directions are (anti)parallel")
        d.setflags(write=False)
        object.__setattr__(self, "dirs", d)

    def __len__(self) -> int:
        return len(self.dirs)

    def to_list(self) -> list[list[float]]:
        return self.dirs.tolist()


def _normalized(rows) -> np.ndarray:
    rows = np.asarray(rows, dtype=float)
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def platonic_settings(n: int) -> MeasurementSet:
    """Axes through opposite vertices of a platonic solid.

    n = 2 (square), 3 (octahedron), 4 (cube), 6 (icosahedron), 10 (dodecahedron).
    """
    if n == 2:
        dirs = [[1, 0, 0], [0, 0, 1]]
    elif n == 3:
        dirs = np.eye(3)
    elif n == 4:
        dirs = [[1, 1, 1], [1, 1, -1], [1, -1, 1], [-1, 1, 1]]
    elif n == 6:
        dirs = [[0, 1, PHI], [0, 1, -PHI], [1, PHI, 0], [1, -PHI, 0], [PHI, 0, 1], [-PHI, 0, 1]]
    elif n == 10:
        g = 1 / PHI
        dirs = [
            [1, 1, 1], [1, 1, -1], [1, -1, 1], [-1, 1, 1],
            [0, g, PHI], [0, g, -PHI],
            [g, PHI, 0], [g, -PHI, 0],
            [PHI, 0, g], [-PHI, 0, g],
        ]
    else:
        raise DomainError(f"no platonic preset with n={n}; choose from 2, 3, 4, 6, 10")
    return MeasurementSet(_normalized(dirs))


@dataclass(frozen=True)
class SteeringData:
    """``counts[k, i, j]``: coincidences for setting k with Alice announcing
    outcome ``(+1, -1)[i]`` and Bob finding ``(+1, -1)[j]``."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 3 or c.shape[1:] != (2, 2):
            raise ValidationError("steering counts must have shape (n, 2, 2)")
        if np.any(c < 0) or not np.all(np.equal(np.mod(c, 1), 0)):
            raise ValidationError("counts must be nonnegative integers")
        c = c.astype(np.int64)
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def n_settings(self) -> int:
        return len(self.counts)

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=(1, 2))

    @property
    def correlators(self) -> np.ndarray:
        c = self.counts
        agree = c[:, 0, 0] + c[:, 1, 1]
        disagree = c[:, 0, 1] + c[:, 1, 0]
        tot = self.totals
        if np.any(tot == 0):
            raise InsufficientDataError("a setting has no coincidences")
        return (agree - disagree) / tot


def steering_parameter(data: SteeringData) -> tuple[float, float]:
    """S = mean_k <a_k sigma_k^B> and its binomial standard error."""
    e = data.correlators
    var = (1 - e**2) / data.totals
    n = data.n_settings
    return float(np.mean(e)), float(np.sqrt(np.sum(var)) / n)


@lru_cache(maxsize=16)
def _subset_values(dirs_key: bytes, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """For every answer subset A (bitmask), max_r sum_{k in A} |u_k . r| and the
    maximizing r. The maximum equals max over signs s of ||sum s_k u_k||."""
    dirs = np.frombuffer(dirs_key).reshape(n, 3)
    masks = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int8)
    values = np.zeros(len(masks))
    best_dirs = np.zeros((len(masks), 3))
    best_dirs[:, 2] = 1.0
    for m, mask in enumerate(masks):
        idx = np.flatnonzero(mask)
        if len(idx) == 0:
            continue
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=len(idx) - 1)))
        signs = np.column_stack([np.ones(len(signs)), signs]) if len(idx) > 1 else np.ones((1, 1))
        sums = signs @ dirs[idx]
        norms = np.linalg.norm(sums, axis=1)
        j = int(np.argmax(norms))
        values[m] = norms[j]
        best_dirs[m] = sums[j] / norms[j]
    return masks, values, best_dirs


@dataclass(frozen=True)
class CheatingStrategy:
    """Optimal mixture of pure cheating strategies at efficiency ``eps_a``."""

    value: float
    eps_a: float
    weights: np.ndarray
    subsets: np.ndarray
    directions: np.ndarray

    @property
    def support(self) -> int:
        return int(np.count_nonzero(self.weights > 1e-12))


def optimal_cheating(settings: MeasurementSet, eps_a: float) -> CheatingStrategy:
    """Linear program over mixtures of (hidden direction, answer subset).

    For a fixed subset the best hidden direction is found exactly, so the LP
    has one column per subset (2^n).
    """
    if not 0.0 < eps_a <= 1.0:
        raise DomainError(f"eps_a={eps_a} outside (0, 1]")
    n = len(settings)
    masks, values, dirs = _subset_values(np.ascontiguousarray(settings.dirs).tobytes(), n)
    a_eq = np.vstack([masks.T.astype(float), np.ones(len(masks))])
    b_eq = np.concatenate([np.full(n, eps_a), [1.0]])
    res = linprog(-values / (n * eps_a), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise SolverError(f"cheating LP failed: {res.message}")
    w = np.where(res.x > 1e-12, res.x, 0.0)
    keep = np.flatnonzero(w)
    return CheatingStrategy(
        value=float(min(-res.fun, 1.0)),
        eps_a=float(eps_a),
        weights=w[keep],
        subsets=masks[keep].astype(bool),
        directions=dirs[keep],
    )


def steering_bound(settings: MeasurementSet, epsilon_a: float) -> float:
    """Largest S a local-hidden-state Alice reaches at heralding efficiency epsilon_a."""
    return optimal_cheating(settings, epsilon_a).value


def simulate_cheating(
    strategy: CheatingStrategy, settings: MeasurementSet, rounds_per_setting: int, rng: np.random.Generator
) -> tuple[SteeringData, np.ndarray]:
    """Play ``strategy`` against Bob; returns the post-selected counts and the
    per-setting fraction of rounds Alice answered."""
    n = len(settings)
    counts = np.zeros((n, 2, 2), dtype=np.int64)
    answered = np.zeros(n)
    p = strategy.weights / strategy.weights.sum()
    for k, u in enumerate(settings.dirs):
        which = rng.choice(len(p), size=rounds_per_setting, p=p)
        ans = strategy.subsets[which, k]
        r = strategy.directions[which]
        proj = r @ u
        a = np.where(proj >= 0, 1, -1)
        b = np.where(rng.random(rounds_per_setting) < (1 + proj) / 2, 1, -1)
        answered[k] = ans.mean()
        ai = (a[ans] == -1).astype(int)
        bi = (b[ans] == -1).astype(int)
        np.add.at(counts[k], (ai, bi), 1)
    return SteeringData(counts), answered


@dataclass(frozen=True)
class LhsReport:
    """Outcome of the grid LHS feasibility LP.

    ``feasible`` means an LHS model on the grid reproduces the assemblage to
    within ``tol`` (L1 residual). Infeasibility at a finite grid does not
    prove steering.
    """

    feasible: bool
    residual: float
    grid: int
    n_columns: int
    iterations: int
    tol: float = field(default=1e-8)


def assemblage(state: BlochForm, settings: MeasurementSet) -> np.ndarray:
    """Bob's conditional operators for Alice measuring ``settings``.

    Entry ``[k, i]`` holds (Tr sigma, Bloch moment) of sigma_{a|k} with
    a = (+1, -1)[i], in the convention sigma = (t I + m.sigma) / 2.
    """
    out = np.zeros((len(settings), 2, 4))
    for k, u in enumerate(settings.dirs):
        for i, a in enumerate((1, -1)):
            out[k, i, 0] = (1 + a * u @ state.a) / 2
            out[k, i, 1:] = (state.b + a * state.T.T @ u) / 2
    return out


def lhs_grid_check(
    state: BlochForm,
    settings: MeasurementSet,
    grid: int,
    tol: float = 1e-8,
    max_iter: int = 500,
    batch: int = 64,
) -> LhsReport:
    """Can a mixture of grid pure states with deterministic responses
    reproduce the assemblage of ``settings`` on ``state``?

    Minimizes the L1 residual by column generation: pricing a hidden state
    r picks, per setting, the outcome with the larger dual value, so only the
    ``grid`` x 2^n columns that can improve the LP are ever materialized.
    """
    if grid < 100:
        raise DomainError("grid must have at least 100 points")
    n = len(settings)
    target = assemblage(state, settings).reshape(-1)
    n_rows = target.size
    points = fibonacci_sphere(grid)
    feats = np.column_stack([np.ones(grid), points])

    def column(lam: int, resp: np.ndarray) -> np.ndarray:
        col = np.zeros((n, 2, 4))
        col[np.arange(n), resp] = feats[lam]
        return col.reshape(-1)

    slack = np.hstack([np.eye(n_rows), -np.eye(n_rows)])
    # seed with the Bloch-direction-aligned strategies of the first few points
    cols, keys = [], set()
    for lam in range(0, grid, max(1, grid // batch)):
        resp = (points[lam] @ settings.dirs.T < 0).astype(int)
        cols.append(column(lam, resp))
        keys.add((lam, resp.tobytes()))
    res = None
    for it in range(1, max_iter + 1):
        a_eq = np.hstack([np.column_stack(cols), slack])
        c = np.concatenate([np.zeros(len(cols)), np.ones(2 * n_rows)])
        res = linprog(c, A_eq=a_eq, b_eq=target, bounds=(0, None), method="highs")
        if res.status != 0:
            raise SolverError(f"LHS LP failed: {res.message}")
        y = res.eqlin.marginals.reshape(n, 2, 4)
        scores = np.einsum("kid,gd->gki", y, feats)
        resp = np.argmax(scores, axis=2)
        gain = scores.max(axis=2).sum(axis=1)
        order = np.argsort(-gain, kind="stable")
        added = 0
        for lam in order[:batch]:
            if gain[lam] <= 1e-10:
                break
            key = (int(lam), resp[lam].tobytes())
            if key in keys:
                continue
            keys.add(key)
            cols.append(column(int(lam), resp[lam]))
            added += 1
        if added == 0:
            break
    else:
        raise SolverError("column generation did not converge")
    residual = float(res.fun)
    return LhsReport(residual <= tol, residual, grid, len(cols), it, tol)
