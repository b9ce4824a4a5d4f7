"""Quasi-uniform points on S^2 and a grid-seeded Riemannian Newton maximizer."""
from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def fibonacci_sphere(n: int, include_poles: bool = False) -> np.ndarray:
    """``n`` unit vectors on a Fibonacci spiral, shape ``(n, 3)``.

    With ``include_poles`` the first and last points are exactly +z and -z.
    """
    if n < 1:
        raise ValueError("need at least one point")
    i = np.arange(n, dtype=float)
    if include_poles:
        z = np.array([1.0]) if n == 1 else 1.0 - 2.0 * i / (n - 1)
    else:
        z = 1.0 - (2.0 * i + 1.0) / n
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = GOLDEN_ANGLE * i
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


@lru_cache(maxsize=8)
def _cached_grid(n: int) -> np.ndarray:
    grid = fibonacci_sphere(n)
    grid.setflags(write=False)
    return grid


def covering_radius_bound(n: int) -> float:
    """Generous bound (radians) on the largest angular distance from any unit
    vector to the nearest point of an ``n``-point Fibonacci lattice."""
    return 2.0 * np.sqrt(4.0 * np.pi / n)


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # np.cross is slow for single 3-vectors
    return np.array([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])


def frame_with_axis(axis) -> np.ndarray:
    """Rotation matrix whose third column is the unit vector ``axis``."""
    z = np.asarray(axis, dtype=float)
    z = z / np.sqrt(z @ z)
    helper = np.zeros(3)
    helper[np.argmin(np.abs(z))] = 1.0
    x = _cross(helper, z)
    x /= np.sqrt(x @ x)
    y = _cross(z, x)
    return np.array([x, y, z]).T


def tangent_basis(x: np.ndarray) -> np.ndarray:
    """(3, 2) orthonormal basis of the tangent plane at unit ``x``."""
    return frame_with_axis(x)[:, :2]


def tangent_bases(xs: np.ndarray) -> np.ndarray:
    """(m, 3, 2) tangent-plane bases for the unit rows of ``xs``."""
    helper = np.zeros_like(xs)
    helper[np.arange(len(xs)), np.argmin(np.abs(xs), axis=1)] = 1.0
    e1 = np.cross(helper, xs)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(xs, e1)
    return np.stack([e1, e2], axis=2)


def newton_ascent(
    x0: np.ndarray,
    fun: Callable[[np.ndarray], np.ndarray],
    grad: Callable[[np.ndarray], np.ndarray],
    hess: Callable[[np.ndarray], np.ndarray],
    max_iter: int = 60,
    gtol: float = 1e-13,
) -> np.ndarray:
    """Local maximization on the unit sphere from each row of ``x0``.

    Riemannian Newton with backtracking, run on all starts at once. ``fun``,
    ``grad`` and ``hess`` take ``(m, 3)`` and return ``(m,)``, ``(m, 3)`` and
    ``(m, 3, 3)``. A row falls back to the Riemannian gradient whenever its
    projected Hessian is not negative definite.
    """
    x = np.atleast_2d(np.asarray(x0, dtype=float))
    x = x / np.linalg.norm(x, axis=1, keepdims=True)
    fx = fun(x)
    live = np.ones(len(x), dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(live)
        if len(idx) == 0:
            break
        xi = x[idx]
        g = grad(xi)
        basis = tangent_bases(xi)
        gt = np.einsum("mik,mi->mk", basis, g)
        gn = np.linalg.norm(gt, axis=1)
        h = np.einsum("mik,mij,mjl->mkl", basis, hess(xi), basis)
        h -= np.einsum("mi,mi->m", xi, g)[:, None, None] * np.eye(2)
        det = h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] * h[:, 1, 0]
        newton = (h[:, 0, 0] < 0) & (det > 0)
        safe = np.where(newton, det, 1.0)
        step = -np.column_stack([
            h[:, 1, 1] * gt[:, 0] - h[:, 0, 1] * gt[:, 1],
            h[:, 0, 0] * gt[:, 1] - h[:, 1, 0] * gt[:, 0],
        ]) / safe[:, None]
        grad_step = gt / np.maximum(gn, 1.0)[:, None]
        use_grad = ~newton | (np.einsum("mk,mk->m", step, gt) <= 0)
        step[use_grad] = grad_step[use_grad]
        direction = np.einsum("mik,mk->mi", basis, step)

        t = np.ones(len(idx))
        pending = gn >= gtol
        y, fy = xi.copy(), fx[idx].copy()
        while pending.any() and t[pending].max() > 1e-12:
            k = np.flatnonzero(pending)
            cand = xi[k] + t[k, None] * direction[k]
            cand /= np.linalg.norm(cand, axis=1, keepdims=True)
            fc = fun(cand)
            ok = fc >= fx[idx[k]] - 1e-15
            y[k[ok]], fy[k[ok]] = cand[ok], fc[ok]
            pending[k[ok]] = False
            t[k[~ok]] *= 0.5
        moved = np.linalg.norm(y - xi, axis=1)
        x[idx], fx[idx] = y, fy
        live[idx] = (gn >= gtol) & ~pending & (moved >= 1e-14)
    return x


def maximize_on_sphere(
    values: Callable[[np.ndarray], np.ndarray],
    fun: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    hess: Callable[[np.ndarray], np.ndarray],
    extra_starts: list[np.ndarray] | None = None,
    n_grid: int = 8192,
    n_starts: int = 12,
    separation: float = 0.3,
) -> tuple[np.ndarray, float]:
    """Global maximum of a smooth function on S^2.

    ``values`` evaluates a batch ``(m, 3)``. Going down the ``n_grid``
    Fibonacci points in order of value, a point becomes a start only if it is
    more than ``separation`` radians from every start already taken, so the
    ``n_starts`` starts spread over distinct basins. Together with
    ``extra_starts`` they seed :func:`newton_ascent`, which takes
    batched ``fun``, ``grad`` and ``hess``. The result is never
    worse than the best grid point. Ties keep the earliest candidate, so the
    outcome is deterministic.
    """
    grid = _cached_grid(n_grid)
    vals = values(grid)
    order = np.argsort(-vals, kind="stable")
    cos_sep = np.cos(separation)
    free = np.ones(n_grid, dtype=bool)
    picked: list[int] = []
    while len(picked) < n_starts:
        avail = free[order]
        if not avail.any():
            break
        i = int(order[np.argmax(avail)])
        picked.append(i)
        free &= grid @ grid[i] < cos_sep
    starts = np.vstack(list(extra_starts or []) + [grid[picked]])
    xs = newton_ascent(starts, fun, grad, hess)
    fs = fun(xs)
    k = int(np.argmax(fs))
    if fs[k] > vals[order[0]]:
        return xs[k], float(fs[k])
    return grid[order[0]], float(vals[order[0]])
