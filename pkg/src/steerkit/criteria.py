"""Sufficient nonsteerability criteria for two-qubit states with loss.

Both criteria maximize, over unit vectors x,

    (1 - e) |v.x| + (e / 2) (1 + (v.x)^2) + ||W x||

where v is the steering party's Bloch vector and W x the other party's
conditional correlation vector. The restricted-PVM criterion uses e = eps; the
POVM criterion uses e = 3 eps. A value <= 1 certifies nonsteerability from the
steering party to the other one.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ContractError, DomainError, OutOfRegimeError
from .qstate import BlochForm, Party, partial_trace
from .sphere import fibonacci_sphere, frame_with_axis, maximize_on_sphere, tangent_basis


class Variant(str, enum.Enum):
    RESTRICTED_PVM = "pvm"
    POVM = "povm"


@dataclass(frozen=True)
class CriterionObjective:
    v: np.ndarray
    W: np.ndarray
    weight: float

    @cached_property
    def M(self) -> np.ndarray:
        return self.W.T @ self.W

    def values(self, xs: np.ndarray) -> np.ndarray:
        xs = np.atleast_2d(xs)
        p = np.abs(xs @ self.v)
        q = np.linalg.norm(xs @ self.W.T, axis=1)
        e = self.weight
        return (1 - e) * p + 0.5 * e * (1 + p * p) + q

    def pq(self, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(v.x, ||W x||) for each row of ``xs``."""
        xs = np.atleast_2d(xs)
        return xs @ self.v, np.linalg.norm(xs @ self.W.T, axis=1)

    # Without the absolute value the objective is smooth away from W x = 0,
    # and its maximum over the sphere equals that of the full objective,
    # because f(x) = max(g(x), g(-x)) whenever 1 - e >= 0.
    # g, g_grad and g_hess act on row batches (m, 3).
    def g(self, xs: np.ndarray) -> np.ndarray:
        e = self.weight
        p = xs @ self.v
        return (1 - e) * p + 0.5 * e * (1 + p * p) + np.linalg.norm(xs @ self.W.T, axis=1)

    def g_grad(self, xs: np.ndarray) -> np.ndarray:
        e = self.weight
        p = xs @ self.v
        r = np.linalg.norm(xs @ self.W.T, axis=1)
        inv = np.where(r > 1e-90, 1.0 / np.maximum(r, 1e-90), 0.0)
        return ((1 - e) + e * p)[:, None] * self.v + (xs @ self.M) * inv[:, None]

    def g_hess(self, xs: np.ndarray) -> np.ndarray:
        e = self.weight
        r = np.linalg.norm(xs @ self.W.T, axis=1)
        inv = np.where(r > 1e-90, 1.0 / np.maximum(r, 1e-90), 0.0)
        mx = xs @ self.M
        out = e * np.outer(self.v, self.v) + self.M * inv[:, None, None]
        return out - np.einsum("mi,mj->mij", mx, mx) * (inv**3)[:, None, None]

    def starts(self) -> list[np.ndarray]:
        """Analytic seeds: v direction, top right-singular vector of W, and the
        best point on the great circle v.x = 0."""
        seeds = []
        _, s, vt = np.linalg.svd(self.W)
        seeds.append(vt[0])
        nv = np.linalg.norm(self.v)
        if nv > 1e-14:
            vhat = self.v / nv
            seeds.append(vhat)
            basis = tangent_basis(vhat)
            m2 = basis.T @ self.M @ basis
            w, u = np.linalg.eigh(m2)
            seeds.append(basis @ u[:, -1])
        return seeds

    def maximize(self, n_grid: int = 8192, n_starts: int = 12) -> tuple[np.ndarray, float]:
        def flip(x):
            return -x if x @ self.v < 0 else x

        x, _ = maximize_on_sphere(
            self.values,
            self.g,
            self.g_grad,
            self.g_hess,
            extra_starts=[flip(s) for s in self.starts()],
            n_grid=n_grid,
            n_starts=n_starts,
        )
        x = flip(x / np.linalg.norm(x))
        return x, float(self.values(x)[0])


def objective_for(bf: BlochForm, weight: float, party: Party | str = Party.BOB) -> CriterionObjective:
    party = Party(party)
    return CriterionObjective(v=np.array(bf.vector(party)), W=np.array(bf.correlation_for(party)), weight=float(weight))


@dataclass(frozen=True)
class NonsteerReport:
    n_value: float
    argmax_x: np.ndarray
    epsilon: float
    variant: Variant
    party: Party = Party.BOB
    margin_sd: float | None = None

    @property
    def nonsteerable(self) -> bool:
        return self.n_value <= 1.0

    def with_uncertainty(self, delta_n: float) -> "NonsteerReport":
        if not delta_n > 0:
            raise DomainError("uncertainty of N must be positive")
        return NonsteerReport(
            self.n_value, self.argmax_x, self.epsilon, self.variant, self.party,
            (1.0 - self.n_value) / delta_n,
        )

    def to_dict(self) -> dict:
        return {
            "n_value": self.n_value,
            "argmax_x": [float(c) for c in self.argmax_x],
            "epsilon": self.epsilon,
            "variant": self.variant.value,
            "steering_party": self.party.value,
            "margin_sd": self.margin_sd,
            "nonsteerable": self.nonsteerable,
        }


def _require_canonical(bf: BlochForm):
    if not bf.canonical:
        raise ContractError("criterion needs a BlochForm in canonical form; call canonical_form first")


def _evaluate(bf, weight, epsilon, variant, party) -> NonsteerReport:
    x, value = objective_for(bf, weight, party).maximize()
    return NonsteerReport(n_value=value, argmax_x=x, epsilon=float(epsilon), variant=variant, party=Party(party))


def n_restricted_pvm(bf: BlochForm, epsilon: float, party: Party | str = Party.BOB) -> NonsteerReport:
    """Restricted-PVM criterion value at heralding efficiency ``epsilon`` of
    the steering ``party``."""
    _require_canonical(bf)
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError(f"epsilon={epsilon} outside [0, 1]")
    return _evaluate(bf, epsilon, epsilon, Variant.RESTRICTED_PVM, party)


def n_povm(bf: BlochForm, epsilon: float, party: Party | str = Party.BOB) -> NonsteerReport:
    """POVM criterion value N_POVM; nonsteerable if <= 1.

    Obtained from the restricted-PVM criterion at efficiency 3 * epsilon, so
    only ``epsilon <= 1/3`` is accepted.
    """
    _require_canonical(bf)
    if epsilon < 0.0:
        raise DomainError(f"epsilon={epsilon} is negative")
    if 3.0 * epsilon > 1.0:
        raise OutOfRegimeError(f"POVM criterion only derived for epsilon <= 1/3, got {epsilon}")
    return _evaluate(bf, 3.0 * epsilon, epsilon, Variant.POVM, party)


def bound_curve(epsilon: float, p) -> np.ndarray:
    """||Tx|| value on the POVM boundary as a function of p = v.x."""
    e = 3.0 * epsilon
    p = np.asarray(p, dtype=float)
    return 1.0 - (1 - e) * np.abs(p) - 0.5 * e * (1 + p * p)


def povm_noise_construct(rho, sigma_a, d: int) -> np.ndarray:
    """rho / d + (d - 1) / d * sigma_a (x) rho_B, noise on the first factor.

    ``rho`` lives on C^d (x) C^d'; ``sigma_a`` is a d x d state.
    """
    if d < 2:
        raise DomainError(f"dimension d={d} must be at least 2")
    rho = np.asarray(rho, dtype=complex)
    sigma_a = np.asarray(sigma_a, dtype=complex)
    n = rho.shape[0]
    if n % d or sigma_a.shape != (d, d):
        raise DomainError("shapes of rho and sigma_a do not match d")
    rho_b = partial_trace(rho, keep=1, dims=(d, n // d))
    return rho / d + (d - 1) / d * np.kron(sigma_a, rho_b)


@dataclass(frozen=True)
class Ensemble:
    """(v.x, ||W x||) for a lattice of directions; row ``argmax_index`` is the
    maximizer of the POVM objective."""

    directions: np.ndarray
    b_dot_x: np.ndarray
    t_norm: np.ndarray
    epsilon: float
    n_value: float
    argmax_index: int = 0

    def __len__(self) -> int:
        return len(self.b_dot_x)

    @property
    def is_argmax(self) -> np.ndarray:
        flags = np.zeros(len(self), dtype=bool)
        flags[self.argmax_index] = True
        return flags


def ensemble_points(bf: BlochForm, n_dirs: int, epsilon: float = 0.0, party: Party | str = Party.BOB) -> Ensemble:
    """Sample of (v.x, ||Tx||) pairs over ``n_dirs`` directions.

    The Fibonacci lattice (with poles) is rotated so its first point is the
    criterion maximizer and its last is the antipode, so the sample contains
    the maximizing direction exactly.
    """
    _require_canonical(bf)
    if n_dirs < 1:
        raise DomainError("n_dirs must be at least 1")
    report = n_povm(bf, epsilon, party)
    obj = objective_for(bf, 3.0 * epsilon, party)
    dirs = fibonacci_sphere(n_dirs, include_poles=True) @ frame_with_axis(report.argmax_x).T
    dirs[0] = report.argmax_x
    if n_dirs > 1:
        dirs[-1] = -report.argmax_x
    p, q = obj.pq(dirs)
    return Ensemble(dirs, p, q, float(epsilon), report.n_value, 0)


@dataclass(frozen=True)
class SteeringTest:
    S: float
    bound: float
    delta_S: float

    @property
    def sd_margin(self) -> float:
        return (self.S - self.bound) / self.delta_S

    def to_dict(self) -> dict:
        return {"S": self.S, "bound": self.bound, "delta_S": self.delta_S, "sd_margin": self.sd_margin}


@dataclass(frozen=True)
class OneWayVerdict:
    steer_ab: SteeringTest
    nonsteer_ba: NonsteerReport
    delta_N: float
    conclusive: bool
    sd_threshold: float = 3.0
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "steer_ab": self.steer_ab.to_dict(),
            "nonsteer_ba": {**self.nonsteer_ba.to_dict(), "delta_N": self.delta_N},
            "conclusive": self.conclusive,
            "sd_threshold": self.sd_threshold,
            **({"details": self.extras} if self.extras else {}),
        }


def one_way_verdict(
    steer: SteeringTest,
    nonsteer: NonsteerReport,
    delta_n: float,
    sd_threshold: float = 3.0,
    extras: dict | None = None,
) -> OneWayVerdict:
    """Conclusive one-way steering needs both margins at ``sd_threshold`` or more."""
    if not steer.delta_S > 0:
        raise DomainError("delta_S must be positive")
    nonsteer = nonsteer.with_uncertainty(delta_n)
    conclusive = steer.sd_margin >= sd_threshold and nonsteer.margin_sd >= sd_threshold
    return OneWayVerdict(steer, nonsteer, float(delta_n), bool(conclusive), float(sd_threshold), dict(extras or {}))
