"""Two-qubit states.

Basis order is {HH, HV, VH, VV} with H = |0>, V = |1>, Alice first. States are
plain ``(4, 4)`` complex numpy arrays; :func:`check_state` enforces the
density-matrix invariants at module boundaries.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import DomainError, ValidationError

BASIS = ("HH", "HV", "VH", "VV")

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
)
SINGLET_KET = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
SINGLET = np.outer(SINGLET_KET, SINGLET_KET.conj())

# sigma_i (x) I, I (x) sigma_j, sigma_i (x) sigma_j
_PAULI_A = np.array([np.kron(p, I2) for p in PAULI])
_PAULI_B = np.array([np.kron(I2, p) for p in PAULI])
_PAULI_AB = np.array([[np.kron(p, q) for q in PAULI] for p in PAULI])


class Party(str, enum.Enum):
    ALICE = "alice"
    BOB = "bob"

    @property
    def other(self) -> "Party":
        return Party.BOB if self is Party.ALICE else Party.ALICE


def _readonly(x: np.ndarray) -> np.ndarray:
    x = np.array(x)
    x.setflags(write=False)
    return x


def check_state(rho, dim: int = 4) -> np.ndarray:
    """Validate a density matrix and return it as a complex array.

    Raises :class:`ValidationError` if ``rho`` is not Hermitian, not unit
    trace, or has an eigenvalue below ``-PSD_TOL``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise ValidationError(f"expected a {dim}x{dim} matrix, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValidationError("matrix has non-finite entries")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITIAN_TOL:
        raise ValidationError(f"matrix is not Hermitian (deviation {herm:.3g})")
    tr = np.trace(rho)
    if abs(tr - 1) > TRACE_TOL:
        raise ValidationError(f"trace is {tr.real:.15g}, expected 1")
    lam_min = np.linalg.eigvalsh(rho)[0]
    if lam_min < -PSD_TOL:
        raise ValidationError(f"matrix is not positive semidefinite (eigenvalue {lam_min:.3g})")
    return rho


def repair_state(m, dim: int = 4) -> np.ndarray:
    """Hermitize, clip eigenvalues in [-PSD_TOL, 0) to zero and renormalize.

    Only rounding-level defects are repaired; anything worse is rejected.
    """
    m = np.asarray(m, dtype=complex)
    m = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(m)
    if w[0] < -PSD_TOL:
        raise ValidationError(f"eigenvalue {w[0]:.3g} below tolerance; project instead of repair")
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        raise ValidationError("matrix has no positive weight")
    w = w / w.sum()
    out = (v * w) @ v.conj().T
    return check_state((out + out.conj().T) / 2, dim)


def werner_state(mu: float) -> np.ndarray:
    """mu |Psi-><Psi-| + (1 - mu) I/4."""
    mu = float(mu)
    if not 0.0 <= mu <= 1.0:
        raise DomainError(f"Werner parameter mu={mu} outside [0, 1]")
    return mu * SINGLET + (1 - mu) / 4 * I4


def pure_state(ket) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    ket = ket / np.linalg.norm(ket)
    return np.outer(ket, ket.conj())


def product_state(rho_a, rho_b) -> np.ndarray:
    return np.kron(np.asarray(rho_a, dtype=complex), np.asarray(rho_b, dtype=complex))


def qubit_state(bloch) -> np.ndarray:
    """Single-qubit density matrix with the given Bloch vector."""
    r = np.asarray(bloch, dtype=float)
    return (I2 + np.einsum("i,ijk->jk", r, PAULI)) / 2


def random_state(rng: np.random.Generator, rank: int = 4, dim: int = 4) -> np.ndarray:
    """Random density matrix G G^dag / Tr with complex Gaussian ``dim x rank`` G."""
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def partial_trace(rho, keep: int, dims: tuple[int, int] = (2, 2)) -> np.ndarray:
    """Reduced state of subsystem ``keep`` (0 = first factor, 1 = second)."""
    da, db = dims
    r = np.asarray(rho).reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ijkj->ik", r)
    if keep == 1:
        return np.einsum("ijil->jl", r)
    raise ValueError("keep must be 0 or 1")


def swap_parties(rho, dims: tuple[int, int] = (2, 2)) -> np.ndarray:
    """Exchange the two tensor factors."""
    da, db = dims
    r = np.asarray(rho).reshape(da, db, da, db)
    return r.transpose(1, 0, 3, 2).reshape(da * db, da * db)


def _is_rotation(r: np.ndarray, tol: float = 1e-10) -> bool:
    return (
        r.shape == (3, 3)
        and np.max(np.abs(r @ r.T - np.eye(3))) <= tol
        and abs(np.linalg.det(r) - 1) <= tol
    )


@dataclass(frozen=True)
class BlochForm:
    """Local Bloch vectors and correlation matrix of a two-qubit state.

    ``T[i, j] = Tr[rho sigma_i (x) sigma_j]`` (row index Alice). When
    ``canonical`` is set, ``rot_a`` and ``rot_b`` map the original frame to the
    canonical one: ``T_can = rot_a T rot_b^T``.
    """

    a: np.ndarray
    b: np.ndarray
    T: np.ndarray
    canonical: bool = False
    rot_a: np.ndarray = field(default_factory=lambda: np.eye(3))
    rot_b: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        for name, shape in (("a", (3,)), ("b", (3,)), ("T", (3, 3)), ("rot_a", (3, 3)), ("rot_b", (3, 3))):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValidationError(f"{name} must have shape {shape}, got {arr.shape}")
            object.__setattr__(self, name, _readonly(arr))
        if np.linalg.norm(self.a) > 1 + 1e-10 or np.linalg.norm(self.b) > 1 + 1e-10:
            raise ValidationError("Bloch vector longer than 1")
        if np.linalg.svd(self.T, compute_uv=False)[0] > 1 + 1e-10:
            raise ValidationError("correlation matrix has singular value above 1")
        if not (_is_rotation(self.rot_a) and _is_rotation(self.rot_b)):
            raise ValidationError("frame changes must be proper rotations")
        if self.canonical and not is_canonical_layout(self.T, tol=1e-10):
            raise ValidationError("flagged canonical but T is not sorted diagonal")

    def vector(self, party: Party) -> np.ndarray:
        return self.a if Party(party) is Party.ALICE else self.b

    def correlation_for(self, party: Party) -> np.ndarray:
        """Matrix W with ``W @ x`` the other side's conditional vector for a
        measurement direction ``x`` of ``party``."""
        return self.T.T if Party(party) is Party.ALICE else self.T

    def to_density(self) -> np.ndarray:
        return bloch_assemble(self.a, self.b, self.T)


def is_canonical_layout(T, tol: float = 1e-12) -> bool:
    """Diagonal with T11 >= T22 >= |T33| and T11, T22 >= 0."""
    T = np.asarray(T)
    off = T - np.diag(np.diag(T))
    if np.max(np.abs(off)) > tol:
        return False
    d = np.diag(T)
    return d[0] >= -tol and d[1] >= -tol and d[0] >= d[1] - tol and d[1] >= abs(d[2]) - tol


def bloch_decompose(rho) -> BlochForm:
    rho = check_state(rho)
    a = np.einsum("ij,kji->k", rho, _PAULI_A).real
    b = np.einsum("ij,kji->k", rho, _PAULI_B).real
    T = np.einsum("ij,klji->kl", rho, _PAULI_AB).real
    return BlochForm(a=a, b=b, T=T)


def bloch_assemble(a, b, T) -> np.ndarray:
    """rho = [I + a.sigma (x) I + I (x) b.sigma + sum T_ij sigma_i (x) sigma_j] / 4."""
    a, b, T = (np.asarray(x, dtype=float) for x in (a, b, T))
    rho = (
        I4
        + np.einsum("k,kij->ij", a, _PAULI_A)
        + np.einsum("k,kij->ij", b, _PAULI_B)
        + np.einsum("kl,klij->ij", T, _PAULI_AB)
    )
    return rho / 4


def canonical_form(bf: BlochForm) -> BlochForm:
    """Rotate both frames so that T is diagonal with descending magnitudes.

    Rotations come from the SVD T = U S V^T. A reflection in U or V is absorbed
    into the sign of the third diagonal entry so that both frame changes stay
    proper rotations (realizable by local unitaries).
    """
    if is_canonical_layout(bf.T):
        return replace(bf, T=np.diag(np.diag(bf.T)), canonical=True)
    u, s, vt = np.linalg.svd(bf.T)
    v = vt.T.copy()
    u = u.copy()
    du = np.sign(np.linalg.det(u))
    dv = np.sign(np.linalg.det(v))
    u[:, 2] *= du
    v[:, 2] *= dv
    d = s.copy()
    d[2] *= du * dv
    ra, rb = u.T, v.T
    return BlochForm(
        a=ra @ bf.a,
        b=rb @ bf.b,
        T=np.diag(d),
        canonical=True,
        rot_a=ra @ bf.rot_a,
        rot_b=rb @ bf.rot_b,
    )


def rotation_to_unitary(rot) -> np.ndarray:
    """SU(2) element U with U (r.sigma) U^dag = (rot r).sigma."""
    rotvec = Rotation.from_matrix(np.asarray(rot, dtype=float)).as_rotvec()
    theta = np.linalg.norm(rotvec)
    if theta < 1e-15:
        return I2.copy()
    n = rotvec / theta
    ns = np.einsum("k,kij->ij", n, PAULI)
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * ns


def psd_sqrt(rho) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def _fidelity_from_roots(sr: np.ndarray, ss: np.ndarray) -> float:
    sv = np.linalg.svd(sr @ ss, compute_uv=False)
    return float(np.clip(np.sum(sv) ** 2, 0.0, 1.0))


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity [Tr sqrt(sqrt(rho) sigma sqrt(rho))]^2.

    Evaluated as the squared nuclear norm of sqrt(rho) sqrt(sigma), which is
    symmetric in its arguments.
    """
    rho = check_state(rho)
    sigma = check_state(sigma)
    return _fidelity_from_roots(psd_sqrt(rho), psd_sqrt(sigma))


def _werner_sqrt(mu: float) -> np.ndarray:
    lam_s = (1 + 3 * mu) / 4
    lam_o = (1 - mu) / 4
    return np.sqrt(lam_s) * SINGLET + np.sqrt(lam_o) * (I4 - SINGLET)


def _golden_max(f, lo: float, hi: float, tol: float) -> float:
    invphi = (np.sqrt(5) - 1) / 2
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(d)
    return (lo + hi) / 2


def closest_werner(rho, tol: float = 1e-9) -> tuple[float, float]:
    """Werner parameter maximizing the fidelity with ``rho``, and that fidelity.

    sqrt(F) is concave in mu along the Werner line, so golden-section search
    on [0, 1] finds the global maximum.
    """
    sr = psd_sqrt(check_state(rho))

    def fid(mu):
        return _fidelity_from_roots(sr, _werner_sqrt(mu))

    mu = _golden_max(fid, 0.0, 1.0, tol)
    best = max(((fid(m), -i, m) for i, m in enumerate((0.0, mu, 1.0))))
    return best[2], best[0]


@dataclass(frozen=True)
class LossyState:
    """Two-qubit state where ``lossy_party`` holds its photon with probability
    ``epsilon``; otherwise that side is in the vacuum flag state."""

    rho: np.ndarray
    epsilon: float
    lossy_party: Party = Party.ALICE

    def __post_init__(self):
        object.__setattr__(self, "rho", _readonly(check_state(self.rho)))
        object.__setattr__(self, "lossy_party", Party(self.lossy_party))
        if not 0.0 <= self.epsilon <= 1.0:
            raise DomainError(f"epsilon={self.epsilon} outside [0, 1]")

    def expand(self) -> np.ndarray:
        """The 6x6 matrix eps rho + (1 - eps) |nu><nu| (x) rho_trusted.

        The lossy side gets a three-level space {|0>, |1>, |nu>}; the factor
        order (Alice first) is kept.
        """
        eps = self.epsilon
        r = self.rho.reshape(2, 2, 2, 2)
        if self.lossy_party is Party.ALICE:
            out = np.zeros((3, 2, 3, 2), dtype=complex)
            out[:2, :, :2, :] = eps * r
            out[2, :, 2, :] = (1 - eps) * partial_trace(self.rho, keep=1)
        else:
            out = np.zeros((2, 3, 2, 3), dtype=complex)
            out[:, :2, :, :2] = eps * r
            out[:, 2, :, 2] = (1 - eps) * partial_trace(self.rho, keep=0)
        return out.reshape(6, 6)

    @property
    def dims(self) -> tuple[int, int]:
        return (3, 2) if self.lossy_party is Party.ALICE else (2, 3)


def lossy_embed(rho, epsilon: float, party: Party | str = Party.ALICE) -> LossyState:
    return LossyState(rho=rho, epsilon=float(epsilon), lossy_party=Party(party))


def vacuum_state() -> np.ndarray:
    """|nu><nu| on the three-level {|0>, |1>, |nu>} space."""
    nu = np.zeros((3, 3), dtype=complex)
    nu[2, 2] = 1
    return nu
