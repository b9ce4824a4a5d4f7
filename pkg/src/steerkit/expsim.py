"""Count-level simulation of a tunable Werner-state source with loss.

Each setting pair is recorded as a 3x3 table of counts indexed by Alice's and
Bob's outcome in the order (+1, -1, 0), where 0 means no click on that side.
The (0, 0) cell is never observed and stays zero. Coincidences are the upper
2x2 block; singles of one arm are sums over the other arm's three outcomes.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, InsufficientDataError, ValidationError
from .qstate import I4, SINGLET, check_state, qubit_state
from .steering_game import MeasurementSet, SteeringData, platonic_settings

OUTCOMES = (1, -1, 0)
COINCIDENCE_WINDOW = 3e-9


@dataclass(frozen=True)
class SourceConfig:
    mix_weight: float = 1.0
    singlet_visibility: float = 1.0
    pair_rate: float = 1e6
    integration_time: float = 1.0
    eps_a: float = 1.0
    eps_b: float = 1.0
    dark_rate_a: float = 0.0
    dark_rate_b: float = 0.0
    seed: int = 0
    window: float = COINCIDENCE_WINDOW

    def __post_init__(self):
        for name in ("mix_weight", "singlet_visibility", "eps_a", "eps_b"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name}={v} outside [0, 1]")
        for name in ("pair_rate", "integration_time", "dark_rate_a", "dark_rate_b", "window"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)


def mix_sources(w: float, visibility: float = 1.0) -> np.ndarray:
    """Incoherent mixture of an imperfect singlet source (weight ``w``) and a
    maximally mixed source.

    The singlet source loses coherence between |HV> and |VH> with
    1 - ``visibility``; at visibility 1 the output is the Werner state with
    mu = w.
    """
    if not (0.0 <= w <= 1.0 and 0.0 <= visibility <= 1.0):
        raise DomainError("mixing weight and visibility must lie in [0, 1]")
    dephased = np.diag([0, 0.5, 0.5, 0]).astype(complex)
    singlet = visibility * SINGLET + (1 - visibility) * dephased
    return w * singlet + (1 - w) * I4 / 4


def standard_settings() -> MeasurementSet:
    """x, y, z (tomography) followed by the six icosahedral steering axes."""
    return MeasurementSet(np.vstack([np.eye(3), platonic_settings(6).dirs]))


TOMO_PAIRS = [(i, j) for i in range(3) for j in range(3)]
STEER_PAIRS = [(3 + k, 3 + k) for k in range(6)]


@dataclass(frozen=True)
class CountTable:
    settings_a: MeasurementSet
    settings_b: MeasurementSet
    pairs: np.ndarray
    cells: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        cells = np.asarray(self.cells)
        if cells.shape != (len(pairs), 3, 3):
            raise ValidationError(f"cells must have shape ({len(pairs)}, 3, 3)")
        if np.any(cells < 0) or not np.all(np.equal(np.mod(cells, 1), 0)):
            raise ValidationError("counts must be nonnegative integers")
        if np.any(cells[:, 2, 2] != 0):
            raise ValidationError("the no-click/no-click cell is unobservable and must be 0")
        if np.any(pairs[:, 0] >= len(self.settings_a)) or np.any(pairs[:, 1] >= len(self.settings_b)) or np.any(pairs < 0):
            raise ValidationError("setting index out of range")
        if len({tuple(p) for p in pairs.tolist()}) != len(pairs):
            raise ValidationError("duplicate setting pair")
        cells = cells.astype(np.int64)
        pairs.setflags(write=False)
        cells.setflags(write=False)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "cells", cells)

    def index(self, i: int, j: int) -> int:
        hit = np.flatnonzero((self.pairs[:, 0] == i) & (self.pairs[:, 1] == j))
        if len(hit) == 0:
            raise InsufficientDataError(f"no data for setting pair ({i}, {j})")
        return int(hit[0])

    def coincidences(self) -> np.ndarray:
        return self.cells[:, :2, :2]

    def singles_a(self) -> np.ndarray:
        """(P, 2) Alice clicks per outcome, whatever Bob saw."""
        return self.cells[:, :2, :].sum(axis=2)

    def singles_b(self) -> np.ndarray:
        return self.cells[:, :, :2].sum(axis=1)

    def subset(self, pairs) -> "CountTable":
        rows = [self.index(i, j) for i, j in pairs]
        return CountTable(self.settings_a, self.settings_b, self.pairs[rows], self.cells[rows], dict(self.meta))

    def with_cells(self, cells) -> "CountTable":
        return CountTable(self.settings_a, self.settings_b, self.pairs, cells, dict(self.meta))

    def concat(self, other: "CountTable") -> "CountTable":
        if not (
            np.array_equal(self.settings_a.dirs, other.settings_a.dirs)
            and np.array_equal(self.settings_b.dirs, other.settings_b.dirs)
        ):
            raise ValidationError("cannot merge tables with different settings")
        meta = {**self.meta, "parts": self.meta.get("parts", [self.meta]) + other.meta.get("parts", [other.meta])}
        return CountTable(
            self.settings_a,
            self.settings_b,
            np.vstack([self.pairs, other.pairs]),
            np.concatenate([self.cells, other.cells]),
            meta,
        )

    def find_pair(self, u, w, tol: float = 1e-9) -> int:
        """Row whose Alice setting is ``u`` and Bob setting is ``w``."""
        ia = np.flatnonzero(np.linalg.norm(self.settings_a.dirs - np.asarray(u), axis=1) < tol)
        ib = np.flatnonzero(np.linalg.norm(self.settings_b.dirs - np.asarray(w), axis=1) < tol)
        if len(ia) == 0 or len(ib) == 0:
            raise InsufficientDataError(f"no setting along {np.round(u, 6)} / {np.round(w, 6)}")
        return self.index(int(ia[0]), int(ib[0]))


def outcome_probabilities(rho, u, w) -> np.ndarray:
    """Born-rule P(a, b) for projective measurements along ``u`` (Alice) and
    ``w`` (Bob), outcomes ordered (+1, -1)."""
    out = np.zeros((2, 2))
    for i, a in enumerate((1, -1)):
        pa = qubit_state(a * np.asarray(u, dtype=float))
        for j, b in enumerate((1, -1)):
            pb = qubit_state(b * np.asarray(w, dtype=float))
            out[i, j] = np.trace(rho @ np.kron(pa, pb)).real
    return np.clip(out, 0.0, None)


def _all_pairs(settings_a, settings_b):
    return [(i, j) for i in range(len(settings_a)) for j in range(len(settings_b))]


def expected_cells(rho, settings_a: MeasurementSet, settings_b: MeasurementSet, cfg: SourceConfig, pairs=None) -> np.ndarray:
    """Mean counts per setting pair, shape (P, 3, 3).

    Each arm is thinned independently (Alice eps_a, Bob eps_b). Every detector
    adds dark counts at its dark rate; accidental coincidences pair a dark
    count on one side with the partner detector's singles inside the
    coincidence window.
    """
    rho = check_state(rho)
    pairs = _all_pairs(settings_a, settings_b) if pairs is None else list(pairs)
    n_pairs = cfg.pair_rate * cfg.integration_time
    ea, eb = cfg.eps_a, cfg.eps_b
    out = np.zeros((len(pairs), 3, 3))
    for row, (i, j) in enumerate(pairs):
        p = outcome_probabilities(rho, settings_a.dirs[i], settings_b.dirs[j])
        pa, pb = p.sum(axis=1), p.sum(axis=0)
        cell = out[row]
        cell[:2, :2] = n_pairs * ea * eb * p
        cell[:2, 2] = n_pairs * ea * (1 - eb) * pa + cfg.dark_rate_a * cfg.integration_time
        cell[2, :2] = n_pairs * (1 - ea) * eb * pb + cfg.dark_rate_b * cfg.integration_time
        rate_a = cfg.pair_rate * ea * pa + cfg.dark_rate_a
        rate_b = cfg.pair_rate * eb * pb + cfg.dark_rate_b
        acc = cfg.window * cfg.integration_time * (
            cfg.dark_rate_a * rate_b[None, :] + rate_a[:, None] * cfg.dark_rate_b
        )
        cell[:2, :2] += acc
    return out


def simulate_counts(
    rho, settings_a: MeasurementSet, settings_b: MeasurementSet, cfg: SourceConfig, pairs=None
) -> CountTable:
    """Poisson counts around :func:`expected_cells`.

    Setting pair number ``r`` draws from its own generator seeded with
    ``(cfg.seed, r)``, so results do not depend on evaluation order.
    """
    pairs = _all_pairs(settings_a, settings_b) if pairs is None else [tuple(p) for p in pairs]
    means = expected_cells(rho, settings_a, settings_b, cfg, pairs)
    cells = np.zeros(means.shape, dtype=np.int64)
    for r in range(len(pairs)):
        rng = np.random.default_rng([cfg.seed, r])
        cells[r] = rng.poisson(means[r])
    cells[:, 2, 2] = 0
    meta = {"config": cfg.to_dict(), "seed": cfg.seed}
    return CountTable(settings_a, settings_b, np.array(pairs, dtype=np.int64).reshape(-1, 2), cells, meta)


@dataclass(frozen=True)
class HeraldingEstimate:
    eps_a: float
    eps_b: float
    sd_a: float
    sd_b: float

    def to_dict(self) -> dict:
        return asdict(self)


def heralding_efficiency(counts: CountTable) -> HeraldingEstimate:
    """Klyshko efficiencies: coincidences over the opposite arm's singles."""
    coinc = counts.coincidences().sum()
    singles_a = counts.singles_a().sum()
    singles_b = counts.singles_b().sum()
    if singles_a == 0 or singles_b == 0:
        raise InsufficientDataError("heralding efficiency needs nonzero singles in both arms")
    ea = coinc / singles_b
    eb = coinc / singles_a
    return HeraldingEstimate(
        float(ea), float(eb), float(np.sqrt(ea * (1 - ea) / singles_b)), float(np.sqrt(eb * (1 - eb) / singles_a))
    )


def steering_subtable(table: CountTable, settings: MeasurementSet | None = None) -> CountTable:
    """Rows where both sides measured the same axis of ``settings``."""
    settings = platonic_settings(6) if settings is None else settings
    rows = [table.find_pair(u, u) for u in settings.dirs]
    return table.subset([tuple(table.pairs[r]) for r in rows])


def steering_data(table: CountTable, settings: MeasurementSet | None = None, flip: bool = True) -> SteeringData:
    """Post-selected steering counts from same-axis setting pairs.

    With ``flip`` Alice announces the opposite of her outcome (the honest
    strategy for singlet-like states).
    """
    settings = platonic_settings(6) if settings is None else settings
    counts = np.zeros((len(settings), 2, 2), dtype=np.int64)
    for k, u in enumerate(settings.dirs):
        c = table.cells[table.find_pair(u, u), :2, :2]
        counts[k] = c[::-1] if flip else c
    return SteeringData(counts)
