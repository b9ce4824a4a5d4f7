"""Scenario files and the end-to-end one-way steering analysis."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .criteria import OneWayVerdict, SteeringTest, n_povm, one_way_verdict
from .errors import ValidationError
from .expsim import (
    STEER_PAIRS,
    TOMO_PAIRS,
    CountTable,
    SourceConfig,
    heralding_efficiency,
    mix_sources,
    simulate_counts,
    standard_settings,
    steering_data,
)
from .qstate import bloch_decompose, canonical_form, closest_werner, werner_state
from .steering_game import platonic_settings, steering_bound, steering_parameter
from .tomo import DEFAULT_SAMPLES, mc_uncertainty, n_povm_estimator, reconstruct


@dataclass(frozen=True)
class Scenario:
    """One operating point: source state, efficiencies and count budget.

    ``state`` is one of ``{"werner": mu}``,
    ``{"mix_weight": w, "singlet_visibility": v}`` or ``{"file": path}``
    (relative paths resolve against the scenario file).
    """

    name: str
    state: dict
    eps_a: float
    eps_b: float
    pair_rate: float = 2e7
    steer_time: float = 10.0
    tomo_time: float = 2.0
    dark_rate_a: float = 0.0
    dark_rate_b: float = 0.0
    seed: int = 0
    n_samples: int = DEFAULT_SAMPLES
    sd_threshold: float = 3.0
    base_dir: str = "."

    @classmethod
    def from_dict(cls, d: dict, base_dir=".") -> "Scenario":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown scenario keys: {sorted(unknown)}")
        try:
            return cls(**{**d, "base_dir": str(base_dir)})
        except TypeError as exc:
            raise ValidationError(f"bad scenario: {exc}") from exc

    @classmethod
    def load(cls, path) -> "Scenario":
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(d, path.parent)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return d

    def source_state(self) -> np.ndarray:
        s = self.state
        if "werner" in s:
            return werner_state(s["werner"])
        if "mix_weight" in s:
            return mix_sources(s["mix_weight"], s.get("singlet_visibility", 1.0))
        if "file" in s:
            from .io import read_state

            return read_state(Path(self.base_dir) / s["file"])
        raise ValidationError("scenario state needs 'werner', 'mix_weight' or 'file'")

    def config(self, integration_time: float, seed_offset: int = 0) -> SourceConfig:
        return SourceConfig(
            mix_weight=float(self.state.get("mix_weight", self.state.get("werner", 1.0))),
            singlet_visibility=float(self.state.get("singlet_visibility", 1.0)),
            pair_rate=self.pair_rate,
            integration_time=integration_time,
            eps_a=self.eps_a,
            eps_b=self.eps_b,
            dark_rate_a=self.dark_rate_a,
            dark_rate_b=self.dark_rate_b,
            seed=self.seed + seed_offset,
        )


def preset_path(name: str) -> Path:
    """Path of a scenario file or scenario directory shipped with the package."""
    return Path(str(resources.files("steerkit") / "scenarios" / name))


def simulate_scenario(sc: Scenario) -> tuple[CountTable, CountTable]:
    """Tomography run (x/y/z on both sides) and steering run (same icosahedral
    axis on both sides), each with its own integration time and seed."""
    rho = sc.source_state()
    settings = standard_settings()
    tomo = simulate_counts(rho, settings, settings, sc.config(sc.tomo_time, 0), TOMO_PAIRS)
    steer = simulate_counts(rho, settings, settings, sc.config(sc.steer_time, 1), STEER_PAIRS)
    return tomo, steer


def analyze(tomo: CountTable, steer: CountTable, n_samples: int = DEFAULT_SAMPLES, seed: int = 0,
            sd_threshold: float = 3.0) -> OneWayVerdict:
    """Steering test Alice -> Bob from ``steer``; POVM nonsteerability
    Bob -> Alice from the state reconstructed from ``tomo``."""
    settings6 = platonic_settings(6)
    her_steer = heralding_efficiency(steer)
    S, dS_stat = steering_parameter(steering_data(steer, settings6))
    eps_a = her_steer.eps_a
    bound = steering_bound(settings6, eps_a)
    # systematic part: bound shift across one s.d. of the measured eps_A
    lo = steering_bound(settings6, min(1.0, eps_a + her_steer.sd_a))
    hi = steering_bound(settings6, max(1e-9, eps_a - her_steer.sd_a))
    dS_sys = abs(hi - lo) / 2
    delta_S = float(np.hypot(dS_stat, dS_sys))

    rho = reconstruct(tomo)
    her_tomo = heralding_efficiency(tomo)
    report = n_povm(canonical_form(bloch_decompose(rho)), her_tomo.eps_b)
    mc = mc_uncertainty(tomo, n_povm_estimator(), n_samples=n_samples, seed=seed)
    mu, fid = closest_werner(rho)
    extras = {
        "eps_a": eps_a,
        "eps_a_sd": her_steer.sd_a,
        "eps_b": her_tomo.eps_b,
        "eps_b_sd": her_tomo.sd_b,
        "delta_S_stat": dS_stat,
        "delta_S_sys": dS_sys,
        "closest_werner_mu": mu,
        "closest_werner_fidelity": fid,
        "mc_n_povm": mc.to_dict(),
    }
    return one_way_verdict(SteeringTest(S, bound, delta_S), report, mc.sd, sd_threshold, extras)


def run_scenario(sc: Scenario, n_samples: int | None = None) -> OneWayVerdict:
    tomo, steer = simulate_scenario(sc)
    n = sc.n_samples if n_samples is None else n_samples
    verdict = analyze(tomo, steer, n_samples=n, seed=sc.seed, sd_threshold=sc.sd_threshold)
    return replace(verdict, extras={"scenario": sc.to_dict(), **verdict.extras})
