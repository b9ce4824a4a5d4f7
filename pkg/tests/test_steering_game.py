import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from steerkit.errors import DomainError, InsufficientDataError, ValidationError
from steerkit.qstate import bloch_decompose, product_state, qubit_state, werner_state
from steerkit.sphere import fibonacci_sphere
from steerkit.steering_game import (
    MeasurementSet,
    SteeringData,
    lhs_grid_check,
    optimal_cheating,
    platonic_settings,
    simulate_cheating,
    steering_bound,
    steering_parameter,
)

# max_r mean_k |u_k . r| for the icosahedral axes, from a 2001 x 4001 angular
# grid polished with Nelder-Mead (computed once, independent of the LP)
ICOSA_BOUND_EPS1 = 0.5393446629166317

SIX = platonic_settings(6)


class TestSettings:
    def test_octahedron(self):
        assert np.allclose(platonic_settings(3).dirs, np.eye(3))

    def test_icosahedron_angles(self):
        d = SIX.dirs
        pairs = list(itertools.combinations(range(6), 2))
        assert len(pairs) == 15
        for i, j in pairs:
            assert abs(d[i] @ d[j]) == pytest.approx(1 / np.sqrt(5), abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4, 6, 10])
    def test_unit_and_count(self, n):
        s = platonic_settings(n)
        assert len(s) == n
        assert np.allclose(np.linalg.norm(s.dirs, axis=1), 1, atol=1e-12)

    @pytest.mark.parametrize("n", [0, 1, 5, 7, 12])
    def test_unsupported(self, n):
        with pytest.raises(DomainError):
            platonic_settings(n)

    def test_rejects_parallel(self):
        with pytest.raises(ValidationError):
            MeasurementSet(np.array([[0, 0, 1.0], [0, 0, -1.0]]))

    def test_rejects_non_unit(self):
        with pytest.raises(ValidationError):
            MeasurementSet(np.array([[0, 0, 1.0 + 1e-9]]))


def _counts(pp, pm, mp, mm, n=6):
    return SteeringData(np.tile(np.array([[pp, pm], [mp, mm]]), (n, 1, 1)))


class TestSteeringParameter:
    def test_perfect(self):
        S, dS = steering_parameter(_counts(500, 0, 0, 500))
        assert S == 1.0 and dS == 0.0

    def test_uncorrelated(self):
        S, _ = steering_parameter(_counts(25, 25, 25, 25))
        assert S == 0.0

    @pytest.mark.parametrize("mu", [0.3, 0.951])
    def test_werner_expectation(self, mu):
        # honest announcement of a flipped outcome: agree with prob (1 + mu) / 2
        n = 10**9
        agree = round(n * (1 + mu) / 4)
        disagree = round(n * (1 - mu) / 4)
        S, _ = steering_parameter(_counts(agree, disagree, disagree, agree))
        assert S == pytest.approx(mu, abs=1e-8)

    def test_binomial_error(self):
        S, dS = steering_parameter(_counts(300, 100, 100, 300, n=1))
        assert S == pytest.approx(0.5)
        assert dS == pytest.approx(np.sqrt((1 - 0.25) / 800))

    def test_empty_setting(self):
        c = np.ones((6, 2, 2), dtype=int)
        c[3] = 0
        with pytest.raises(InsufficientDataError):
            steering_parameter(SteeringData(c))

    def test_rejects_negative(self):
        with pytest.raises(ValidationError):
            SteeringData(-np.ones((2, 2, 2)))

    @given(st.lists(st.integers(0, 1000), min_size=24, max_size=24), st.permutations(range(6)))
    def test_permutation_invariant(self, flat, perm):
        c = np.array(flat).reshape(6, 2, 2) + 1
        a = steering_parameter(SteeringData(c))
        b = steering_parameter(SteeringData(c[list(perm)]))
        assert a[0] == pytest.approx(b[0], abs=1e-14) and a[1] == pytest.approx(b[1], abs=1e-14)


class TestBound:
    def test_full_efficiency_oracle(self):
        assert steering_bound(SIX, 1.0) == pytest.approx(ICOSA_BOUND_EPS1, abs=1e-4)

    def test_full_efficiency_coarse_grid(self):
        r = fibonacci_sphere(200_000)
        assert steering_bound(SIX, 1.0) >= np.abs(r @ SIX.dirs.T).mean(axis=1).max() - 1e-12

    @pytest.mark.parametrize("eps", [1e-3, 0.05, 0.1, 1 / 6])
    def test_low_efficiency_is_trivial(self, eps):
        assert steering_bound(SIX, eps) == pytest.approx(1.0, abs=1e-9)

    def test_nonincreasing_and_continuous(self):
        grid = np.linspace(0.02, 1.0, 50)
        vals = np.array([steering_bound(SIX, e) for e in grid])
        assert np.all(np.diff(vals) <= 1e-9)
        fine = np.arange(1 / 6 + 1e-6, 1.0 + 1e-9, 0.02)
        fv = np.array([steering_bound(SIX, e) for e in fine])
        assert np.max(np.abs(np.diff(fv))) <= 0.05

    @pytest.mark.parametrize("eps", [0.2, 0.3, 0.5, 0.8, 1.0])
    def test_support_is_basic(self, eps):
        strat = optimal_cheating(SIX, eps)
        assert strat.support <= len(SIX) + 1
        answered = (strat.weights[:, None] * strat.subsets).sum(axis=0)
        assert np.allclose(answered, eps, atol=1e-9)
        assert strat.weights.sum() == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("eps", [0.0, -0.1, 1.2])
    def test_domain(self, eps):
        with pytest.raises(DomainError):
            steering_bound(SIX, eps)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_other_presets_at_full_efficiency(self, n):
        s = platonic_settings(n)
        r = fibonacci_sphere(100_000)
        oracle = np.abs(r @ s.dirs.T).mean(axis=1).max()
        assert steering_bound(s, 1.0) == pytest.approx(oracle, abs=1e-4)

    def test_cheating_simulation_reaches_bound(self, rng):
        eps = 0.3
        strat = optimal_cheating(SIX, eps)
        data, answered = simulate_cheating(strat, SIX, 200_000, rng)
        S, dS = steering_parameter(data)
        assert abs(S - strat.value) <= 5 * dS
        assert np.all(np.abs(answered - eps) <= 5 * np.sqrt(eps * (1 - eps) / 200_000))


class TestLhs:
    def test_werner_low_mu_feasible(self):
        assert lhs_grid_check(bloch_decompose(werner_state(0.3)), SIX, 2000).feasible

    @given(st.integers(0, 2**32 - 1))
    def test_product_states_feasible(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=3)
        b = rng.normal(size=3)
        rho = product_state(qubit_state(a / np.linalg.norm(a)), qubit_state(0.9 * b / np.linalg.norm(b)))
        assert lhs_grid_check(bloch_decompose(rho), SIX, 500).feasible

    def test_pure_product_on_grid_point(self):
        p = fibonacci_sphere(500)[17]
        rho = product_state(qubit_state([0, 0, 1]), qubit_state(p))
        assert lhs_grid_check(bloch_decompose(rho), SIX, 500).feasible

    def test_singlet_infeasible(self):
        r = lhs_grid_check(bloch_decompose(werner_state(1.0)), SIX, 10_000)
        assert not r.feasible and r.residual > 1e-3

    def test_transition_brackets_bound(self):
        # Werner assemblages with mu below the full-efficiency bound admit an
        # LHS model; above it the steering parameter already rules one out
        below = lhs_grid_check(bloch_decompose(werner_state(ICOSA_BOUND_EPS1 - 0.04)), SIX, 5000)
        above = lhs_grid_check(bloch_decompose(werner_state(ICOSA_BOUND_EPS1 + 0.01)), SIX, 5000)
        assert below.feasible and not above.feasible

    def test_small_grid(self):
        with pytest.raises(DomainError):
            lhs_grid_check(bloch_decompose(werner_state(0.3)), SIX, 99)
