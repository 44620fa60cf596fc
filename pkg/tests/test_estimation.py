import math

import numpy as np
import pytest

from safebandit.estimation import (ConfidenceParams, ConfidenceState,
                                   beta_sqrt_value, contains, l1_vertices,
                                   min_eigenvalue, update, weighted_norm,
                                   weighted_norms)


def make_params(R=0.5, S=2.0, L=2.0, delta=0.05, n=2, d=3, nu=1.0, **kw):
    return ConfidenceParams(R=R, S=S, L=L, delta=delta, n=n, d=d, nu=nu, **kw)


def random_updates(state, rng, count, theta=None, noise=0.0):
    p = state.params
    for _ in range(count):
        x = rng.standard_normal(p.d)
        x *= rng.uniform(0.1, 1.0) * p.L / np.linalg.norm(x)
        if theta is None:
            y = rng.standard_normal(p.n)
        else:
            y = theta @ x + noise * rng.standard_normal(p.n)
        state = update(state, x, y)
    return state


class TestBetaSqrt:
    def test_zero_noise_scale(self):
        params = make_params(R=0.0, nu=4.0, S=2.0)
        for t in (0, 5, 1000):
            assert beta_sqrt_value(params, t) == pytest.approx(4.0)

    def test_initial_round(self):
        params = make_params()
        expected = params.R * math.sqrt(
            params.d * math.log(params.n / params.delta)) \
            + math.sqrt(params.nu) * params.S
        assert beta_sqrt_value(params, 0) == pytest.approx(expected, abs=1e-15)

    def test_experiment_scale_value(self):
        # direct evaluation at the reference experiment's constants
        params = make_params(R=1e-3, S=2.0, L=30.1, delta=0.01, n=3, d=3,
                             nu=0.1)
        t = 1000
        by_hand = 1e-3 * math.sqrt(
            3.0 * math.log((1.0 + t * 30.1 ** 2 / 0.1) * 3.0 / 0.01)) \
            + math.sqrt(0.1) * 2.0
        assert beta_sqrt_value(params, t) == pytest.approx(by_hand, abs=1e-15)

    def test_monotone_in_t(self):
        params = make_params()
        values = [beta_sqrt_value(params, t) for t in range(0, 50)]
        assert np.all(np.diff(values) >= 0)

    def test_scale_switch(self):
        base = make_params()
        scaled = make_params(beta_scale=0.5)
        assert beta_sqrt_value(scaled, 7) == pytest.approx(
            0.5 * beta_sqrt_value(base, 7))

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            make_params(nu=0.0)
        with pytest.raises(ValueError):
            make_params(delta=1.5)
        with pytest.raises(ValueError):
            beta_sqrt_value(make_params(), -1)


class TestUpdate:
    def test_fresh_state_zero_estimate(self):
        state = ConfidenceState.fresh(make_params())
        assert np.all(state.theta_hat == 0.0)
        assert state.gram.t == 0

    def test_single_diagonal_observation(self):
        state = ConfidenceState.fresh(make_params(nu=1.0))
        c = 0.7
        y = np.array([c, 0.0])
        state = update(state, np.array([1.0, 0.0, 0.0]), y)
        assert np.allclose(np.diag(state.gram.V), [2.0, 1.0, 1.0])
        assert state.theta_hat[0] == pytest.approx([c / 2.0, 0.0, 0.0])

    def test_two_noiseless_observations(self):
        # with nu=1 and two unit observations, the first coordinate shrinks
        # toward the truth by 2/(nu + 2)
        theta = np.array([[0.9, 0.0, 0.0], [0.4, 0.0, 0.0]])
        state = ConfidenceState.fresh(make_params(nu=1.0))
        e1 = np.array([1.0, 0.0, 0.0])
        for _ in range(2):
            state = update(state, e1, theta @ e1)
        assert state.theta_hat[0, 0] == pytest.approx(2.0 * 0.9 / 3.0)

    def test_rejects_nonfinite(self):
        state = ConfidenceState.fresh(make_params())
        with pytest.raises(ValueError):
            update(state, np.array([np.nan, 0.0, 0.0]), np.zeros(2))
        with pytest.raises(ValueError):
            update(state, np.zeros(3), np.array([np.inf, 0.0]))

    def test_rejects_oversized_action(self):
        state = ConfidenceState.fresh(make_params(L=1.0))
        with pytest.raises(ValueError):
            update(state, np.array([2.0, 0.0, 0.0]), np.zeros(2))

    def test_check_bound_override(self):
        state = ConfidenceState.fresh(make_params(L=1.0, check_L=3.0))
        update(state, np.array([2.0, 0.0, 0.0]), np.zeros(2))  # no raise

    def test_recompute_equivalence(self, rng):
        # streaming estimate equals the from-scratch normal-equations solve
        params = make_params()
        state = random_updates(ConfidenceState.fresh(params), rng, 60)
        assert np.allclose(state.gram.chol @ state.gram.chol.T, state.gram.V,
                           rtol=1e-10, atol=1e-10)
        direct = np.linalg.solve(state.gram.V, state.gram.cross).T
        assert np.allclose(state.theta_hat, direct, rtol=1e-8)
        assert min_eigenvalue(state) >= params.nu - 1e-9


class TestWeightedNorm:
    def test_identity_gram(self):
        state = ConfidenceState.fresh(make_params(nu=1.0))
        assert weighted_norm(state, np.array([1.0, 0.0, 0.0])) == pytest.approx(1.0)

    def test_after_one_update(self):
        state = ConfidenceState.fresh(make_params(nu=1.0))
        e1 = np.array([1.0, 0.0, 0.0])
        state = update(state, e1, np.zeros(2))
        assert weighted_norm(state, e1) == pytest.approx(1.0 / math.sqrt(2.0))

    def test_eigen_bound(self, rng):
        state = random_updates(ConfidenceState.fresh(make_params()), rng, 30)
        evals = np.linalg.eigvalsh(state.gram.V)
        for _ in range(20):
            x = rng.standard_normal(3)
            wn = weighted_norm(state, x)
            assert wn <= np.linalg.norm(x) / math.sqrt(evals[0]) + 1e-12
            assert wn >= np.linalg.norm(x) / math.sqrt(evals[-1]) - 1e-12

    def test_vectorized_agrees(self, rng):
        state = random_updates(ConfidenceState.fresh(make_params()), rng, 10)
        X = rng.standard_normal((17, 3))
        batch = weighted_norms(state, X)
        single = [weighted_norm(state, x) for x in X]
        assert np.allclose(batch, single, atol=1e-12)


class TestContains:
    def test_center_always_inside(self, rng):
        state = random_updates(ConfidenceState.fresh(make_params()), rng, 25)
        assert contains(state, state.theta_hat)

    def test_constructed_violation(self, rng):
        state = random_updates(ConfidenceState.fresh(make_params()), rng, 25)
        evals, vecs = np.linalg.eigh(state.gram.V)
        v = vecs[:, 0] / math.sqrt(evals[0])  # unit V-norm direction
        theta = state.theta_hat.copy()
        theta[1] += 1.01 * state.beta_sqrt * v
        assert not contains(state, theta)
        theta[1] = state.theta_hat[1] + 0.99 * state.beta_sqrt * v
        assert contains(state, theta)

    def test_monte_carlo_coverage(self, rng):
        # generated data keeps the truth inside the set at the stated level
        params = make_params(R=0.1, S=1.5, L=1.0, delta=0.05, n=2, d=3, nu=0.5)
        theta = rng.standard_normal((2, 3))
        theta *= 1.2 / np.linalg.norm(theta, axis=1, keepdims=True)
        failures = 0
        reps = 200
        for _ in range(reps):
            state = ConfidenceState.fresh(params)
            ok = True
            for t in range(60):
                x = rng.standard_normal(3)
                x *= params.L / max(1.0, np.linalg.norm(x))
                y = theta @ x + params.R * rng.standard_normal(2)
                state = update(state, x, y)
                if t + 1 in (10, 30, 60):
                    ok = ok and contains(state, theta)
            failures += not ok
        assert failures / reps <= params.delta + 0.02


class TestL1Vertices:
    def test_scalar_dimension(self):
        params = make_params(n=1, d=1, nu=2.0)
        state = ConfidenceState.fresh(params)
        verts = l1_vertices(state)
        # d = 1: theta_hat +/- sqrt(beta)/sqrt(V)
        expected = state.beta_sqrt / math.sqrt(2.0)
        assert verts.shape == (1, 2, 1)
        assert sorted(verts[0, :, 0]) == pytest.approx([-expected, expected])

    def test_fresh_state_axis_aligned(self):
        params = make_params(nu=1.0)
        state = ConfidenceState.fresh(params)
        verts = l1_vertices(state)
        rho = math.sqrt(params.d) * state.beta_sqrt
        expected = np.vstack([rho * np.eye(3), -rho * np.eye(3)])
        assert np.allclose(verts[0], expected, atol=1e-12)

    def test_hull_contains_ellipsoid_samples(self, rng):
        state = random_updates(ConfidenceState.fresh(make_params()), rng, 15)
        evals, vecs = np.linalg.eigh(state.gram.V)
        sqrt_v = vecs @ np.diag(np.sqrt(evals)) @ vecs.T
        rho = math.sqrt(state.params.d) * state.beta_sqrt
        for _ in range(1000):
            u = rng.standard_normal(3)
            u /= np.linalg.norm(u)
            dev = state.beta_sqrt * np.linalg.solve(sqrt_v, u)
            # in the V^{1/2} frame the hull is the l1 ball of radius rho
            frame = sqrt_v @ dev
            assert np.abs(frame).sum() <= rho + 1e-9

    def test_custom_radius(self, rng):
        state = ConfidenceState.fresh(make_params(nu=1.0))
        verts = l1_vertices(state, radius=2.5)
        assert np.allclose(np.abs(verts[0]).max(), 2.5)


class TestMinEigenvalue:
    def test_fresh(self):
        state = ConfidenceState.fresh(make_params(nu=0.7))
        assert min_eigenvalue(state) == pytest.approx(0.7, abs=1e-12)

    def test_after_unit_update(self):
        state = ConfidenceState.fresh(make_params(nu=1.0))
        state = update(state, np.array([1.0, 0.0, 0.0]), np.zeros(2))
        assert min_eigenvalue(state) == pytest.approx(1.0, abs=1e-10)

    def test_matches_numpy(self, rng):
        state = random_updates(ConfidenceState.fresh(make_params()), rng, 40)
        assert min_eigenvalue(state) == pytest.approx(
            np.linalg.eigvalsh(state.gram.V)[0], abs=1e-9)


def test_beta_monotone_across_updates(rng):
    state = ConfidenceState.fresh(make_params())
    prev = state.beta_sqrt
    for _ in range(20):
        x = rng.standard_normal(3)
        x /= max(1.0, np.linalg.norm(x))
        state = update(state, x, rng.standard_normal(2))
        assert state.beta_sqrt >= prev
        prev = state.beta_sqrt
