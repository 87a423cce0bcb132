"""System model, benchmark generators, and noise sampling."""

import numpy as np
import pytest

from belief_mpc import (NoiseRealization, SystemModel, make_double_integrator,
                        make_random_system, observation_matrix,
                        rescale_spectral_radius, sample_noise, simulate_step,
                        spectral_radius)
from belief_mpc import rng

from _oracles import gelfand_radius


def scalar_system(a=1.0, b=1.0, c0=1.0, c1=0.0, sw2=0.1, sz2=1.0):
    return SystemModel(A=[[a]], B=[[b]], Cs=([[c0]], [[c1]]),
                       Sigma_w=[[sw2]], Sigma_z=[[sz2]], Q=[[1.0]],
                       QT=[[1.0]], R=[[1.0]], x0_mean=[0.0], Sigma0=[[1.0]])


def test_observation_matrix_matches_explicit_sum():
    sys = make_random_system(0.95, 0.3, 1.0, 0.1, 0.1, seed=3)
    g = rng.stream(17, 0)
    for _ in range(20):
        u = g.standard_normal(sys.p)
        expected = sys.Cs[0].copy()
        for k in range(sys.p):
            expected = expected + u[k] * sys.Cs[k + 1]
        np.testing.assert_allclose(observation_matrix(sys, u), expected,
                                   rtol=0, atol=1e-14)


def test_observation_matrix_affine_in_u():
    sys = make_random_system(0.9, 0.5, 1.0, 0.1, 0.1, seed=4)
    g = rng.stream(18, 0)
    u, v = g.standard_normal(sys.p), g.standard_normal(sys.p)
    c0 = observation_matrix(sys, np.zeros(sys.p))
    lhs = observation_matrix(sys, u + v) - c0
    rhs = (observation_matrix(sys, u) - c0) + (observation_matrix(sys, v) - c0)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_simulate_step_scalar_hand_values():
    sys = scalar_system(a=2.0, b=1.0, c0=1.0, c1=1.0)
    x_next, y = simulate_step(sys, [1.0], [0.5], [0.1], [-0.2])
    assert x_next[0] == pytest.approx(2.6, abs=1e-15)
    # C(0.5) = 1.5 applied to the pre-transition state.
    assert y[0] == pytest.approx(1.3, abs=1e-15)


def test_observation_uses_pre_transition_state():
    sys = make_random_system(0.95, 0.2, 1.0, 0.1, 0.1, seed=5)
    g = rng.stream(19, 0)
    x = g.standard_normal(sys.n)
    u = g.standard_normal(sys.p)
    _, y = simulate_step(sys, x, u, np.zeros(sys.n), np.zeros(sys.m))
    np.testing.assert_allclose(y, observation_matrix(sys, u) @ x, atol=1e-14)


def test_simulate_step_rejects_bad_shapes():
    sys = make_random_system(0.95, 0.2, 1.0, 0.1, 0.1, seed=5)
    with pytest.raises(ValueError):
        simulate_step(sys, np.zeros(sys.n + 1), np.zeros(sys.p),
                      np.zeros(sys.n), np.zeros(sys.m))
    with pytest.raises(ValueError):
        simulate_step(sys, np.zeros(sys.n), np.zeros(sys.p + 1),
                      np.zeros(sys.n), np.zeros(sys.m))


def test_sample_noise_deterministic_and_tagged():
    sys = make_random_system(0.95, 0.01, 1.0, 0.1, 0.1, seed=0)
    a = sample_noise(sys, 50, seed=123)
    b = sample_noise(sys, 50, seed=123)
    assert np.array_equal(a.x0, b.x0)
    assert np.array_equal(a.ws, b.ws)
    assert np.array_equal(a.zs, b.zs)
    c = sample_noise(sys, 50, seed=124)
    assert not np.array_equal(a.ws, c.ws)
    # Streams are tag-separated: process and measurement draws differ.
    assert not np.array_equal(a.ws[:, :sys.m], a.zs)


def test_sample_noise_moments():
    sys = make_random_system(0.95, 0.01, 1.0, 0.3, 0.2, seed=1)
    noise = sample_noise(sys, 100_000, seed=7)
    cov_w = np.cov(noise.ws.T)
    err = np.linalg.norm(cov_w - sys.Sigma_w) / np.linalg.norm(sys.Sigma_w)
    assert err < 0.05
    cov_z = np.cov(noise.zs.T)
    assert np.linalg.norm(cov_z - sys.Sigma_z) / np.linalg.norm(sys.Sigma_z) < 0.05


def test_sample_noise_rejects_bad_horizon():
    sys = make_random_system(0.95, 0.01, 1.0, 0.1, 0.1, seed=0)
    with pytest.raises(ValueError):
        sample_noise(sys, 0, seed=1)


def test_noise_realization_requires_matching_lengths():
    with pytest.raises(ValueError):
        NoiseRealization(x0=np.zeros(2), ws=np.zeros((5, 2)), zs=np.zeros((4, 1)))


def test_random_system_spectral_radius_and_determinism():
    for seed in range(5):
        sys = make_random_system(0.95, 0.01, 1.0, 0.1, 0.1, seed=seed)
        assert abs(spectral_radius(sys.A) - 0.95) < 1e-9
        again = make_random_system(0.95, 0.01, 1.0, 0.1, 0.1, seed=seed)
        assert np.array_equal(sys.A, again.A)
        assert np.array_equal(sys.B, again.B)
        for C, C2 in zip(sys.Cs, again.Cs):
            assert np.array_equal(C, C2)


def test_random_system_entry_variances():
    n, m = 6, 3
    c0 = 0.4
    b_sq, c0_sq, ck_sq = [], [], []
    for seed in range(10_000):
        sys = make_random_system(0.95, c0, 1.0, 0.1, 0.1, seed=seed)
        b_sq.append(sys.B[0, 0] ** 2)
        c0_sq.append(sys.Cs[0][0, 0] ** 2)
        ck_sq.append(sys.Cs[1][0, 0] ** 2)
    assert np.mean(b_sq) == pytest.approx(1.0 / n, rel=0.05)
    assert np.mean(c0_sq) == pytest.approx(c0 ** 2 / m, rel=0.05)
    assert np.mean(ck_sq) == pytest.approx(1.0 / m, rel=0.05)


def test_random_system_structure():
    sys = make_random_system(0.95, 0.01, 2.5, 0.1, 0.3, seed=9)
    np.testing.assert_allclose(sys.R, 2.5 * np.eye(3))
    np.testing.assert_allclose(sys.Sigma_z, 0.09 * np.eye(3))
    np.testing.assert_allclose(sys.Sigma_w, 0.01 * np.eye(6))
    np.testing.assert_allclose(sys.Q, np.eye(6))
    np.testing.assert_allclose(sys.Sigma0, np.eye(6))
    np.testing.assert_allclose(sys.x0_mean, np.zeros(6))


def test_rescale_spectral_radius():
    g = rng.stream(33, 0)
    for _ in range(5):
        A = g.standard_normal((6, 6))
        scaled = rescale_spectral_radius(A, 0.7)
        assert abs(spectral_radius(scaled) - 0.7) < 1e-12
        # Independent check through Gelfand's formula.
        assert gelfand_radius(scaled) == pytest.approx(0.7, abs=1e-9)
    with pytest.raises(ValueError):
        rescale_spectral_radius(np.zeros((3, 3)), 0.9)
    with pytest.raises(ValueError):
        rescale_spectral_radius(np.eye(3), -1.0)


def test_double_integrator_matrices():
    sys = make_double_integrator(0.95, 0.01, 1.0, 0.1, 1.0)
    assert sys.A[0, 0] == 0.95 and sys.A[0, 1] == 0.3
    assert np.all(np.diag(sys.A) == 0.95)
    assert sys.B[1, 0] == 0.3 and sys.B[0, 0] == 0.0
    # Three decoupled blocks: no coupling outside each 2x2 diagonal block.
    mask = np.kron(np.eye(3), np.ones((2, 2)))
    assert np.all(sys.A[mask == 0] == 0.0)
    # Base readout touches positions (rows i, columns 2i) only, value c0.
    expect_c0 = np.zeros((3, 6))
    for i in range(3):
        expect_c0[i, 2 * i] = 0.01
    np.testing.assert_array_equal(sys.Cs[0], expect_c0)
    # Input k amplifies its own block's position readout by 3.
    assert sys.Cs[2][1, 2] == 3.0
    assert np.count_nonzero(sys.Cs[2]) == 1
    np.testing.assert_allclose(sys.Sigma_z, np.eye(3))


def test_system_model_validation():
    good = make_random_system(0.95, 0.01, 1.0, 0.1, 0.1, seed=0)
    with pytest.raises(ValueError):
        SystemModel(A=good.A, B=good.B, Cs=good.Cs[:-1],
                    Sigma_w=good.Sigma_w, Sigma_z=good.Sigma_z, Q=good.Q,
                    QT=good.QT, R=good.R, x0_mean=good.x0_mean,
                    Sigma0=good.Sigma0)
    with pytest.raises(ValueError):
        SystemModel(A=good.A, B=good.B, Cs=good.Cs, Sigma_w=-np.eye(6),
                    Sigma_z=good.Sigma_z, Q=good.Q, QT=good.QT, R=good.R,
                    x0_mean=good.x0_mean, Sigma0=good.Sigma0)
    with pytest.raises(ValueError):
        SystemModel(A=good.A, B=good.B, Cs=good.Cs, Sigma_w=good.Sigma_w,
                    Sigma_z=np.zeros((3, 3)), Q=good.Q, QT=good.QT, R=good.R,
                    x0_mean=good.x0_mean, Sigma0=good.Sigma0)
    with pytest.raises(ValueError):
        make_random_system(0.95, 0.01, 0.0, 0.1, 0.1, seed=0)


def test_system_arrays_are_read_only():
    sys = make_random_system(0.95, 0.01, 1.0, 0.1, 0.1, seed=0)
    with pytest.raises(ValueError):
        sys.A[0, 0] = 1.0
