"""Bounded-iteration L-BFGS behavior on analytic objectives."""

import numpy as np
import pytest

from belief_mpc import LbfgsConfig, minimize, random_init, rng
from belief_mpc.optim import _line_search


def quadratic(Hmat, c):
    """f(x) = 0.5 x'Hx + c'x with gradient Hx + c."""

    def fg(x):
        g = Hmat @ x + c
        return 0.5 * float(x @ Hmat @ x) + float(c @ x), g

    return fg


def rosenbrock(x):
    a, b = x
    f = (1 - a) ** 2 + 100 * (b - a * a) ** 2
    g = np.array([-2 * (1 - a) - 400 * a * (b - a * a), 200 * (b - a * a)])
    return f, g


def test_isotropic_quadratic_single_iteration():
    fg = quadratic(2.0 * np.eye(3), np.array([1.0, -2.0, 0.5]))
    res = minimize(fg, np.zeros(3), LbfgsConfig())
    np.testing.assert_allclose(res.u, [-0.5, 1.0, -0.25], atol=1e-10)
    assert res.iters <= 2
    assert not res.aborted


def test_convex_quadratics_finite_termination():
    # With memory >= dimension and exact line minimization (the quadratic
    # refinement is exact here), L-BFGS terminates in at most d steps of
    # progress; allow 2d for the accounting of skipped pairs.
    for seed, d in [(0, 2), (1, 4), (2, 6), (3, 8)]:
        g = rng.stream(seed, 80)
        M = g.standard_normal((d, d))
        Hmat = M @ M.T + np.eye(d)
        c = g.standard_normal(d)
        x_star = np.linalg.solve(Hmat, -c)
        res = minimize(quadratic(Hmat, c), np.zeros(d),
                       LbfgsConfig(max_iters=2 * d, memory=d, grad_tol=1e-14))
        np.testing.assert_allclose(res.u, x_star, rtol=0, atol=1e-10)
        assert res.iters <= 2 * d


def test_rosenbrock_converges_within_budget():
    res = minimize(rosenbrock, np.array([-1.2, 1.0]),
                   LbfgsConfig(max_iters=100, grad_tol=0.0))
    assert res.fun <= 1e-6
    np.testing.assert_allclose(res.u, [1.0, 1.0], atol=1e-2)


def test_returns_best_iterate_seen():
    # A function with a narrow valley where late iterations can overshoot:
    # track every evaluation and confirm the reported minimum matches.
    seen = []

    def fg(x):
        f, g = rosenbrock(x)
        seen.append(f)
        return f, g

    res = minimize(fg, np.array([-1.2, 1.0]), LbfgsConfig(max_iters=7))
    assert res.fun == min(seen)
    f_at_u, _ = rosenbrock(res.u)
    assert f_at_u == res.fun


def test_grad_tol_exit_at_initialization():
    fg = quadratic(np.eye(2), np.zeros(2))
    res = minimize(fg, np.zeros(2), LbfgsConfig())
    assert res.iters == 0
    assert res.fun == 0.0
    assert not res.aborted


def test_max_iters_zero_returns_initial_point():
    fg = quadratic(np.eye(2), np.array([1.0, 1.0]))
    init = np.array([3.0, -4.0])
    res = minimize(fg, init, LbfgsConfig(max_iters=0))
    np.testing.assert_array_equal(res.u, init)
    assert res.iters == 0
    assert res.fun == fg(init)[0]


def test_deterministic_bitwise():
    g = rng.stream(5, 81)
    M = g.standard_normal((6, 6))
    Hmat = M @ M.T + 0.1 * np.eye(6)
    c = g.standard_normal(6)
    init = g.standard_normal(6)
    r1 = minimize(quadratic(Hmat, c), init, LbfgsConfig())
    r2 = minimize(quadratic(Hmat, c), init, LbfgsConfig())
    assert np.array_equal(r1.u, r2.u)
    assert r1.fun == r2.fun and r1.iters == r2.iters


def test_nonfinite_gradient_aborts_with_flag():
    calls = [0]

    def fg(x):
        calls[0] += 1
        if calls[0] >= 3:
            return float(x @ x), np.full_like(x, np.nan)
        return float(x @ x), 2.0 * x

    res = minimize(fg, np.array([1.0, 1.0]), LbfgsConfig())
    assert res.aborted
    assert np.isfinite(res.fun)
    assert np.isfinite(res.u).all()


def test_nonfinite_initial_value_aborts_immediately():
    def fg(x):
        return np.nan, np.zeros_like(x)

    res = minimize(fg, np.ones(3), LbfgsConfig())
    assert res.aborted and res.iters == 0


def test_nonfinite_region_is_backtracked_past():
    # Value blows up for x[0] > 2; the search must shrink the step into
    # the finite region rather than abort.
    def fg(x):
        if x[0] > 2.0:
            return np.inf, np.zeros_like(x)
        return float((x - 1.0) @ (x - 1.0)), 2.0 * (x - 1.0)

    res = minimize(fg, np.array([-30.0, 0.0]),
                   LbfgsConfig(max_iters=50, step_size=5.0))
    assert not res.aborted
    np.testing.assert_allclose(res.u, [1.0, 1.0], atol=1e-6)


def test_line_search_quadratic_refinement_is_exact():
    # On f(a) = (a - 3)^2 starting from 0 along d = 1 with step0 = 0.8 the
    # refinement lands exactly on the 1-D minimizer.
    def value(x):
        return float((x[0] - 3.0) ** 2)

    out = _line_search(value, np.zeros(1), 9.0, -6.0, np.ones(1), 0.8)
    assert out is not None
    alpha, f_a = out
    assert alpha == pytest.approx(3.0, abs=1e-12)
    assert f_a == pytest.approx(0.0, abs=1e-12)


def test_line_search_none_when_no_descent_possible():
    def value(x):
        return float(x[0])

    # Moving along +1 with positive slope can never satisfy Armijo.
    assert _line_search(value, np.zeros(1), 0.0, 1.0, np.ones(1), 1.0) is None


def test_random_init_shape_and_scale():
    g = rng.stream(0, 82)
    u = random_init(20, 3, g)
    assert u.shape == (20, 3)
    draws = np.stack([random_init(20, 3, g) for _ in range(200)])
    assert abs(draws.var() - 1.0 / 20) < 0.005
    with pytest.raises(ValueError):
        random_init(0, 3, g)


def test_config_validation():
    with pytest.raises(ValueError):
        LbfgsConfig(max_iters=-1)
    with pytest.raises(ValueError):
        LbfgsConfig(step_size=0.0)
    with pytest.raises(ValueError):
        LbfgsConfig(memory=0)
    with pytest.raises(ValueError):
        LbfgsConfig(grad_tol=-1e-9)
    cfg = LbfgsConfig(max_iters=0)
    assert cfg.max_iters == 0
