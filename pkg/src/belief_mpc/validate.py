"""Quick self-checks wired to the CLI `validate` subcommand.

Each check re-derives an expected answer through an independent route
(textbook filter form, central finite differences, closed-form scalar
recursions) and compares. Runs in seconds; intended as a smoke test
after installation, not as a replacement for the test suite.
"""

import numpy as np

from . import rng
from .controllers import (B_MPC, SEP_MPC, SEP_MPC_LBFGS, ControllerSpec,
                          riccati_backward)
from .estimation import Belief, kalman_update
from .optim import LbfgsConfig
from .planning import PlanningProblem, gradient, objective
from .rollout import rollout
from .systems import (SystemModel, make_random_system, observation_matrix,
                      sample_noise)


def _textbook_filter_step(sys, mean, cov, u, y):
    """Predict/update composition in the standard filtered-gain form."""
    C = observation_matrix(sys, u)
    S = C @ cov @ C.T + sys.Sigma_z
    K = cov @ C.T @ np.linalg.inv(S)
    mean_f = mean + K @ (y - C @ mean)
    cov_f = (np.eye(sys.n) - K @ C) @ cov
    return sys.A @ mean_f + sys.B @ u, sys.A @ cov_f @ sys.A.T + sys.Sigma_w


def check_filter_equivalence(systems=5, steps=50, tol=1e-9):
    worst = 0.0
    for k in range(systems):
        sys = make_random_system(0.95, 0.01, 1.0, 0.1, 0.1, seed=700 + k)
        g = rng.stream(800 + k, 0)
        b = Belief(mean=sys.x0_mean.copy(), cov=sys.Sigma0.copy())
        mean, cov = b.mean.copy(), b.cov.copy()
        for _ in range(steps):
            u = g.standard_normal(sys.p)
            y = g.standard_normal(sys.m)
            b = kalman_update(sys, b, u, y)
            mean, cov = _textbook_filter_step(sys, mean, cov, u, y)
            worst = max(worst,
                        float(np.max(np.abs(b.mean - mean))),
                        float(np.max(np.abs(b.cov - cov))))
    return worst <= tol, f"max deviation {worst:.2e} (tol {tol:g})"


def check_gradient(instances=5, tol=1e-4):
    worst = 0.0
    for k in range(instances):
        sys = make_random_system(0.95, 0.1, 1.0, 0.1, 0.1, seed=900 + k)
        g = rng.stream(950 + k, 0)
        H = 4
        b = Belief(mean=g.standard_normal(sys.n),
                   cov=np.eye(sys.n) + 0.5 * np.diag(g.random(sys.n)))
        u = g.standard_normal((H, sys.p))
        grad = gradient(PlanningProblem(sys=sys, b0=b, H=H, u_seq=u))
        step = 1e-5
        for idx in np.ndindex(H, sys.p):
            up, dn = u.copy(), u.copy()
            up[idx] += step
            dn[idx] -= step
            fd = (objective(PlanningProblem(sys=sys, b0=b, H=H, u_seq=up))
                  - objective(PlanningProblem(sys=sys, b0=b, H=H, u_seq=dn))) / (2 * step)
            err = abs(grad[idx] - fd) / max(abs(fd), 1e-7)
            worst = max(worst, err)
    return worst <= tol, f"max relative error {worst:.2e} (tol {tol:g})"


def check_riccati_scalar(tol=1e-12):
    sys = SystemModel(A=[[1.0]], B=[[1.0]], Cs=([[0.0]], [[0.0]]),
                      Sigma_w=[[0.1]], Sigma_z=[[1.0]], Q=[[1.0]], QT=[[1.0]],
                      R=[[1.0]], x0_mean=[0.0], Sigma0=[[1.0]])
    table = riccati_backward(sys, 1)
    errs = [abs(table.values[1][0, 0] - 1.0),
            abs(table.gains[0][0, 0] + 0.5),
            abs(table.values[0][0, 0] - 1.5)]
    return max(errs) <= tol, f"max closed-form deviation {max(errs):.2e}"


def check_degenerate_collapse(T=20, tol=1e-3):
    base = make_random_system(0.9, 0.5, 1.0, 0.1, 0.1, seed=1000)
    zero = np.zeros((base.m, base.n))
    sys = SystemModel(A=base.A, B=base.B, Cs=(base.Cs[0],) + (zero,) * base.p,
                      Sigma_w=base.Sigma_w, Sigma_z=base.Sigma_z, Q=base.Q,
                      QT=base.QT, R=base.R, x0_mean=base.x0_mean,
                      Sigma0=np.zeros((base.n, base.n)))
    noise = sample_noise(sys, T, seed=11)
    cfg = LbfgsConfig()
    us = {}
    for kind in (SEP_MPC, SEP_MPC_LBFGS, B_MPC):
        spec = ControllerSpec(kind=kind, horizon=5, lbfgs=cfg)
        us[kind] = rollout(sys, spec, T, noise,
                           planner_stream=rng.stream(12, rng.PLANNER_INIT)).us
    worst = max(float(np.max(np.abs(us[SEP_MPC] - us[B_MPC]))),
                float(np.max(np.abs(us[SEP_MPC] - us[SEP_MPC_LBFGS]))))
    return worst <= tol, f"max input deviation {worst:.2e} (tol {tol:g})"


CHECKS = (
    ("filter matches textbook predict/update", check_filter_equivalence),
    ("planner gradient matches finite differences", check_gradient),
    ("LQ recursion matches scalar closed form", check_riccati_scalar),
    ("controllers collapse on degenerate system", check_degenerate_collapse),
)


def run_validation(out=print) -> int:
    """Run all checks, print one line each; return count of failures."""
    failures = 0
    for name, check in CHECKS:
        ok, detail = check()
        failures += not ok
        out(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return failures
