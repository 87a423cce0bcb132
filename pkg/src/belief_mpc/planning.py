"""Deterministic belief planning: surrogate rollout, costs, exact gradients.

The planner propagates a belief with the same input-dependent covariance
recursion as the filter but replaces the innovation by its nominal value
of zero, so the mean follows the open-loop prediction

    mean'  = A mean + B u
    Sigma' = A Sigma A' + L(u) C(u) Sigma A' + Sigma_w

while the covariance still depends on the planned inputs through C(u).
The planning objective charges quadratic state and input costs on the
mean plus trace penalties on the covariance:

    J(u_0..u_{H-1}) = sum_t [ m_t' Q m_t + tr(Q P_t) + u_t' R u_t ]
                      + m_H' QT m_H + tr(QT P_H).

Gradients are computed by a hand-written adjoint sweep through the
recursion, including through C(u) and the innovation-covariance solve
(d S^{-1} = -S^{-1} dS S^{-1}); one backward pass instead of H*p forward
differences. With a symmetric cost-to-go matrix G = A' Lambda A, the
per-step adjoint contributions collapse to

    dJ/dSigma_t = Q + (I - W C)' G (I - W C)
    dJ/dC       = -2 W' G Phi

with W = Sigma C' S^{-1} and Phi the filtered covariance, which is what
the backward loop below implements.
"""

from dataclasses import dataclass

import numpy as np

from .estimation import Belief, _cov_step
from .systems import SystemModel, observation_matrix


def stage_cost(sys: SystemModel, b: Belief, u: np.ndarray) -> float:
    """Per-step belief cost: mean' Q mean + tr(Q cov) + u' R u."""
    u = np.asarray(u, dtype=float)
    return float(b.mean @ sys.Q @ b.mean + sys.Q.ravel() @ b.cov.ravel()
                 + u @ sys.R @ u)


def terminal_cost(sys: SystemModel, b: Belief) -> float:
    """Terminal belief cost: mean' QT mean + tr(QT cov)."""
    return float(b.mean @ sys.QT @ b.mean + sys.QT.ravel() @ b.cov.ravel())


def surrogate_step(sys: SystemModel, b: Belief, u: np.ndarray) -> Belief:
    """One zero-innovation belief step; covariance path shared with the filter."""
    u = np.asarray(u, dtype=float)
    C = observation_matrix(sys, u)
    next_cov, _, _ = _cov_step(sys, b.cov, C)
    return Belief(mean=sys.A @ b.mean + sys.B @ u, cov=next_cov)


@dataclass(frozen=True, eq=False)
class PlanningProblem:
    """An H-step open-loop planning instance rooted at belief b0."""

    sys: SystemModel
    b0: Belief
    H: int
    u_seq: np.ndarray

    def __post_init__(self):
        if self.H < 1:
            raise ValueError(f"H must be >= 1, got {self.H}")
        u = np.asarray(self.u_seq, dtype=float)
        if u.shape != (self.H, self.sys.p):
            raise ValueError(f"u_seq must have shape {(self.H, self.sys.p)}, got {u.shape}")
        object.__setattr__(self, "u_seq", u)


def _forward(sys, x0, cov0, u_seq, want_cache):
    """Surrogate rollout accumulating the objective; optionally caches the
    per-step quantities the adjoint sweep needs."""
    H = u_seq.shape[0]
    x = np.asarray(x0, dtype=float)
    cov = np.asarray(cov0, dtype=float)
    J = 0.0
    xs = [x] if want_cache else None
    Cs = [] if want_cache else None
    Ws = [] if want_cache else None
    phis = [] if want_cache else None
    A, B, Q, R = sys.A, sys.B, sys.Q, sys.R
    q_flat = Q.ravel()
    c0 = sys.Cs[0]
    ck_flat = sys._ck_flat
    mn = (sys.m, sys.n)
    for t in range(H):
        u = u_seq[t]
        J += x @ Q @ x + q_flat @ cov.ravel() + u @ R @ u
        C = c0 + (u @ ck_flat).reshape(mn)
        cov, W, phi = _cov_step(sys, cov, C)
        x = A @ x + B @ u
        if want_cache:
            xs.append(x)
            Cs.append(C)
            Ws.append(W)
            phis.append(phi)
    J += x @ sys.QT @ x + sys.QT.ravel() @ cov.ravel()
    return float(J), (xs, Cs, Ws, phis)


def _backward(sys, u_seq, cache):
    """Adjoint sweep; returns dJ/du with shape (H, p)."""
    xs, Cs, Ws, phis = cache
    H = u_seq.shape[0]
    A, Q, R = sys.A, sys.Q, sys.R
    At, Bt = A.T, sys.B.T
    ck_flat = sys._ck_flat
    eye = np.eye(sys.n)
    grad = np.empty((H, sys.p))
    lam = 2.0 * sys.QT @ xs[H]
    Lam = sys.QT
    for t in range(H - 1, -1, -1):
        G = At @ Lam @ A
        gc = -2.0 * Ws[t].T @ G @ phis[t]
        grad[t] = 2.0 * R @ u_seq[t] + Bt @ lam + ck_flat @ gc.ravel()
        E = eye - Ws[t] @ Cs[t]
        Lam = Q + E.T @ G @ E
        lam = 2.0 * Q @ xs[t] + At @ lam
    return grad


def objective(prob: PlanningProblem) -> float:
    """Value of the H-step planning objective at prob.u_seq."""
    J, _ = _forward(prob.sys, prob.b0.mean, prob.b0.cov, prob.u_seq, want_cache=False)
    return J


def gradient(prob: PlanningProblem) -> np.ndarray:
    """Exact gradient of the planning objective, shape (H, p)."""
    _, cache = _forward(prob.sys, prob.b0.mean, prob.b0.cov, prob.u_seq, want_cache=True)
    return _backward(prob.sys, prob.u_seq, cache)


def objective_and_gradient(prob: PlanningProblem):
    J, cache = _forward(prob.sys, prob.b0.mean, prob.b0.cov, prob.u_seq, want_cache=True)
    return J, _backward(prob.sys, prob.u_seq, cache)


def make_planner(sys: SystemModel, b0: Belief, H: int):
    """Closures (value, value_and_grad) over (H, p) input arrays for b0."""
    x0 = b0.mean
    cov0 = b0.cov

    def value(u_seq):
        J, _ = _forward(sys, x0, cov0, u_seq, want_cache=False)
        return J

    def value_and_grad(u_seq):
        J, cache = _forward(sys, x0, cov0, u_seq, want_cache=True)
        return J, _backward(sys, u_seq, cache)

    return value, value_and_grad


def _mean_forward(sys, x0, u_seq, want_cache):
    H = u_seq.shape[0]
    x = np.asarray(x0, dtype=float)
    J = 0.0
    xs = [x] if want_cache else None
    for t in range(H):
        u = u_seq[t]
        J += x @ sys.Q @ x + u @ sys.R @ u
        x = sys.A @ x + sys.B @ u
        if want_cache:
            xs.append(x)
    J += x @ sys.QT @ x
    return float(J), xs


def _mean_backward(sys, u_seq, xs):
    H = u_seq.shape[0]
    grad = np.empty((H, sys.p))
    lam = 2.0 * sys.QT @ xs[H]
    for t in range(H - 1, -1, -1):
        grad[t] = 2.0 * sys.R @ u_seq[t] + sys.B.T @ lam
        lam = 2.0 * sys.Q @ xs[t] + sys.A.T @ lam
    return grad


def make_mean_planner(sys: SystemModel, x0: np.ndarray, H: int):
    """Closures for the certainty-equivalent objective (covariance terms dropped)."""
    x0 = np.asarray(x0, dtype=float)

    def value(u_seq):
        J, _ = _mean_forward(sys, x0, u_seq, want_cache=False)
        return J

    def value_and_grad(u_seq):
        J, xs = _mean_forward(sys, x0, u_seq, want_cache=True)
        return J, _mean_backward(sys, u_seq, xs)

    return value, value_and_grad
