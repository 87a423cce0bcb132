"""Input-dependent Kalman filtering for bilinear observation models.

The filter keeps the one-step-prediction belief (x_hat_{t|t-1},
Sigma_{t|t-1}) and folds both the measurement and the transition into a
single update:

    S(u)     = C(u) Sigma C(u)' + Sigma_z
    L(u)     = -A Sigma C(u)' S(u)^{-1}
    mean'    = A mean + B u - L(u) (y - C(u) mean)
    Sigma'   = A Sigma A' + L(u) C(u) Sigma A' + Sigma_w

which is the textbook predict/update composition written in gain form;
the test suite checks that equivalence against an independent
implementation rather than assuming it. Because C depends on the applied
input, the covariance trajectory is shaped by the controller, but it
never depends on the observed y values.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import SpdFactor, sym
from .systems import SystemModel, observation_matrix


@dataclass(frozen=True, eq=False)
class Belief:
    """Gaussian one-step-prediction belief over the state."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        n = mean.shape[0]
        if mean.ndim != 1 or cov.shape != (n, n):
            raise ValueError(f"belief dimensions mismatch: mean {mean.shape}, cov {cov.shape}")
        if np.max(np.abs(cov - cov.T)) > 1e-10:
            raise ValueError("belief covariance must be symmetric to 1e-10")
        lam_min = np.linalg.eigvalsh(cov)[0]
        if lam_min < -1e-9:
            raise ValueError(f"belief covariance must be PSD (min eigenvalue {lam_min:.3e})")
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


def _cov_step(sys: SystemModel, cov: np.ndarray, C: np.ndarray):
    """Shared covariance propagation for the filter and the planner surrogate.

    Returns (next_cov, W, phi) where W = cov C' S^{-1} solves the
    innovation system through a PD factorization, phi = cov - W (cov C')'
    is the filtered covariance, and next_cov = A phi A' + Sigma_w,
    symmetrized. The filter gain is L = -A W.
    """
    M = cov @ C.T
    S = C @ M + sys.Sigma_z
    W = SpdFactor(S).solve(M.T).T
    phi = cov - W @ M.T
    next_cov = sym(sys.A @ phi @ sys.A.T + sys.Sigma_w)
    return next_cov, W, phi


def kalman_gain(sys: SystemModel, cov: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Input-dependent filter gain L(u) = -A cov C(u)' S(u)^{-1}."""
    C = observation_matrix(sys, u)
    _, W, _ = _cov_step(sys, np.asarray(cov, dtype=float), C)
    return -sys.A @ W


def kalman_update(sys: SystemModel, b: Belief, u: np.ndarray, y: np.ndarray) -> Belief:
    """Advance the belief by one filter step given applied input u and measurement y."""
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.shape != (sys.m,):
        raise ValueError(f"y must have shape {(sys.m,)}, got {y.shape}")
    C = observation_matrix(sys, u)
    next_cov, W, _ = _cov_step(sys, b.cov, C)
    L = -sys.A @ W
    mean = sys.A @ b.mean + sys.B @ u - L @ (y - C @ b.mean)
    return Belief(mean=mean, cov=next_cov)
