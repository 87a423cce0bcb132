"""Closed-loop controllers.

Four policies share the same filtered belief:

* sep           -- full-horizon time-varying LQ feedback on the mean
                   (certainty equivalence; ignores the covariance).
* sep-mpc       -- receding-horizon LQ feedback: at each step, the first
                   gain of a fresh H-step Riccati pass applied to the mean.
* sep-mpc-lbfgs -- the same certainty-equivalent plan obtained by running
                   the numerical optimizer on the mean-only objective.
* b-mpc         -- receding-horizon minimization of the full belief
                   objective, whose covariance terms couple planning and
                   sensing through C(u).
"""

from dataclasses import dataclass, field

import numpy as np

from .estimation import Belief
from .linalg import solve_spd_strict, sym
from .optim import LbfgsConfig, MinimizeResult, minimize, random_init
from .planning import make_mean_planner, make_planner
from .systems import SystemModel

SEP = "sep"
SEP_MPC = "sep-mpc"
SEP_MPC_LBFGS = "sep-mpc-lbfgs"
B_MPC = "b-mpc"
CONTROLLER_KINDS = (SEP, SEP_MPC, SEP_MPC_LBFGS, B_MPC)

INIT_RANDOM = "random"
INIT_SEP_WARM = "sep-warm"
INIT_SCHEMES = (INIT_RANDOM, INIT_SEP_WARM)


@dataclass(frozen=True, eq=False)
class RiccatiTable:
    """Backward LQ pass: gains[t] maps a mean to an input, values[t] is the
    cost-to-go matrix K_t with values[horizon] the terminal weight."""

    gains: np.ndarray
    values: np.ndarray

    @property
    def horizon(self):
        return self.gains.shape[0]


def riccati_backward(sys: SystemModel, horizon: int) -> RiccatiTable:
    """Finite-horizon LQ backward pass from the terminal state cost.

        K_H = QT
        L_t = -(B' K_{t+1} B + R)^{-1} B' K_{t+1} A
        K_t = A' K_{t+1} A + (A' K_{t+1} B) L_t + Q   (symmetrized)
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    gains = np.empty((horizon, sys.p, sys.n))
    values = np.empty((horizon + 1, sys.n, sys.n))
    K = sys.QT.copy()
    values[horizon] = K
    for t in range(horizon - 1, -1, -1):
        M = sys.B.T @ K @ sys.A
        G = sys.B.T @ K @ sys.B + sys.R
        L = -solve_spd_strict(G, M, context="input-cost curvature B'KB + R")
        K = sym(sys.A.T @ K @ sys.A + M.T @ L + sys.Q)
        gains[t] = L
        values[t] = K
    return RiccatiTable(gains=gains, values=values)


def sep_action(table: RiccatiTable, t: int, mean: np.ndarray) -> np.ndarray:
    """Time-varying LQ feedback u_t = L_t mean."""
    if not 0 <= t < table.horizon:
        raise IndexError(f"t = {t} outside table horizon {table.horizon}")
    return table.gains[t] @ mean


def sep_mpc_action(sys: SystemModel, b: Belief, H: int) -> np.ndarray:
    """First gain of a fresh H-step LQ pass applied to the belief mean."""
    table = riccati_backward(sys, H)
    return table.gains[0] @ b.mean


def sep_mpc_warm_start(sys: SystemModel, b: Belief, H: int) -> np.ndarray:
    """Open-loop H-step input sequence from rolling the LQ feedback forward
    along the nominal (zero-noise) mean trajectory; ignores the covariance."""
    table = riccati_backward(sys, H)
    us = np.empty((H, sys.p))
    x = b.mean
    for t in range(H):
        u = table.gains[t] @ x
        us[t] = u
        x = sys.A @ x + sys.B @ u
    return us


def sep_mpc_action_lbfgs(sys: SystemModel, b: Belief, H: int,
                         cfg: LbfgsConfig, init: np.ndarray):
    """Certainty-equivalent MPC action via the numerical optimizer.

    Minimizes the mean-only objective from init and returns (first input,
    MinimizeResult); an optimizer abort surfaces as result.aborted.
    """
    value, value_and_grad = make_mean_planner(sys, b.mean, H)
    res = minimize(value_and_grad, init, cfg, value=value)
    return res.u[0].copy(), res


@dataclass(frozen=True, eq=False)
class BmpcResult:
    """Applied input, full open-loop plan, and achieved objective value."""

    u: np.ndarray
    plan: np.ndarray
    objective: float
    iters: int
    aborted: bool


def bmpc_action(sys: SystemModel, b: Belief, H: int, cfg: LbfgsConfig,
                init_scheme: str, stream: np.random.Generator) -> BmpcResult:
    """Plan over the full belief objective and return the first input.

    init_scheme selects the initialization: fresh i.i.d. N(0, 1/H) entries
    from the planner stream, or the open-loop LQ warm start built from the
    belief mean.
    """
    if init_scheme == INIT_RANDOM:
        init = random_init(H, sys.p, stream)
    elif init_scheme == INIT_SEP_WARM:
        init = sep_mpc_warm_start(sys, b, H)
    else:
        raise ValueError(f"unknown init scheme {init_scheme!r}")
    value, value_and_grad = make_planner(sys, b, H)
    res = minimize(value_and_grad, init, cfg, value=value)
    return BmpcResult(u=res.u[0].copy(), plan=res.u, objective=res.fun,
                      iters=res.iters, aborted=res.aborted)


@dataclass(frozen=True)
class ControllerSpec:
    """What to run in closed loop: policy kind plus planner settings."""

    kind: str
    horizon: int | None = None
    lbfgs: LbfgsConfig = field(default_factory=LbfgsConfig)
    init_scheme: str = INIT_RANDOM

    def __post_init__(self):
        if self.kind not in CONTROLLER_KINDS:
            raise ValueError(f"unknown controller kind {self.kind!r}")
        if self.kind != SEP:
            if self.horizon is None or self.horizon < 1:
                raise ValueError(f"{self.kind} requires a planning horizon >= 1")
        if self.init_scheme not in INIT_SCHEMES:
            raise ValueError(f"unknown init scheme {self.init_scheme!r}")
