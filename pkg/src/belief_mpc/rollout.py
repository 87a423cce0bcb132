"""Closed-loop simulation with matched noise across controllers.

A rollout consumes a pre-sampled NoiseRealization, so running several
controllers against the same realization is an exact paired comparison.
Costs are charged on the true state; the belief is advanced by the
input-dependent filter after every applied input. Wall-clock covers
controller construction and the loop (planning included), not noise
sampling or I/O.
"""

import hashlib
import time
from dataclasses import dataclass

import numpy as np

from . import rng
from .controllers import (B_MPC, SEP, SEP_MPC, SEP_MPC_LBFGS, ControllerSpec,
                          bmpc_action, riccati_backward, sep_action,
                          sep_mpc_action, sep_mpc_action_lbfgs)
from .estimation import Belief, kalman_update
from .optim import random_init
from .systems import NoiseRealization, SystemModel, simulate_step


@dataclass
class RolloutRecord:
    """Everything a trial produces: per-step logs, cost bookkeeping, timing."""

    controller: str
    xs: np.ndarray           # (T+1, n) true states
    xhats: np.ndarray        # (T+1, n) belief means
    tr_sigmas: np.ndarray    # (T+1,) belief covariance traces
    est_errs: np.ndarray     # (T+1,) ||x_t - xhat_t||_2
    us: np.ndarray           # (T, p)
    ys: np.ndarray           # (T, m)
    state_costs: np.ndarray  # (T,)  x_t' Q x_t
    input_costs: np.ndarray  # (T,)  u_t' R u_t
    terminal_cost: float
    state_cost_sum: float
    input_cost_sum: float
    total_cost: float
    wall_clock_seconds: float
    optimizer_flags: int
    noise_sha: str

    @property
    def steps(self):
        return self.us.shape[0]


def _make_controller(spec: ControllerSpec, sys: SystemModel, T: int,
                     planner_stream: np.random.Generator):
    """Per-rollout policy closure: (t, belief) -> (u, aborted)."""
    if spec.kind == SEP:
        table = riccati_backward(sys, T)

        def act(t, b):
            return sep_action(table, t, b.mean), False

    elif spec.kind == SEP_MPC:

        def act(t, b):
            return sep_mpc_action(sys, b, min(spec.horizon, T - t)), False

    elif spec.kind == SEP_MPC_LBFGS:

        def act(t, b):
            h = min(spec.horizon, T - t)
            init = random_init(h, sys.p, planner_stream)
            u, res = sep_mpc_action_lbfgs(sys, b, h, spec.lbfgs, init)
            return u, res.aborted

    elif spec.kind == B_MPC:

        def act(t, b):
            h = min(spec.horizon, T - t)
            res = bmpc_action(sys, b, h, spec.lbfgs, spec.init_scheme, planner_stream)
            return res.u, res.aborted

    else:
        raise ValueError(f"unknown controller kind {spec.kind!r}")
    return act


def noise_fingerprint(noise: NoiseRealization) -> str:
    """SHA-256 over the realization's bytes; equal noise => equal digest."""
    digest = hashlib.sha256()
    for arr in (noise.x0, noise.ws, noise.zs):
        digest.update(np.ascontiguousarray(arr).tobytes())
    return digest.hexdigest()


def rollout(sys: SystemModel, spec: ControllerSpec, T: int,
            noise: NoiseRealization,
            planner_stream: np.random.Generator | None = None) -> RolloutRecord:
    """Run one closed-loop trial of length T against a fixed noise realization."""
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if noise.steps != T:
        raise ValueError(f"noise covers {noise.steps} steps, rollout needs {T}")
    if planner_stream is None:
        planner_stream = rng.stream(0, rng.PLANNER_INIT)

    xs = np.empty((T + 1, sys.n))
    xhats = np.empty((T + 1, sys.n))
    tr_sigmas = np.empty(T + 1)
    est_errs = np.empty(T + 1)
    us = np.empty((T, sys.p))
    ys = np.empty((T, sys.m))
    state_costs = np.empty(T)
    input_costs = np.empty(T)
    flags = 0

    start = time.perf_counter()
    act = _make_controller(spec, sys, T, planner_stream)
    b = Belief(mean=sys.x0_mean.copy(), cov=sys.Sigma0.copy())
    x = np.asarray(noise.x0, dtype=float)
    for t in range(T):
        u, aborted = act(t, b)
        flags += bool(aborted)
        xs[t] = x
        xhats[t] = b.mean
        tr_sigmas[t] = np.trace(b.cov)
        est_errs[t] = np.linalg.norm(x - b.mean)
        us[t] = u
        state_costs[t] = x @ sys.Q @ x
        input_costs[t] = u @ sys.R @ u
        x, y = simulate_step(sys, x, u, noise.ws[t], noise.zs[t])
        ys[t] = y
        b = kalman_update(sys, b, u, y)
    xs[T] = x
    xhats[T] = b.mean
    tr_sigmas[T] = np.trace(b.cov)
    est_errs[T] = np.linalg.norm(x - b.mean)
    terminal = float(x @ sys.QT @ x)
    wall = time.perf_counter() - start

    state_sum = float(np.sum(state_costs))
    input_sum = float(np.sum(input_costs))
    return RolloutRecord(
        controller=spec.kind,
        xs=xs, xhats=xhats, tr_sigmas=tr_sigmas, est_errs=est_errs,
        us=us, ys=ys, state_costs=state_costs, input_costs=input_costs,
        terminal_cost=terminal,
        state_cost_sum=state_sum,
        input_cost_sum=input_sum,
        total_cost=state_sum + input_sum + terminal,
        wall_clock_seconds=wall,
        optimizer_flags=flags,
        noise_sha=noise_fingerprint(noise),
    )
