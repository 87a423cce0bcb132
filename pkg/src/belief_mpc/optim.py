"""Bounded-iteration L-BFGS with a backtracking Armijo line search.

The planner objective is nonconvex but cheap, so the solver favors a
small fixed iteration budget over tight convergence tests: iterations
count accepted line-search steps, the best iterate seen is returned, and
a non-finite value or gradient aborts with the best finite iterate and a
flag instead of raising. Line-search trials start from a configurable
step and, once the Armijo test passes, one quadratic-fit refinement along
the ray is attempted; on an exactly quadratic objective that refinement
is the exact line minimizer, which gives quasi-Newton finite termination
when the history window covers the dimension.
"""

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

_ARMIJO_C1 = 1e-4
_CONTRACTION = 0.5
_CURVATURE_SKIP = 1e-12
_MAX_BACKTRACKS = 60
_QUAD_GROWTH_CAP = 10.0


@dataclass(frozen=True)
class LbfgsConfig:
    """Solver knobs: iteration budget, initial trial step, history length."""

    max_iters: int = 20
    step_size: float = 0.8
    memory: int = 10
    grad_tol: float = 1e-8

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be >= 0, got {self.max_iters}")
        if self.step_size <= 0:
            raise ValueError(f"step_size must be > 0, got {self.step_size}")
        if self.memory < 1:
            raise ValueError(f"memory must be >= 1, got {self.memory}")
        if self.grad_tol < 0:
            raise ValueError(f"grad_tol must be >= 0, got {self.grad_tol}")


@dataclass
class MinimizeResult:
    """Best iterate found, its value, accepted-step count, and abort flag."""

    u: np.ndarray
    fun: float
    iters: int
    aborted: bool = False


def random_init(H: int, p: int, stream: np.random.Generator) -> np.ndarray:
    """Fresh (H, p) initialization with i.i.d. N(0, 1/H) entries."""
    if H < 1:
        raise ValueError(f"H must be >= 1, got {H}")
    return stream.standard_normal((H, p)) * math.sqrt(1.0 / H)


def _two_loop(g, hist):
    """Two-loop recursion: approximate inverse-Hessian action on g."""
    q = g.copy()
    alphas = []
    for s, y, r in reversed(hist):
        a = r * np.vdot(s, q)
        q -= a * y
        alphas.append(a)
    if hist:
        s, y, _ = hist[-1]
        q *= np.vdot(s, y) / np.vdot(y, y)
    for (s, y, r), a in zip(hist, reversed(alphas)):
        b = r * np.vdot(y, q)
        q += (a - b) * s
    return q


def _line_search(value, x, f0, gd, d, step0):
    """Backtracking Armijo search with one quadratic-fit refinement.

    Returns (alpha, f_alpha) or None when no acceptable step exists down
    to the backtracking floor. Non-finite trial values are treated as
    failed Armijo tests and backtracked past.
    """
    alpha = step0
    for _ in range(_MAX_BACKTRACKS):
        f_a = value(x + alpha * d)
        if math.isfinite(f_a) and f_a <= f0 + _ARMIJO_C1 * alpha * gd:
            denom = f_a - f0 - alpha * gd
            if denom > 0.0:
                # Minimizer of the 1-D quadratic through (0, f0), slope gd,
                # and (alpha, f_a); exact for quadratic objectives.
                a_q = -gd * alpha * alpha / (2.0 * denom)
                if 0.0 < a_q <= _QUAD_GROWTH_CAP * alpha and a_q != alpha:
                    f_q = value(x + a_q * d)
                    if (math.isfinite(f_q) and f_q < f_a
                            and f_q <= f0 + _ARMIJO_C1 * a_q * gd):
                        return a_q, f_q
            return alpha, f_a
        alpha *= _CONTRACTION
    return None


def minimize(fg, init, cfg: LbfgsConfig, value=None) -> MinimizeResult:
    """Minimize a smooth function of an ndarray with bounded-iteration L-BFGS.

    fg maps an array to (value, gradient); value, when given, is a
    cheaper value-only evaluation used inside the line search. The
    iterate keeps the shape of init. Deterministic for fixed arguments.
    """
    if value is None:
        def value(z):
            return fg(z)[0]

    x = np.array(init, dtype=float)
    f, g = fg(x)
    f = float(f)
    if not (math.isfinite(f) and np.isfinite(g).all()):
        return MinimizeResult(u=x, fun=f, iters=0, aborted=True)
    best_x, best_f = x.copy(), f
    if float(np.linalg.norm(g)) <= cfg.grad_tol:
        return MinimizeResult(u=best_x, fun=best_f, iters=0)

    hist = deque(maxlen=cfg.memory)
    iters = 0
    aborted = False
    for _ in range(cfg.max_iters):
        d = -_two_loop(g, hist)
        gd = float(np.vdot(g, d))
        if not math.isfinite(gd) or gd >= 0.0:
            # Not a descent direction; fall back to steepest descent.
            d = -g
            gd = -float(np.vdot(g, g))
        step = _line_search(value, x, f, gd, d, cfg.step_size)
        if step is None:
            break
        alpha, _ = step
        x_new = x + alpha * d
        f_new, g_new = fg(x_new)
        f_new = float(f_new)
        iters += 1
        if math.isfinite(f_new) and f_new < best_f:
            best_x, best_f = x_new.copy(), f_new
        if not (math.isfinite(f_new) and np.isfinite(g_new).all()):
            aborted = True
            break
        s = x_new - x
        y = g_new - g
        sy = float(np.vdot(s, y))
        if sy > _CURVATURE_SKIP:
            hist.append((s, y, 1.0 / sy))
        x, f, g = x_new, f_new, g_new
        if float(np.linalg.norm(g)) <= cfg.grad_tol:
            break
    return MinimizeResult(u=best_x, fun=best_f, iters=iters, aborted=aborted)
