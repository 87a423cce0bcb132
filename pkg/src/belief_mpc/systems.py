"""Linear systems with bilinear (input-dependent) observations.

The state evolves linearly, x' = A x + B u + w, but the observation
matrix is affine in the applied input:

    y = C(u) x + z,        C(u) = C_0 + sum_k u_k C_k,

so sensing quality is something the controller chooses, not a given.
Two benchmark generators are provided: a dense random system and a
multi-block double integrator whose position channels are only read out
well when the matching input channel is active.
"""

from dataclasses import dataclass

import numpy as np

from . import rng
from .linalg import NumericsError, sym

_RESAMPLE_LIMIT = 16


def _as_matrix(name, M, shape):
    M = np.asarray(M, dtype=float)
    if M.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {M.shape}")
    return M


def _check_sym(name, M, tol=1e-10):
    if np.max(np.abs(M - M.T)) > tol:
        raise ValueError(f"{name} must be symmetric")


def _check_psd(name, M, tol=1e-9):
    _check_sym(name, M)
    lam_min = np.linalg.eigvalsh(sym(M))[0]
    if lam_min < -tol:
        raise ValueError(f"{name} must be PSD (min eigenvalue {lam_min:.3e})")


def _check_pd(name, M):
    _check_sym(name, M)
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise ValueError(f"{name} must be positive definite") from None


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Parameters of a linear system with an input-dependent observation map.

    Cs holds p + 1 matrices of shape (m, n): the base observation matrix
    followed by one input-coupling matrix per input coordinate.
    Sigma_w / Sigma_z are the process / measurement noise covariances,
    Q / QT / R the stage-state, terminal-state and input cost weights, and
    (x0_mean, Sigma0) the initial belief.
    """

    A: np.ndarray
    B: np.ndarray
    Cs: tuple
    Sigma_w: np.ndarray
    Sigma_z: np.ndarray
    Q: np.ndarray
    QT: np.ndarray
    R: np.ndarray
    x0_mean: np.ndarray
    Sigma0: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        n = A.shape[0]
        B = np.asarray(self.B, dtype=float)
        if B.ndim != 2 or B.shape[0] != n:
            raise ValueError(f"B must have {n} rows, got shape {B.shape}")
        p = B.shape[1]
        Cs = tuple(np.asarray(C, dtype=float) for C in self.Cs)
        if len(Cs) != p + 1:
            raise ValueError(f"Cs must hold p + 1 = {p + 1} matrices, got {len(Cs)}")
        m = Cs[0].shape[0]
        for k, C in enumerate(Cs):
            if C.shape != (m, n):
                raise ValueError(f"Cs[{k}] must have shape {(m, n)}, got {C.shape}")
        Sigma_w = _as_matrix("Sigma_w", self.Sigma_w, (n, n))
        _check_psd("Sigma_w", Sigma_w)
        Sigma_z = _as_matrix("Sigma_z", self.Sigma_z, (m, m))
        _check_pd("Sigma_z", Sigma_z)
        Q = _as_matrix("Q", self.Q, (n, n))
        _check_psd("Q", Q)
        QT = _as_matrix("QT", self.QT, (n, n))
        _check_psd("QT", QT)
        R = _as_matrix("R", self.R, (p, p))
        _check_pd("R", R)
        x0_mean = np.asarray(self.x0_mean, dtype=float)
        if x0_mean.shape != (n,):
            raise ValueError(f"x0_mean must have shape {(n,)}, got {x0_mean.shape}")
        Sigma0 = _as_matrix("Sigma0", self.Sigma0, (n, n))
        _check_psd("Sigma0", Sigma0)

        fixed = dict(A=A, B=B, Cs=Cs, Sigma_w=Sigma_w, Sigma_z=Sigma_z,
                     Q=Q, QT=QT, R=R, x0_mean=x0_mean, Sigma0=Sigma0)
        for name, arr in fixed.items():
            if name == "Cs":
                for C in arr:
                    C.flags.writeable = False
            else:
                arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        # Stacked input-coupling matrices, shape (p, m, n), plus a flattened
        # (p, m*n) view so C(u) is a single matmul in hot loops.
        ck = np.stack(Cs[1:]) if p else np.zeros((0, m, n))
        ck.flags.writeable = False
        object.__setattr__(self, "_ck", ck)
        object.__setattr__(self, "_ck_flat", ck.reshape(p, m * n))

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def p(self):
        return self.B.shape[1]

    @property
    def m(self):
        return self.Cs[0].shape[0]


@dataclass(frozen=True, eq=False)
class NoiseRealization:
    """One trial's worth of exogenous randomness: x0, process and measurement noise."""

    x0: np.ndarray
    ws: np.ndarray
    zs: np.ndarray

    def __post_init__(self):
        if self.ws.shape[0] != self.zs.shape[0]:
            raise ValueError("ws and zs must cover the same number of steps")

    @property
    def steps(self):
        return self.ws.shape[0]


def observation_matrix(sys: SystemModel, u: np.ndarray) -> np.ndarray:
    """C(u) = C_0 + sum_k u_k C_k."""
    u = np.asarray(u, dtype=float)
    if u.shape != (sys.p,):
        raise ValueError(f"u must have shape {(sys.p,)}, got {u.shape}")
    return sys.Cs[0] + (u @ sys._ck_flat).reshape(sys.m, sys.n)


def simulate_step(sys: SystemModel, x, u, w, z):
    """One step of the true system; y is read from the pre-transition state.

    Returns (x_next, y) with x_next = A x + B u + w and y = C(u) x + z.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != (sys.n,) or w.shape != (sys.n,) or z.shape != (sys.m,):
        raise ValueError("state/noise dimensions do not match the system")
    C = observation_matrix(sys, u)
    y = C @ x + z
    x_next = sys.A @ x + sys.B @ u + w
    return x_next, y


def sample_noise(sys: SystemModel, T: int, seed: int) -> NoiseRealization:
    """Draw the full noise realization for a length-T rollout.

    Three independent substreams keyed by (seed, tag) cover the initial
    state, process noise, and measurement noise, so the realization is a
    pure function of the system dimensions, T, and seed.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    f0 = rng.covariance_factor(sys.Sigma0)
    fw = rng.covariance_factor(sys.Sigma_w)
    fz = rng.covariance_factor(sys.Sigma_z)
    x0 = sys.x0_mean + f0 @ rng.stream(seed, rng.INIT_STATE).standard_normal(sys.n)
    ws = rng.stream(seed, rng.PROCESS).standard_normal((T, sys.n)) @ fw.T
    zs = rng.stream(seed, rng.MEASUREMENT).standard_normal((T, sys.m)) @ fz.T
    return NoiseRealization(x0=x0, ws=ws, zs=zs)


def spectral_radius(A) -> float:
    """Largest eigenvalue magnitude."""
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def rescale_spectral_radius(A, rho_target: float) -> np.ndarray:
    """Rescale A so its spectral radius equals rho_target."""
    if rho_target <= 0:
        raise ValueError(f"rho_target must be > 0, got {rho_target}")
    r = spectral_radius(A)
    if r == 0.0:
        raise ValueError("matrix has zero spectral radius and cannot be rescaled")
    return (rho_target / r) * np.asarray(A, dtype=float)


def _check_generator_args(rho_target, c0, r_scale, sigma_w, sigma_z):
    if rho_target <= 0:
        raise ValueError(f"rho_target must be > 0, got {rho_target}")
    if c0 < 0:
        raise ValueError(f"c0 must be >= 0, got {c0}")
    if r_scale <= 0:
        raise ValueError(f"r_scale must be > 0, got {r_scale}")
    if sigma_w < 0 or sigma_z <= 0:
        raise ValueError("sigma_w must be >= 0 and sigma_z must be > 0")


def make_random_system(rho_target, c0, r_scale, sigma_w, sigma_z, seed,
                       n=6, p=3, m=3) -> SystemModel:
    """Sample the dense random benchmark system.

    A has i.i.d. N(0, 1) entries rescaled to spectral radius rho_target,
    B has N(0, 1/n) entries, the base observation matrix N(0, c0^2/m)
    entries, and each input-coupling matrix N(0, 1/m) entries. Noise is
    isotropic (sigma_w^2 I, sigma_z^2 I), state costs are identity,
    R = r_scale * I, and the initial belief is (0, I).

    A draw whose A is nilpotent to machine precision is resampled from
    the next substream.
    """
    _check_generator_args(rho_target, c0, r_scale, sigma_w, sigma_z)
    for attempt in range(_RESAMPLE_LIMIT):
        g = rng.stream(seed, rng.SYSTEM_GEN, attempt)
        A = g.standard_normal((n, n))
        if spectral_radius(A) > 1e-12:
            break
    else:
        raise NumericsError("could not sample a matrix with nonzero spectral radius")
    A = rescale_spectral_radius(A, rho_target)
    B = g.standard_normal((n, p)) / np.sqrt(n)
    C0 = g.standard_normal((m, n)) * (c0 / np.sqrt(m))
    cks = g.standard_normal((p, m, n)) / np.sqrt(m)
    return SystemModel(
        A=A, B=B, Cs=(C0, *cks),
        Sigma_w=sigma_w ** 2 * np.eye(n), Sigma_z=sigma_z ** 2 * np.eye(m),
        Q=np.eye(n), QT=np.eye(n), R=r_scale * np.eye(p),
        x0_mean=np.zeros(n), Sigma0=np.eye(n),
    )


def make_double_integrator(rho, c0, r_scale, sigma_w, sigma_z,
                           c1=3.0, h=0.3) -> SystemModel:
    """Build the three-block double-integrator benchmark (n=6, p=3, m=3).

    Each 2x2 block is a discretized double integrator with its diagonal
    set to rho and coupling step h; input k drives velocity state 2k.
    The base observation matrix reads each block's position weakly (c0)
    while input k amplifies its own block's position readout by c1, so
    actuation and sensing compete through the same channel.
    """
    _check_generator_args(rho, c0, r_scale, sigma_w, sigma_z)
    block_a = np.array([[rho, h], [0.0, rho]])
    block_b = np.array([[0.0], [h]])
    A = np.kron(np.eye(3), block_a)
    B = np.kron(np.eye(3), block_b)
    C0 = np.zeros((3, 6))
    cks = np.zeros((3, 3, 6))
    for k in range(3):
        C0[k, 2 * k] = c0
        cks[k][k, 2 * k] = c1
    return SystemModel(
        A=A, B=B, Cs=(C0, *cks),
        Sigma_w=sigma_w ** 2 * np.eye(6), Sigma_z=sigma_z ** 2 * np.eye(3),
        Q=np.eye(6), QT=np.eye(6), R=r_scale * np.eye(3),
        x0_mean=np.zeros(6), Sigma0=np.eye(6),
    )
