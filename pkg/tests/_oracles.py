"""Independent reference implementations used to check the library.

Everything here is written the straightforward textbook way (explicit
inverses, dense batch matrices, brute-force loops) and deliberately
shares no code path with the package under test.
"""

import numpy as np


def textbook_filter_step(sys, mean, cov, u, y):
    """One predict/update filter step in the standard filtered-gain form."""
    C = sys.Cs[0].copy()
    for k in range(sys.p):
        C += u[k] * sys.Cs[k + 1]
    S = C @ cov @ C.T + sys.Sigma_z
    K = cov @ C.T @ np.linalg.inv(S)
    mean_f = mean + K @ (y - C @ mean)
    cov_f = (np.eye(len(mean)) - K @ C) @ cov
    mean_next = sys.A @ mean_f + sys.B @ u
    cov_next = sys.A @ cov_f @ sys.A.T + sys.Sigma_w
    return mean_next, cov_next


def central_difference(f, u, step=1e-5):
    """Central finite-difference gradient of f at u (any array shape)."""
    u = np.asarray(u, dtype=float)
    g = np.empty_like(u)
    for idx in np.ndindex(*u.shape):
        up, dn = u.copy(), u.copy()
        up[idx] += step
        dn[idx] -= step
        g[idx] = (f(up) - f(dn)) / (2.0 * step)
    return g


def gradient_close(exact, approx, rel_tol=1e-4, abs_floor=1e-7):
    """Per-coordinate relative comparison with an absolute floor."""
    exact = np.asarray(exact)
    approx = np.asarray(approx)
    denom = np.maximum(np.abs(approx), abs_floor)
    return float(np.max(np.abs(exact - approx) / denom)) <= rel_tol


def gelfand_radius(A, squarings=50):
    """Spectral radius via Gelfand's formula ||A^k||^(1/k) with k = 2^50.

    Repeated squaring with renormalization; unlike plain power iteration
    this also converges when the dominant eigenvalues are a complex pair.
    """
    M = np.asarray(A, dtype=float)
    norm = np.linalg.norm(M)
    if norm == 0.0:
        return 0.0
    M = M / norm
    log_norm = np.log(norm)  # log ||A^k|| for the current k
    k = 1
    for _ in range(squarings):
        M = M @ M
        k *= 2
        norm = np.linalg.norm(M)
        if norm == 0.0:
            return 0.0  # nilpotent
        log_norm = 2.0 * log_norm + np.log(norm)
        M = M / norm
    return float(np.exp(log_norm / k))


def batch_lq_terms(sys, H):
    """Dense batch form of the mean-only objective.

    Stacking u = (u_0, ..., u_{H-1}), the certainty-equivalent objective
    is J(u) = u' Hhat u + 2 ghat(x0)' u + const, so its gradient is
    2 (Hhat u + ghat). Returns (Hhat, G) with ghat = G x0.
    """
    n, p = sys.n, sys.p
    # F[t] maps stacked u to x_t; x_t = A^t x0 + sum_j A^{t-1-j} B u_j.
    powers = [np.eye(n)]
    for _ in range(H):
        powers.append(sys.A @ powers[-1])
    F = np.zeros((H + 1, n, H * p))
    for t in range(1, H + 1):
        for j in range(t):
            F[t][:, j * p:(j + 1) * p] = powers[t - 1 - j] @ sys.B
    Hhat = np.zeros((H * p, H * p))
    G = np.zeros((H * p, n))
    for t in range(1, H + 1):
        Qt = sys.QT if t == H else sys.Q
        Hhat += F[t].T @ Qt @ F[t]
        G += F[t].T @ Qt @ powers[t]
    for j in range(H):
        Hhat[j * p:(j + 1) * p, j * p:(j + 1) * p] += sys.R
    return Hhat, G


def batch_lq_gradient(sys, x0, u_seq):
    """Gradient of the mean-only objective from the dense batch matrices."""
    H = u_seq.shape[0]
    Hhat, G = batch_lq_terms(sys, H)
    u = u_seq.reshape(-1)
    return (2.0 * (Hhat @ u + G @ x0)).reshape(H, sys.p)


def lyapunov_covariances(sys, cov0, steps):
    """Open-loop covariance recursion cov' = A cov A' + Sigma_w."""
    covs = [np.asarray(cov0, dtype=float)]
    for _ in range(steps):
        covs.append(sys.A @ covs[-1] @ sys.A.T + sys.Sigma_w)
    return covs


def spearman_rho(xs, ys):
    """Spearman rank correlation without external stats helpers."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    rx = np.argsort(np.argsort(xs)).astype(float)
    ry = np.argsort(np.argsort(ys)).astype(float)
    rx -= rx.mean()
    ry -= ry.mean()
    return float((rx @ ry) / np.sqrt((rx @ rx) * (ry @ ry)))
