"""Dense helpers for the small symmetric matrices used throughout.

Everything operates on matrices of side <= a few dozen, so numerical
safety wins over asymptotic cleverness: definite systems are always
solved through a Cholesky factor, never a general inverse.
"""

import numpy as np
from scipy.linalg import cho_factor, cho_solve


class NumericsError(RuntimeError):
    """A matrix that must be (semi)definite failed its factorization."""


def sym(M):
    """Symmetric part (M + M.T) / 2."""
    return 0.5 * (M + M.T)


class SpdFactor:
    """Factorization of a symmetric positive (semi)definite matrix.

    Uses a Cholesky factor when the matrix is numerically PD. If that
    fails, falls back to an eigendecomposition whose negative eigenvalues
    are clamped to zero, giving a pseudo-solve; eigenvalues below -tol
    mean the matrix is genuinely indefinite and raise NumericsError.
    """

    __slots__ = ("_cho", "_inv_evals", "_evecs")

    def __init__(self, S, tol=1e-10):
        try:
            self._cho = cho_factor(S, lower=True, check_finite=False)
            self._inv_evals = None
            self._evecs = None
        except np.linalg.LinAlgError:
            self._cho = None
            evals, evecs = np.linalg.eigh(S)
            if evals[0] < -tol:
                raise NumericsError(
                    f"matrix is not PSD within tolerance (min eigenvalue {evals[0]:.3e})"
                ) from None
            clamped = np.clip(evals, 0.0, None)
            inv = np.zeros_like(clamped)
            np.divide(1.0, clamped, out=inv, where=clamped > 0.0)
            self._inv_evals = inv
            self._evecs = evecs

    def solve(self, B):
        """Solve S X = B (pseudo-solve in the clamped fallback)."""
        if self._cho is not None:
            return cho_solve(self._cho, B, check_finite=False)
        return self._evecs @ (self._inv_evals[:, None] * (self._evecs.T @ B))


def solve_spd_strict(S, B, context="matrix"):
    """Solve S X = B for strictly PD S; failure is fatal (no fallback)."""
    try:
        c = cho_factor(S, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        raise NumericsError(f"{context} must be positive definite") from None
    return cho_solve(c, B, check_finite=False)
