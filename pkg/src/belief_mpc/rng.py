"""Seeded random-stream management.

Every random draw in the library comes from a counter-based Philox
generator keyed by a tuple of integers, typically (seed, stream tag) or
(seed, tag, substream). Streams with distinct keys are statistically
independent, so all controllers evaluated within one trial can replay the
same noise streams while the planner's random initializations consume a
separate stream without disturbing them.
"""

import hashlib

import numpy as np

from .linalg import NumericsError

# Stream tags; the values are part of the reproducibility contract.
INIT_STATE = 0
PROCESS = 1
MEASUREMENT = 2
PLANNER_INIT = 3
SYSTEM_GEN = 4


def stream(*key: int) -> np.random.Generator:
    """Deterministic generator for a tuple of non-negative integers."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def experiment_key(name: str) -> int:
    """Stable 64-bit key for an experiment name (independent of PYTHONHASHSEED)."""
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_seed(*key: int) -> int:
    """Collapse a tuple of integers into a single well-mixed 64-bit seed."""
    return int(np.random.SeedSequence(key).generate_state(1, np.uint64)[0])


def covariance_factor(cov, tol=1e-10):
    """Left factor F with F F^T = cov, for Gaussian sampling.

    Cholesky when the covariance is PD. A PSD-but-singular covariance
    falls back to an eigendecomposition with negative eigenvalues clamped
    to zero provided none lies below -tol; anything worse is rejected.
    """
    cov = np.asarray(cov, dtype=float)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        evals, evecs = np.linalg.eigh(cov)
        if evals[0] < -tol:
            raise NumericsError(
                f"covariance is not PSD within tolerance (min eigenvalue {evals[0]:.3e})"
            ) from None
        return evecs * np.sqrt(np.clip(evals, 0.0, None))
