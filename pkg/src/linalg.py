"""
Dense Linear Algebra Kernel
===========================

Small wrappers around numpy/scipy used by the reservoir, readout and pruning
modules: validated dense matrices, matrix-vector products, ridge-regularized
least squares and spectral-radius estimation.

Matrices are plain float64 numpy arrays. Reservoirs stay below ~1000 nodes,
so everything is kept dense.
"""

import logging
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

logger = logging.getLogger(__name__)

# Pivot ratio below which an unregularized normal matrix is treated as singular
SINGULAR_PIVOT_RATIO = 1e-7


class IllConditionedError(np.linalg.LinAlgError):
    """Raised when the ridge normal matrix cannot be factorized"""


class SpectralRadiusError(np.linalg.LinAlgError):
    """Raised when the eigenvalue solver does not converge"""

    def __init__(self, message: str, estimate: Optional[float] = None):
        super().__init__(message)
        self.estimate = estimate


def as_matrix(entries, name: str = "matrix") -> np.ndarray:
    """
    Convert entries to a finite 2-D float64 array

    Args:
        entries: Nested rows or an array
        name: Label used in error messages

    Returns:
        np.ndarray: Validated matrix (a new array)
    """
    m = np.array(entries, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return m


def as_vector(entries, name: str = "vector") -> np.ndarray:
    """Convert entries to a finite 1-D float64 array"""
    v = np.array(entries, dtype=np.float64)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return v


def frozen(array: np.ndarray) -> np.ndarray:
    """Return a read-only copy of array"""
    out = np.array(array, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


def matvec(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """
    Matrix-vector product with an explicit dimension check

    Args:
        m: Matrix of shape (rows, cols)
        v: Vector of length cols

    Returns:
        np.ndarray: Vector of length rows
    """
    if m.ndim != 2 or v.ndim != 1:
        raise ValueError(f"matvec expects a matrix and a vector, got {m.shape} and {v.shape}")
    if m.shape[1] != v.shape[0]:
        raise ValueError(f"Dimension mismatch: matrix has {m.shape[1]} columns, vector has {v.shape[0]} entries")
    return m @ v


def ridge_solve(design: np.ndarray, targets: np.ndarray, lam: float) -> np.ndarray:
    """
    Solve (D^T D + lam I) B = D^T Y by Cholesky factorization

    The normal equations square the condition number of the design; with the
    small reservoirs used here that is acceptable, and lam > 0 keeps the
    system positive definite.

    Args:
        design: Design matrix D of shape (rows, features)
        targets: Target matrix Y of shape (rows, outputs)
        lam: Non-negative ridge penalty

    Returns:
        np.ndarray: Coefficients B of shape (features, outputs)
    """
    if design.ndim != 2 or targets.ndim != 2:
        raise ValueError("design and targets must be 2-D")
    if design.shape[0] != targets.shape[0]:
        raise ValueError(f"Row mismatch: design has {design.shape[0]} rows, targets have {targets.shape[0]}")
    if design.shape[0] < 1:
        raise ValueError("ridge_solve needs at least one row")
    if lam < 0 or not np.isfinite(lam):
        raise ValueError(f"Ridge penalty must be a non-negative real, got {lam}")

    gram = design.T @ design
    if lam > 0:
        gram[np.diag_indices_from(gram)] += lam
    rhs = design.T @ targets

    try:
        factor = cho_factor(gram, lower=True, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise IllConditionedError(
            f"Normal matrix is ill-conditioned (lambda={lam}); retry with lambda > 0"
        ) from e

    if lam == 0:
        pivots = np.abs(np.diag(factor[0]))
        if pivots.min() <= SINGULAR_PIVOT_RATIO * pivots.max():
            raise IllConditionedError("Normal matrix is ill-conditioned at lambda=0; retry with lambda > 0")

    return cho_solve(factor, rhs, check_finite=False)


def power_growth_radius(m: np.ndarray, iterations: int = 500, seed: int = 0) -> float:
    """
    Estimate the spectral radius from the growth rate of ||m^k x||

    Works for complex-conjugate dominant pairs, where the plain power
    method oscillates instead of converging.
    """
    n = m.shape[0]
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    log_growth = 0.0
    for k in range(1, iterations + 1):
        x = m @ x
        norm = np.linalg.norm(x)
        if norm == 0.0:
            return 0.0
        log_growth += np.log(norm)
        x /= norm
    return float(np.exp(log_growth / iterations))


def spectral_radius(m: np.ndarray) -> float:
    """
    Largest absolute eigenvalue of a square matrix

    Uses LAPACK's Hessenberg-QR eigenvalue routine. If it fails to converge,
    a SpectralRadiusError carrying a power-growth estimate is raised.

    Args:
        m: Square matrix

    Returns:
        float: max |lambda| over the eigenvalues of m
    """
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"spectral_radius needs a square matrix, got shape {m.shape}")
    if m.shape[0] == 0:
        return 0.0

    try:
        eigenvalues = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as e:
        estimate = power_growth_radius(m)
        logger.error(f"Eigenvalue iteration did not converge; best estimate {estimate:.6g}")
        raise SpectralRadiusError(
            f"Eigenvalue iteration did not converge (best estimate {estimate:.6g})", estimate=estimate
        ) from e

    return float(np.max(np.abs(eigenvalues)))
