"""Dense kernels for assembling and solving the damped normal equations.

Matrices are 2-D float64 numpy arrays in row-major layout, vectors are 1-D.
The solver factors the system instead of inverting it; a loss of positive
definiteness is surfaced as :class:`FactorizationError` so the training loop
can respond by raising its damping factor.
"""

from __future__ import annotations

import numpy as np

# Relative tolerance for the symmetry check in solve_spd.
SYMMETRY_RTOL = 1e-9


class FactorizationError(ArithmeticError):
    """Symmetric factorization hit a non-positive pivot."""


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product a @ b with explicit dimension checking."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"matmul expects 2-D operands, got {a.ndim}-D and {b.ndim}-D")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"incompatible shapes for matmul: {a.shape} x {b.shape}")
    return a @ b


def matvec(a: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix-vector product a @ v with explicit dimension checking."""
    a = np.asarray(a, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if a.ndim != 2 or v.ndim != 1:
        raise ValueError(f"matvec expects a 2-D matrix and 1-D vector, got {a.ndim}-D and {v.ndim}-D")
    if a.shape[1] != v.shape[0]:
        raise ValueError(f"incompatible shapes for matvec: {a.shape} x ({v.shape[0]},)")
    return a @ v


def _solve_lower(lower: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Forward substitution for a lower-triangular system."""
    n = b.shape[0]
    y = np.empty(n, dtype=np.float64)
    for i in range(n):
        y[i] = (b[i] - lower[i, :i] @ y[:i]) / lower[i, i]
    return y


def _solve_upper(upper: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Back substitution for an upper-triangular system."""
    n = b.shape[0]
    x = np.empty(n, dtype=np.float64)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - upper[i, i + 1:] @ x[i + 1:]) / upper[i, i]
    return x


def solve_spd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a @ x = b for symmetric positive definite a.

    Uses a Cholesky factorization followed by two triangular substitutions;
    the matrix is never inverted explicitly.

    Raises
    ------
    ValueError
        If ``a`` is not square, not symmetric to ``SYMMETRY_RTOL`` relative
        tolerance, contains non-finite entries, or does not match ``b``.
    FactorizationError
        If ``a`` is not positive definite.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if b.ndim != 1 or b.shape[0] != a.shape[0]:
        raise ValueError(f"right-hand side shape {b.shape} does not match matrix shape {a.shape}")
    if not np.isfinite(a).all() or not np.isfinite(b).all():
        raise ValueError("solve_spd requires finite entries")
    scale = max(1.0, float(np.abs(a).max()))
    if float(np.abs(a - a.T).max()) > SYMMETRY_RTOL * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    try:
        lower = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError("matrix is not positive definite") from exc
    y = _solve_lower(lower, b)
    return _solve_upper(lower.T, y)
