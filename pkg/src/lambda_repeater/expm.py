"""Dense complex matrix exponential by scaling and squaring.

The effective Hamiltonians here are complex-symmetric rather than Hermitian
and can be defective, so eigendecomposition is avoided.  ``exp(A)`` is formed
as ``(exp(A / 2**s))**(2**s)`` with a Taylor core evaluated on the scaled
matrix, whose 1-norm is kept at or below ``0.5``.
"""
from __future__ import annotations

import numpy as np

from .errors import ConvergenceFailure

MAX_DIM = 243
_THETA = 0.5
_MAX_TERMS = 60
_TOL = 2.0 ** -54


def matrix_exponential(m, scale: complex = 1.0) -> np.ndarray:
    """Return ``exp(scale * m)``.

    Parameters
    ----------
    m : array_like
        Square complex matrix, dimension at most 243.
    scale : complex
        Scalar multiplier, e.g. ``-1j * T`` for a propagator.

    Raises
    ------
    ConvergenceFailure
        If the Taylor core has not converged after ``_MAX_TERMS`` terms.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix_exponential expects a square matrix")
    if a.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {a.shape[0]} exceeds {MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    a = complex(scale) * a
    n = a.shape[0]
    eye = np.eye(n, dtype=complex)

    norm = np.linalg.norm(a, 1)
    if norm == 0.0:
        return eye
    s = max(0, int(np.ceil(np.log2(norm / _THETA))))
    a = a / 2.0 ** s

    result = eye.copy()
    term = eye.copy()
    for k in range(1, _MAX_TERMS + 1):
        term = term @ a / k
        result += term
        if np.linalg.norm(term, 1) <= _TOL * np.linalg.norm(result, 1):
            break
    else:
        raise ConvergenceFailure(f"Taylor series not converged after {_MAX_TERMS} terms")

    for _ in range(s):
        result = result @ result
    return result
