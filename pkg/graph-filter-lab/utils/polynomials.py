from typing import Sequence

import numpy as np
import numpy.polynomial.polynomial as npoly
import scipy.sparse as sp


def trim(coeffs: Sequence[float]) -> np.ndarray:
    """Drop trailing zero coefficients, keeping at least the constant term"""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    nonzero = np.flatnonzero(coeffs != 0.0)
    if nonzero.size == 0:
        return coeffs[:1].copy() if coeffs.size else np.zeros(1)
    return coeffs[:nonzero[-1] + 1].copy()


def degree(coeffs: Sequence[float]) -> int:
    return len(trim(coeffs)) - 1


def horner_apply(M, coeffs: Sequence[float], X: np.ndarray) -> np.ndarray:
    """P(M) X with one sparse product per degree: Z = c_d X; Z = M Z + c_k X"""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    Z = coeffs[-1] * X
    for c in coeffs[-2::-1]:
        Z = M @ Z + c * X
    return np.asarray(Z)


def matrix_polynomial(M, coeffs: Sequence[float]):
    """P(M) as a sparse matrix (Horner on matrices)"""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    identity = sp.identity(M.shape[0], format='csr', dtype=np.float64)
    result = coeffs[-1] * identity
    for c in coeffs[-2::-1]:
        result = M @ result + c * identity
    return sp.csr_matrix(result)


def compose_linear(coeffs: Sequence[float], offset: float, scale: float) -> np.ndarray:
    """Coefficients in t of sum_k c_k (offset + scale t)^k"""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    inner = np.array([offset, scale], dtype=np.float64)
    result = np.array([coeffs[-1]])
    for c in coeffs[-2::-1]:
        result = npoly.polyadd(npoly.polymul(result, inner), [c])
    return result


def chebyshev_t(k: int, x) -> np.ndarray:
    """T_k(x) by the three-term recurrence T_k = 2x T_{k-1} - T_{k-2}"""
    x = np.asarray(x, dtype=np.float64)
    if k < 0:
        raise ValueError('Chebyshev order must be non-negative')
    previous, current = np.ones_like(x), x.copy()
    if k == 0:
        return previous
    for _ in range(k - 1):
        previous, current = current, 2.0 * x * current - previous
    return current
