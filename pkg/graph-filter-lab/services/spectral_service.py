"""Symmetric eigendecomposition, graph Fourier transform and spectral filtering."""

from typing import Callable, Optional

import numpy as np
import scipy.linalg

from config import Config
from schemas.graph import Graph, NormalizedMatrix, SpectralBasis
from services.graph_service import as_feature_matrix, graph_hash, normalize
from utils.basis_cache import BasisCache
from utils.errors import DimensionMismatchError, NumericError, ResourceLimitError, UnsupportedKindError
from utils.logger import logger

ORTHONORMALITY_GATE = 1e-8
RECONSTRUCTION_GATE = 1e-7

_default_cache: Optional[BasisCache] = None


def default_cache() -> BasisCache:
    global _default_cache
    if _default_cache is None:
        _default_cache = BasisCache()
    return _default_cache


def _dense_symmetric(M: NormalizedMatrix, cap: Optional[int]) -> np.ndarray:
    if not M.is_symmetric_kind:
        raise UnsupportedKindError(f"kind '{M.kind}' is not symmetric; cannot eigendecompose")
    cap = cap or Config.SPECTRAL_CAP
    if M.n > cap:
        raise ResourceLimitError(f"n={M.n} exceeds the spectral cap {cap}")
    dense = M.dense()
    return (dense + dense.T) * 0.5


def _fix_signs(U: np.ndarray) -> np.ndarray:
    # Largest-magnitude entry of every eigenvector is positive
    rows = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[rows, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def eigendecompose(M: NormalizedMatrix, cap: Optional[int] = None,
                   components: Optional[int] = None) -> SpectralBasis:
    """Dense symmetric eigendecomposition M = U diag(lambdas) U^T.

    `components` keeps only the lowest-frequency l eigenpairs.
    """
    dense = _dense_symmetric(M, cap)
    n = dense.shape[0]

    if components is not None and not 1 <= components <= n:
        raise DimensionMismatchError(f"components must lie in [1, {n}], got {components}")

    if components is None or components == n:
        lambdas, U = scipy.linalg.eigh(dense)
        truncated = False
    else:
        lambdas, U = scipy.linalg.eigh(dense, subset_by_index=[0, components - 1])
        truncated = True

    U = _fix_signs(U)

    orthonormality = np.abs(U.T @ U - np.eye(U.shape[1])).max()
    if orthonormality > ORTHONORMALITY_GATE:
        raise NumericError(f"eigenvectors not orthonormal (residual {orthonormality:.3e})")
    if not truncated:
        reconstruction = np.abs(dense - (U * lambdas) @ U.T).max()
        if reconstruction > RECONSTRUCTION_GATE * (1.0 + np.abs(dense).max()):
            raise NumericError(f"eigendecomposition reconstruction residual {reconstruction:.3e}")

    logger.debug(f"Eigendecomposed {M.kind} (n={n}, components={U.shape[1]})")
    return SpectralBasis.build(lambdas, U, M.kind, truncated=truncated)


def get_basis(g: Graph, kind: str, cache: Optional[BasisCache] = None,
              cap: Optional[int] = None) -> SpectralBasis:
    """Eigendecompose a normalization of g, reusing a cached basis when present"""
    cache = cache or default_cache()
    key = graph_hash(g)
    basis = cache.get(key, kind)
    if basis is None:
        basis = eigendecompose(normalize(g, kind), cap=cap)
        cache.put(key, kind, basis)
    return basis


def largest_eigenvalue(M: NormalizedMatrix, cap: Optional[int] = None) -> float:
    dense = _dense_symmetric(M, cap)
    n = dense.shape[0]
    return float(scipy.linalg.eigh(dense, eigvals_only=True, subset_by_index=[n - 1, n - 1])[0])


def is_bipartite(g: Graph, cap: Optional[int] = None) -> bool:
    """True when the symmetric normalized adjacency has an eigenvalue at -1"""
    if not g.edges:
        return False
    M = normalize(g, 'sym', policy='zero-row')
    dense = _dense_symmetric(M, cap)
    smallest = scipy.linalg.eigh(dense, eigvals_only=True, subset_by_index=[0, 0])[0]
    return bool(abs(smallest) >= 1.0 - 1e-9)


def gft(basis: SpectralBasis, X) -> np.ndarray:
    """Graph Fourier transform X_hat = U^T X"""
    X = as_feature_matrix(X, basis.n)
    return basis.U.T @ X


def inverse_gft(basis: SpectralBasis, Xhat) -> np.ndarray:
    """Inverse transform X = U X_hat"""
    Xhat = as_feature_matrix(Xhat, basis.U.shape[1])
    return basis.U @ Xhat


def response_values(basis: SpectralBasis, g: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    values = np.broadcast_to(np.asarray(g(basis.lambdas), dtype=np.float64), basis.lambdas.shape)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        lam = float(basis.lambdas[bad[0]])
        raise NumericError(f"frequency response is not finite at lambda={lam:.6g}", at=lam)
    return values


def apply_response(basis: SpectralBasis, g: Callable[[np.ndarray], np.ndarray], X) -> np.ndarray:
    """Z = U diag(g(lambdas)) U^T X"""
    values = response_values(basis, g)
    return basis.U @ (values[:, None] * gft(basis, X))
