"""Low-pass profiling, energy measures and over-smoothing trajectories."""

from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.spatial.distance import pdist

from config import Config
from schemas.diagnostics import SmoothingRecord, SmoothingTrajectory
from schemas.graph import FeatureMatrix, Graph, LAPLACIAN_KINDS, NormalizedMatrix
from schemas.operator import OperatorSpec
from services.graph_service import RENORM_KINDS, as_feature_matrix, normalize
from services.operator_zoo import apply_spatial
from utils.errors import (
    DegenerateInputError,
    KindMismatchError,
    NumericError,
    ParameterError,
    SolverError,
)
from utils.io import rows_to_csv
from utils.logger import logger

TRAJECTORY_HEADER = ['k', 'max_row_dist', 'dirichlet', 'stationary_dist']


def lowpass_profile(lambdas, bias: float) -> np.ndarray:
    """w_i = |bias - lambda_i| / sum_j |bias - lambda_j|"""
    lambdas = np.asarray(lambdas, dtype=np.float64).ravel()
    gaps = np.abs(float(bias) - lambdas)
    total = gaps.sum()
    if total <= 0:
        raise DegenerateInputError(f"every eigenvalue equals the bias {bias}; profile undefined")
    return gaps / total


def dirichlet_energy(L: NormalizedMatrix, Z: FeatureMatrix) -> float:
    """Tr(Z^T L Z)"""
    if L.kind not in LAPLACIAN_KINDS:
        raise KindMismatchError(f"dirichlet energy needs a Laplacian kind, got '{L.kind}'")
    Z = as_feature_matrix(Z, L.n)
    return float(np.sum(Z * (L.values @ Z)))


def rayleigh_quotient(L: NormalizedMatrix, Z: FeatureMatrix) -> float:
    Z = as_feature_matrix(Z, L.n)
    norm = float(np.sum(Z * Z))
    if norm == 0:
        raise DegenerateInputError("Rayleigh quotient of a zero signal")
    return dirichlet_energy(L, Z) / norm


def _degree_profile(g: Graph, kind: str) -> np.ndarray:
    degrees = np.asarray(g.degrees, dtype=np.float64)
    return degrees + 1.0 if kind in RENORM_KINDS else degrees


def stationary_row(g: Graph, X: FeatureMatrix, kind: str = 'rw-left') -> np.ndarray:
    """pi^T X with pi_i = d_i / sum(d), the limit row of random-walk powers (d~ for renorm kinds)"""
    X = as_feature_matrix(X, g.n)
    d = _degree_profile(g, kind)
    total = d.sum()
    if total <= 0:
        raise DegenerateInputError("graph has no edges; stationary distribution undefined")
    return (d / total) @ X


def nonconstant_energy(g: Graph, Z: FeatureMatrix, kind: str = 'renorm-sym') -> float:
    """Squared norm of Z outside the null direction D^1/2 1 of the symmetric Laplacian"""
    Z = as_feature_matrix(Z, g.n)
    u0 = np.sqrt(_degree_profile(g, kind))
    norm = np.linalg.norm(u0)
    if norm == 0:
        raise DegenerateInputError("graph has no edges; null direction undefined")
    u0 = u0 / norm
    residual = Z - np.outer(u0, u0 @ Z)
    return float(np.sum(residual * residual))


def _energy_kind(spec: OperatorSpec) -> str:
    return 'renorm-sym-laplacian' if spec.norm_kind in RENORM_KINDS else 'sym-laplacian'


def smoothing_trajectory(spec: OperatorSpec, g: Graph, X: FeatureMatrix, steps: int,
                         policy: Optional[str] = None) -> SmoothingTrajectory:
    """Apply spec repeatedly, recording row spread, Dirichlet energy and distance to the stationary row"""
    if steps < 1:
        raise ParameterError(f"steps must be >= 1, got {steps}")
    X = as_feature_matrix(X, g.n)
    scale = float(np.abs(X).max()) or 1.0
    L = normalize(g, _energy_kind(spec), policy='zero-row' if policy is None else policy)
    target = stationary_row(g, X, spec.norm_kind)

    records = []
    Z = X
    for k in range(1, steps + 1):
        Z = apply_spatial(spec, g, Z, policy=policy)
        if not np.all(np.isfinite(Z)):
            raise NumericError(f"{spec.name}: non-finite values at step {k}", at=float(k))

        spread = float(pdist(Z).max()) / scale if g.n > 1 else 0.0
        energy = dirichlet_energy(L, Z)
        stationary = float(np.abs(Z - target[None, :]).max()) / scale
        if not np.isfinite(energy):
            raise NumericError(f"{spec.name}: energy overflow at step {k}", at=float(k))
        records.append(SmoothingRecord(k=k, max_row_dist=spread, dirichlet=energy, stationary_dist=stationary))

    trajectory = SmoothingTrajectory(operator=spec.name, records=records)
    logger.info(f"Smoothing trajectory {spec.name}: {steps} steps, final row spread "
                f"{trajectory.final.max_row_dist:.3e}")
    return trajectory


def trajectory_to_csv(trajectory: SmoothingTrajectory) -> str:
    return rows_to_csv(TRAJECTORY_HEADER, trajectory.as_rows())


def analytic_label_prop(L: NormalizedMatrix, Y: FeatureMatrix, alpha: float) -> np.ndarray:
    """Solve (I + alpha L) Z = Y with a sparse LU factorization"""
    if L.kind not in LAPLACIAN_KINDS:
        raise KindMismatchError(f"label propagation needs a Laplacian kind, got '{L.kind}'")
    alpha = float(alpha)
    if not (np.isfinite(alpha) and alpha > 0):
        raise ParameterError(f"alpha must be > 0, got {alpha}")
    Y = as_feature_matrix(Y, L.n)

    system = sp.csc_matrix(sp.identity(L.n, format='csc') + alpha * L.values)
    try:
        Z = spla.splu(system).solve(Y)
    except RuntimeError as e:
        raise SolverError(f"label propagation system is singular: {e}")

    residual = float(np.abs(system @ Z - Y).max())
    if residual > Config.SOLVER_RESIDUAL * (1.0 + float(np.abs(Y).max())):
        raise SolverError(f"label propagation residual {residual:.3e} above tolerance")
    return Z
