from typing import Any, Dict, Literal, Optional, Tuple
import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

NormKind = Literal[
    'raw-adjacency',
    'laplacian',
    'rw-left',
    'rw-right',
    'sym',
    'renorm-left',
    'renorm-right',
    'renorm-sym',
    'sym-laplacian',
    'renorm-sym-laplacian',
    'rw-laplacian',
]

NORM_KINDS: Tuple[str, ...] = NormKind.__args__

SYMMETRIC_KINDS = frozenset({
    'raw-adjacency', 'laplacian', 'sym', 'renorm-sym', 'sym-laplacian', 'renorm-sym-laplacian',
})

LAPLACIAN_KINDS = frozenset({'laplacian', 'sym-laplacian', 'renorm-sym-laplacian', 'rw-laplacian'})

# Adjacency-form kinds whose Laplacian satisfies L = I - M
PAIRED_LAPLACIAN: Dict[str, str] = {
    'sym': 'sym-laplacian',
    'renorm-sym': 'renorm-sym-laplacian',
}

# A real N x F signal on nodes; kept as a plain float64 ndarray
FeatureMatrix = np.ndarray


def freeze_array(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.float64)
    array.flags.writeable = False
    return array


class Graph(BaseModel):
    """Undirected weighted graph with dense 0..n-1 node ids"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int = Field(ge=1)
    edges: Tuple[Tuple[int, int, float], ...]
    degrees: np.ndarray
    adjacency: Any

    @field_validator('adjacency')
    @classmethod
    def _check_sparse(cls, value):
        if not sp.issparse(value):
            raise ValueError('adjacency must be a scipy sparse matrix')
        return value

    @model_validator(mode='after')
    def _check_shapes(self):
        if self.adjacency.shape != (self.n, self.n):
            raise ValueError(f'adjacency shape {self.adjacency.shape} does not match n={self.n}')
        if self.degrees.shape != (self.n,):
            raise ValueError('degrees must be a length-n vector')
        return self

    @property
    def min_degree(self) -> float:
        return float(self.degrees.min())

    def describe(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'edges': len(self.edges),
            'min_degree': self.min_degree,
            'max_degree': float(self.degrees.max()),
        }


class NormalizedMatrix(BaseModel):
    """One of the normalizations/Laplacians of a graph, stored sparse"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: NormKind
    values: Any

    @field_validator('values')
    @classmethod
    def _to_csr(cls, value):
        if sp.issparse(value):
            return sp.csr_matrix(value)
        array = np.asarray(value, dtype=np.float64)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise ValueError('values must be a square matrix')
        return sp.csr_matrix(array)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def is_symmetric_kind(self) -> bool:
        return self.kind in SYMMETRIC_KINDS

    def dense(self) -> np.ndarray:
        return self.values.toarray()


class SpectralBasis(BaseModel):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric graph matrix"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    lambdas: np.ndarray
    U: np.ndarray
    source_kind: NormKind
    truncated: bool = False

    @model_validator(mode='after')
    def _check_shapes(self):
        if self.lambdas.ndim != 1 or self.U.ndim != 2:
            raise ValueError('lambdas must be 1-D and U 2-D')
        if self.U.shape[1] != self.lambdas.shape[0]:
            raise ValueError('U must have one column per eigenvalue')
        if np.any(np.diff(self.lambdas) < 0):
            raise ValueError('lambdas must be sorted ascending')
        return self

    @classmethod
    def build(cls, lambdas: np.ndarray, U: np.ndarray, source_kind: str,
              truncated: bool = False) -> 'SpectralBasis':
        return cls(lambdas=freeze_array(lambdas), U=freeze_array(U), source_kind=source_kind, truncated=truncated)

    @property
    def n(self) -> int:
        return self.U.shape[0]


class EquivalenceReport(BaseModel):
    """Spatial vs spectral discrepancy for one operator on one graph"""

    model_config = ConfigDict(frozen=True)

    name: str
    max_err: float
    mean_err: float
    passed: bool = Field(serialization_alias='pass')
    tol: float
    n: int
    bipartite: Optional[bool] = None

    def to_json_dict(self) -> Dict[str, Any]:
        return self.model_dump(by_alias=True)
