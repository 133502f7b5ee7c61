from typing import Any, Dict, Literal, Tuple

import numpy as np
import numpy.polynomial.polynomial as npoly
from pydantic import BaseModel, ConfigDict, Field, model_validator

from schemas.graph import NormKind
from utils.polynomials import degree

Family = Literal['linear', 'polynomial', 'rational']


class OperatorSpec(BaseModel):
    """A named filter Z = P(M) Q(M)^-1 X over one normalization M of the graph.

    Coefficients are indexed by power of the matrix argument M (the normalized
    adjacency). For the adjacency kinds paired with a Laplacian (M = I - L) the
    induced frequency response is g(lambda) = P(1 - lambda) / Q(1 - lambda).
    """

    model_config = ConfigDict(frozen=True)

    name: str
    norm_kind: NormKind
    p_coeffs: Tuple[float, ...]
    q_coeffs: Tuple[float, ...] = (1.0,)
    family: Family
    params: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode='after')
    def _check_family(self):
        if not self.p_coeffs or not self.q_coeffs:
            raise ValueError('coefficient lists must be non-empty')
        if not (np.all(np.isfinite(self.p_coeffs)) and np.all(np.isfinite(self.q_coeffs))):
            raise ValueError('coefficients must be finite')
        if self.family in ('linear', 'polynomial') and self.q_coeffs != (1.0,):
            raise ValueError(f'{self.family} operators have Q = 1')
        if self.family == 'linear' and degree(self.p_coeffs) > 1:
            raise ValueError('linear operators have degree(P) <= 1')
        if self.family == 'rational' and self.q_coeffs[0] != 1.0:
            raise ValueError('rational operators are normalized to q_0 = 1')
        return self

    @property
    def degrees(self) -> Tuple[int, int]:
        return degree(self.p_coeffs), degree(self.q_coeffs)

    def argument_response(self, mu) -> np.ndarray:
        """P(mu) / Q(mu) for eigenvalues mu of the matrix argument"""
        mu = np.asarray(mu, dtype=np.float64)
        numerator = npoly.polyval(mu, self.p_coeffs)
        if self.q_coeffs == (1.0,):
            return numerator
        with np.errstate(divide='ignore', invalid='ignore'):
            return numerator / npoly.polyval(mu, self.q_coeffs)

    def response(self, lambdas) -> np.ndarray:
        """Frequency response over paired-Laplacian eigenvalues"""
        return self.argument_response(1.0 - np.asarray(lambdas, dtype=np.float64))

    def catalog_row(self, max_terms: int = 8) -> Dict[str, str]:
        def fmt(coeffs):
            shown = ','.join(f'{c:.6g}' for c in coeffs[:max_terms])
            return shown if len(coeffs) <= max_terms else f'{shown},...({len(coeffs)} terms)'

        return {
            'name': self.name,
            'family': self.family,
            'norm_kind': self.norm_kind,
            'p_coeffs': fmt(self.p_coeffs),
            'q_coeffs': fmt(self.q_coeffs),
        }
