from typing import Any, List, Literal, Optional, Tuple

import numpy as np
import numpy.polynomial.polynomial as npoly
from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import Config

TargetKind = Literal[
    'sign-step', 'abs-kink', 'sqrt-kink', 'rational-bump', 'clipped-sine', 'smooth-exp', 'tabulated',
]

DEFAULT_DOMAINS = {
    'sign-step': (-1.0, 1.0),
    'smooth-exp': (-1.0, 1.0),
}

FitMethod = Literal['poly', 'chebyshev', 'rational']


class TargetResponse(BaseModel):
    """A scalar function to approximate on a uniform grid over [lo, hi]"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: TargetKind
    domain: Tuple[float, float] = (0.0, 1.0)
    samples: int = Field(default=Config.GRID_SIZE, ge=2)
    exclusion: float = Field(default=Config.EXCLUSION_WINDOW, ge=0.0)
    values: Optional[np.ndarray] = None
    xs: Optional[np.ndarray] = None

    @model_validator(mode='after')
    def _check(self):
        lo, hi = self.domain
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ValueError(f'domain must satisfy lo < hi, got {self.domain}')
        if self.kind == 'tabulated':
            if self.values is None:
                raise ValueError('tabulated targets need values')
            if not np.all(np.isfinite(self.values)):
                raise ValueError('tabulated values must be finite')
            expected = self.samples if self.xs is None else self.xs.shape[0]
            if self.values.shape != (expected,):
                raise ValueError(f'tabulated values must have shape ({expected},)')
            if self.xs is not None and np.any(np.diff(self.xs) <= 0):
                raise ValueError('tabulated xs must be strictly increasing')
        return self

    def grid(self, samples: Optional[int] = None) -> np.ndarray:
        lo, hi = self.domain
        return np.linspace(lo, hi, samples or self.samples)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.kind == 'sign-step':
            return np.sign(x)
        if self.kind == 'abs-kink':
            return np.abs(x - 0.5)
        if self.kind == 'sqrt-kink':
            return np.sqrt(np.abs(x - 0.5))
        if self.kind == 'rational-bump':
            return x / (10.0 * np.abs(x - 0.5) + 1.0)
        if self.kind == 'clipped-sine':
            return np.maximum(0.5, np.sin(x + x ** 2)) - x / 20.0
        if self.kind == 'smooth-exp':
            return np.exp(x)
        xs = self.grid() if self.xs is None else self.xs
        return np.interp(x, xs, self.values)

    def window_mask(self, x) -> np.ndarray:
        """Points kept for fitting and windowed errors (the jump of sign-step is cut out)"""
        x = np.asarray(x, dtype=np.float64)
        if self.kind == 'sign-step' and self.exclusion > 0:
            return np.abs(x) > self.exclusion
        return np.ones(x.shape, dtype=bool)


class FitResult(BaseModel):
    """Monomial-form approximant P(x) / Q(x) with q_0 = 1"""

    model_config = ConfigDict(frozen=True)

    method: FitMethod
    numerator: Tuple[float, ...]
    denominator: Tuple[float, ...] = (1.0,)
    max_error: float = Field(ge=0.0)
    max_error_windowed: float = Field(ge=0.0)
    iterations: int = Field(default=0, ge=0)
    domain: Tuple[float, float]

    @property
    def degrees(self) -> Tuple[int, int]:
        return len(self.numerator) - 1, len(self.denominator) - 1

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return npoly.polyval(x, self.numerator) / npoly.polyval(x, self.denominator)


class CurveRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    K: int
    poly_error: float
    rational_error: float
    note: str = ''


class ConvergenceCurve(BaseModel):
    """Best sup error within each budget, with fitted decay slopes"""

    model_config = ConfigDict(frozen=True)

    target: str
    rows: List[CurveRow]
    poly_slope: Optional[float] = None
    rational_slope: Optional[float] = None

    def summary(self) -> dict[str, Any]:
        return {
            'target': self.target,
            'budgets': [row.K for row in self.rows],
            'poly_slope_loglog': self.poly_slope,
            'rational_slope_sqrt': self.rational_slope,
        }
