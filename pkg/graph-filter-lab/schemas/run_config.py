from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from config import Config
from schemas.graph import NormKind

Command = Literal['list', 'apply', 'verify', 'approx', 'oversmooth', 'bench', 'sample']
Route = Literal['spatial', 'spectral']

TARGET_ALIASES = {
    'sign': 'sign-step',
    'abs': 'abs-kink',
    'sqrt': 'sqrt-kink',
    'bump': 'rational-bump',
    'sine': 'clipped-sine',
    'exp': 'smooth-exp',
}


class RunConfig(BaseModel):
    """Validated arguments of one lab command"""

    model_config = ConfigDict(frozen=True)

    command: Command
    graph: Optional[str] = None
    features: Optional[str] = None
    op: Optional[str] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    norm: Optional[NormKind] = None
    route: Route = 'spatial'
    tol: float = Field(default=Config.DEFAULT_TOL, ge=0.0)
    out: Optional[str] = None
    seed: int = 42

    target: str = 'sign-step'
    poly: Optional[int] = Field(default=None, ge=0)
    rational: Optional[Tuple[int, int]] = None
    budgets: Optional[List[int]] = None
    k: int = Field(default=10, ge=1)

    families: List[str] = Field(default_factory=lambda: ['linear', 'polynomial', 'rational'])
    sizes: List[int] = Field(default_factory=lambda: [500, 1000, 2000])
    order: int = Field(default=3, ge=1)
    reps: int = Field(default=3, ge=3)

    walks: int = Field(default=10, ge=1)
    length: int = Field(default=10, ge=2)
    p: Optional[float] = Field(default=None, gt=0.0)
    q: Optional[float] = Field(default=None, gt=0.0)
    window: Optional[int] = Field(default=None, ge=1)
    plot: Optional[str] = None

    @field_validator('op')
    @classmethod
    def _known_operator(cls, value):
        if value is None:
            return value
        from services.operator_zoo import OperatorZoo

        names = OperatorZoo().names()
        if value not in names:
            raise ValueError(f"unknown operator '{value}'; known: {', '.join(names)}")
        return value

    @field_validator('target')
    @classmethod
    def _canonical_target(cls, value):
        return TARGET_ALIASES.get(value, value)

    @field_validator('rational', mode='before')
    @classmethod
    def _parse_degrees(cls, value):
        if isinstance(value, str):
            parts = [part.strip() for part in value.split(',')]
            if len(parts) != 2:
                raise ValueError("rational degrees must look like 'm,n'")
            return int(parts[0]), int(parts[1])
        return value

    @field_validator('rational')
    @classmethod
    def _non_negative_degrees(cls, value):
        if value is not None and min(value) < 0:
            raise ValueError('rational degrees must be >= 0')
        return value
