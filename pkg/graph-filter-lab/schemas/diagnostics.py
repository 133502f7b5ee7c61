from typing import List

from pydantic import BaseModel, ConfigDict, Field, model_validator


class SmoothingRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int = Field(ge=1)
    max_row_dist: float = Field(ge=0.0)
    dirichlet: float
    stationary_dist: float = Field(ge=0.0)


class SmoothingTrajectory(BaseModel):
    """Per-step over-smoothing metrics of a repeatedly applied operator"""

    model_config = ConfigDict(frozen=True)

    operator: str
    records: List[SmoothingRecord]

    @model_validator(mode='after')
    def _check_steps(self):
        steps = [record.k for record in self.records]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ValueError('step indices must be strictly increasing')
        return self

    @property
    def final(self) -> SmoothingRecord:
        return self.records[-1]

    def as_rows(self):
        return [[r.k, r.max_row_dist, r.dirichlet, r.stationary_dist] for r in self.records]
