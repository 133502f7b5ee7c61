from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

BenchFamily = Literal['linear', 'polynomial', 'rational']

BENCH_HEADER = ['family', 'n', 'F', 'K', 'median_seconds', 'reps', 'density']


class BenchRecord(BaseModel):
    """Median wall time of one operator family on one synthetic workload"""

    model_config = ConfigDict(frozen=True)

    family: BenchFamily
    n: int = Field(ge=1)
    F: int = Field(ge=1)
    K: int = Field(ge=1)
    median_seconds: float = Field(gt=0.0)
    reps: int = Field(ge=3)
    density: float = Field(ge=0.0, le=1.0)

    def as_row(self):
        return [self.family, self.n, self.F, self.K, self.median_seconds, self.reps, self.density]
