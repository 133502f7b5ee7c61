from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class WalkCorpus(BaseModel):
    """Random walks stored as a (walks x length) array of node ids"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    walks: np.ndarray
    n: int = Field(ge=1)
    length: int = Field(ge=2)
    per_node: int = Field(ge=1)
    seed: int
    p: Optional[float] = None
    q: Optional[float] = None

    @model_validator(mode='after')
    def _check_shape(self):
        if self.walks.ndim != 2 or self.walks.shape[1] != self.length:
            raise ValueError(f'walks must have shape (count, {self.length}), got {self.walks.shape}')
        if self.walks.shape[0] != self.n * self.per_node:
            raise ValueError('corpus must hold per_node walks for every node')
        if self.walks.size and (self.walks.min() < 0 or self.walks.max() >= self.n):
            raise ValueError('walk contains a node id outside [0, n)')
        return self

    @property
    def steps(self) -> int:
        return self.walks.shape[0] * (self.length - 1)

    def transitions(self):
        """(source, target) arrays of every step in the corpus"""
        return self.walks[:, :-1].ravel(), self.walks[:, 1:].ravel()

    def lines(self) -> List[str]:
        return [' '.join(str(node) for node in walk) for walk in self.walks.tolist()]


class TransitionEstimate(BaseModel):
    """Row-normalized step counts; rows never left by any walk are listed in `unvisited`"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: np.ndarray
    unvisited: List[int]
    steps: int
