from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from ..errors import ConformabilityError, InsufficientObservations, MissingCovariates, RankDeficient

INTERCEPT = "const"


@dataclass(frozen=True)
class DesignMatrix:
    """Regressor matrix with named columns; column 0 is normally the intercept."""

    values: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ConformabilityError(f"design matrix must be 2-d, got shape {values.shape}")
        if values.shape[1] != len(self.names):
            raise ConformabilityError(f"{values.shape[1]} columns but {len(self.names)} names")
        if not np.all(np.isfinite(values)):
            raise ValueError("design matrix contains missing or non-finite values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]

    @property
    def has_intercept(self) -> bool:
        return INTERCEPT in self.names

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]

    def check_rank(self) -> None:
        if self.n < self.k:
            raise InsufficientObservations(f"{self.n} rows for {self.k} columns")
        rank = np.linalg.matrix_rank(self.values)
        if rank < self.k:
            raise RankDeficient(f"design matrix has rank {rank} < {self.k} columns {list(self.names)}")

    def prepend(self, name: str, column) -> DesignMatrix:
        column = np.asarray(column, dtype=float).reshape(-1, 1)
        return DesignMatrix(np.hstack([column, self.values]), (name,) + self.names)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, covariates: Sequence[str], intercept: bool = True) -> DesignMatrix:
        missing = [c for c in covariates if c not in frame.columns]
        if missing:
            raise MissingCovariates(f"covariates not in data: {missing}")
        cols = [frame[c].to_numpy(dtype=float) for c in covariates]
        names = list(covariates)
        if intercept:
            cols.insert(0, np.ones(len(frame)))
            names.insert(0, INTERCEPT)
        values = np.column_stack(cols) if cols else np.empty((len(frame), 0))
        return cls(values, tuple(names))


def intercept_only(n: int) -> DesignMatrix:
    return DesignMatrix(np.ones((n, 1)), (INTERCEPT,))
