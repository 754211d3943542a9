from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import ClassVar, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator
from scipy import sparse

from starfan.infra.errors import DimensionError, LabelError


class Side(IntEnum):
    """Where a point falls relative to a star: INSIDE is the closed 0-class."""

    INSIDE = 0
    OUTSIDE = 1


@dataclass(frozen=True, eq=False)
class ParamVector:
    """
    Star parameters a in R^n_{>0}. Entries at or below FLOOR are degenerate:
    the matching star vertex v_i / a_i sits at infinity.
    """

    values: np.ndarray
    floor: float = 1e-12

    FLOOR: ClassVar[float] = 1e-12

    def __post_init__(self):
        arr = np.array(self.values, dtype=float).ravel()
        if arr.size == 0:
            raise ValueError("ParamVector needs at least one entry")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise ValueError(f"Star parameters must be finite and > 0, got {arr.tolist()}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def of(cls, a) -> "ParamVector":
        return a if isinstance(a, ParamVector) else cls(np.asarray(a, dtype=float))

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def degenerate(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.values <= self.floor * (1 + 1e-9)))

    def tolist(self) -> List[float]:
        return self.values.tolist()


@dataclass(frozen=True, eq=False)
class TranslatedStar:
    params: ParamVector
    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "params", ParamVector.of(self.params))
        t = np.array(self.t, dtype=float).ravel()
        t.setflags(write=False)
        object.__setattr__(self, "t", t)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Points in R^d with 0/1 labels."""

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        labels = np.asarray(self.labels).ravel()
        if len(points) < 1:
            raise DimensionError("A dataset needs at least one point")
        if len(labels) != len(points):
            raise DimensionError(f"{len(points)} points but {len(labels)} labels")
        for row, value in enumerate(labels):
            if value not in (0, 1):
                raise LabelError(row, value)
        labels = labels.astype(np.int8)
        points.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", labels)

    @property
    def m(self) -> int:
        return len(self.points)

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def shifted(self, t) -> "LabeledDataset":
        return LabeledDataset(self.points - np.asarray(t, dtype=float), self.labels)

    def subset(self, index) -> "LabeledDataset":
        return LabeledDataset(self.points[index], self.labels[index])


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """
    A_X as CSR: row i is the coefficient vector of x^(i), so A_X @ a gives
    f_a at every point.
    """

    matrix: sparse.csr_matrix
    cone_ids: np.ndarray

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def empty(cls, n: int) -> "DataMatrix":
        return cls(sparse.csr_matrix((0, n)), np.zeros(0, dtype=np.intp))

    def values(self, a) -> np.ndarray:
        return self.matrix @ ParamVector.of(a).values

    def rows(self, mask) -> sparse.csr_matrix:
        return self.matrix[np.asarray(mask)]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass(frozen=True, eq=False)
class LossReport:
    fp: int
    fn: int
    err: int
    per_point: np.ndarray

    @property
    def m(self) -> int:
        return len(self.per_point)

    @property
    def accuracy(self) -> float:
        return 1.0 - self.err / self.m if self.m else 1.0

    def to_dict(self) -> dict:
        return {"fp": self.fp, "fn": self.fn, "err": self.err, "accuracy": self.accuracy}


class FitStatus(Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    DEGENERATE = "Degenerate"
    NONFINITE_MAXIMUM = "NonfiniteMaximum"
    NO_POSITIVE_MASS = "NoPositiveMass"


@dataclass
class FitResult:
    a_star: ParamVector
    objective: float
    iterations: int
    grad_norm: float
    status: FitStatus
    lam: float
    degenerate_rays: Tuple[int, ...] = ()
    unsupported_rays: Tuple[int, ...] = ()
    escaping_rays: Tuple[int, ...] = ()
    trace: Tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "a_star": self.a_star.tolist(),
            "objective": self.objective,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "status": self.status.value,
            "degenerate_rays": list(self.degenerate_rays),
            "unsupported_rays": list(self.unsupported_rays),
            "escaping_rays": list(self.escaping_rays),
        }


@dataclass(frozen=True)
class UniquenessCertificate:
    rank_pos: int
    rank_neg: int
    n: int

    @property
    def strictly_concave(self) -> bool:
        return self.rank_pos == self.n

    @property
    def unique_max(self) -> bool:
        return self.rank_pos == self.n and self.rank_neg == self.n

    def to_dict(self) -> dict:
        return {
            "rank_pos": self.rank_pos,
            "rank_neg": self.rank_neg,
            "n": self.n,
            "strictly_concave": self.strictly_concave,
            "unique_max": self.unique_max,
        }


@dataclass(frozen=True, eq=False)
class Chamber:
    """
    A realized half-open chamber: sign_vector[i] is Side.OUTSIDE when point i
    is predicted 1. The witness satisfies every constraint with slack >= margin.
    """

    sign_vector: np.ndarray
    witness: ParamVector
    report: LossReport
    margin: float

    @property
    def key(self) -> str:
        return "".join(str(int(s)) for s in self.sign_vector)


@dataclass(frozen=True)
class SweepEntry:
    """One lambda of a sweep. A failed fit keeps its error message and no report."""

    lam: float
    fit: Optional[FitResult]
    report: Optional[LossReport]
    holdout: Optional[LossReport] = None
    error: Optional[str] = None

    def to_dict(self) -> dict:
        out = {"lambda": self.lam, "error": self.error}
        out["fit"] = self.fit.to_dict() if self.fit else None
        out["train"] = self.report.to_dict() if self.report else None
        out["holdout"] = self.holdout.to_dict() if self.holdout else None
        return out


class GenSpec(BaseModel):
    """How to draw a synthetic dataset from a known star."""

    fan_name: str = "typeb:2"
    a_true: List[float] = Field(default_factory=lambda: [1.25, 3.0] * 4)
    count: int = Field(default=500, ge=1)
    noise: float = Field(default=0.9, gt=0.5, le=1.0)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)

    @field_validator("a_true")
    @classmethod
    def _positive(cls, value: Sequence[float]) -> List[float]:
        if not value or any(v <= 0 for v in value):
            raise ValueError("a_true entries must be > 0")
        return list(value)
