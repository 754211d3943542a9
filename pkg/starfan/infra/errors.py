from typing import Optional, Sequence

import numpy as np


class StarFanError(Exception):
    """Base error. `exit_code` is what the CLI returns when this escapes."""

    exit_code = 1


# --- data -----------------------------------------------------------------

class DataError(StarFanError):
    exit_code = 3


class ParseError(DataError):
    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")


class LabelError(DataError):
    def __init__(self, row: int, value):
        self.row = row
        self.value = value
        super().__init__(f"Label must be 0 or 1, got {value!r} at row {row}")


class DimensionError(DataError):
    pass


class UndefinedAtZero(DataError):
    """A positive-labeled point evaluates to f = 0; the likelihood is -inf there."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(
            f"Positive-labeled point {index} sits at the star center (f = 0); log-likelihood undefined"
        )


class NoCone(DataError):
    def __init__(self, point: Sequence[float], violation: float, index: Optional[int] = None):
        self.point = np.asarray(point, dtype=float)
        self.violation = float(violation)
        self.index = index
        at = f" for point {index}" if index is not None else ""
        super().__init__(
            f"No maximal cone contains {self.point.tolist()}{at}; best violation {self.violation:.3e}"
        )


# --- fans -----------------------------------------------------------------

class FanError(StarFanError):
    exit_code = 3


class SingularCone(FanError):
    def __init__(self, cone: int):
        self.cone = cone
        super().__init__(f"Maximal cone {cone} has a singular ray matrix")


class NotComplete(FanError):
    def __init__(self, direction: Sequence[float]):
        self.direction = np.asarray(direction, dtype=float)
        super().__init__(f"Fan does not cover direction {self.direction.tolist()}")


class Overlapping(FanError):
    def __init__(self, direction: Sequence[float], cones: Sequence[int]):
        self.direction = np.asarray(direction, dtype=float)
        self.cones = list(cones)
        super().__init__(
            f"Direction {self.direction.tolist()} is interior to cones {self.cones}"
        )


class DuplicateDirection(FanError):
    def __init__(self, i: int, j: int):
        self.pair = (i, j)
        super().__init__(f"Rays {i} and {j} point in the same direction")


class SizeLimit(FanError):
    pass


class DegenerateRay(FanError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"Parameter a[{index}] is at the floor; vertex {index} is at infinity")


# --- arrangement ------------------------------------------------------------

class ArrangementError(StarFanError):
    exit_code = 3


class TooManyPoints(ArrangementError):
    def __init__(self, m: int, cap: int):
        self.m = m
        self.cap = cap
        super().__init__(f"Chamber enumeration is capped at {cap} points, got {m}")


class InfeasibleBox(ArrangementError):
    pass


# --- solver -----------------------------------------------------------------

class SolverError(StarFanError):
    """Raised by the CLI when a fit did not produce a usable maximum."""

    exit_code = 4
