import logging
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from starfan.core.fan import Fan
from starfan.core.loss import joint_loss, zero_one_loss
from starfan.core.star import BOUNDARY
from starfan.data.models import Chamber, DataMatrix, LabeledDataset, ParamVector, Side
from starfan.infra.config import get_settings
from starfan.infra.errors import DimensionError, InfeasibleBox, TooManyPoints
from starfan.optimization.simplex import DenseSimplex, LPStatus
from starfan.utils import log1mexp, thread_map

logger = logging.getLogger(__name__)


class ChamberEnumerator:
    """
    Enumerates the full-dimensional half-open chambers of the data
    arrangement {a : <A_i, a> = 1} inside a box.

    Each candidate sign vector is tested by a margin LP: maximize s subject to
    <A_i, a> <= 1 - s on the inside side, <A_i, a> >= 1 + s on the outside
    side, lo <= a <= hi, 0 <= s <= 1. The chamber is realized when s* >= STRICT_EPS.
    Prefixes are extended depth first and an infeasible prefix prunes every
    sign vector that extends it.
    """

    STRICT_EPS = 1e-9

    def __init__(self, max_points: Optional[int] = None):
        self.max_points = max_points if max_points is not None else get_settings().max_points
        self.lp = DenseSimplex()
        self.lp_solves = 0

    def enumerate(self, A: DataMatrix, labels, box) -> List[Chamber]:
        lo, hi = self._box(box, A.n)
        if A.m > self.max_points:
            raise TooManyPoints(A.m, self.max_points)
        rows = A.dense()
        labels = np.asarray(labels, dtype=np.int8)

        chambers: List[Chamber] = []
        self.lp_solves = 0
        root = self._max_margin(rows[:0], [], lo, hi)
        if root is not None:
            self._extend(A, rows, labels, lo, hi, [], root, chambers)
        logger.info(f"Found {len(chambers)} chambers for m={A.m} with {self.lp_solves} LP solves")
        return chambers

    def _extend(self, A, rows, labels, lo, hi, sides, solution, chambers) -> None:
        depth = len(sides)
        if depth == len(rows):
            witness, margin = solution
            report = zero_one_loss(A, labels, witness)
            chambers.append(Chamber(
                sign_vector=np.array(sides, dtype=np.int8),
                witness=witness,
                report=report,
                margin=margin,
            ))
            return
        for side in (Side.INSIDE, Side.OUTSIDE):
            candidate = sides + [int(side)]
            result = self._max_margin(rows[:depth + 1], candidate, lo, hi)
            if result is not None:
                self._extend(A, rows, labels, lo, hi, candidate, result, chambers)

    def _max_margin(self, rows: np.ndarray, sides: Sequence[int], lo: np.ndarray, hi: np.ndarray):
        n = len(lo)
        # variables: u = a - lo (n entries), then s
        constraints = [np.hstack([np.eye(n), np.zeros((n, 1))]), np.hstack([np.zeros((1, n)), np.ones((1, 1))])]
        bounds = [hi - lo, np.ones(1)]
        if len(rows):
            sign = np.where(np.asarray(sides) == Side.INSIDE, 1.0, -1.0)[:, None]
            constraints.append(np.hstack([sign * rows, np.ones((len(rows), 1))]))
            bounds.append(sign.ravel() * (BOUNDARY - rows @ lo))

        c = np.zeros(n + 1)
        c[-1] = 1.0
        self.lp_solves += 1
        result = self.lp.maximize(c, np.vstack(constraints), np.concatenate(bounds))
        if result.status != LPStatus.OPTIMAL or result.x[-1] < self.STRICT_EPS:
            return None
        return ParamVector(lo + result.x[:n]), float(result.x[-1])

    @staticmethod
    def _box(box, n: int) -> Tuple[np.ndarray, np.ndarray]:
        lo, hi = box
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (n,)).copy()
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (n,)).copy()
        if np.any(lo <= 0):
            raise ValueError(f"Box lower bounds must be > 0, got {lo.tolist()}")
        if np.any(lo >= hi):
            raise InfeasibleBox(f"Empty box: lo={lo.tolist()} hi={hi.tolist()}")
        return lo, hi


def enumerate_chambers(A: DataMatrix, labels, box, max_points: Optional[int] = None) -> List[Chamber]:
    """Chambers in canonical (lexicographic sign vector) order."""
    return ChamberEnumerator(max_points=max_points).enumerate(A, labels, box)


def level_set_summary(chambers: Sequence[Chamber]) -> Dict[int, int]:
    counts = Counter(c.report.err for c in chambers)
    return {err: counts[err] for err in sorted(counts)}


def minimal_chambers(chambers: Sequence[Chamber]) -> List[Chamber]:
    if not chambers:
        return []
    best = min(c.report.err for c in chambers)
    return [c for c in chambers if c.report.err == best]


def adjacent(first: Chamber, second: Chamber) -> bool:
    """Chambers sharing a wall differ in exactly one sign."""
    return int(np.count_nonzero(first.sign_vector != second.sign_vector)) == 1


def segment_profile(A: DataMatrix, labels, a_from, a_to, steps: int) -> List[int]:
    """err at `steps` equally spaced points of [a_from, a_to], endpoints included."""
    start = ParamVector.of(a_from).values
    end = ParamVector.of(a_to).values
    profile = []
    for w in np.linspace(0.0, 1.0, max(steps, 1)):
        profile.append(zero_one_loss(A, labels, (1 - w) * start + w * end).err)
    return profile


@dataclass(frozen=True)
class LatticeSpec:
    lo: float
    hi: float
    step: float

    def axis(self) -> np.ndarray:
        if self.step <= 0 or self.hi < self.lo:
            raise ValueError(f"Bad lattice {self}")
        count = int(round((self.hi - self.lo) / self.step)) + 1
        return self.lo + self.step * np.arange(count)

    @classmethod
    def parse(cls, text: str) -> "LatticeSpec":
        lo, hi, step = (float(v) for v in text.split(":"))
        return cls(lo, hi, step)


@dataclass(frozen=True, eq=False)
class TranslationalGrid:
    """
    err[r, c] and signature[r, c] belong to t = (xs[c], ys[r]). A signature
    is the np.packbits row of per-point memberships x^(i) - t in Star(a).
    """

    xs: np.ndarray
    ys: np.ndarray
    err: np.ndarray
    signature: np.ndarray

    def inside(self, i: int) -> np.ndarray:
        byte, bit = divmod(i, 8)
        return ((self.signature[..., byte] >> (7 - bit)) & 1).astype(bool)

    def cell_ids(self) -> np.ndarray:
        """Nodes with equal signatures share an id; ids follow the sorted signatures."""
        flat = self.signature.reshape(-1, self.signature.shape[-1])
        _, inverse = np.unique(flat, axis=0, return_inverse=True)
        return inverse.reshape(self.err.shape)


def translational_grid(fan: Fan, data: LabeledDataset, a, grid: Tuple[LatticeSpec, LatticeSpec]) -> TranslationalGrid:
    """err_a(t) at every lattice node, plus the packed membership signature."""
    if fan.dim != 2 or data.d != 2:
        raise DimensionError("Translation grids are drawn in the plane (d = 2)")
    a = ParamVector.of(a)
    xs, ys = grid[0].axis(), grid[1].axis()
    positive = np.asarray(data.labels).astype(bool)

    def row(y: float):
        nodes = np.column_stack([xs, np.full(len(xs), y)])
        inside = np.zeros((len(xs), data.m), dtype=bool)
        for i, x in enumerate(data.points):
            inside[:, i] = fan.coords_many(x - nodes) @ a.values <= BOUNDARY
        err = np.count_nonzero(~inside != positive, axis=1)
        return err, np.packbits(inside, axis=1)

    rows = thread_map(row, ys)
    err = np.vstack([r[0] for r in rows]).astype(np.int64)
    signature = np.stack([r[1] for r in rows])
    return TranslationalGrid(xs=xs, ys=ys, err=err, signature=signature)


def translational_likelihood_grid(fan: Fan, data: LabeledDataset, a, lam: float, grid: Tuple[LatticeSpec, LatticeSpec]) -> np.ndarray:
    """Translational log-likelihood per node; -inf where a positive point sits at the star center."""
    if fan.dim != 2 or data.d != 2:
        raise DimensionError("Translation grids are drawn in the plane (d = 2)")
    a = ParamVector.of(a)
    xs, ys = grid[0].axis(), grid[1].axis()

    def row(y: float):
        nodes = np.column_stack([xs, np.full(len(xs), y)])
        total = np.zeros(len(xs))
        for x, label in zip(data.points, data.labels):
            f = fan.coords_many(x - nodes) @ a.values
            total += log1mexp(lam * f) if label == 1 else -lam * f
        return total

    return np.vstack(thread_map(row, ys))


def zero_components(err: np.ndarray) -> int:
    """Connected components of the err == 0 nodes under 4-neighbour adjacency."""
    _, count = ndimage.label(np.asarray(err) == 0)
    return int(count)


def parameter_grid(A: DataMatrix, labels, xs: np.ndarray, ys: np.ndarray, metric: str = "err", lam: Optional[float] = None) -> np.ndarray:
    """
    err or log-likelihood over a = (xs[c], ys[r]) for a two-ray fan.
    Positive points at f = 0 give -inf likelihood.
    """
    if A.n != 2:
        raise DimensionError(f"Parameter grids need n = 2 rays, got {A.n}")
    if metric not in ("err", "loglik"):
        raise ValueError(f"Unknown metric {metric!r}")
    if metric == "loglik" and (lam is None or lam <= 0):
        raise ValueError("The likelihood landscape needs lambda > 0")
    dense = A.dense()
    y = np.asarray(labels, dtype=np.int8)

    def row(a2: float):
        f = np.outer(dense[:, 0], xs) + dense[:, 1:2] * a2
        if metric == "err":
            predicted = f > BOUNDARY
            return np.count_nonzero(predicted != y[:, None].astype(bool), axis=0).astype(float)
        terms = np.where(y[:, None] == 1, log1mexp(lam * f), -lam * f)
        return terms.sum(axis=0)

    return np.vstack(thread_map(row, ys))


def joint_path_witness(fan: Fan, data: LabeledDataset, a1, t1, a2, t2, steps: int) -> Tuple[List[int], int]:
    """
    joint_loss along the straight segment from (a1, t1) to (a2, t2) in
    R^n_{>0} x R^d. Two err-0 endpoints with a positive maximum show the
    segment leaves the zero level set.
    """
    p1, p2 = ParamVector.of(a1).values, ParamVector.of(a2).values
    s1, s2 = np.asarray(t1, dtype=float), np.asarray(t2, dtype=float)
    profile = []
    for w in np.linspace(0.0, 1.0, max(steps, 2)):
        profile.append(joint_loss(fan, data, (1 - w) * p1 + w * p2, (1 - w) * s1 + w * s2).err)
    return profile, max(profile)
