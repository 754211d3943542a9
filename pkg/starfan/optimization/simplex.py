import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import numpy as np

logger = logging.getLogger(__name__)


class LPStatus(Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"


@dataclass
class LPResult:
    status: LPStatus
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None


class DenseSimplex:
    """
    Two-phase tableau simplex for small dense problems

        maximize c^T x  subject to  A x <= b,  x >= 0.

    Rows with b < 0 get an artificial variable for phase 1. Bland's rule
    picks entering and leaving variables, so degenerate pivots cannot cycle.
    Pivot and feasibility tolerances are relative to the problem's scale.
    """

    PIVOT_TOL = 1e-9
    COST_TOL = 1e-12
    FEASIBILITY_TOL = 1e-9
    MAX_PIVOTS = 50_000

    def maximize(self, c, A_ub, b_ub) -> LPResult:
        c = np.asarray(c, dtype=float).ravel()
        A = np.asarray(A_ub, dtype=float).reshape(-1, len(c))
        b = np.asarray(b_ub, dtype=float).ravel()
        p, q = A.shape

        if p == 0:
            if np.any(c > self.COST_TOL):
                return LPResult(LPStatus.UNBOUNDED)
            return LPResult(LPStatus.OPTIMAL, np.zeros(q), 0.0)

        tol = self.FEASIBILITY_TOL * max(1.0, float(np.abs(A).max()), float(np.abs(b).max()))
        negative = np.flatnonzero(b < 0)
        n_art = len(negative)
        width = q + p + n_art

        T = np.zeros((p, width + 1))
        T[:, :q] = A
        T[:, q:q + p] = np.eye(p)
        T[:, -1] = b
        basis = q + np.arange(p)

        art_cols = q + p + np.arange(n_art)
        for k, row in enumerate(negative):
            T[row, :-1] *= -1.0
            T[row, -1] *= -1.0
            T[row, art_cols[k]] = 1.0
            basis[row] = art_cols[k]

        if n_art:
            cost = np.zeros(width)
            cost[art_cols] = -1.0
            finished = self._run(T, basis, cost)
            residual = -float(cost[basis] @ T[:, -1])
            if not finished:
                logger.debug(f"Phase 1 stopped without an optimal basis, residual {residual:.3g}")
            if residual > tol:
                return LPResult(LPStatus.INFEASIBLE)
            T, basis = self._drop_artificials(T, basis, q + p)

        cost = np.zeros(q + p)
        cost[:q] = c
        bounded = self._run(T, basis, cost)

        x = np.zeros(q + p)
        x[basis] = T[:, -1]
        solution = np.clip(x[:q], 0.0, None)
        if np.any(A @ solution > b + tol):
            logger.debug("Phase 2 basis violates the constraints; reporting the problem infeasible")
            return LPResult(LPStatus.INFEASIBLE)
        if not bounded:
            return LPResult(LPStatus.UNBOUNDED)
        return LPResult(LPStatus.OPTIMAL, solution, float(c @ solution))

    def _run(self, T: np.ndarray, basis: np.ndarray, cost: np.ndarray) -> bool:
        """Pivots to optimality. Returns False when the objective is unbounded."""
        for _ in range(self.MAX_PIVOTS):
            reduced = cost - cost[basis] @ T[:, :-1]
            entering = np.flatnonzero(reduced > self.COST_TOL)
            if entering.size == 0:
                return True
            j = int(entering[0])
            column = T[:, j]
            rows = np.flatnonzero(column > self.PIVOT_TOL * max(1.0, float(np.abs(column).max())))
            if rows.size == 0:
                return False
            ratios = np.maximum(T[rows, -1], 0.0) / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * max(1.0, best)]
            i = int(ties[np.argmin(basis[ties])])
            self._pivot(T, basis, i, j)
        raise RuntimeError(f"Simplex did not terminate after {self.MAX_PIVOTS} pivots")

    @staticmethod
    def _pivot(T: np.ndarray, basis: np.ndarray, i: int, j: int) -> None:
        T[i] /= T[i, j]
        factor = T[:, j].copy()
        factor[i] = 0.0
        T -= np.outer(factor, T[i])
        basis[i] = j

    def _drop_artificials(self, T: np.ndarray, basis: np.ndarray, keep: int):
        redundant: List[int] = []
        for i in range(len(basis)):
            if basis[i] < keep:
                continue
            # a basic artificial sits at zero once phase 1 succeeded
            T[i, -1] = 0.0
            row = np.abs(T[i, :keep])
            if row.max(initial=0.0) > self.PIVOT_TOL:
                self._pivot(T, basis, i, int(np.argmax(row)))
            else:
                redundant.append(i)
        if redundant:
            logger.debug(f"Dropping {len(redundant)} redundant rows after phase 1")
            T = np.delete(T, redundant, axis=0)
            basis = np.delete(basis, redundant)
        T = np.hstack([T[:, :keep], T[:, -1:]])
        return T, basis


def maximize(c, A_ub, b_ub) -> LPResult:
    return DenseSimplex().maximize(c, A_ub, b_ub)
