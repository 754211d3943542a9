import logging
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from starfan.core.loss import log_likelihood, log_likelihood_grad, log_likelihood_hess
from starfan.data.models import DataMatrix, FitResult, FitStatus, ParamVector, UniquenessCertificate
from starfan.infra.config import SolverOptions
from starfan.infra.errors import DimensionError, UndefinedAtZero

logger = logging.getLogger(__name__)


class MLEOptimizer:
    """
    Maximizes the concave log-likelihood over a > 0.

    Coordinates are split before the first step:
      - no positive support: the objective never rewards a_j, pinned to the floor;
      - positive but no negative support: the supremum sits at a_j = inf, the
        coordinate is doubled until it passes the radius and stops paying;
      - everything else: feasible-interior damped Newton with Armijo backtracking.
    Free coordinates within PIN_FACTOR of the floor form an active set: one
    with a nonpositive gradient is pinned there and reported as degenerate,
    a pinned one whose gradient turns positive is released. Stationarity is
    judged on the projected gradient.
    """

    ARMIJO = 1e-4
    BACKTRACK = 0.5
    MAX_BACKTRACKS = 60
    BOUNDARY_FRACTION = 0.99
    PIN_FACTOR = 1e3
    RANK_RTOL = 1e-10

    def __init__(self, opts: Optional[SolverOptions] = None):
        self.opts = opts or SolverOptions()

    def fit(self, A: DataMatrix, labels, lam: float, a0=None) -> FitResult:
        if lam <= 0:
            raise ValueError(f"lambda must be > 0, got {lam}")
        y = np.asarray(labels, dtype=np.int8).ravel()
        if len(y) != A.m:
            raise DimensionError(f"{A.m} rows but {len(y)} labels")
        opts = self.opts
        dense = A.dense()
        positive = y == 1

        empty = np.flatnonzero(positive & ~np.any(dense != 0, axis=1))
        if empty.size:
            raise UndefinedAtZero(int(empty[0]))

        if not positive.any():
            a = ParamVector(np.full(A.n, opts.floor), floor=opts.floor)
            logger.warning(f"No positive points at lambda={lam}; every coordinate pinned to the floor")
            return FitResult(
                a_star=a,
                objective=log_likelihood(A, y, a, lam),
                iterations=0,
                grad_norm=0.0,
                status=FitStatus.NO_POSITIVE_MASS,
                lam=lam,
                degenerate_rays=tuple(range(A.n)),
                unsupported_rays=tuple(range(A.n)),
            )

        pos_support = np.any(dense[positive] > 0, axis=0)
        neg_support = np.any(dense[~positive] > 0, axis=0)
        unsupported = ~pos_support
        escaping = pos_support & ~neg_support
        free = pos_support & neg_support

        a = np.ones(A.n) if a0 is None else np.array(ParamVector.of(a0).values, dtype=float)
        if len(a) != A.n:
            raise DimensionError(f"Start vector has {len(a)} entries, expected {A.n}")
        a = np.maximum(a, opts.floor)
        a[unsupported] = opts.floor
        if unsupported.any():
            logger.warning(f"Rays {np.flatnonzero(unsupported).tolist()} carry no positive point; pinned to the floor")

        near_floor = opts.floor * self.PIN_FACTOR
        pinned = np.zeros(A.n, dtype=bool)
        growing = escaping.any()
        objective = log_likelihood(A, y, a, lam)
        trace = [objective]
        previous: Optional[Tuple[np.ndarray, np.ndarray]] = None
        converged = False
        iterations = 0

        for iterations in range(1, opts.max_iter + 1):
            if growing:
                trial = a.copy()
                trial[escaping] *= 2.0
                gained = log_likelihood(A, y, trial, lam)
                increase = gained - objective
                a, objective = trial, gained
                trace.append(objective)
                if np.linalg.norm(a) > opts.radius and increase < opts.stall:
                    growing = False

            g = log_likelihood_grad(A, y, a, lam)
            released = pinned & (g > opts.tol)
            if released.any():
                pinned[released] = False
                logger.debug(f"Released rays {np.flatnonzero(released).tolist()} from the floor")
            hit = free & ~pinned & (a <= near_floor) & (g <= 0)
            if hit.any():
                a, objective = self._pin(A, y, a, lam, hit, objective)
                pinned |= hit
                g = log_likelihood_grad(A, y, a, lam)
                logger.debug(f"Pinned rays {np.flatnonzero(hit).tolist()} at the floor")

            active = np.flatnonzero(free & ~pinned)
            if self._projected_norm(g, free, pinned) <= opts.tol:
                if not growing:
                    converged = True
                    break
                continue

            direction = self._direction(A, y, a, lam, g, active, previous)
            if np.any((a[active] <= near_floor) & (direction < 0)):
                # Newton would push a near-floor coordinate with g > 0 down
                direction = self._ascent(a, g, active, previous)
            previous = (a.copy(), g.copy())
            step = self._max_step(a[active], direction)
            accepted = self._line_search(A, y, a, lam, active, direction, g[active], step, objective)
            if accepted is None:
                logger.debug(f"Line search stalled at iteration {iterations}")
                if not growing:
                    break
                continue
            a, objective = accepted
            trace.append(objective)

        a_star = ParamVector(a, floor=opts.floor)
        g = log_likelihood_grad(A, y, a_star, lam)
        grad_norm = self._projected_norm(g, free, pinned)
        converged = converged or (grad_norm <= opts.tol and not growing)

        degenerate = tuple(int(i) for i in np.flatnonzero(pinned | unsupported))
        if escaping.any() and not growing:
            status = FitStatus.NONFINITE_MAXIMUM
        elif not converged:
            status = FitStatus.MAX_ITERATIONS
        elif unsupported.any():
            status = FitStatus.NO_POSITIVE_MASS
        elif degenerate:
            status = FitStatus.DEGENERATE
        else:
            status = FitStatus.CONVERGED

        result = FitResult(
            a_star=a_star,
            objective=log_likelihood(A, y, a_star, lam),
            iterations=iterations,
            grad_norm=grad_norm,
            status=status,
            lam=lam,
            degenerate_rays=degenerate,
            unsupported_rays=tuple(int(i) for i in np.flatnonzero(unsupported)),
            escaping_rays=tuple(int(i) for i in np.flatnonzero(escaping)),
            trace=tuple(trace),
        )
        self._log_outcome(result)
        return result

    @staticmethod
    def _projected_norm(g: np.ndarray, free: np.ndarray, pinned: np.ndarray) -> float:
        """Largest gradient entry that could still move a free coordinate."""
        projected = np.where(pinned, np.maximum(g, 0.0), g)[free]
        return float(np.max(np.abs(projected))) if projected.size else 0.0

    def _pin(self, A, y, a, lam, hit, objective):
        """Moves the hit coordinates to the floor unless that lowers the objective; they stay frozen either way."""
        trial = a.copy()
        trial[hit] = self.opts.floor
        value = log_likelihood(A, y, trial, lam)
        if value >= objective:
            return trial, value
        return a, objective

    def _direction(self, A, y, a, lam, g, active, previous) -> np.ndarray:
        """Newton direction on the active block, Barzilai-Borwein ascent when -H is not positive definite."""
        H = log_likelihood_hess(A, y, a, lam)[np.ix_(active, active)]
        try:
            factor = linalg.cho_factor(-H)
            scale = np.max(np.abs(np.diag(factor[0]))) ** 2
            if np.min(np.abs(np.diag(factor[0]))) ** 2 > 1e-12 * scale:
                return linalg.cho_solve(factor, g[active])
        except linalg.LinAlgError:
            pass
        return self._ascent(a, g, active, previous)

    @staticmethod
    def _ascent(a, g, active, previous) -> np.ndarray:
        gA = g[active]
        alpha = 1.0 / max(1.0, float(np.linalg.norm(gA)))
        if previous is not None:
            s = a[active] - previous[0][active]
            curvature = -float(s @ (gA - previous[1][active]))
            if curvature > 0:
                alpha = float(s @ s) / curvature
        return alpha * gA

    def _max_step(self, current: np.ndarray, direction: np.ndarray) -> float:
        """Longest step keeping every coordinate above the floor."""
        shrinking = direction < 0
        if not shrinking.any():
            return 1.0
        room = (current[shrinking] - self.opts.floor) / -direction[shrinking]
        return min(1.0, self.BOUNDARY_FRACTION * float(room.min()))

    def _line_search(self, A, y, a, lam, active, direction, g_active, step, objective):
        slope = float(g_active @ direction)
        for _ in range(self.MAX_BACKTRACKS):
            trial = a.copy()
            trial[active] = a[active] + step * direction
            value = log_likelihood(A, y, trial, lam)
            if value >= objective + self.ARMIJO * step * slope:
                return trial, value
            step *= self.BACKTRACK
        return None

    @staticmethod
    def _log_outcome(result: FitResult) -> None:
        message = (
            f"lambda={result.lam}: {result.status.value} after {result.iterations} iterations, "
            f"objective={result.objective:.10g}, grad_norm={result.grad_norm:.3g}"
        )
        if result.status == FitStatus.CONVERGED:
            logger.info(message)
        else:
            logger.warning(message)
        if result.escaping_rays:
            logger.warning(f"Rays {list(result.escaping_rays)} have no negative point; their optimum is at infinity")
        if result.degenerate_rays:
            logger.warning(f"Rays {list(result.degenerate_rays)} ended at the floor (vertex at infinity)")


def fit_mle(A: DataMatrix, labels, lam: float, opts: Optional[SolverOptions] = None, a0=None) -> FitResult:
    return MLEOptimizer(opts).fit(A, labels, lam, a0=a0)


def _rank(matrix: np.ndarray) -> int:
    """Pivoted-QR diagonal entries above RANK_RTOL times the largest singular value."""
    if matrix.size == 0:
        return 0
    sigma_max = float(linalg.svdvals(matrix)[0])
    if sigma_max == 0:
        return 0
    R, _ = linalg.qr(matrix, mode="r", pivoting=True)
    diagonal = np.abs(np.diag(R))
    return int(np.count_nonzero(diagonal > MLEOptimizer.RANK_RTOL * sigma_max))


def uniqueness_certificate(A: DataMatrix, labels) -> UniquenessCertificate:
    """
    Ranks of the positive and negative row blocks. Full rank on the positive
    block makes the likelihood strictly concave; full rank on both gives a
    unique maximizer.
    """
    y = np.asarray(labels, dtype=np.int8).ravel()
    dense = A.dense()
    return UniquenessCertificate(
        rank_pos=_rank(dense[y == 1]),
        rank_neg=_rank(dense[y == 0]),
        n=A.n,
    )
