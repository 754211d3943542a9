import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from starfan.core.loss import zero_one_loss
from starfan.data.models import DataMatrix, FitResult, SweepEntry
from starfan.infra.config import SolverOptions
from starfan.infra.errors import StarFanError
from starfan.optimization.mle import MLEOptimizer

logger = logging.getLogger(__name__)


def parse_lambdas(text: str) -> List[float]:
    """
    Either a comma list ("0.25,0.5,1") or a geometric grid "geom:lo:hi:count".
    """
    text = text.strip()
    if text.startswith("geom:"):
        _, lo, hi, count = text.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
        if lo <= 0 or hi < lo or count < 1:
            raise ValueError(f"Bad geometric lambda grid {text!r}")
        return np.geomspace(lo, hi, count).tolist()
    values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ValueError("Empty lambda list")
    return values


class LambdaSweepRunner:
    """
    Fits the likelihood along an ascending lambda grid.

    The optimum moves along a ray, a*(t lam) = a*(lam) / t, so each fit is
    warm-started from the previous optimum scaled by lam_prev / lam_next.
    A failure at one lambda is logged and recorded; the sweep moves on.
    """

    def __init__(self, opts: Optional[SolverOptions] = None):
        self.opts = opts or SolverOptions()
        self.optimizer = MLEOptimizer(self.opts)

    def run(
        self,
        A: DataMatrix,
        labels,
        lambdas: Sequence[float],
        eval_labels=None,
        holdout: Optional[Tuple[DataMatrix, np.ndarray]] = None,
    ) -> List[SweepEntry]:
        lambdas = [float(v) for v in lambdas]
        if any(v <= 0 for v in lambdas):
            raise ValueError(f"lambdas must be > 0, got {lambdas}")
        if any(b < a for a, b in zip(lambdas, lambdas[1:])):
            raise ValueError("lambdas must be sorted ascending")
        scored = labels if eval_labels is None else eval_labels

        entries: List[SweepEntry] = []
        last: Optional[FitResult] = None
        for lam in lambdas:
            start = None
            if last is not None:
                start = np.maximum(last.a_star.values * (last.lam / lam), self.opts.floor)
            try:
                fit = self.optimizer.fit(A, labels, lam, a0=start)
            except StarFanError as e:
                logger.error(f"Fit failed at lambda={lam}: {e}")
                entries.append(SweepEntry(lam=lam, fit=None, report=None, error=str(e)))
                continue

            report = zero_one_loss(A, scored, fit.a_star)
            held = zero_one_loss(holdout[0], holdout[1], fit.a_star) if holdout is not None else None
            entries.append(SweepEntry(lam=lam, fit=fit, report=report, holdout=held))
            last = fit
            logger.info(f"lambda={lam:.6g}: FP={report.fp} FN={report.fn} err={report.err}")
        return entries


def lambda_sweep(A: DataMatrix, labels, lambdas, opts: Optional[SolverOptions] = None, eval_labels=None, holdout=None) -> List[SweepEntry]:
    return LambdaSweepRunner(opts).run(A, labels, lambdas, eval_labels=eval_labels, holdout=holdout)
