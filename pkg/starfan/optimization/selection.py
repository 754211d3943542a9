from typing import List, Optional

from starfan.data.models import SweepEntry


class FitSelector:
    """
    Picks one lambda out of a sweep with a fixed hierarchy:
    1. Highest accuracy (held-out when available, else training)
    2. Highest objective
    3. Smallest lambda
    """

    def select_best(self, entries: List[SweepEntry]) -> Optional[SweepEntry]:
        candidates = [e for e in entries if e.fit is not None]
        if not candidates:
            return None

        # Stable sorts, lowest priority first.
        candidates.sort(key=lambda e: e.lam)
        candidates.sort(key=lambda e: e.fit.objective, reverse=True)
        candidates.sort(key=lambda e: (e.holdout or e.report).accuracy, reverse=True)
        return candidates[0]


def select_best_fit(entries: List[SweepEntry]) -> Optional[SweepEntry]:
    return FitSelector().select_best(entries)
