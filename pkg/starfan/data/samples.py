"""
Small reference configurations used by the CLI (`builtin:` datasets) and
the test suite.
"""
from typing import Dict, Tuple

import numpy as np

from starfan.core.fan import Fan, build_fan, type_b_fan
from starfan.data.models import LabeledDataset, ParamVector

LINE_POINTS = (-4.0, -3.0, -2.0, -1.0, 1.0, 2.0, 3.0, 4.0)

# listed: positives at -3..2; complemented: its negation;
# inner: the label vector whose best chambers are pairwise non-adjacent.
LINE_LABELS: Dict[str, Tuple[int, ...]] = {
    "listed": (0, 1, 1, 1, 1, 1, 0, 0),
    "complemented": (1, 0, 0, 0, 0, 0, 1, 1),
    "inner": (0, 0, 1, 1, 1, 1, 0, 0),
}

DIAGONAL_POINTS = ((1.0, 1.0), (2.0, 2.0), (3.0, 3.0))
DIAGONAL_LABELS = (0, 1, 0)
DIAGONAL_PARAMS = (1 / 3, 3.0, 1 / 3, 3.0, 1 / 3, 3.0, 1 / 3, 3.0)


def line_fan() -> Fan:
    """The 1-D fan with ray order v1 = -e1, v2 = +e1."""
    return build_fan(1, [[-1.0], [1.0]], [[0], [1]], name="line")


def line_dataset(variant: str = "listed") -> LabeledDataset:
    if variant not in LINE_LABELS:
        raise ValueError(f"Unknown label variant {variant!r}; choose from {sorted(LINE_LABELS)}")
    return LabeledDataset(np.array(LINE_POINTS).reshape(-1, 1), LINE_LABELS[variant])


def diagonal_dataset() -> Tuple[Fan, LabeledDataset, ParamVector]:
    """Three points on the diagonal labeled 0, 1, 0 and the star that separates them after a translation."""
    return (
        type_b_fan(2),
        LabeledDataset(np.array(DIAGONAL_POINTS), DIAGONAL_LABELS),
        ParamVector(np.array(DIAGONAL_PARAMS)),
    )
