import logging
import math
from typing import List, Sequence

import numpy as np

from starfan.core.fan import Fan
from starfan.data.models import ParamVector, Side, TranslatedStar
from starfan.infra.errors import DegenerateRay, DimensionError

logger = logging.getLogger(__name__)

# Class 0 is the closed star {f <= BOUNDARY}.
BOUNDARY = 1.0


def _check(fan: Fan, a: ParamVector) -> ParamVector:
    a = ParamVector.of(a)
    if a.n != fan.n:
        raise DimensionError(f"Fan has {fan.n} rays but the parameter vector has {a.n} entries")
    return a


def evaluate_many(fan: Fan, a, points) -> np.ndarray:
    a = _check(fan, a)
    return fan.coords_many(points) @ a.values


def evaluate(fan: Fan, a, x) -> float:
    """f_a(x) = <[x], a>: piecewise linear in x, linear in a, never negative."""
    return float(evaluate_many(fan, a, np.asarray(x, dtype=float).reshape(1, -1))[0])


def classify_many(fan: Fan, a, points) -> np.ndarray:
    return (evaluate_many(fan, a, points) > BOUNDARY).astype(np.int8)


def classify(fan: Fan, a, x) -> Side:
    return Side.OUTSIDE if evaluate(fan, a, x) > BOUNDARY else Side.INSIDE


def classify_translated(fan: Fan, star: TranslatedStar, x) -> Side:
    return classify(fan, star.params, np.asarray(x, dtype=float) - star.t)


def translation_membership(fan: Fan, a, x, t) -> bool:
    """
    True when x - t lies in Star(a), i.e. when t lies in the reflected star
    -Star(a) + x.
    """
    return evaluate(fan, a, np.asarray(x, dtype=float) - np.asarray(t, dtype=float)) <= BOUNDARY


def star_vertices(fan: Fan, a) -> List[np.ndarray]:
    """Boundary vertices v_i / a_i of Star(a)."""
    a = _check(fan, a)
    degenerate = a.degenerate
    if degenerate:
        raise DegenerateRay(degenerate[0])
    return [fan.rays[i] / a.values[i] for i in range(fan.n)]


def star_polygon(fan: Fan, a) -> np.ndarray:
    """
    Star(a) outline for a planar fan: the vertices ordered by ray angle,
    which is the cyclic order of the maximal cones.
    """
    if fan.dim != 2:
        raise DimensionError("Star outlines are only drawn in the plane")
    vertices = np.array(star_vertices(fan, a))
    angles = np.mod(np.arctan2(fan.rays[:, 1], fan.rays[:, 0]), 2 * math.pi)
    return vertices[np.argsort(angles, kind="stable")]


def radius_bound(fan: Fan, a) -> float:
    """Star(a) lies inside the ball of this radius around the origin."""
    a = _check(fan, a)
    return float(np.linalg.norm(fan.rays, axis=1).max() / a.values.min())


def shatter_params(fan: Fan, labels: Sequence[int], eps: float = 0.5) -> ParamVector:
    """
    Parameters realizing any labeling of the generators:
    a_i = 1 - eps for label 0 and 1 + eps for label 1.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    labels = np.asarray(labels).ravel()
    if len(labels) != fan.n:
        raise DimensionError(f"Need one label per ray ({fan.n}), got {len(labels)}")
    return ParamVector(np.where(labels == 0, 1.0 - eps, 1.0 + eps))
