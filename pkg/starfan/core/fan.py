import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import ClassVar, Dict, List, Optional, Sequence, Tuple

import numpy as np

from starfan.infra.config import get_settings
from starfan.infra.errors import (
    DimensionError,
    DuplicateDirection,
    FanError,
    NoCone,
    NotComplete,
    Overlapping,
    SingularCone,
    SizeLimit,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """
    The sparse nonnegative vector [x] expressing x in the generators of
    the cone that contains it.
    """

    entries: np.ndarray
    support: Tuple[int, ...]
    cone_id: int


@dataclass(frozen=True, eq=False)
class Fan:
    """
    A complete simplicial fan: n rays in R^d and k maximal cones of d rays
    each. Immutable; every query is a pure function of its arguments.
    """

    dim: int
    rays: np.ndarray
    maximal_cones: np.ndarray
    cone_inverses: np.ndarray
    name: str = ""
    _ray_lookup: Dict[Tuple[float, ...], int] = field(default_factory=dict, repr=False)

    CONE_TOL: ClassVar[float] = 1e-9
    SINGULAR_COND: ClassVar[float] = 1e12
    CHUNK: ClassVar[int] = 1024

    @property
    def n(self) -> int:
        return len(self.rays)

    @property
    def k(self) -> int:
        return len(self.maximal_cones)

    def ray_index(self, vector: Sequence[float]) -> int:
        key = tuple(float(v) for v in vector)
        if key in self._ray_lookup:
            return self._ray_lookup[key]
        hits = np.flatnonzero(np.all(np.isclose(self.rays, np.asarray(vector, dtype=float)), axis=1))
        if hits.size == 0:
            raise KeyError(f"{list(key)} is not a ray of {self.name or 'this fan'}")
        return int(hits[0])

    def _cone_coefficients(self, start: int, points: np.ndarray) -> np.ndarray:
        inverses = self.cone_inverses[start:start + self.CHUNK]
        return np.einsum("cij,nj->nci", inverses, points)

    def locate_many(self, points) -> Tuple[np.ndarray, np.ndarray]:
        """
        Returns (cone_ids, coefficients) for an (N, d) batch: the lowest-index
        cone whose coefficients are all >= -CONE_TOL, and those coefficients
        clamped at zero.
        """
        X = np.asarray(points, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.dim:
            raise DimensionError(f"Expected points in R^{self.dim}, got shape {X.shape}")

        count = len(X)
        cone_ids = np.full(count, -1, dtype=np.intp)
        coefficients = np.zeros((count, self.dim))
        best = np.full(count, -np.inf)

        for start in range(0, self.k, self.CHUNK):
            todo = np.flatnonzero(cone_ids < 0)
            if todo.size == 0:
                break
            coef = self._cone_coefficients(start, X[todo])
            worst = coef.min(axis=2)
            best[todo] = np.maximum(best[todo], worst.max(axis=1))
            ok = worst >= -self.CONE_TOL
            hit = ok.any(axis=1)
            first = ok.argmax(axis=1)
            cone_ids[todo[hit]] = start + first[hit]
            coefficients[todo[hit]] = coef[np.flatnonzero(hit), first[hit]]

        missing = np.flatnonzero(cone_ids < 0)
        if missing.size:
            i = int(missing[0])
            raise NoCone(X[i], best[i], index=i)

        np.clip(coefficients, 0.0, None, out=coefficients)
        return cone_ids, coefficients

    def coords_many(self, points) -> np.ndarray:
        """Dense (N, n) matrix whose rows are the coefficient vectors."""
        cone_ids, coefficients = self.locate_many(points)
        out = np.zeros((len(cone_ids), self.n))
        rows = np.repeat(np.arange(len(cone_ids)), self.dim)
        np.add.at(out, (rows, self.maximal_cones[cone_ids].ravel()), coefficients.ravel())
        return out

    def validate(self, seed: int = 0, probes: Optional[int] = None) -> None:
        """
        Samples unit directions and checks that each lies in some maximal
        cone and in the interior of at most one. Sampling, not proof.
        """
        count = max(probes or 0, 10 * 2 ** self.dim)
        rng = np.random.Generator(np.random.Philox(seed))
        directions = rng.standard_normal((count, self.dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)

        covered = np.zeros(count, dtype=bool)
        interior: List[List[int]] = [[] for _ in range(count)]
        for start in range(0, self.k, self.CHUNK):
            worst = self._cone_coefficients(start, directions).min(axis=2)
            covered |= (worst >= -self.CONE_TOL).any(axis=1)
            for p, c in zip(*np.nonzero(worst > self.CONE_TOL)):
                interior[p].append(start + int(c))

        uncovered = np.flatnonzero(~covered)
        if uncovered.size:
            raise NotComplete(directions[uncovered[0]])
        for p, cones in enumerate(interior):
            if len(cones) > 1:
                raise Overlapping(directions[p], cones)


def coords(fan: Fan, x) -> CoefficientVector:
    """
    Coefficient vector of x: entries >= 0, at most d nonzeros, and
    sum_i entries_i * v_i == x.
    """
    cone_ids, coefficients = fan.locate_many(np.asarray(x, dtype=float).reshape(1, -1))
    cone = int(cone_ids[0])
    entries = np.zeros(fan.n)
    entries[fan.maximal_cones[cone]] = coefficients[0]
    support = tuple(int(i) for i in np.flatnonzero(entries))
    return CoefficientVector(entries=entries, support=support, cone_id=cone)


def build_fan(
    dim: int,
    rays: Sequence[Sequence[float]],
    maximal_cones: Sequence[Sequence[int]],
    seed: int = 0,
    name: str = "",
) -> Fan:
    """
    Builds and validates a fan. Cone index sets are 0-based here; the JSON
    file format uses 1-based indices and is converted on load.
    """
    if dim < 1:
        raise FanError(f"Fan dimension must be >= 1, got {dim}")
    ray_array = np.array(rays, dtype=float).reshape(-1, dim)
    cone_array = np.array(maximal_cones, dtype=np.intp)
    if cone_array.ndim != 2 or cone_array.shape[1] != dim:
        raise FanError(f"Every maximal cone needs exactly {dim} ray indices")
    if cone_array.size and (cone_array.min() < 0 or cone_array.max() >= len(ray_array)):
        raise FanError(f"Ray index out of range 0..{len(ray_array) - 1}")
    if len(cone_array) == 0:
        raise NotComplete(np.eye(dim)[0])

    inverses = np.empty((len(cone_array), dim, dim))
    for c, cone in enumerate(cone_array):
        matrix = ray_array[cone].T
        if np.linalg.matrix_rank(matrix) < dim or np.linalg.cond(matrix) > Fan.SINGULAR_COND:
            raise SingularCone(c)
        inverses[c] = np.linalg.inv(matrix)

    for array in (ray_array, cone_array, inverses):
        array.setflags(write=False)

    lookup = {tuple(float(v) for v in ray): i for i, ray in enumerate(ray_array)}
    fan = Fan(
        dim=dim,
        rays=ray_array,
        maximal_cones=cone_array,
        cone_inverses=inverses,
        name=name,
        _ray_lookup=lookup,
    )
    fan.validate(seed=seed)
    logger.debug(f"Built fan {name or '<anonymous>'}: d={dim}, n={fan.n}, k={fan.k}")
    return fan


def kite_fan(d: int) -> Fan:
    """Rays e_1, -e_1, e_2, -e_2, ...; one cone per orthant."""
    if d < 1:
        raise FanError(f"Fan dimension must be >= 1, got {d}")
    eye = np.eye(d)
    rays = [sign * eye[i] for i in range(d) for sign in (1.0, -1.0)]
    cones = [
        [2 * i + bit for i, bit in enumerate(bits)]
        for bits in itertools.product((0, 1), repeat=d)
    ]
    return build_fan(d, rays, cones, name=f"kite:{d}")


def type_b_fan(d: int, max_dim: Optional[int] = None) -> Fan:
    """
    Coxeter fan of type B: rays {0,+-1}^d minus the origin, one cone per
    signed permutation. In the plane the rays run counter-clockwise from (1, 0).
    """
    if d < 1:
        raise FanError(f"Fan dimension must be >= 1, got {d}")
    cap = max_dim if max_dim is not None else get_settings().typeb_max_dim
    if d > cap:
        raise SizeLimit(f"type_b_fan({d}) needs {3 ** d - 1} rays; the cap is d <= {cap}")
    if d == 2:
        rays = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]
        return fan_2d_from_rays(rays, name="typeb:2")

    rays = [s for s in itertools.product((1, 0, -1), repeat=d) if any(s)]
    index = {ray: i for i, ray in enumerate(rays)}
    cones = []
    for perm in itertools.permutations(range(d)):
        for signs in itertools.product((1, -1), repeat=d):
            cone = []
            for i in range(d):
                v = [0] * d
                for j in range(i, d):
                    v[perm[j]] = signs[perm[j]]
                cone.append(index[tuple(v)])
            cones.append(cone)
    return build_fan(d, rays, cones, name=f"typeb:{d}")


def type_b_coefficients(fan: Fan, x) -> np.ndarray:
    """
    Closed-form [x] on a type-B fan: sort |x_i| ascending by a permutation s,
    then x = sum_i (|x_s(i)| - |x_s(i-1)|) * v_i with
    v_i = sum_{j >= i} sgn(x_s(j)) e_s(j).
    """
    x = np.asarray(x, dtype=float)
    order = np.argsort(np.abs(x), kind="stable")
    magnitudes = np.abs(x[order])
    entries = np.zeros(fan.n)
    previous = 0.0
    for i in range(len(x)):
        step = magnitudes[i] - previous
        previous = magnitudes[i]
        if step <= 0:
            continue
        v = np.zeros(len(x))
        for j in range(i, len(x)):
            v[order[j]] = np.sign(x[order[j]])
        entries[fan.ray_index(v)] += step
    return entries


def fan_2d_from_rays(rays: Sequence[Sequence[float]], seed: int = 0, name: str = "") -> Fan:
    """
    Planar fan from rays: sort by angle in [0, 2*pi) and pair neighbours.
    """
    ray_array = np.asarray(rays, dtype=float)
    if ray_array.ndim != 2 or ray_array.shape[1] != 2:
        raise FanError("fan_2d_from_rays takes vectors in R^2")
    if np.any(np.linalg.norm(ray_array, axis=1) == 0):
        raise FanError("Rays must be nonzero")

    angles = np.mod(np.arctan2(ray_array[:, 1], ray_array[:, 0]), 2 * math.pi)
    order = np.argsort(angles, kind="stable")
    for a, b in zip(order[:-1], order[1:]):
        if abs(angles[b] - angles[a]) < 1e-12:
            raise DuplicateDirection(int(a), int(b))
    if len(order) > 1 and abs(angles[order[0]] + 2 * math.pi - angles[order[-1]]) < 1e-12:
        raise DuplicateDirection(int(order[0]), int(order[-1]))
    if len(ray_array) < 3:
        raise NotComplete(np.array([-ray_array[0, 1], ray_array[0, 0]]))

    sorted_rays = ray_array[order]
    cones = [[i, (i + 1) % len(sorted_rays)] for i in range(len(sorted_rays))]
    return build_fan(2, sorted_rays, cones, seed=seed, name=name or f"rays2d:{len(sorted_rays)}")


def refine_fan_2d(fan: Fan, ray: Sequence[float]) -> Fan:
    """Adds one ray to a planar fan."""
    return fan_2d_from_rays(np.vstack([fan.rays, np.asarray(ray, dtype=float)]), name=f"{fan.name}+1")


def coarsen_fan_2d(fan: Fan, index: int) -> Fan:
    """Drops ray `index`; fails if the remaining rays leave a gap of 180 degrees or more."""
    if not 0 <= index < fan.n:
        raise FanError(f"Ray index {index} out of range 0..{fan.n - 1}")
    return fan_2d_from_rays(np.delete(fan.rays, index, axis=0), name=f"{fan.name}-{index}")


def fan_to_dict(fan: Fan) -> dict:
    return {
        "dim": fan.dim,
        "rays": fan.rays.tolist(),
        "cones": (fan.maximal_cones + 1).tolist(),
    }


def fan_from_dict(payload: dict, name: str = "") -> Fan:
    try:
        dim = int(payload["dim"])
        rays = payload["rays"]
        cones = np.asarray(payload["cones"], dtype=np.intp) - 1
    except (KeyError, TypeError, ValueError) as e:
        raise FanError(f"Malformed fan description: {e}") from e
    return build_fan(dim, rays, cones, name=name)
