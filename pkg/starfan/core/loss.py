import logging

import numpy as np
from scipy import sparse

from starfan.core.fan import Fan
from starfan.core.star import BOUNDARY, classify_many
from starfan.data.models import DataMatrix, LabeledDataset, LossReport, ParamVector
from starfan.infra.errors import DimensionError, NoCone, UndefinedAtZero
from starfan.utils import log1mexp, pairwise_sum

logger = logging.getLogger(__name__)


def data_matrix(fan: Fan, data: LabeledDataset) -> DataMatrix:
    """
    Stacks the coefficient vectors of the data points into a sparse m x n
    matrix with at most d nonzeros per row.
    """
    if data.d != fan.dim:
        raise DimensionError(f"Dataset lives in R^{data.d}, fan in R^{fan.dim}")
    try:
        cone_ids, coefficients = fan.locate_many(data.points)
    except NoCone as e:
        logger.error(f"Point {e.index} could not be located in {fan.name or 'the fan'}")
        raise
    rows = np.repeat(np.arange(data.m), fan.dim)
    cols = fan.maximal_cones[cone_ids].ravel()
    matrix = sparse.csr_matrix((coefficients.ravel(), (rows, cols)), shape=(data.m, fan.n))
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return DataMatrix(matrix=matrix, cone_ids=cone_ids)


def loss_report(predicted: np.ndarray, labels) -> LossReport:
    predicted = np.asarray(predicted, dtype=np.int8)
    labels = np.asarray(labels, dtype=np.int8)
    fp = int(np.count_nonzero((predicted == 1) & (labels == 0)))
    fn = int(np.count_nonzero((predicted == 0) & (labels == 1)))
    return LossReport(fp=fp, fn=fn, err=fp + fn, per_point=predicted)


def zero_one_loss(A: DataMatrix, labels, a) -> LossReport:
    """FP counts y=0 points with f > 1, FN counts y=1 points with f <= 1."""
    predicted = (A.values(a) > BOUNDARY).astype(np.int8)
    return loss_report(predicted, labels)


def _check_positive_mass(f: np.ndarray, y: np.ndarray) -> None:
    zero = np.flatnonzero((y == 1) & (f <= 0))
    if zero.size:
        raise UndefinedAtZero(int(zero[0]))


def likelihood_from_values(f: np.ndarray, labels, lam: float) -> float:
    if lam <= 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    y = np.asarray(labels)
    _check_positive_mass(f, y)
    terms = np.where(y == 1, log1mexp(lam * f), -lam * f)
    return pairwise_sum(terms)


def log_likelihood(A: DataMatrix, labels, a, lam: float) -> float:
    """
    sum_i y_i log(1 - exp(-lam f_i)) - (1 - y_i) lam f_i with f = A a.
    Concave in a.
    """
    return likelihood_from_values(A.values(a), labels, lam)


def _point_weights(f: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    with np.errstate(over="ignore"):
        positive = lam / np.expm1(lam * f)
    return np.where(y == 1, positive, -lam)


def log_likelihood_grad(A: DataMatrix, labels, a, lam: float) -> np.ndarray:
    """A^T w with w_i = lam / (exp(lam f_i) - 1) for y_i = 1 and -lam for y_i = 0."""
    y = np.asarray(labels)
    f = A.values(a)
    _check_positive_mass(f, y)
    return np.asarray(A.matrix.T @ _point_weights(f, y, lam)).ravel()


def log_likelihood_hess(A: DataMatrix, labels, a, lam: float) -> np.ndarray:
    """
    Sum of -lam^2 e^{-lam f} / (1 - e^{-lam f})^2 [x]^T [x] over positive
    points; negative points are linear and contribute nothing.
    """
    y = np.asarray(labels)
    f = A.values(a)
    _check_positive_mass(f, y)
    positive = y == 1
    if not positive.any():
        return np.zeros((A.n, A.n))
    z = lam * f[positive]
    h = lam ** 2 * np.exp(-z) / np.expm1(-z) ** 2
    A1 = A.rows(positive)
    return -(A1.T @ sparse.diags(h) @ A1).toarray()


def translational_zero_one_loss(fan: Fan, data: LabeledDataset, a, t) -> LossReport:
    """0/1 loss of the star translated by t, i.e. of the data shifted by -t."""
    return loss_report(classify_many(fan, a, data.points - np.asarray(t, dtype=float)), data.labels)


def translational_log_likelihood(fan: Fan, data: LabeledDataset, a, t, lam: float) -> float:
    """Concave in t on each maximal cell of the translated-fan arrangement."""
    a = ParamVector.of(a)
    shifted = data.points - np.asarray(t, dtype=float)
    return likelihood_from_values(fan.coords_many(shifted) @ a.values, data.labels, lam)


def joint_loss(fan: Fan, data: LabeledDataset, a, t) -> LossReport:
    """Entry point for scans over the joint (a, t) parameter space."""
    return translational_zero_one_loss(fan, data, a, t)
