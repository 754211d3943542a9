import math

import numpy as np
import pytest

from starfan.core.loss import (
    data_matrix,
    joint_loss,
    log_likelihood,
    log_likelihood_grad,
    log_likelihood_hess,
    translational_log_likelihood,
    translational_zero_one_loss,
    zero_one_loss,
)
from starfan.core.star import classify_many
from starfan.data.models import LabeledDataset
from starfan.data.samples import LINE_LABELS
from starfan.infra.errors import UndefinedAtZero
from starfan.utils import log1mexp


def random_problem(rng, fan, m=30):
    points = rng.uniform(-2.0, 2.0, size=(m, fan.dim))
    labels = rng.integers(0, 2, size=m)
    labels[0] = 1
    return data_matrix(fan, LabeledDataset(points, labels)), labels


def fd_gradient(fn, a, h=1e-6):
    g = np.zeros_like(a)
    for j in range(len(a)):
        step = np.zeros_like(a)
        step[j] = h
        g[j] = (fn(a + step) - fn(a - step)) / (2 * h)
    return g


def test_line_rows(line_matrix):
    expected = [[4, 0], [3, 0], [2, 0], [1, 0], [0, 1], [0, 2], [0, 3], [0, 4]]
    assert line_matrix.dense().tolist() == expected


def test_origin_row_is_empty(typeb2):
    A = data_matrix(typeb2, LabeledDataset([[0.0, 0.0], [1.0, 0.0]], [0, 1]))
    assert A.matrix[0].nnz == 0


def test_diagonal_rows(diagonal):
    fan, data, _ = diagonal
    dense = data_matrix(fan, data).dense()
    expected = np.zeros((3, 8))
    expected[:, 1] = [1, 2, 3]
    assert np.allclose(dense, expected)


def test_matrix_matches_evaluate(typeb2, rng):
    A, _ = random_problem(rng, typeb2)
    a = rng.uniform(0.1, 3.0, size=typeb2.n)
    assert np.allclose(A.values(a), typeb2.coords_many(A.dense() @ typeb2.rays) @ a, rtol=1e-12)


@pytest.mark.parametrize(
    "a, fp, fn",
    [((1 / 8, 1 / 8), 0, 3), ((2 / 7, 3 / 7), 0, 0), ((6 / 5, 5 / 4), 5, 0)],
)
def test_zero_one_loss_complemented(line_matrix, a, fp, fn):
    report = zero_one_loss(line_matrix, LINE_LABELS["complemented"], a)
    assert (report.fp, report.fn, report.err) == (fp, fn, fp + fn)


def test_loss_report_accuracy(line_matrix):
    report = zero_one_loss(line_matrix, LINE_LABELS["complemented"], (6 / 5, 5 / 4))
    assert report.accuracy == pytest.approx(3 / 8)
    assert report.per_point.tolist() == [1] * 8


def test_log_likelihood_by_hand(line_matrix):
    lam = 0.5
    expected = sum(math.log(1 - math.exp(-lam * k)) for k in (3, 2, 1, 1, 2)) - lam * 4 - lam * (3 + 4)
    value = log_likelihood(line_matrix, LINE_LABELS["listed"], (1.0, 1.0), lam)
    assert value == pytest.approx(expected, rel=1e-12)
    assert value == pytest.approx(-8.5353, abs=1e-4)


def test_rate_and_scale_trade_places(typeb2, rng):
    A, y = random_problem(rng, typeb2)
    for _ in range(20):
        a = rng.uniform(0.2, 2.0, size=typeb2.n)
        lam, t = rng.uniform(0.2, 3.0), rng.uniform(0.2, 5.0)
        assert log_likelihood(A, y, a, t * lam) == pytest.approx(log_likelihood(A, y, t * a, lam), rel=1e-10)


def test_single_negative_is_linear(line_fan):
    A = data_matrix(line_fan, LabeledDataset([[2.0]], [0]))
    assert log_likelihood(A, [0], (1.0, 0.7), 1.5) == pytest.approx(-1.5 * 2 * 0.7)


def test_positive_point_at_center(line_fan):
    A = data_matrix(line_fan, LabeledDataset([[0.0], [1.0]], [1, 0]))
    with pytest.raises(UndefinedAtZero) as excinfo:
        log_likelihood(A, [1, 0], (1.0, 1.0), 1.0)
    assert excinfo.value.index == 0


def test_lambda_must_be_positive(line_matrix):
    with pytest.raises(ValueError):
        log_likelihood(line_matrix, LINE_LABELS["listed"], (1.0, 1.0), 0.0)


def test_log1mexp_both_branches():
    z = np.array([1e-12, 0.1, math.log(2.0), 5.0, 50.0])
    expected = np.array([math.log(-math.expm1(-v)) for v in z])
    assert np.allclose(log1mexp(z), expected, rtol=1e-14)


def test_gradient_matches_finite_differences(typeb2, rng):
    for _ in range(100):
        A, y = random_problem(rng, typeb2, m=12)
        a = rng.uniform(0.3, 2.0, size=typeb2.n)
        lam = rng.uniform(0.2, 3.0)
        g = log_likelihood_grad(A, y, a, lam)
        fd = fd_gradient(lambda b: log_likelihood(A, y, b, lam), a)
        assert np.linalg.norm(g - fd) <= 1e-6 * max(1.0, np.linalg.norm(g))


def test_gradient_of_negatives_is_constant(line_fan, rng):
    data = LabeledDataset([[-2.0], [1.0], [3.0]], [0, 0, 0])
    A = data_matrix(line_fan, data)
    for a in rng.uniform(0.1, 5.0, size=(5, 2)):
        assert np.allclose(log_likelihood_grad(A, [0, 0, 0], a, 0.7), -0.7 * np.array([2.0, 4.0]))


def test_hessian_matches_gradient_differences(typeb2, rng):
    for _ in range(20):
        A, y = random_problem(rng, typeb2, m=12)
        a = rng.uniform(0.3, 2.0, size=typeb2.n)
        lam = rng.uniform(0.2, 3.0)
        H = log_likelihood_hess(A, y, a, lam)
        fd = np.column_stack([
            fd_gradient(lambda b: log_likelihood_grad(A, y, b, lam)[i], a) for i in range(typeb2.n)
        ])
        assert np.linalg.norm(H - fd) <= 1e-5 * max(1.0, np.linalg.norm(H))


def test_hessian_without_positives(line_fan):
    A = data_matrix(line_fan, LabeledDataset([[-2.0], [1.0]], [0, 0]))
    assert not log_likelihood_hess(A, [0, 0], (1.0, 1.0), 2.0).any()


def test_hessian_negative_semidefinite(typeb2, rng):
    for _ in range(100):
        A, y = random_problem(rng, typeb2, m=15)
        a = rng.uniform(0.05, 3.0, size=typeb2.n)
        H = log_likelihood_hess(A, y, a, rng.uniform(0.1, 4.0))
        assert np.linalg.eigvalsh(H).max() <= 1e-10 * max(1.0, np.abs(H).max())


def test_midpoint_concavity(typeb2, rng):
    A, y = random_problem(rng, typeb2, m=25)
    for _ in range(1000):
        a1 = rng.uniform(0.05, 4.0, size=typeb2.n)
        a2 = rng.uniform(0.05, 4.0, size=typeb2.n)
        lam = rng.uniform(0.1, 4.0)
        mid = log_likelihood(A, y, (a1 + a2) / 2, lam)
        assert mid >= (log_likelihood(A, y, a1, lam) + log_likelihood(A, y, a2, lam)) / 2 - 1e-9


def test_false_positives_up_false_negatives_down(typeb2, rng):
    A, y = random_problem(rng, typeb2, m=40)
    for _ in range(200):
        a = rng.uniform(0.05, 3.0, size=typeb2.n)
        bigger = a + rng.uniform(0.0, 2.0, size=typeb2.n) * (rng.random(typeb2.n) < 0.5)
        before, after = zero_one_loss(A, y, a), zero_one_loss(A, y, bigger)
        assert before.fp <= after.fp
        assert before.fn >= after.fn


def test_translation_zero_is_plain_loss(typeb2, rng):
    points = rng.normal(size=(20, 2))
    data = LabeledDataset(points, rng.integers(0, 2, size=20))
    a = rng.uniform(0.3, 2.0, size=8)
    plain = zero_one_loss(data_matrix(typeb2, data), data.labels, a)
    shifted = translational_zero_one_loss(typeb2, data, a, [0.0, 0.0])
    assert (plain.fp, plain.fn) == (shifted.fp, shifted.fn)


def test_translation_equals_shifted_data(typeb2, rng):
    data = LabeledDataset(rng.normal(size=(20, 2)), rng.integers(0, 2, size=20))
    a, t = rng.uniform(0.3, 2.0, size=8), rng.normal(size=2)
    moved = data.shifted(t)
    assert translational_zero_one_loss(typeb2, data, a, t).err == zero_one_loss(data_matrix(typeb2, moved), moved.labels, a).err


def test_diagonal_translations(diagonal):
    fan, data, a = diagonal
    assert translational_zero_one_loss(fan, data, a, (2.9, 0.9)).err == 0
    at_origin = joint_loss(fan, data, a, (0.0, 0.0))
    assert at_origin.err >= 1
    assert at_origin.per_point.tolist() == classify_many(fan, a, data.points).tolist()


def test_translational_likelihood_at_zero_shift(typeb2, rng):
    data = LabeledDataset(rng.normal(size=(15, 2)), rng.integers(0, 2, size=15))
    a = rng.uniform(0.3, 2.0, size=8)
    expected = log_likelihood(data_matrix(typeb2, data), data.labels, a, 1.3)
    assert translational_log_likelihood(typeb2, data, a, [0.0, 0.0], 1.3) == pytest.approx(expected, rel=1e-12)


def test_translational_likelihood_concave_inside_a_cell(typeb2, rng):
    data = LabeledDataset(rng.normal(scale=2.0, size=(10, 2)), rng.integers(0, 2, size=10))
    a = rng.uniform(0.3, 2.0, size=8)
    checked = 0
    while checked < 50:
        t1 = rng.normal(size=2)
        t2 = t1 + rng.normal(scale=0.05, size=2)
        path = [t1 + w * (t2 - t1) for w in np.linspace(0, 1, 9)]
        cones = [typeb2.locate_many(data.points - t)[0] for t in path]
        if any(not np.array_equal(cones[0], c) for c in cones):
            continue
        try:
            ends = [translational_log_likelihood(typeb2, data, a, t, 0.8) for t in (t1, t2)]
        except UndefinedAtZero:
            continue
        mid = translational_log_likelihood(typeb2, data, a, (t1 + t2) / 2, 0.8)
        assert mid >= sum(ends) / 2 - 1e-9
        checked += 1


def test_translational_likelihood_diverges_at_positive_point(diagonal):
    fan, data, a = diagonal
    near = [translational_log_likelihood(fan, data, a, data.points[1] + eps, 1.0) for eps in (1e-1, 1e-3, 1e-6)]
    assert near[0] > near[1] > near[2]
    with pytest.raises(UndefinedAtZero):
        translational_log_likelihood(fan, data, a, data.points[1], 1.0)
