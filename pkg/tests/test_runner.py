import numpy as np
import pytest

from starfan.core.loss import data_matrix, zero_one_loss
from starfan.data.generator import sample_star_dataset
from starfan.data.models import FitResult, FitStatus, GenSpec, LossReport, ParamVector, SweepEntry
from starfan.data.samples import LINE_LABELS
from starfan.data.service import split_dataset
from starfan.infra.errors import SolverError
from starfan.optimization import runner
from starfan.optimization.mle import MLEOptimizer
from starfan.optimization.runner import LambdaSweepRunner, lambda_sweep, parse_lambdas
from starfan.optimization.selection import select_best_fit

LISTED = LINE_LABELS["listed"]


def entry(lam, err, objective, holdout_err=None, m=8):
    fit = FitResult(
        a_star=ParamVector([1.0, 1.0]),
        objective=objective,
        iterations=1,
        grad_norm=0.0,
        status=FitStatus.CONVERGED,
        lam=lam,
    )
    report = LossReport(fp=err, fn=0, err=err, per_point=np.zeros(m, dtype=np.int8))
    held = None
    if holdout_err is not None:
        held = LossReport(fp=holdout_err, fn=0, err=holdout_err, per_point=np.zeros(4, dtype=np.int8))
    return SweepEntry(lam=lam, fit=fit, report=report, holdout=held)


def test_parse_comma_list():
    assert parse_lambdas("0.25, 0.5,1") == [0.25, 0.5, 1.0]


def test_parse_geometric_grid():
    values = parse_lambdas("geom:0.1:10:3")
    assert values == pytest.approx([0.1, 1.0, 10.0])


@pytest.mark.parametrize("text", ["", "geom:0:1:3", "geom:2:1:3", "geom:1:2", "a,b"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        parse_lambdas(text)


def test_unsorted_lambdas(line_matrix):
    with pytest.raises(ValueError):
        lambda_sweep(line_matrix, LISTED, [1.0, 0.5])


def test_nonpositive_lambdas(line_matrix):
    with pytest.raises(ValueError):
        lambda_sweep(line_matrix, LISTED, [0.0, 0.5])


def test_sweep_matches_independent_fits(line_matrix):
    lambdas = [0.3, 0.7, 1.9]
    entries = lambda_sweep(line_matrix, LISTED, lambdas)
    optimizer = MLEOptimizer()
    for e, lam in zip(entries, lambdas):
        cold = optimizer.fit(line_matrix, LISTED, lam)
        assert e.lam == lam
        assert e.fit.a_star.values == pytest.approx(cold.a_star.values, rel=1e-7)
        assert e.report.err == zero_one_loss(line_matrix, LISTED, cold.a_star).err


def test_warm_start_follows_the_scaling_ray(line_matrix, monkeypatch):
    starts = []
    original = MLEOptimizer.fit

    def spy(self, A, labels, lam, a0=None):
        starts.append(None if a0 is None else np.array(a0))
        return original(self, A, labels, lam, a0=a0)

    monkeypatch.setattr(MLEOptimizer, "fit", spy)
    entries = lambda_sweep(line_matrix, LISTED, [0.5, 1.0])
    assert starts[0] is None
    assert starts[1] == pytest.approx(entries[0].fit.a_star.values / 2)
    assert entries[1].fit.iterations <= 3


def test_failed_lambda_is_recorded(line_matrix, monkeypatch):
    original = MLEOptimizer.fit

    def flaky(self, A, labels, lam, a0=None):
        if lam == 1.0:
            raise SolverError("line search broke")
        return original(self, A, labels, lam, a0=a0)

    monkeypatch.setattr(MLEOptimizer, "fit", flaky)
    entries = runner.lambda_sweep(line_matrix, LISTED, [0.5, 1.0, 2.0])
    assert [e.error is None for e in entries] == [True, False, True]
    assert entries[1].fit is None
    assert "line search broke" in entries[1].to_dict()["error"]
    assert entries[2].fit.status == FitStatus.CONVERGED


def test_holdout_is_scored(line_fan, line_listed):
    train, held = split_dataset(line_listed, 0.25, seed=3)
    A = data_matrix(line_fan, train)
    H = data_matrix(line_fan, held)
    entries = LambdaSweepRunner().run(A, train.labels, [0.5, 1.0], holdout=(H, held.labels))
    assert all(e.holdout.m == held.m for e in entries)
    assert entries[0].to_dict()["holdout"]["err"] == entries[0].holdout.err


def test_select_by_accuracy_first():
    best = select_best_fit([entry(0.5, 3, -1.0), entry(1.0, 1, -9.0), entry(2.0, 2, -0.5)])
    assert best.lam == 1.0


def test_select_ties_by_objective_then_lambda():
    best = select_best_fit([entry(2.0, 1, -4.0), entry(0.5, 1, -2.0), entry(1.0, 1, -2.0)])
    assert best.lam == 0.5


def test_select_prefers_holdout_accuracy():
    best = select_best_fit([entry(0.5, 0, -1.0, holdout_err=3), entry(1.0, 4, -2.0, holdout_err=0)])
    assert best.lam == 1.0


def test_select_skips_failures():
    failed = SweepEntry(lam=0.1, fit=None, report=None, error="boom")
    assert select_best_fit([failed]) is None
    assert select_best_fit([failed, entry(1.0, 2, -1.0)]).lam == 1.0


def test_generated_star_is_recovered_by_the_sweep(typeb2):
    data = sample_star_dataset(GenSpec(count=500, noise=0.9, seed=0), typeb2)
    train, held = split_dataset(data, 0.2, seed=0)
    A = data_matrix(typeb2, train)
    entries = lambda_sweep(
        A, train.labels, parse_lambdas("geom:0.1:5:25"), holdout=(data_matrix(typeb2, held), held.labels)
    )
    best = select_best_fit(entries)
    assert best.holdout.accuracy >= 0.8
