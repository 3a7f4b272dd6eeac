import numpy as np
import pytest

import sparselowrank.completion as completion_mod
from sparselowrank.bench.generators import gen_lowrank, gen_mask
from sparselowrank.completion import CompletionProblem, complete, gradient, objective
from sparselowrank.core import NumericalError, ObservationMask, relative_error
from sparselowrank.prox import svt
from sparselowrank.regularizers import RegularizerSpec


@pytest.fixture(scope="module")
def planted():
    O = gen_lowrank(150, 150, 10, 11)
    mask = gen_mask(150, 150, 0.5, 12)
    prob = CompletionProblem(mask, mask.project(O))
    X, trace = complete(prob)
    return O, prob, X, trace


def test_zero_data_converges_in_one_step():
    mask = gen_mask(20, 20, 0.5, 0)
    X, trace = complete(CompletionProblem(mask, np.zeros((20, 20))))
    assert np.all(X == 0)
    assert len(trace) == 1


def test_fully_observed_rank_one_matches_svt_fixed_point():
    rng = np.random.default_rng(5)
    u = rng.standard_normal(30)
    v = rng.standard_normal(25)
    O = 10 * np.outer(u / np.linalg.norm(u), v / np.linalg.norm(v))
    mask = ObservationMask.from_bool(np.ones(O.shape, dtype=bool))
    X, _ = complete(CompletionProblem(mask, O, spec=RegularizerSpec.nuclear(1e-3)))
    assert relative_error(X, O) <= 1e-3
    # with every entry observed the minimizer is SVT of the data at threshold lambda
    np.testing.assert_allclose(X, svt(O, 1e-3), atol=1e-9)


def test_planted_recovery(planted):
    O, _, X, _ = planted
    assert relative_error(X, O) <= 1e-6


def test_objective_nonincreasing(planted):
    obj = np.array(planted[3].objective)
    assert np.all(np.diff(obj) <= 1e-10 * np.maximum(1.0, np.abs(obj[:-1])))


def test_on_mask_gradient_vanishes(planted):
    O, prob, X, trace = planted
    assert trace.step[-1] < prob.step_tol
    g = gradient(prob, X)
    assert np.linalg.norm(g) <= 1e-6 * np.linalg.norm(prob.observed)


def test_gradient_finite_differences():
    rng = np.random.default_rng(6)
    mask = gen_mask(12, 9, 0.6, 1)
    O = rng.standard_normal((12, 9))
    prob = CompletionProblem(mask, mask.project(O), spec=RegularizerSpec.nuclear())
    X = rng.standard_normal((12, 9))
    G = gradient(prob, X)

    def f(Y):
        r = mask.project(Y) - prob.observed
        return 0.5 * np.sum(r * r)

    h = 1e-6
    for _ in range(20):
        i, j = rng.integers(12), rng.integers(9)
        E = np.zeros_like(X)
        E[i, j] = h
        fd = (f(X + E) - f(X - E)) / (2 * h)
        assert fd == pytest.approx(G[i, j], abs=1e-6)


def test_objective_includes_penalty():
    mask = ObservationMask.from_bool(np.ones((3, 3), dtype=bool))
    spec = RegularizerSpec.nuclear(2.0)
    prob = CompletionProblem(mask, np.eye(3), spec=spec)
    assert objective(prob, np.zeros((3, 3))) == pytest.approx(1.5)
    assert objective(prob, np.eye(3)) == pytest.approx(6.0)


def test_problem_validation():
    mask = ObservationMask((2, 2), [(0, 0)])
    with pytest.raises(ValueError):
        CompletionProblem(mask, np.ones((2, 2)))
    with pytest.raises(ValueError):
        CompletionProblem(mask, np.zeros((2, 2)), mu=0.5)
    with pytest.raises(ValueError):
        CompletionProblem(mask, np.zeros((3, 2)))


def test_svd_failure_reports_iteration(monkeypatch):
    mask = gen_mask(10, 10, 0.5, 0)
    prob = CompletionProblem(mask, mask.project(np.ones((10, 10))))

    def broken(*args, **kwargs):
        raise NumericalError("no convergence")

    monkeypatch.setattr(completion_mod, "gsvt_factors", broken)
    with pytest.raises(NumericalError, match="iteration 0"):
        complete(prob)
