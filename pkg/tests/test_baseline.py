import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbrnmf import (
    BaselineModel,
    ConfigError,
    FitConfig,
    SimParams,
    Termination,
    baseline_as_model,
    evaluate_recovery,
    init_baseline,
    nmf_fit,
    nmf_update_step,
    simulate,
)
from helpers import naive_matmul, rel_err


def _random_pair(seed, n, p, q):
    rng = np.random.default_rng(seed)
    return (
        rng.uniform(0, 1, (n, p)),
        BaselineModel(w=rng.uniform(0.1, 1, (n, q)), h=rng.uniform(0.1, 1, (q, p))),
    )


def test_exact_factorization_is_a_fixed_point():
    rng = np.random.default_rng(1)
    w = rng.uniform(0.1, 1, (5, 2))
    h = rng.uniform(0.1, 1, (2, 6))
    x = w @ h
    stepped = nmf_update_step(x, BaselineModel(w=w, h=h))
    assert rel_err(stepped.w, w) <= 1e-12
    assert rel_err(stepped.h, h) <= 1e-12


def test_zeros_are_absorbing():
    x, model = _random_pair(2, 5, 6, 2)
    w = model.w.copy()
    w[3, 1] = 0.0
    h = model.h.copy()
    h[0, 4] = 0.0
    model = BaselineModel(w=w, h=h)
    for _ in range(10):
        model = nmf_update_step(x, model)
        assert model.w[3, 1] == 0.0
        assert model.h[0, 4] == 0.0


def test_single_step_matches_elementwise_oracle():
    x, model = _random_pair(3, 5, 6, 2)
    w, h = model.w, model.h

    # direct evaluation of the update quotients with a naive product
    h_num = naive_matmul(w.T, x)
    h_den = naive_matmul(naive_matmul(w.T, w), h)
    h_new = h * (h_num / np.maximum(h_den, 1e-12))
    w_num = naive_matmul(x, h_new.T)
    w_den = naive_matmul(w, naive_matmul(h_new, h_new.T))
    w_new = w * (w_num / np.maximum(w_den, 1e-12))

    stepped = nmf_update_step(x, model)
    assert rel_err(stepped.h, h_new) <= 1e-12
    assert rel_err(stepped.w, w_new) <= 1e-12


def test_recovers_exact_rank_one_data():
    rng = np.random.default_rng(4)
    x = np.outer(rng.uniform(0.5, 1.5, 8), rng.uniform(0.5, 1.5, 9))
    model, report = nmf_fit(x, 1, FitConfig(delta=0.0, max_iter=2000, seed=0))
    x_norm2 = float((x**2).sum())
    assert report.final_objective <= 1e-8 * x_norm2


def test_zero_iteration_budget_returns_initialization():
    rng = np.random.default_rng(5)
    x = rng.uniform(0, 1, (4, 5))
    config = FitConfig(delta=0.0, max_iter=0, seed=77)
    model, report = nmf_fit(x, 2, config)
    init = init_baseline(x, 2, config)
    np.testing.assert_array_equal(model.w, init.w)
    np.testing.assert_array_equal(model.h, init.h)
    assert report.objective_trace.size == 0
    assert report.iterations_run == 0
    assert report.termination is Termination.MAX_ITERATIONS


@pytest.mark.parametrize("q", [0, -1, 5])
def test_invalid_rank_is_a_config_error(q):
    x = np.ones((4, 4))
    with pytest.raises(ConfigError):
        nmf_fit(x, q, FitConfig(max_iter=1))


@settings(deadline=None, max_examples=20)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 8), p=st.integers(2, 8))
def test_trajectory_never_increases_and_stays_nonnegative(seed, n, p):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 1, (n, p))
    q = int(rng.integers(1, min(n, p) + 1))
    model, report = nmf_fit(x, q, FitConfig(delta=0.0, max_iter=60, seed=seed))
    trace = report.objective_trace
    assert (trace[1:] <= trace[:-1] + 1e-10 * np.maximum(1.0, trace[:-1])).all()
    assert (model.w >= 0).all() and (model.h >= 0).all()


def test_fit_recovers_factors_on_simulated_data():
    # benchmark-style data: the matched per-factor basis error of an
    # unconstrained fit is small but clearly nonzero
    truth = simulate(SimParams(n=60, p=120, g=4, q=7, shared_constrained=1, seed=21))
    model, _ = nmf_fit(truth.x, 7, FitConfig(delta=0.0, max_iter=2000, seed=1))
    report = evaluate_recovery(
        baseline_as_model(model.w, model.h), truth, mode="free-matched"
    )
    per_factor = [v for _, _, v in report.pairs]
    assert 0.0 < float(np.median(per_factor)) < 1e-2
