from __future__ import annotations

import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize
from scipy.special import expit

from l2complexity.errors import (
    AlignmentMismatchError,
    DegenerateSelectionError,
    UndefinedCorrelationError,
    ValidationError,
)
from l2complexity.stats import (
    agreement_analysis,
    clm_loglik_derivatives,
    descriptive,
    fit_clm,
    near_zero_variance,
    pearson,
    rank_features,
    select_measures,
    spearman,
    summarize_rhos,
)
from l2complexity.transcript_io import ScoreTable

vectors = st.lists(st.integers(-5, 5), min_size=3, max_size=15).filter(lambda v: len(set(v)) > 1)


def table(rows: dict[str, list[float]], columns) -> ScoreTable:
    return ScoreTable(list(rows), list(columns), np.array(list(rows.values()), dtype=float))


# --- correlation ----------------------------------------------------------------


def test_spearman_examples():
    assert spearman([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)
    assert spearman([1, 2, 3], [6, 5, 4]) == pytest.approx(-1.0)
    assert spearman([1, 2, 2, 3], [1, 3, 2, 4]) == pytest.approx(0.9487, abs=1e-4)


def test_spearman_undefined():
    with pytest.raises(UndefinedCorrelationError):
        spearman([1, 1, 1], [1, 2, 3])
    with pytest.raises(UndefinedCorrelationError):
        spearman([1, 2], [1, 2])
    with pytest.raises(UndefinedCorrelationError):
        spearman([1, 2, float("nan"), 4], [1, float("nan"), 3, 4])


def test_pairwise_deletion():
    assert spearman([1, 2, float("nan"), 3, 4], [2, 4, 100, 6, 9]) == pytest.approx(1.0)


@given(vectors)
def test_spearman_self_and_negation(x):
    assert spearman(x, x) == pytest.approx(1.0)
    assert spearman(x, [-v for v in x]) == pytest.approx(-1.0)


@settings(max_examples=100)
@given(vectors, st.data())
def test_spearman_monotone_invariance(x, data):
    y = data.draw(st.lists(st.floats(-10, 10), min_size=len(x), max_size=len(x)).filter(lambda v: len(set(v)) > 1))
    base = spearman(x, y)
    assert spearman([math.exp(v / 3) for v in x], y) == pytest.approx(base, abs=1e-12)
    assert spearman(x, [v ** 3 + 2 * v for v in y]) == pytest.approx(base, abs=1e-12)


def test_pearson_matches_numpy():
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=30), rng.normal(size=30)
    assert pearson(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)


# --- descriptive / agreement ----------------------------------------------------


def test_descriptive_examples():
    t = ScoreTable(["a", "b", "c"], ["x", "empty", "single"],
                   np.array([[1, np.nan, 5], [2, np.nan, np.nan], [3, np.nan, np.nan]]))
    x, empty, single = descriptive(t)
    assert (x.mean, x.sd) == (2.0, 1.0)
    assert (empty.mean, empty.sd, empty.n) == (None, None, 0)
    assert (single.mean, single.sd) == (5.0, None)


def _scores(seed=0, n=12, k=5):
    rng = np.random.default_rng(seed)
    return ScoreTable([f"d{i}" for i in range(n)], [f"m{j}" for j in range(k)], rng.normal(size=(n, k)))


def test_self_agreement():
    t = _scores()
    report = agreement_analysis(t, t)
    assert all(r.rho_overall == pytest.approx(1.0) for r in report.results)
    assert report.summary["n_strong"] == 5


def test_monotone_distortion_keeps_rho_one():
    t = _scores(1)
    asr = ScoreTable(t.row_ids, t.columns, np.exp(t.values) * 3 + 1)
    report = agreement_analysis(t, asr)
    assert all(r.rho_overall == pytest.approx(1.0) for r in report.results)


def test_agreement_subgroups_and_order():
    t = _scores(2)
    shuffled = ScoreTable(t.row_ids[::-1], t.columns, t.values[::-1])
    groups = {rid: ("school" if i % 2 else "uni") for i, rid in enumerate(t.row_ids)}
    report = agreement_analysis(t, shuffled, groups)
    for r in report.results:
        assert r.rho_overall == pytest.approx(1.0)
        assert set(r.rho_by_subgroup) == {"school", "uni"}
    rows = report.long_rows()
    assert rows[0][1] == "overall"


def test_agreement_mismatch():
    a = _scores()
    b = ScoreTable(["x"] + a.row_ids[1:], a.columns, a.values)
    with pytest.raises(AlignmentMismatchError, match="d0"):
        agreement_analysis(a, b)


def test_constant_column_gives_undefined_rho():
    a = _scores()
    vals = a.values.copy()
    vals[:, 0] = 1.0
    t = ScoreTable(a.row_ids, a.columns, vals)
    report = agreement_analysis(t, t)
    assert report.results[0].rho_overall is None
    assert report.summary["n_undefined"] == 1


def test_summary_bands():
    s = summarize_rhos([0.9, 0.75, 0.65, 0.2, None])
    assert (s["n_strong"], s["n_moderate"], s["n_weak"], s["n_undefined"]) == (2, 1, 1, 1)
    assert s["mean_rho"] == pytest.approx(0.625)
    assert s["sd_rho"] == pytest.approx(np.std([0.9, 0.75, 0.65, 0.2], ddof=1))


# --- selection ------------------------------------------------------------------


def test_near_zero_variance_rule():
    assert near_zero_variance([1.0] * 20)
    assert near_zero_variance([0.0] * 39 + [1.0])
    assert not near_zero_variance(list(range(20)))


def test_constant_column_removed_first():
    rng = np.random.default_rng(3)
    vals = np.column_stack([rng.normal(size=30), np.ones(30), rng.normal(size=30)])
    res = select_measures(ScoreTable([str(i) for i in range(30)], ["a", "const", "b"], vals))
    assert res.removed_nzv == ["const"]
    assert res.retained == ["a", "b"]
    assert res.removed_corr == []


def test_all_nzv_is_degenerate():
    with pytest.raises(DegenerateSelectionError):
        select_measures(ScoreTable(["1", "2", "3"], ["a", "b"], np.ones((3, 2))))


def test_selection_preconditions():
    with pytest.raises(ValidationError):
        select_measures(ScoreTable(["1", "2", "3"], ["a"], np.ones((3, 1))))
    with pytest.raises(ValidationError):
        select_measures(ScoreTable(["1", "2"], ["a", "b"], np.ones((2, 2))))


# --- CLM ------------------------------------------------------------------------


def negative_loglik_oracle(params, z, y, J):
    """Independent proportional-odds likelihood, thresholds given directly."""
    beta, theta = params[0], np.sort(params[1:])
    upper = np.append(theta, np.inf)
    lower = np.insert(theta, 0, -np.inf)
    p = expit(upper[y] - beta * z) - expit(lower[y] - beta * z)
    return -np.sum(np.log(np.maximum(p, 1e-300)))


def test_balanced_independent_three_classes():
    y = np.repeat([1, 2, 3], 20)
    x = np.tile(np.arange(20.0), 3)
    fit = fit_clm(x, y)
    assert fit.beta == pytest.approx(0.0, abs=1e-8)
    assert fit.thresholds == pytest.approx((-math.log(2), math.log(2)), abs=1e-6)
    assert fit.fi == pytest.approx(2 * math.log(2), abs=1e-6)


def test_fit_matches_generic_optimizer():
    rng = np.random.default_rng(11)
    for _ in range(5):
        n, J = 80, 4
        x = rng.normal(size=n)
        y = np.clip(np.round(1.2 * x + rng.logistic(size=n) + 2.5), 1, J).astype(int)
        fit = fit_clm(x, y)
        z = (x - x.mean()) / x.std(ddof=1)
        start = np.concatenate([[0.0], np.linspace(-1, 1, J - 1)])
        ref = minimize(negative_loglik_oracle, start, args=(z, y - 1, J), method="BFGS",
                       options={"gtol": 1e-10})
        assert fit.converged
        assert fit.beta == pytest.approx(ref.x[0], abs=1e-4)
        assert fit.thresholds == pytest.approx(tuple(np.sort(ref.x[1:])), abs=1e-4)
        assert fit.loglik == pytest.approx(-ref.fun, abs=1e-6)


def test_analytic_derivatives_match_finite_differences():
    rng = np.random.default_rng(4)
    z, y, J = rng.normal(size=40), rng.integers(0, 3, size=40), 3
    theta, beta = np.array([-0.5, 0.8]), 0.3
    ll, g, H = clm_loglik_derivatives(theta, beta, z, y, J)
    params = np.concatenate([[beta], theta])

    def f(p):
        return clm_loglik_derivatives(p[1:], p[0], z, y, J)[0]

    h = 1e-6
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        assert g[k] == pytest.approx((f(params + e) - f(params - e)) / (2 * h), abs=1e-6)


def test_loglik_trace_non_decreasing():
    rng = np.random.default_rng(5)
    x = rng.normal(size=60)
    y = np.digitize(x + rng.normal(size=60), [-0.5, 0.5]) + 1
    trace = fit_clm(x, y).loglik_trace
    assert all(b >= a - 1e-12 for a, b in zip(trace, trace[1:]))


def test_sign_flip_preserves_fi():
    rng = np.random.default_rng(6)
    for _ in range(20):
        x = rng.normal(size=50)
        y = np.digitize(0.8 * x + rng.logistic(size=50), [-1, 0, 1]) + 1
        a, b = fit_clm(x, y), fit_clm(-x, y)
        assert a.fi == pytest.approx(b.fi, abs=1e-6)
        assert a.beta == pytest.approx(-b.beta, abs=1e-6)


def test_complete_separation_flagged():
    fit = fit_clm(np.arange(12.0), np.repeat([1, 2, 3], 4))
    assert fit.separated and not fit.converged
    assert abs(fit.beta) == 30.0


def test_single_class_rejected():
    with pytest.raises(ValidationError):
        fit_clm([1.0, 2.0, 3.0], [1, 1, 1])


def test_rank_features(caplog):
    rng = np.random.default_rng(7)
    n = 40
    labels = rng.integers(10, 13, size=n)
    strong = labels + rng.normal(scale=0.6, size=n)
    weak = rng.normal(size=n)
    vals = np.column_stack([weak, strong, 5 * strong - 2, np.full(n, 3.0)])
    t = ScoreTable([f"d{i}" for i in range(n)], ["weak", "strong", "affine", "const"], vals)
    with caplog.at_level(logging.WARNING):
        ranking = rank_features(t, {f"d{i}": int(v) for i, v in enumerate(labels)})
    assert "const" in ranking.skipped
    assert "const" in caplog.text
    fis = [e.fi for e in ranking.entries]
    assert fis == sorted(fis, reverse=True)
    by_name = {e.measure: e for e in ranking.entries}
    assert by_name["strong"].fi == pytest.approx(by_name["affine"].fi, abs=1e-6)
    assert ranking.mean_fi == pytest.approx(np.mean(fis))
    assert ranking.above_mean(by_name["strong"])


def test_rank_requires_labels_for_every_row():
    t = _scores()
    with pytest.raises(AlignmentMismatchError):
        rank_features(t, {"d0": 1})
