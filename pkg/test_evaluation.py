"""
Tests de métricas, rangos y contrastes (Friedman + Hochberg).
Archivo: test_evaluation.py
"""
import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from src.errors import DomainError
from src.evaluation import (
    aggregate,
    average_ranks,
    compare_methods,
    format_stat_report,
    friedman_test,
    hochberg_adjust,
    mase,
    needs_modified_smape,
    posthoc_pvalues,
    smape,
    smape_modified,
)

positive = st.floats(0.01, 1e6, allow_nan=False, allow_infinity=False)
non_negative = st.floats(0.0, 1e6, allow_nan=False, allow_infinity=False)


# ----------------------------
# Métricas
# ----------------------------
def test_smape_examples():
    assert smape([3.0, 4.0], [3.0, 4.0]) == 0.0
    assert smape([11.0], [9.0]) == pytest.approx(0.2, abs=1e-12)
    with pytest.raises(DomainError, match="smape_modified"):
        smape([0.0], [0.0])


def test_smape_modified_examples():
    assert smape_modified([0.0], [0.0]) == 0.0
    assert smape_modified([1.0], [0.0]) == pytest.approx(2 / 1.1, abs=1e-12)
    assert smape_modified([1.0], [0.0], epsilon=0.1) == smape_modified([1.0], [0.0])


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(positive, positive), min_size=1, max_size=20))
def test_smape_symmetric_and_bounded(pairs):
    f, a = np.array(pairs).T
    assert smape(f, a) == pytest.approx(smape(a, f), rel=1e-12)
    assert 0.0 <= smape(f, a) <= 2.0
    assert 0.0 <= smape_modified(f, a) <= 2.0


def test_smape_bounds_on_many_pairs():
    rng = np.random.default_rng(0)
    f = rng.exponential(10, 1_000_000)
    a = rng.exponential(10, 1_000_000)
    terms = 2 * np.abs(f - a) / (np.abs(f) + np.abs(a))
    assert terms.min() >= 0 and terms.max() <= 2
    mod = 2 * np.abs(f - a) / np.maximum(np.abs(f) + np.abs(a) + 0.1, 0.6)
    assert mod.max() <= 2


def test_mase_examples():
    assert mase([3.0], [3.0], [1, 2, 3, 4], 1) == 0.0
    assert mase([5.0], [6.0], [1, 2, 3, 4], 1) == 1.0
    with pytest.raises(DomainError, match="degenerado"):
        mase([1.0], [2.0], [1, 2, 1, 2], 2)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.tuples(non_negative, non_negative), min_size=1, max_size=10),
    st.lists(non_negative, min_size=6, max_size=30),
    st.floats(0.01, 100),
)
def test_mase_scale_invariant(pairs, train, c):
    f, a = np.array(pairs).T
    train = np.array(train)
    if np.mean(np.abs(train[2:] - train[:-2])) < 1e-6:
        return
    assert mase(c * f, c * a, c * train, 2) == pytest.approx(mase(f, a, train, 2), rel=1e-9, abs=1e-12)


def test_needs_modified_smape():
    assert needs_modified_smape([1.0, 2.0], [0.3])
    assert not needs_modified_smape([1.0, 2.0], [0.5, 7.0])


# ----------------------------
# Agregados y rangos
# ----------------------------
def test_aggregate_examples():
    m = pd.DataFrame({"A": [1.0, 2.0, 3.0], "B": [1.0, 2.0, 3.0]})
    agg = aggregate(m)
    assert agg.loc["A", "mean"] == 2.0 and agg.loc["A", "median"] == 2.0
    agg = aggregate(pd.DataFrame({"A": [1.0, 2.0, 3.0, 10.0]}))
    assert agg.loc["A", "mean"] == 4.0 and agg.loc["A", "median"] == 2.5
    one = aggregate(pd.DataFrame({"A": [0.7], "B": [0.2]}))
    assert list(one["mean"]) == list(one["median"]) == [0.7, 0.2]


def test_average_ranks_examples():
    r = average_ranks(pd.DataFrame({"A": [1.0, 1.0, 2.0], "B": [2.0, 3.0, 5.0]}))
    assert list(r) == [1.0, 2.0]
    r = average_ranks(pd.DataFrame({"A": [1.0], "B": [1.0], "C": [1.0]}))
    assert list(r) == [2.0, 2.0, 2.0]
    r = average_ranks(pd.DataFrame([[1.0, 2.0, 3.0], [3.0, 2.0, 1.0]], columns=list("ABC")))
    assert list(r) == [2.0, 2.0, 2.0]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.integers(0, 50), min_size=4, max_size=4), min_size=1, max_size=10))
def test_ranks_invariant_under_monotone_transform(rows):
    m = pd.DataFrame(rows, columns=list("ABCD"), dtype=float)
    pd.testing.assert_series_equal(average_ranks(m), average_ranks(np.exp(m)))


# ----------------------------
# Friedman
# ----------------------------
def test_friedman_perfect_agreement():
    m = pd.DataFrame([[1.0, 2.0, 3.0]] * 4, columns=list("ABC"))
    statistic, p = friedman_test(m)
    assert statistic == pytest.approx(8.0, abs=1e-12)
    assert p == pytest.approx(math.exp(-4.0), abs=1e-12)


def test_friedman_row_permutation_invariant():
    rng = np.random.default_rng(1)
    m = pd.DataFrame(rng.normal(size=(30, 4)))
    assert friedman_test(m)[0] == pytest.approx(friedman_test(m.sample(frac=1.0, random_state=3))[0], rel=1e-12)


def test_friedman_random_permutations_mostly_not_significant():
    rng = np.random.default_rng(2)
    non_sig = 0
    for _ in range(100):
        rows = np.array([rng.permutation(3) for _ in range(1000)], dtype=float)
        _, p = friedman_test(pd.DataFrame(rows))
        non_sig += p > 0.05
    assert non_sig > 50


def _chi2_sf_series(x, k):
    """Cola superior por la serie de la gamma incompleta regularizada inferior."""
    s, z = k / 2.0, x / 2.0
    if z == 0:
        return 1.0
    term = math.exp(s * math.log(z) - z - math.lgamma(s + 1))
    total, n = term, 0
    while term > 1e-18 * total:
        n += 1
        term *= z / (s + n)
        total += term
    return 1.0 - total


@pytest.mark.parametrize("x,k", [(x, k) for x in (0.1, 0.5, 1.0, 2.5, 4.0) for k in (1, 2, 3, 5)])
def test_chi2_tail_matches_series(x, k):
    assert abs(stats.chi2.sf(x, k) - _chi2_sf_series(x, k)) < 1e-8


def test_chi2_tail_at_zero():
    m = pd.DataFrame([[1.0, 1.0], [2.0, 2.0]])
    assert friedman_test(m) == (0.0, 1.0)


# ----------------------------
# Post-hoc / Hochberg
# ----------------------------
def test_posthoc_equal_ranks():
    p = posthoc_pvalues(pd.Series({"A": 2.0, "B": 2.0}), 10, 2)
    assert p == {"B": 1.0}


def test_posthoc_z_formula():
    ranks = pd.Series({"ctrl": 5.0, "other": 6.14})
    p = posthoc_pvalues(ranks, 957, 24)["other"]
    z = 1.14 / math.sqrt(24 * 25 / (6 * 957))
    assert z == pytest.approx(3.53, abs=0.01)
    assert p == pytest.approx(2 * stats.norm.sf(z), rel=1e-12)


def test_posthoc_doubling_n_scales_z():
    ranks = pd.Series({"ctrl": 1.0, "other": 1.2})
    z1 = stats.norm.isf(posthoc_pvalues(ranks, 50, 3)["other"] / 2)
    z2 = stats.norm.isf(posthoc_pvalues(ranks, 100, 3)["other"] / 2)
    assert z2 / z1 == pytest.approx(math.sqrt(2), rel=1e-9)


def test_hochberg_examples():
    assert hochberg_adjust({"a": 0.03, "b": 0.03, "c": 0.03}) == {"a": 0.03, "b": 0.03, "c": 0.03}
    assert hochberg_adjust({"a": 0.01, "b": 0.04}) == {"a": 0.02, "b": 0.04}
    assert hochberg_adjust({"a": 1.0, "b": 0.001})["a"] == 1.0
    with pytest.raises(DomainError):
        hochberg_adjust({"a": 1.5})


def test_hochberg_monotone_in_raw_p():
    rng = np.random.default_rng(3)
    raw = dict(zip("abcdefgh", rng.uniform(0, 0.2, 8)))
    adj = hochberg_adjust(raw)
    order = sorted(raw, key=raw.get)
    values = [adj[k] for k in order]
    assert values == sorted(values)
    assert all(adj[k] >= raw[k] for k in raw)


def test_compare_methods_report():
    rng = np.random.default_rng(4)
    m = pd.DataFrame({"good": rng.uniform(0, 1, 40), "bad": rng.uniform(2, 3, 40), "mid": rng.uniform(0.5, 2.5, 40)})
    report = compare_methods(m)
    assert report.control == "good"
    assert set(report.adjusted_p) == {"bad", "mid"}
    assert "bad" in report.significant()
    text = format_stat_report(report, "sMAPE")
    assert "Control: good" in text and "alpha = 0.05" in text


def test_report_keeps_alpha_line_when_all_significant():
    rng = np.random.default_rng(5)
    m = pd.DataFrame({"good": rng.uniform(0, 0.5, 40), "mid": rng.uniform(1, 1.5, 40), "bad": rng.uniform(2, 3, 40)})
    report = compare_methods(m)
    assert set(report.significant()) == {"mid", "bad"}
    lines = format_stat_report(report, "MASE").strip().splitlines()
    assert "alpha = 0.05" in lines[-1]
    assert lines[-3].startswith("bad") and lines[-2].startswith("mid")
