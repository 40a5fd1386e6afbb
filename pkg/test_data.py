"""
Tests de carga, validación, holdout y seasonal naive.
Archivo: test_data.py
"""
import json

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.data import (
    Dataset,
    TimeSeries,
    load_dataset,
    save_dataset,
    seasonal_naive,
    split_holdout,
)
from src.errors import DatasetValidationError, DomainError, ParseError


def write_long(path, series: dict):
    rows = [(sid, t, v) for sid, vals in series.items() for t, v in enumerate(vals)]
    pd.DataFrame(rows, columns=["series_id", "t", "value"]).to_csv(path, index=False)


def test_window_heuristic_nn5_shape(tmp_path):
    csv = tmp_path / "nn5.csv"
    write_long(csv, {"a": np.arange(1, 31.0), "b": np.arange(2, 32.0)})
    d = load_dataset(csv, {"name": "nn5", "seasonality": 52, "horizon": 8, "paradigm": "SE"})
    assert d.input_window == 10
    assert d.ids == ["a", "b"]


def test_explicit_input_window_respected(tmp_path):
    csv = tmp_path / "nn3.csv"
    write_long(csv, {"a": np.arange(1, 41.0)})
    meta = {"name": "nn3", "seasonality": 12, "horizon": 8, "paradigm": "DS", "input_window": 11}
    assert load_dataset(csv, meta).input_window == 11


def test_short_series_names_the_id(tmp_path):
    csv = tmp_path / "short.csv"
    write_long(csv, {"corta": [1, 2, 3, 4, 5]})
    with pytest.raises(DatasetValidationError, match="corta"):
        load_dataset(csv, {"name": "x", "seasonality": 1, "horizon": 8, "paradigm": "DS"})


def test_minimum_length_leaves_a_training_window(tmp_path):
    csv = tmp_path / "limite.csv"
    meta = {"name": "x", "seasonality": 1, "horizon": 8, "paradigm": "DS", "input_window": 10}
    write_long(csv, {"ok": np.arange(1, 28.0), "justa": np.arange(1, 27.0)})
    with pytest.raises(DatasetValidationError, match=r"\[justa\].*n \+ 2M \+ 1"):
        load_dataset(csv, meta)
    write_long(csv, {"ok": np.arange(1, 28.0)})
    assert len(load_dataset(csv, meta).series[0]) == 10 + 2 * 8 + 1


def test_malformed_row_reports_line(tmp_path):
    csv = tmp_path / "bad.csv"
    csv.write_text("series_id,t,value\na,0,1.0\na,1,abc\na,2,3.0\n", encoding="utf-8")
    with pytest.raises(ParseError) as e:
        load_dataset(csv, {"name": "x", "seasonality": 1, "horizon": 1, "paradigm": "DS"})
    assert e.value.line == 3


def test_extra_field_reports_line(tmp_path):
    csv = tmp_path / "extra.csv"
    csv.write_text("series_id,t,value\na,0,1\na,1,2,9\na,2,3\n", encoding="utf-8")
    with pytest.raises(ParseError) as e:
        load_dataset(csv, {"name": "x", "seasonality": 1, "horizon": 1, "paradigm": "DS"})
    assert e.value.line == 3
    assert "línea 3" in str(e.value)


def test_negative_value_is_domain_error(tmp_path):
    csv = tmp_path / "neg.csv"
    write_long(csv, {"a": [1.0, 2.0, -3.0, 4.0, 5.0, 6.0]})
    with pytest.raises(DomainError):
        load_dataset(csv, {"name": "x", "seasonality": 1, "horizon": 1, "paradigm": "DS"})


def test_non_contiguous_t_rejected(tmp_path):
    csv = tmp_path / "gap.csv"
    csv.write_text("series_id,t,value\na,0,1\na,2,2\na,3,3\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_dataset(csv, {"name": "x", "seasonality": 1, "horizon": 1, "paradigm": "DS"})


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_dataset("no/existe.csv", {"name": "x", "seasonality": 1, "horizon": 1, "paradigm": "DS"})


def test_load_save_load_identity(tmp_path):
    rng = np.random.default_rng(7)
    csv = tmp_path / "orig.csv"
    write_long(csv, {f"s{i}": rng.uniform(0, 100, 40) for i in range(4)})
    meta_path = tmp_path / "meta.json"
    meta_path.write_text(json.dumps({"name": "rt", "seasonality": 4, "horizon": 5, "paradigm": "SE"}))
    d1 = load_dataset(csv, meta_path)
    save_dataset(d1, tmp_path / "copy.csv", tmp_path / "copy_meta.json")
    d2 = load_dataset(tmp_path / "copy.csv", tmp_path / "copy_meta.json")
    assert d2.ids == d1.ids
    for a, b in zip(d1.series, d2.series):
        np.testing.assert_array_equal(a.values, b.values)
    assert (d2.seasonality, d2.horizon, d2.paradigm, d2.input_window) == (4, 5, "SE", 7)


def test_split_holdout_suffix():
    d = Dataset("x", [TimeSeries("a", np.arange(1, 21.0))], 1, 8, "DS", 10)
    train, actuals = split_holdout(d)
    np.testing.assert_array_equal(train.series[0].values, np.arange(1, 13.0))
    np.testing.assert_array_equal(actuals["a"], np.arange(13, 21.0))


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(0, 1e6, allow_nan=False), min_size=10, max_size=60),
    st.integers(1, 9),
)
def test_split_holdout_is_lossless(values, horizon):
    d = Dataset("x", [TimeSeries("a", values)], 1, horizon, "DS", 1)
    train, actuals = split_holdout(d)
    np.testing.assert_array_equal(np.concatenate([train.series[0].values, actuals["a"]]), d.series[0].values)


def test_seasonal_naive_examples():
    np.testing.assert_array_equal(seasonal_naive([1, 2, 3, 4], 2, 2), [3, 4])
    np.testing.assert_array_equal(seasonal_naive([1, 2, 3, 4], 2, 4), [3, 4, 3, 4])
    np.testing.assert_array_equal(seasonal_naive([5, 6, 7], 1, 3), [7, 7, 7])
    with pytest.raises(DatasetValidationError):
        seasonal_naive([1, 2], 3, 2)


def test_dataset_metadata_invariants():
    with pytest.raises(DatasetValidationError):
        Dataset("x", [TimeSeries("a", [1.0])], 1, 0, "DS", 1)
    with pytest.raises(DatasetValidationError):
        Dataset("x", [TimeSeries("a", [1.0])], 1, 1, "XX", 1)
    with pytest.raises(DomainError):
        TimeSeries("a", [1.0, np.nan])
