"""
Tests de la CLI y del orquestador (búsqueda, configuración, códigos de salida).
Archivo: test_cli.py
"""
import json

import numpy as np
import pandas as pd
import pytest

import src.experiment as experiment
from src.cli import build_parser, main, strategy_from_args
from src.config import DESK_HYPERPARAMETERS, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, HP_RANGES, INTEGER_HPS
from src.data import save_dataset
from src.errors import ConfigError, DomainError
from src.experiment import ExperimentConfig, sample_hyperparameters, tune


def write_toy(tmp_path, dataset):
    csv, meta = tmp_path / "toy.csv", tmp_path / "toy_meta.json"
    save_dataset(dataset, csv, meta)
    return str(csv), str(meta)


def test_sampled_hyperparameters_in_range():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        hp = sample_hyperparameters(rng).to_dict()
        for name, (lo, hi) in HP_RANGES.items():
            assert lo <= hp[name] <= hi
            if name in INTEGER_HPS:
                assert isinstance(hp[name], int)


def test_tune_is_deterministic(monkeypatch, toy_dataset):
    def fake_train(d, hp, rng, net=None):
        return None, None, None, [hp.cell_dim + hp.layers / 10]

    monkeypatch.setattr(experiment, "train_model", fake_train)
    a = tune(toy_dataset, 8, seed=3)
    b = tune(toy_dataset, 8, seed=3)
    assert a == b
    assert tune(toy_dataset, 1, seed=3) == sample_hyperparameters(np.random.default_rng(3))
    with pytest.raises(ConfigError):
        tune(toy_dataset, 0)


def test_experiment_config_validation():
    cfg = ExperimentConfig("x.csv", "m.json", strategies=["GRATIS.Pooled"], hyperparameters=DESK_HYPERPARAMETERS)
    with pytest.raises(ConfigError):
        cfg.validate()
    with pytest.raises(ConfigError):
        ExperimentConfig("x.csv", "m.json", seeds=0, hyperparameters=DESK_HYPERPARAMETERS).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig("x.csv", "m.json", strategies=[], hyperparameters=DESK_HYPERPARAMETERS).validate()
    ExperimentConfig("x.csv", "m.json", hyperparameters=DESK_HYPERPARAMETERS).validate()


def test_config_hash_ignores_workers():
    a = ExperimentConfig("x.csv", "m.json", workers=1)
    b = ExperimentConfig("x.csv", "m.json", workers=4)
    c = ExperimentConfig("x.csv", "m.json", seeds=3)
    assert a.config_hash() == b.config_hash() != c.config_hash()


def test_strategy_from_flags():
    parser = build_parser()
    args = parser.parse_args(["train", "--dataset", "d", "--meta", "m", "--method", "DBA", "--scheme", "Lstm", "--mode", "Freeze"])
    assert strategy_from_args(args) == "DBA.TL.Lstm.Freeze"
    args = parser.parse_args(["train", "--dataset", "d", "--meta", "m", "--method", "MBB"])
    assert strategy_from_args(args) == "MBB.Pooled"
    args = parser.parse_args(["train", "--dataset", "d", "--meta", "m"])
    assert strategy_from_args(args) == "LSTM.Baseline"


def test_config_error_exit_code(tmp_path):
    hp = tmp_path / "hp.json"
    hp.write_text(json.dumps(DESK_HYPERPARAMETERS))
    code = main(["experiment", "--dataset", "x.csv", "--meta", "m.json", "--strategy", "GRATIS.Pooled", "--hp", str(hp)])
    assert code == EXIT_CONFIG
    code = main(["evaluate", "--dataset", str(tmp_path / "none.csv"), "--meta", "m.json", "--forecasts", "f.csv"])
    assert code == EXIT_CONFIG


def test_augment_command(tmp_path, toy_dataset):
    csv, meta = write_toy(tmp_path, toy_dataset)
    out = tmp_path / "aug"
    code = main(["augment", "--dataset", csv, "--meta", meta, "--method", "MBB", "--per-series", "2", "--holdout", "--out", str(out)])
    assert code == EXIT_OK
    df = pd.read_csv(out / "toy__aug_MBB_0.csv")
    assert df["series_id"].nunique() == 12
    assert df.groupby("series_id").size().eq(54).all()


def test_evaluate_command(tmp_path, toy_dataset):
    csv, meta = write_toy(tmp_path, toy_dataset)
    m = toy_dataset.horizon
    rows = []
    for s in toy_dataset.series:
        last = s.values[-m - 1]
        for h in range(1, m + 1):
            rows.append(("Naive1", s.id, h, last))
            rows.append(("Mean", s.id, h, float(np.mean(s.values[:-m]))))
    forecasts = tmp_path / "f.csv"
    pd.DataFrame(rows, columns=["strategy", "series_id", "h", "value"]).to_csv(forecasts, index=False)
    out = tmp_path / "eval"
    assert main(["evaluate", "--dataset", csv, "--meta", meta, "--forecasts", str(forecasts), "--out", str(out)]) == EXIT_OK
    metrics = pd.read_csv(out / "metrics.csv")
    assert set(metrics["method"]) == {"Naive1", "Mean", "SNaive"}
    assert set(metrics["metric"]) == {"sMAPE", "MASE"}
    ranks = pd.read_csv(out / "ranks.csv")
    assert list(ranks.columns) == ["method", "rank_smape", "rank_mase"]
    assert set(ranks["method"]) == {"Naive1", "Mean"}
    assert "Friedman" in (out / "stats.txt").read_text(encoding="utf-8")


def test_train_and_forecast_commands(tmp_path, toy_dataset, tiny_hp):
    csv, meta = write_toy(tmp_path, toy_dataset)
    hp = tmp_path / "hp.json"
    hp.write_text(json.dumps(tiny_hp.to_dict()))
    ck = tmp_path / "ck"
    assert main(["train", "--dataset", csv, "--meta", meta, "--hp", str(hp), "--seeds", "2", "--checkpoints", str(ck)]) == EXIT_OK
    assert sorted(p.name for p in (ck / "LSTM_Baseline").iterdir()) == ["seed0.npz", "seed1.npz"]
    out = tmp_path / "fc"
    assert main(["forecast", "--dataset", csv, "--meta", meta, "--checkpoints", str(ck), "--out", str(out)]) == EXIT_OK
    df = pd.read_csv(out / "forecasts_LSTM_Baseline.csv")
    assert len(df) == len(toy_dataset.series) * toy_dataset.horizon
    assert (df["value"] >= 0).all()


def test_training_failure_is_a_runtime_exit(tmp_path, monkeypatch, toy_dataset, tiny_hp):
    import src.cli as cli

    csv, meta = write_toy(tmp_path, toy_dataset)
    hp = tmp_path / "hp.json"
    hp.write_text(json.dumps(tiny_hp.to_dict()))

    def diverge(*args, **kwargs):
        raise DomainError("pérdida no finita (desbordamiento numérico)")

    monkeypatch.setattr(cli, "fit_strategy", diverge)
    code = main(["train", "--dataset", csv, "--meta", meta, "--hp", str(hp), "--seeds", "1", "--checkpoints", str(tmp_path / "ck")])
    assert code == EXIT_RUNTIME

    monkeypatch.setattr(experiment, "train_model", diverge)
    code = main(["experiment", "--dataset", csv, "--meta", meta, "--strategy", "LSTM.Baseline", "--budget", "1", "--out", str(tmp_path / "out")])
    assert code == EXIT_RUNTIME
    # un error de datos sigue saliendo con 1
    assert main(["tune", "--dataset", csv, "--meta", str(tmp_path / "nada.json")]) == EXIT_CONFIG
