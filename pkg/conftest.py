"""Fixtures compartidos: datasets sintéticos pequeños con la misma forma que el de escritorio."""
import numpy as np
import pytest

from gen_example_data import make_desk_series
from src.data import Dataset, TimeSeries, default_input_window


def build_dataset(n_series=6, length=60, seasonality=12, horizon=6, paradigm="DS", seed=0, input_window=None):
    rng = np.random.default_rng(seed)
    series = [TimeSeries(f"S{i:02d}", make_desk_series(rng, length, seasonality)) for i in range(n_series)]
    return Dataset(
        "toy", series, seasonality, horizon, paradigm, input_window or default_input_window(horizon)
    )


@pytest.fixture
def make_dataset():
    return build_dataset


@pytest.fixture
def toy_dataset():
    return build_dataset()


@pytest.fixture
def tiny_hp():
    from src.net import Hyperparameters

    return Hyperparameters(
        cell_dim=20, minibatch=10, epoch_size=2, max_epochs=2, layers=1,
        noise_std=1e-4, init_std=1e-4, l2_weight=1e-4,
    )
