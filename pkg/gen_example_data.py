"""
Genera el dataset sintético de escritorio en data/raw/:
20 series de longitud 120, S=12, M=12, seno + tendencia lineal + 5% de ruido (semilla fija).
"""
import json
import sys
import os
from pathlib import Path

import numpy as np
import pandas as pd

# Configurar encoding para Windows
if sys.platform == 'win32':
    sys.stdout.reconfigure(encoding='utf-8')
    os.environ['PYTHONIOENCODING'] = 'utf-8'

N_SERIES = 20
LENGTH = 120
SEASONALITY = 12
HORIZON = 12
SEED = 20240607


def make_desk_series(rng, length=LENGTH, seasonality=SEASONALITY):
    t = np.arange(length)
    level = rng.uniform(50, 150)
    amplitude = rng.uniform(0.1, 0.3) * level
    slope = rng.uniform(-0.1, 0.3) * level / length
    phase = rng.uniform(0, 2 * np.pi)
    clean = level + slope * t + amplitude * np.sin(2 * np.pi * t / seasonality + phase)
    noisy = clean * (1 + rng.normal(0, 0.05, length))
    return np.maximum(noisy, 0.0)


def build_desk_frame(seed=SEED, n_series=N_SERIES):
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n_series):
        values = make_desk_series(rng)
        rows.append(pd.DataFrame({'series_id': f'S{i:02d}', 't': np.arange(len(values)), 'value': values}))
    return pd.concat(rows, ignore_index=True)


DESK_META = {
    'name': 'desk',
    'seasonality': SEASONALITY,
    'horizon': HORIZON,
    'paradigm': 'DS',
    'sampling': 'monthly',
}


if __name__ == '__main__':
    Path('data/raw').mkdir(parents=True, exist_ok=True)
    build_desk_frame().to_csv('data/raw/desk.csv', index=False)
    print('✓ desk.csv')
    with open('data/raw/desk_meta.json', 'w', encoding='utf-8') as f:
        json.dump(DESK_META, f, indent=2)
    print('✓ desk_meta.json')
