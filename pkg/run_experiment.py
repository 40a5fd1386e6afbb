#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Experimento de escritorio: las 21 variantes sobre data/raw/desk.csv con hiperparámetros fijos."""

import logging
import sys

from src.config import DESK_DATASET_PATH, DESK_HYPERPARAMETERS, DESK_META_PATH, OUTPUT_DIR
from src.experiment import ExperimentConfig, run_experiment

if __name__ == "__main__":
    sys.stdout.reconfigure(encoding='utf-8')
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    cfg = ExperimentConfig(
        dataset=DESK_DATASET_PATH,
        meta=DESK_META_PATH,
        seeds=3,
        hyperparameters=dict(DESK_HYPERPARAMETERS),
        out=OUTPUT_DIR,
        charts=True,
    )
    code = run_experiment(cfg)
    print("✅ Experimento completado!" if code == 0 else "⚠️ Alguna estrategia falló (ver strategy_errors.log)")
    sys.exit(code)
