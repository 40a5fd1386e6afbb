"""
Orquestación de experimentos: búsqueda aleatoria de hiperparámetros, bucle de estrategias x
semillas de generador x semillas de entrenamiento, y escritura de informes y manifiesto.
"""
from __future__ import annotations

import hashlib
import json
import logging
import traceback
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .augment import AugmentConfig, augment_dataset
from .config import (
    ALPHA,
    DEFAULT_BUDGET,
    DEFAULT_DBA_ITERATIONS,
    DEFAULT_GENERATOR_SEEDS,
    DEFAULT_PER_SERIES,
    DEFAULT_TRAINING_SEEDS,
    ERROR_LOG_FILE,
    EXIT_OK,
    EXIT_RUNTIME,
    HP_RANGES,
    INTEGER_HPS,
    MANIFEST_FILE,
    OUTPUT_DIR,
    SMAPE_EPSILON,
    SNAIVE_NAME,
)
from .data import Dataset, load_dataset, load_meta, seasonal_naive, split_holdout
from .errors import ConfigError, runtime_stage
from .net import Hyperparameters
from .reports import SMAPE_VARIANTS, mean_forecasts, score, write_report_charts, write_reports
from .transfer import enumerate_strategies, parse_strategy, run_strategy, train_model

logger = logging.getLogger(__name__)


@dataclass
class ExperimentConfig:
    dataset: str
    meta: str
    strategies: list[str] = field(default_factory=lambda: [s.name for s in enumerate_strategies()])
    seeds: int = DEFAULT_TRAINING_SEEDS
    gen_seeds: int = DEFAULT_GENERATOR_SEEDS
    hyperparameters: dict | None = None
    budget: int = DEFAULT_BUDGET
    tune_seed: int = 0
    q: dict = field(default_factory=dict)
    per_series: int = DEFAULT_PER_SERIES
    block_length: int | None = None
    dba_iterations: int = DEFAULT_DBA_ITERATIONS
    dba_weighting: str = "ASD"
    smape_variant: str = "auto"
    epsilon_smape: float = SMAPE_EPSILON
    alpha: float = ALPHA
    out: str = OUTPUT_DIR
    workers: int = 1
    charts: bool = False

    def validate(self) -> None:
        """Errores de configuración antes de entrenar nada."""
        if self.seeds < 1 or self.gen_seeds < 1:
            raise ConfigError("seeds y gen_seeds deben ser >= 1")
        if not self.strategies:
            raise ConfigError("no hay estrategias que ejecutar")
        if len(set(self.strategies)) != len(self.strategies):
            raise ConfigError("estrategias repetidas")
        for name in self.strategies:
            parse_strategy(name)
        if self.hyperparameters is not None:
            Hyperparameters.from_dict(self.hyperparameters)
        elif self.budget < 1:
            raise ConfigError("budget debe ser >= 1")
        if self.smape_variant not in SMAPE_VARIANTS:
            raise ConfigError(f"variante de sMAPE desconocida: {self.smape_variant}")
        if self.workers < 1:
            raise ConfigError("workers debe ser >= 1")
        for scheme, q in self.q.items():
            if q < 1:
                raise ConfigError(f"q de {scheme} debe ser >= 1")
        self.augment_config("MBB", 0)

    def parsed_strategies(self):
        return [parse_strategy(n, self.q.get(n.split(".")[2]) if ".TL." in n else None) for n in self.strategies]

    def augment_config(self, method: str, seed: int) -> AugmentConfig:
        return AugmentConfig(
            method=method,
            per_series=self.per_series,
            seed=seed,
            block_length=self.block_length,
            dba_iterations=self.dba_iterations,
            dba_weighting=self.dba_weighting,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("workers")
        return d

    def config_hash(self) -> str:
        """SHA-256 de la configuración (sin `workers`, que no altera resultados)."""
        payload = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# ----------------------------
# Búsqueda de hiperparámetros
# ----------------------------
def sample_hyperparameters(rng: np.random.Generator) -> Hyperparameters:
    """Enteros uniformes en su rango; reales log-uniformes."""
    values = {}
    for name, (lo, hi) in HP_RANGES.items():
        if name in INTEGER_HPS:
            values[name] = int(rng.integers(lo, hi + 1))
        else:
            values[name] = float(np.clip(np.exp(rng.uniform(np.log(lo), np.log(hi))), lo, hi))
    return Hyperparameters(**values)


def tune(d: Dataset, budget: int, seed: int = 0) -> Hyperparameters:
    """Entrena la línea base con `budget` candidatos y devuelve el de menor L1 de validación."""
    if budget < 1:
        raise ConfigError("budget debe ser >= 1")
    rng = np.random.default_rng(seed)
    candidates = [sample_hyperparameters(rng) for _ in range(budget)]
    best, best_score = None, np.inf
    for k, hp in enumerate(candidates):
        _, _, _, history = train_model(d, hp, np.random.default_rng([seed, k]))
        val = min(history)
        logger.info("candidato %d/%d: validación %.6f", k + 1, budget, val)
        if best is None or val < best_score:
            best, best_score = hp, val
    return best


# ----------------------------
# Experimento
# ----------------------------
def load_split(dataset: str, meta: str) -> tuple[Dataset, Dataset, dict[str, np.ndarray]]:
    d = load_dataset(dataset, load_meta(meta))
    train, actuals = split_holdout(d)
    return d, train, actuals


def snaive_forecasts(train: Dataset) -> dict[str, np.ndarray]:
    return {s.id: seasonal_naive(s.values, train.seasonality, train.horizon) for s in train.series}


def run_experiment(cfg: ExperimentConfig) -> int:
    """Ejecuta todas las estrategias; devuelve el código de salida (0 o 2)."""
    cfg.validate()
    d, train, actuals = load_split(cfg.dataset, cfg.meta)
    strategies = cfg.parsed_strategies()
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if cfg.hyperparameters is not None:
        hp = Hyperparameters.from_dict(cfg.hyperparameters)
    else:
        with runtime_stage("búsqueda"):
            hp = tune(train, cfg.budget, cfg.tune_seed)
    logger.info("hiperparámetros: %s", hp.to_dict())

    seeds = list(range(cfg.seeds))
    gen_seeds = list(range(cfg.gen_seeds))
    augmented: dict = {}
    pretrained: dict = {}
    by_generator: dict[str, list] = {}
    failures: dict[str, str] = {}

    def _augmented(method, g):
        if (method, g) not in augmented:
            augmented[(method, g)] = augment_dataset(train, cfg.augment_config(method, g))
        return augmented[(method, g)]

    for s in strategies:
        logger.info("estrategia %s", s.name)
        try:
            if s.kind == "Baseline":
                runs = [run_strategy(s, train, None, hp, seeds, workers=cfg.workers)]
            else:
                runs = [
                    run_strategy(
                        s, train, _augmented(s.method, g), hp, seeds,
                        cache=pretrained, cache_key=(s.method, g), workers=cfg.workers,
                    )
                    for g in gen_seeds
                ]
            by_generator[s.name] = runs
        except Exception as e:
            logger.error("%s falló: %s", s.name, e)
            failures[s.name] = traceback.format_exc()

    by_generator[SNAIVE_NAME] = [snaive_forecasts(train)]
    matrices = score(by_generator, train, actuals, cfg.smape_variant, cfg.epsilon_smape)
    forecasts = mean_forecasts(by_generator)
    written = write_reports(out_dir, d.name, forecasts, matrices, cfg.alpha)
    if cfg.charts:
        written += write_report_charts(out_dir, train, actuals, forecasts, matrices)

    manifest = {
        "version": __version__,
        "config_hash": cfg.config_hash(),
        "config": cfg.to_dict(),
        "hyperparameters": hp.to_dict(),
        "training_seeds": seeds,
        "generator_seeds": gen_seeds,
        "strategies": [s.name for s in strategies],
        "failed": sorted(failures),
    }
    with open(out_dir / MANIFEST_FILE, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, ensure_ascii=False)
    written.append(out_dir / MANIFEST_FILE)

    error_log = out_dir / ERROR_LOG_FILE
    if failures:
        with open(error_log, "w", encoding="utf-8") as f:
            for name, tb in failures.items():
                f.write(f"=== {name} ===\n{tb}\n")
        written.append(error_log)
    elif error_log.exists():
        error_log.unlink()

    for p in written:
        print(f"✓ {p}")
    return EXIT_RUNTIME if failures else EXIT_OK
