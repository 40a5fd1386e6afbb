"""
CLI del toolkit: augment, tune, train, forecast, evaluate, experiment.

Ejemplo:
    python -m src.cli experiment --dataset data/raw/desk.csv --meta data/raw/desk_meta.json \
        --hp hp.json --seeds 3 --out data/processed
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .augment import AugmentConfig, augment_dataset
from .config import (
    ALPHA,
    AUGMENT_METHODS,
    DBA_WEIGHTINGS,
    DEFAULT_BUDGET,
    DEFAULT_DBA_ITERATIONS,
    DEFAULT_GENERATOR_SEEDS,
    DEFAULT_PER_SERIES,
    DEFAULT_TRAINING_SEEDS,
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_RUNTIME,
    OUTPUT_DIR,
    SMAPE_EPSILON,
    SNAIVE_NAME,
    TL_MODES,
    TL_SCHEMES,
)
from .data import load_dataset, load_meta, save_dataset, split_holdout
from .errors import ConfigError, ForecastError, runtime_stage
from .experiment import ExperimentConfig, load_split, run_experiment, snaive_forecasts, tune
from .net import Hyperparameters, forecast, load_network, save_network
from .pipeline import dataset_log_offset, preprocess
from .reports import SMAPE_VARIANTS, forecasts_frame, read_forecasts, score, write_report_charts, write_reports
from .transfer import enumerate_strategies, fit_strategy, median_ensemble, parse_strategy

logger = logging.getLogger(__name__)


# ----------------------------
# Utilidades
# ----------------------------
def load_hyperparameters(path: str | None) -> dict | None:
    if path is None:
        return None
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"No existe: {p.resolve()}")
    with open(p, "r", encoding="utf-8") as f:
        return json.load(f)


def strategy_from_args(args) -> str:
    """--strategy explícito o composición de --method/--scheme/--mode."""
    if args.strategy:
        return args.strategy
    if args.scheme or args.mode:
        if not (args.method and args.scheme and args.mode):
            raise ConfigError("--scheme y --mode requieren también --method")
        return f"{args.method}.TL.{args.scheme}.{args.mode}"
    if args.method:
        return f"{args.method}.Pooled"
    return "LSTM.Baseline"


def load_augmented(path: str | None, meta):
    if path is None:
        return None
    return load_dataset(path, meta)


def _ensemble_dir(strategy: str) -> str:
    return strategy.replace(".", "_")


# ----------------------------
# Subcomandos
# ----------------------------
def cmd_augment(args) -> int:
    meta = load_meta(args.meta)
    d = load_dataset(args.dataset, meta)
    if args.holdout:
        d, _ = split_holdout(d)
    cfg = AugmentConfig(
        method=args.method or "MBB",
        per_series=args.per_series,
        seed=args.seed,
        block_length=args.block_length,
        dba_iterations=args.dba_iters,
        dba_weighting=args.dba_weighting,
    )
    aug = augment_dataset(d, cfg)
    out = Path(args.out)
    csv_path = out / f"{aug.name}.csv"
    meta_path = out / f"{aug.name}_meta.json"
    save_dataset(aug, csv_path, meta_path)
    print(f"✓ {csv_path} ({len(aug.series)} series)")
    print(f"✓ {meta_path}")
    return EXIT_OK


def cmd_tune(args) -> int:
    _, train, _ = load_split(args.dataset, args.meta)
    with runtime_stage("búsqueda"):
        hp = tune(train, args.budget, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "hyperparameters.json"
    with open(path, "w", encoding="utf-8") as f:
        json.dump(hp.to_dict(), f, indent=2)
    print(f"✓ {path}")
    return EXIT_OK


def cmd_train(args) -> int:
    name = strategy_from_args(args)
    s = parse_strategy(name, args.q)
    meta = load_meta(args.meta)
    _, train, _ = load_split(args.dataset, args.meta)
    hp_dict = load_hyperparameters(args.hp)
    if hp_dict is None:
        raise ConfigError("train necesita --hp con los hiperparámetros")
    hp = Hyperparameters.from_dict(hp_dict)
    augmented = load_augmented(args.augmented, meta)
    if s.kind != "Baseline" and augmented is None:
        raise ConfigError(f"{s.name} necesita --augmented")

    out = Path(args.checkpoints) / _ensemble_dir(s.name)
    for seed in range(args.seeds):
        with runtime_stage(f"{s.name} seed={seed}"):
            net, states, _, _ = fit_strategy(s, train, augmented, hp, seed)
        log_offset = next(iter(states.values())).log_offset
        path = out / f"seed{seed}.npz"
        save_network(net, path, hp, extra={"strategy": s.name, "log_offset": log_offset})
        print(f"✓ {path}")
    return EXIT_OK


def cmd_forecast(args) -> int:
    name = strategy_from_args(args)
    s = parse_strategy(name, args.q)
    _, train, _ = load_split(args.dataset, args.meta)
    paths = sorted((Path(args.checkpoints) / _ensemble_dir(s.name)).glob("seed*.npz"))
    if not paths:
        raise FileNotFoundError(f"No hay checkpoints de {s.name} en {Path(args.checkpoints).resolve()}")
    runs = []
    for p in paths:
        net, _, extra = load_network(p)
        states, windowsets = preprocess(train, log_offset=extra.get("log_offset", dataset_log_offset(train)))
        with runtime_stage(p.name):
            runs.append(forecast(net, states, windowsets))
    frame = forecasts_frame({s.name: median_ensemble(runs)})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"forecasts_{_ensemble_dir(s.name)}.csv"
    frame.to_csv(path, index=False, encoding="utf-8")
    print(f"✓ {path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    d, train, actuals = load_split(args.dataset, args.meta)
    forecasts = read_forecasts(args.forecasts)
    forecasts.setdefault(SNAIVE_NAME, snaive_forecasts(train))
    missing = [(m, sid) for m, f in forecasts.items() for sid in actuals if sid not in f]
    if missing:
        raise ConfigError(f"faltan previsiones: {missing[:5]}")
    by_generator = {m: [f] for m, f in forecasts.items()}
    matrices = score(by_generator, train, actuals, args.smape, args.epsilon_smape)
    written = write_reports(args.out, d.name, forecasts, matrices, args.alpha)
    if args.charts:
        written += write_report_charts(args.out, train, actuals, forecasts, matrices)
    for p in written:
        print(f"✓ {p}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.strategy:
        strategies = [n.strip() for n in args.strategy.split(",") if n.strip()]
    else:
        strategies = [s.name for s in enumerate_strategies()]
    q = {scheme: args.q for scheme in ("AddDense", "Lstm")} if args.q is not None else {}
    cfg = ExperimentConfig(
        dataset=args.dataset,
        meta=args.meta,
        strategies=strategies,
        seeds=args.seeds,
        gen_seeds=args.gen_seeds,
        hyperparameters=load_hyperparameters(args.hp),
        budget=args.budget,
        tune_seed=args.seed,
        q=q,
        per_series=args.per_series,
        block_length=args.block_length,
        dba_iterations=args.dba_iters,
        dba_weighting=args.dba_weighting,
        smape_variant=args.smape,
        epsilon_smape=args.epsilon_smape,
        alpha=args.alpha,
        out=args.out,
        workers=args.workers,
        charts=args.charts,
    )
    return run_experiment(cfg)


# ----------------------------
# Parser
# ----------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forecast-tl",
        description="Previsión global con aumento de datos y transferencia (LSTM residual).",
    )
    parser.add_argument("--verbose", action="store_true", help="Logging en nivel DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    def dataset_args(p):
        p.add_argument("--dataset", required=True, help="CSV largo series_id,t,value")
        p.add_argument("--meta", required=True, help="Metadatos JSON del dataset")
        p.add_argument("--out", default=OUTPUT_DIR, help=f"Directorio de salida (por defecto {OUTPUT_DIR})")

    def strategy_args(p):
        p.add_argument("--strategy", help="Nombre completo, p. ej. MBB.TL.Dense.Freeze")
        p.add_argument("--method", choices=AUGMENT_METHODS)
        p.add_argument("--scheme", choices=TL_SCHEMES)
        p.add_argument("--mode", choices=TL_MODES)
        p.add_argument("--q", type=int, default=None, help="Capas añadidas (AddDense/Lstm)")

    def augment_args(p):
        p.add_argument("--per-series", type=int, default=DEFAULT_PER_SERIES)
        p.add_argument("--block-length", type=int, default=None)
        p.add_argument("--dba-iters", type=int, default=DEFAULT_DBA_ITERATIONS)
        p.add_argument("--dba-weighting", choices=DBA_WEIGHTINGS, default="ASD")

    def eval_args(p):
        p.add_argument("--smape", choices=SMAPE_VARIANTS, default="auto")
        p.add_argument("--epsilon-smape", type=float, default=SMAPE_EPSILON)
        p.add_argument("--alpha", type=float, default=ALPHA)
        p.add_argument("--charts", action="store_true", help="Escribe ranks.html y forecasts.html")

    p = sub.add_parser("augment", help="Genera un conjunto aumentado")
    dataset_args(p)
    augment_args(p)
    p.add_argument("--method", choices=AUGMENT_METHODS, default="MBB")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--holdout", action="store_true", help="Aumenta solo la parte de entrenamiento")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("tune", help="Búsqueda aleatoria de hiperparámetros")
    dataset_args(p)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("train", help="Entrena una estrategia y guarda un checkpoint por semilla")
    dataset_args(p)
    strategy_args(p)
    p.add_argument("--hp", help="JSON de hiperparámetros")
    p.add_argument("--augmented", help="CSV del conjunto aumentado (mismos metadatos)")
    p.add_argument("--seeds", type=int, default=DEFAULT_TRAINING_SEEDS)
    p.add_argument("--checkpoints", default=f"{OUTPUT_DIR}/checkpoints")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("forecast", help="Mediana de las previsiones de los checkpoints")
    dataset_args(p)
    strategy_args(p)
    p.add_argument("--checkpoints", default=f"{OUTPUT_DIR}/checkpoints")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("evaluate", help="Métricas, rangos y contrastes de un forecasts.csv")
    dataset_args(p)
    eval_args(p)
    p.add_argument("--forecasts", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", help="Experimento completo (21 variantes)")
    dataset_args(p)
    augment_args(p)
    eval_args(p)
    p.add_argument("--strategy", help="Lista separada por comas (por defecto las 21)")
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--hp", help="JSON de hiperparámetros fijos (si no, búsqueda con --budget)")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--seed", type=int, default=0, help="Semilla de la búsqueda")
    p.add_argument("--seeds", type=int, default=DEFAULT_TRAINING_SEEDS)
    p.add_argument("--gen-seeds", type=int, default=DEFAULT_GENERATOR_SEEDS)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ForecastError, FileNotFoundError, json.JSONDecodeError) as e:
        logger.error("%s", e)
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:
        logger.exception("fallo en ejecución")
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
