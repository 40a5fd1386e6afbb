"""
Informes de un experimento: forecasts.csv, metrics.csv, ranks.csv, stats.txt y gráficas.

Las previsiones entran como {método: [previsiones por semilla de generador]} donde cada
previsión es {series_id: vector M}. El error de cada serie es la media entre semillas de generador.
"""
from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from .charts import create_forecast_chart, create_ranks_chart, write_charts
from .config import (
    FORECASTS_CHART_FILE,
    FORECASTS_FILE,
    METRICS_FILE,
    RANKS_CHART_FILE,
    RANKS_FILE,
    SMAPE_EPSILON,
    SNAIVE_NAME,
    STATS_FILE,
)
from .data import Dataset, load_csv, require_columns
from .errors import ConfigError, ParseError
from .evaluation import (
    aggregate,
    average_ranks,
    compare_methods,
    error_matrix,
    format_stat_report,
    mase,
    needs_modified_smape,
    smape,
    smape_modified,
)

logger = logging.getLogger(__name__)

SMAPE_VARIANTS = ("auto", "standard", "modified")
FORECAST_COLUMNS = ["strategy", "series_id", "h", "value"]


# ----------------------------
# Previsiones
# ----------------------------
def forecasts_frame(forecasts: dict[str, dict[str, np.ndarray]]) -> pd.DataFrame:
    rows = [
        (method, sid, h + 1, float(v))
        for method, preds in forecasts.items()
        for sid, vec in preds.items()
        for h, v in enumerate(vec)
    ]
    return pd.DataFrame(rows, columns=FORECAST_COLUMNS)


def read_forecasts(path: str | Path) -> dict[str, dict[str, np.ndarray]]:
    df = load_csv(path)
    require_columns(df, FORECAST_COLUMNS, "forecasts")
    try:
        df["h"] = df["h"].astype(int)
        df["value"] = df["value"].astype(float)
    except ValueError as e:
        raise ParseError(f"[forecasts] valor no numérico: {e}") from e
    out: dict[str, dict[str, np.ndarray]] = {}
    for (method, sid), g in df.groupby(["strategy", "series_id"], sort=False):
        out.setdefault(method, {})[sid] = g.sort_values("h")["value"].to_numpy()
    return out


def mean_forecasts(by_generator: dict[str, list[dict[str, np.ndarray]]]) -> dict[str, dict[str, np.ndarray]]:
    """Previsión media entre semillas de generador (la que se escribe en forecasts.csv)."""
    return {
        method: {sid: np.mean([f[sid] for f in runs], axis=0) for sid in runs[0]}
        for method, runs in by_generator.items()
    }


# ----------------------------
# Métricas
# ----------------------------
def resolve_smape_variant(variant: str, train: Dataset, actuals: dict[str, np.ndarray]) -> str:
    if variant not in SMAPE_VARIANTS:
        raise ConfigError(f"variante de sMAPE desconocida: {variant}")
    if variant != "auto":
        return variant
    near_zero = needs_modified_smape(*actuals.values(), *(s.values for s in train.series))
    return "modified" if near_zero else "standard"


def score(
    by_generator: dict[str, list[dict[str, np.ndarray]]],
    train: Dataset,
    actuals: dict[str, np.ndarray],
    smape_variant: str = "auto",
    epsilon: float = SMAPE_EPSILON,
) -> dict[str, pd.DataFrame]:
    """Matrices de error {"sMAPE": ..., "MASE": ...} con el error medio entre semillas de generador."""
    variant = resolve_smape_variant(smape_variant, train, actuals)
    logger.info("sMAPE %s", variant)

    def _smape(f, a, sid):
        return smape_modified(f, a, epsilon) if variant == "modified" else smape(f, a)

    def _mase(f, a, sid):
        return mase(f, a, train.get(sid).values, train.seasonality)

    matrices = {}
    for label, fn in (("sMAPE", _smape), ("MASE", _mase)):
        per_gen = {
            method: [error_matrix({method: f}, actuals, fn)[method] for f in runs]
            for method, runs in by_generator.items()
        }
        matrices[label] = pd.DataFrame({m: sum(cols) / len(cols) for m, cols in per_gen.items()})
    return matrices


def metrics_frame(dataset_name: str, matrices: dict[str, pd.DataFrame]) -> pd.DataFrame:
    rows = []
    for metric, matrix in matrices.items():
        agg = aggregate(matrix)
        for method, r in agg.iterrows():
            rows.append((dataset_name, method, metric, r["mean"], r["median"]))
    return pd.DataFrame(rows, columns=["dataset", "method", "metric", "mean", "median"])


def ranks_frame(matrices: dict[str, pd.DataFrame]) -> pd.DataFrame:
    """Rangos medios de las estrategias (sin el benchmark SNaive)."""
    cols = {}
    for metric, matrix in matrices.items():
        strategies = matrix.drop(columns=[SNAIVE_NAME], errors="ignore")
        if strategies.shape[1] >= 2:
            cols[f"rank_{metric.lower()}"] = average_ranks(strategies)
        else:
            cols[f"rank_{metric.lower()}"] = pd.Series(1.0, index=strategies.columns)
    out = pd.DataFrame(cols)
    out.index.name = "method"
    return out.reset_index()


def stats_text(matrices: dict[str, pd.DataFrame], alpha: float) -> str:
    blocks = []
    for metric, matrix in matrices.items():
        strategies = matrix.drop(columns=[SNAIVE_NAME], errors="ignore")
        n, k = strategies.shape
        if n < 2 or k < 2:
            blocks.append(f"== {metric} ==\nsin contraste: se necesitan N >= 2 series y k >= 2 métodos (N={n}, k={k})\n")
            continue
        blocks.append(format_stat_report(compare_methods(strategies, alpha), metric))
    return "\n".join(blocks)


# ----------------------------
# Escritura
# ----------------------------
def write_reports(
    out_dir: str | Path,
    dataset_name: str,
    forecasts: dict[str, dict[str, np.ndarray]],
    matrices: dict[str, pd.DataFrame],
    alpha: float,
) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / FORECASTS_FILE, out_dir / METRICS_FILE, out_dir / RANKS_FILE, out_dir / STATS_FILE]
    forecasts_frame(forecasts).to_csv(paths[0], index=False, encoding="utf-8")
    metrics_frame(dataset_name, matrices).to_csv(paths[1], index=False, encoding="utf-8")
    ranks_frame(matrices).to_csv(paths[2], index=False, encoding="utf-8")
    with open(paths[3], "w", encoding="utf-8") as f:
        f.write(stats_text(matrices, alpha))
    return paths


def write_report_charts(
    out_dir: str | Path,
    train: Dataset,
    actuals: dict[str, np.ndarray],
    forecasts: dict[str, dict[str, np.ndarray]],
    matrices: dict[str, pd.DataFrame],
) -> list[Path]:
    ranks = ranks_frame(matrices).set_index("method")
    sid = train.ids[0]
    figures = {
        RANKS_CHART_FILE: create_ranks_chart(ranks),
        FORECASTS_CHART_FILE: create_forecast_chart(
            sid, train.get(sid).values, actuals[sid], {m: f[sid] for m, f in forecasts.items()}
        ),
    }
    return write_charts(figures, Path(out_dir))
