"""
Evaluación: sMAPE (y su variante modificada para series cercanas a cero), MASE, agregados por
dataset, rangos medios y contraste de Friedman con post-hoc de Hochberg frente al método control.

Las matrices de error son DataFrames (filas = series, columnas = métodos).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import stats

from .config import ALPHA, SMAPE_EPSILON, SMAPE_NEAR_ZERO
from .errors import ConfigError, DomainError


def _pair(f, a) -> tuple[np.ndarray, np.ndarray]:
    f = np.asarray(f, dtype=float)
    a = np.asarray(a, dtype=float)
    if f.shape != a.shape or f.ndim != 1 or len(f) == 0:
        raise ConfigError(f"previsión y real deben ser vectores de igual longitud: {f.shape} vs {a.shape}")
    return f, a


# ----------------------------
# Métricas por serie
# ----------------------------
def smape(f, a) -> float:
    f, a = _pair(f, a)
    denom = np.abs(f) + np.abs(a)
    if np.any(denom == 0):
        raise DomainError("sMAPE indefinido (|F|+|A| = 0); usar smape_modified")
    return float(2.0 / len(f) * np.sum(np.abs(f - a) / denom))


def smape_modified(f, a, epsilon: float = SMAPE_EPSILON) -> float:
    f, a = _pair(f, a)
    denom = np.maximum(np.abs(f) + np.abs(a) + epsilon, SMAPE_NEAR_ZERO + epsilon)
    return float(2.0 / len(f) * np.sum(np.abs(f - a) / denom))


def needs_modified_smape(*arrays) -> bool:
    """True si algún valor real o previsto tiene magnitud menor que 0.5."""
    return any(np.any(np.abs(np.asarray(x, dtype=float)) < SMAPE_NEAR_ZERO) for x in arrays)


def mase(f, a, train, seasonality: int) -> float:
    f, a = _pair(f, a)
    train = np.asarray(train, dtype=float)
    if len(train) <= seasonality:
        raise DomainError(f"MASE necesita más de S={seasonality} observaciones de entrenamiento")
    scale = float(np.mean(np.abs(train[seasonality:] - train[:-seasonality])))
    if scale == 0:
        raise DomainError("denominador MASE degenerado: serie de entrenamiento S-periódica constante")
    return float(np.mean(np.abs(f - a)) / scale)


# ----------------------------
# Matrices de error / agregados
# ----------------------------
def error_matrix(
    forecasts: dict[str, dict[str, np.ndarray]],
    actuals: dict[str, np.ndarray],
    metric,
) -> pd.DataFrame:
    """`metric(f, a, series_id)` por (serie, método); columnas en el orden de `forecasts`."""
    ids = list(actuals)
    data = {
        method: [metric(preds[sid], actuals[sid], sid) for sid in ids] for method, preds in forecasts.items()
    }
    m = pd.DataFrame(data, index=pd.Index(ids, name="series_id"))
    if not np.all(np.isfinite(m.to_numpy())):
        raise DomainError("la matriz de errores contiene valores no finitos")
    return m


def aggregate(matrix: pd.DataFrame) -> pd.DataFrame:
    if matrix.empty:
        raise ConfigError("matriz de errores vacía")
    return pd.DataFrame({"mean": matrix.mean(axis=0), "median": matrix.median(axis=0)})


def average_ranks(matrix: pd.DataFrame) -> pd.Series:
    """Rango medio por método (1 = mejor); los empates reciben el rango medio."""
    if matrix.shape[0] < 1 or matrix.shape[1] < 2:
        raise ConfigError(f"se necesitan >= 1 fila y >= 2 métodos, hay {matrix.shape}")
    ranks = stats.rankdata(matrix.to_numpy(), axis=1)
    return pd.Series(ranks.mean(axis=0), index=matrix.columns, name="rank")


# ----------------------------
# Contrastes
# ----------------------------
def friedman_test(matrix: pd.DataFrame) -> tuple[float, float]:
    n, k = matrix.shape
    if n < 2 or k < 2:
        raise ConfigError(f"Friedman necesita N >= 2 y k >= 2 (N={n}, k={k})")
    rank_sums = stats.rankdata(matrix.to_numpy(), axis=1).sum(axis=0)
    statistic = 12.0 / (n * k * (k + 1)) * float(np.sum(rank_sums**2)) - 3.0 * n * (k + 1)
    statistic = max(statistic, 0.0)
    return statistic, float(stats.chi2.sf(statistic, k - 1))


def posthoc_pvalues(avg_ranks: pd.Series, n: int, k: int) -> dict[str, float]:
    """p bilateral del estadístico z de rangos de cada método frente al control (mejor rango)."""
    control = avg_ranks.idxmin()
    se = np.sqrt(k * (k + 1) / (6.0 * n))
    out = {}
    for method, r in avg_ranks.items():
        if method == control:
            continue
        z = (r - avg_ranks[control]) / se
        out[method] = float(min(1.0, 2.0 * stats.norm.sf(abs(z))))
    return out


def hochberg_adjust(pvalues: dict[str, float]) -> dict[str, float]:
    names = list(pvalues)
    p = np.array([pvalues[k] for k in names], dtype=float)
    if np.any((p < 0) | (p > 1)) or not np.all(np.isfinite(p)):
        raise DomainError("los p-valores deben estar en [0, 1]")
    if len(p) == 0:
        return {}
    order = np.argsort(p, kind="stable")
    factors = len(p) - np.arange(len(p))
    stepped = np.minimum(1.0, factors * p[order])
    adjusted = np.minimum.accumulate(stepped[::-1])[::-1]
    out = np.empty_like(p)
    out[order] = adjusted
    return {k: float(v) for k, v in zip(names, out)}


@dataclass
class StatReport:
    friedman_statistic: float
    friedman_p: float
    control: str
    adjusted_p: dict[str, float]
    avg_ranks: pd.Series
    n_series: int
    alpha: float = ALPHA

    def significant(self) -> list[str]:
        return [m for m, p in self.adjusted_p.items() if p < self.alpha]


def compare_methods(matrix: pd.DataFrame, alpha: float = ALPHA) -> StatReport:
    n, k = matrix.shape
    statistic, p = friedman_test(matrix)
    ranks = average_ranks(matrix)
    adjusted = hochberg_adjust(posthoc_pvalues(ranks, n, k))
    return StatReport(statistic, p, str(ranks.idxmin()), adjusted, ranks, n, alpha)


def format_stat_report(report: StatReport, metric: str = "") -> str:
    """Tabla de texto: control arriba, resto por p ajustado con separador en alpha."""
    alpha = report.alpha
    title = f"== {metric} ==" if metric else "=="
    lines = [
        title,
        f"Friedman chi2 = {report.friedman_statistic:.4f}   p = {report.friedman_p:.4e}   "
        f"(N={report.n_series}, k={len(report.avg_ranks)})",
        f"Control: {report.control}",
        "",
        f"{'Método':<32}{'Rango medio':>12}{'p Hochberg':>14}",
        f"{report.control:<32}{report.avg_ranks[report.control]:>12.4f}{'-':>14}",
    ]
    ordered = sorted(report.adjusted_p.items(), key=lambda kv: (kv[1], report.avg_ranks[kv[0]], kv[0]))
    separated = False
    for method, p in ordered:
        if not separated and p >= alpha:
            lines.append("-" * 24 + f" alpha = {alpha} " + "-" * 24)
            separated = True
        lines.append(f"{method:<32}{report.avg_ranks[method]:>12.4f}{p:>14.4e}")
    if not separated:
        lines.append("-" * 24 + f" alpha = {alpha} " + "-" * 24)
    return "\n".join(lines) + "\n"
