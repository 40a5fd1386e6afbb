"""
Descomposición aditiva estacional-tendencia (STL simplificado, estacional periódico).

x = seasonal + trend + remainder, con el resto definido al final como x - seasonal - trend
para que la reconstrucción sea exacta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DatasetValidationError, DomainError


@dataclass
class DecomposeConfig:
    inner_iterations: int = 2
    trend_span: int | None = None


@dataclass
class Decomposition:
    seasonal: np.ndarray
    trend: np.ndarray
    remainder: np.ndarray
    seasonality: int

    def seasonal_at(self, positions) -> np.ndarray:
        """Estacional en posiciones arbitrarias (extensión periódica más allá del final)."""
        positions = np.asarray(positions, dtype=int)
        if self.seasonality == 1:
            return np.zeros(len(positions))
        return self.seasonal[positions % self.seasonality]


def trend_span(length: int, seasonality: int) -> int:
    denom = 1.0 - 1.5 / (0.1 * length)
    raw = 1.5 * seasonality / denom if denom > 0 else float(length)
    q = int(math.ceil(raw))
    if q % 2 == 0:
        q += 1
    upper = length - (1 - length % 2)
    return max(7, min(q, upper))


def loess(y: np.ndarray, span: int) -> np.ndarray:
    """Loess local lineal con pesos tricúbicos, evaluado en cada posición entera."""
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n < 3:
        return y.copy()
    pos = np.arange(n)
    if span >= n:
        idx = np.tile(pos, (n, 1))
        h = np.maximum(pos, n - 1 - pos) + (span - n) // 2
    else:
        lo = np.clip(pos - span // 2, 0, n - span)
        idx = lo[:, None] + np.arange(span)
        h = np.maximum(pos - lo, lo + span - 1 - pos)
    h = np.maximum(h, 1).astype(float)

    dx = idx - pos[:, None]
    w = np.clip(1.0 - (np.abs(dx) / h[:, None]) ** 3, 0.0, None) ** 3
    yy = y[idx]
    s0 = w.sum(axis=1)
    s1 = (w * dx).sum(axis=1)
    s2 = (w * dx * dx).sum(axis=1)
    t0 = (w * yy).sum(axis=1)
    t1 = (w * dx * yy).sum(axis=1)
    denom = s0 * s2 - s1 * s1
    ok = denom > 1e-12 * s0 * s0
    fit = t0 / s0
    fit[ok] = (s2[ok] * t0[ok] - s1[ok] * t1[ok]) / denom[ok]
    return fit


def periodic_seasonal(detrended: np.ndarray, seasonality: int) -> np.ndarray:
    # subseries de ciclo colapsadas a su media; el paso paso-bajo sobre una señal periódica
    # deja una constante, así que basta con centrar el ciclo
    n = len(detrended)
    cycle = np.array([detrended[k::seasonality].mean() for k in range(seasonality)])
    cycle = cycle - cycle.mean()
    return cycle[np.arange(n) % seasonality]


def stl_decompose(x, seasonality: int, cfg: DecomposeConfig | None = None) -> Decomposition:
    cfg = cfg or DecomposeConfig()
    x = np.asarray(x, dtype=float)
    if seasonality < 1:
        raise DomainError(f"estacionalidad inválida: {seasonality}")
    if len(x) < 1 or not np.all(np.isfinite(x)):
        raise DomainError("la serie a descomponer debe ser no vacía y finita")
    if seasonality > 1 and len(x) < 2 * seasonality:
        raise DatasetValidationError(
            f"serie demasiado corta para STL: {len(x)} < 2S = {2 * seasonality}"
        )

    span = cfg.trend_span or trend_span(len(x), seasonality)
    if seasonality == 1:
        seasonal = np.zeros_like(x)
        trend = loess(x, span)
    else:
        trend = np.zeros_like(x)
        seasonal = np.zeros_like(x)
        for _ in range(cfg.inner_iterations):
            seasonal = periodic_seasonal(x - trend, seasonality)
            trend = loess(x - seasonal, span)

    remainder = x - seasonal - trend
    return Decomposition(seasonal=seasonal, trend=trend, remainder=remainder, seasonality=seasonality)
