"""
Generadores de series sintéticas: MBB (bootstrap por bloques del resto STL),
DBA (promedio baricéntrico bajo DTW con pesos ASD/AS/AA) y mezclas de AR (estilo GRATIS).

Cada serie generada usa un generador derivado de (seed, índice de salida), así que el
resultado no depende del orden de ejecución.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .config import (
    AUG_SUFFIX,
    AUGMENT_METHODS,
    DBA_TOLERANCE,
    DBA_WEIGHTINGS,
    DEFAULT_AS_NEIGHBORS,
    DEFAULT_DBA_ITERATIONS,
    DEFAULT_MAR_COMPONENTS,
    DEFAULT_PER_SERIES,
    MAR_COEF_STD,
    MAR_MAX_REDRAWS,
    MAR_RANGE,
    MBB_MIN_BLOCK,
)
from .data import Dataset, TimeSeries
from .decompose import stl_decompose
from .errors import ConfigError, DatasetValidationError, DomainError

logger = logging.getLogger(__name__)


@dataclass
class AugmentConfig:
    method: str
    per_series: int = DEFAULT_PER_SERIES
    total_override: int | None = None
    seed: int = 0
    block_length: int | None = None
    dba_iterations: int = DEFAULT_DBA_ITERATIONS
    dba_weighting: str = "ASD"
    as_neighbors: int = DEFAULT_AS_NEIGHBORS
    mar_components: int = DEFAULT_MAR_COMPONENTS
    mar_length: int | None = None

    def __post_init__(self):
        if self.method not in AUGMENT_METHODS:
            raise ConfigError(f"método de aumento desconocido: {self.method}")
        if self.per_series < 1:
            raise ConfigError("per_series debe ser >= 1")
        if self.total_override is not None and self.total_override < 1:
            raise ConfigError("total_override debe ser >= 1")
        if self.block_length is not None and self.block_length < 2:
            raise ConfigError("block_length debe ser >= 2")
        if self.dba_iterations < 1:
            raise ConfigError("dba_iterations debe ser >= 1")
        if self.dba_weighting not in DBA_WEIGHTINGS:
            raise ConfigError(f"esquema de pesos DBA desconocido: {self.dba_weighting}")
        if self.mar_components < 2:
            raise ConfigError("mar_components debe ser >= 2")
        if self.seed < 0:
            raise ConfigError("la semilla debe ser no negativa")


@dataclass
class WarpPath:
    pairs: list[tuple[int, int]]

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass
class MarModel:
    weights: np.ndarray
    coefficients: list[np.ndarray]
    orders: list[int]
    seasonal_lag: int
    spectral_radii: list[float] = field(default_factory=list)


def series_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _counts(total: int, n: int) -> list[int]:
    return [total // n + (1 if i < total % n else 0) for i in range(n)]


def total_outputs(n_series: int, cfg: AugmentConfig) -> int:
    return cfg.total_override if cfg.total_override is not None else n_series * cfg.per_series


# ----------------------------
# MBB
# ----------------------------
def default_block_length(seasonality: int) -> int:
    return max(2 * seasonality, MBB_MIN_BLOCK)


def bootstrap_remainder(remainder: np.ndarray, block_length: int, rng: np.random.Generator) -> np.ndarray:
    n = len(remainder)
    if n < block_length:
        raise DatasetValidationError(f"resto de longitud {n} menor que el bloque ({block_length})")
    n_blocks = n // block_length + 2
    starts = rng.integers(0, n - block_length + 1, size=n_blocks)
    boot = np.concatenate([remainder[s : s + block_length] for s in starts])
    trim = int(rng.integers(0, block_length))
    return boot[trim : trim + n]


def mbb_augment(
    x: TimeSeries, seasonality: int, cfg: AugmentConfig, rng: np.random.Generator, count: int | None = None
) -> list[TimeSeries]:
    """Series bootstrap: estacional + tendencia + resto remuestreado por bloques."""
    dec = stl_decompose(x.values, seasonality)
    block = cfg.block_length or default_block_length(seasonality)
    base = dec.seasonal + dec.trend
    out = []
    for j in range(cfg.per_series if count is None else count):
        y = base + bootstrap_remainder(dec.remainder, block, rng)
        out.append(TimeSeries(f"{x.id}{AUG_SUFFIX}{j}", np.maximum(y, 0.0)))
    return out


# ----------------------------
# DTW / DBA
# ----------------------------
def _dtw_batch(reference, sequences) -> tuple[np.ndarray, list[WarpPath]]:
    """
    DTW de `reference` contra cada secuencia, en paralelo por antidiagonales.
    Filas = reference, columnas = secuencia. Coste = suma de cuadrados a lo largo del camino.
    """
    a = np.asarray(reference, dtype=float)
    seqs = [np.asarray(s, dtype=float) for s in sequences]
    if len(a) == 0 or any(len(s) == 0 for s in seqs):
        raise DomainError("DTW requiere secuencias no vacías")
    k, la = len(seqs), len(a)
    lengths = np.array([len(s) for s in seqs])
    lb = int(lengths.max())
    b = np.full((k, lb), np.nan)
    for r, s in enumerate(seqs):
        b[r, : len(s)] = s
    cost = (a[None, :, None] - b[:, None, :]) ** 2
    cost[np.isnan(cost)] = np.inf

    acc = np.full((k, la + 1, lb + 1), np.inf)
    acc[:, 0, 0] = 0.0
    for s in range(la + lb - 1):
        ii = np.arange(max(0, s - lb + 1), min(s, la - 1) + 1)
        jj = s - ii
        best = np.minimum(np.minimum(acc[:, ii, jj], acc[:, ii, jj + 1]), acc[:, ii + 1, jj])
        acc[:, ii + 1, jj + 1] = cost[:, ii, jj] + best

    costs = acc[np.arange(k), la, lengths]
    paths = []
    for r in range(k):
        grid = acc[r].tolist()
        i, j = la - 1, int(lengths[r]) - 1
        pairs = [(i, j)]
        while i > 0 or j > 0:
            diag, up, left = grid[i][j], grid[i][j + 1], grid[i + 1][j]
            # empate: diagonal, después paso (1,0)
            if diag <= up and diag <= left:
                i, j = i - 1, j - 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
            pairs.append((i, j))
        pairs.reverse()
        paths.append(WarpPath(pairs))
    return costs, paths


def dtw_distance(a, b) -> tuple[float, WarpPath]:
    costs, paths = _dtw_batch(a, [b])
    return float(costs[0]), paths[0]


def _weighted_update(length: int, sequences, weights, paths) -> np.ndarray:
    num = np.zeros(length)
    den = np.zeros(length)
    for s, w, path in zip(sequences, weights, paths):
        idx = np.array(path.pairs)
        np.add.at(num, idx[:, 0], w * s[idx[:, 1]])
        np.add.at(den, idx[:, 0], w)
    return num / den


def dba_average(
    series_list,
    weights,
    init,
    iters: int = DEFAULT_DBA_ITERATIONS,
    tol: float = DBA_TOLERANCE,
    return_history: bool = False,
):
    """
    Baricentro DTW ponderado, de la longitud de `init`.

    Con return_history=True devuelve también el coste ponderado tras cada actualización
    (el primer valor es el coste de `init`).
    """
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(series_list):
        raise ConfigError("hay que dar un peso por serie")
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise DomainError("los pesos DBA deben ser finitos y no negativos")
    if weights.sum() <= 0:
        raise DomainError("la suma de pesos DBA es cero")
    bary = np.asarray(init, dtype=float).copy()
    if len(bary) == 0:
        raise DomainError("el baricentro inicial está vacío")

    active = [i for i, w in enumerate(weights) if w > 0]
    seqs = [np.asarray(series_list[i], dtype=float) for i in active]
    w = weights[active]

    costs, paths = _dtw_batch(bary, seqs)
    history = [float(w @ costs)]
    for _ in range(iters):
        candidate = _weighted_update(len(bary), seqs, w, paths)
        costs, paths = _dtw_batch(candidate, seqs)
        history.append(float(w @ costs))
        bary = candidate
        if history[-2] - history[-1] < tol:
            break
    if return_history:
        return bary, history
    return bary


def distance_row(values: list[np.ndarray], reference: int) -> np.ndarray:
    costs, _ = _dtw_batch(values[reference], values)
    return costs


def asd_weights(distances: np.ndarray, reference: int) -> np.ndarray:
    """Referencia peso 1; el resto 0.5 ** (d_i / d_NN), con d_NN la menor distancia no nula."""
    distances = np.asarray(distances, dtype=float)
    others = np.arange(len(distances)) != reference
    positive = distances[others][distances[others] > 0]
    if len(positive) == 0:
        return np.ones(len(distances))
    d_nn = positive.min()
    w = np.power(0.5, distances / d_nn)
    w[reference] = 1.0
    return w


def as_weights(distances: np.ndarray, reference: int, neighbors: int) -> np.ndarray:
    order = [i for i in np.argsort(distances, kind="stable") if i != reference][:neighbors]
    w = np.zeros(len(distances))
    w[order] = 0.5
    w[reference] = 1.0
    return w


def asd_generate(d: Dataset, cfg: AugmentConfig) -> list[TimeSeries]:
    """DBA alrededor de una referencia aleatoria por cada serie generada."""
    if len(d.series) < 2:
        raise ConfigError("DBA necesita al menos 2 series; para una sola serie usa MBB")
    values = [s.values for s in d.series]
    rows: dict[int, np.ndarray] = {}
    out = []
    for k in range(total_outputs(len(values), cfg)):
        rng = series_rng(cfg.seed, k)
        ref = int(rng.integers(len(values)))
        if cfg.dba_weighting == "AA":
            weights = rng.dirichlet(np.ones(len(values)))
        else:
            if ref not in rows:
                rows[ref] = distance_row(values, ref)
            if cfg.dba_weighting == "ASD":
                weights = asd_weights(rows[ref], ref)
            else:
                weights = as_weights(rows[ref], ref, cfg.as_neighbors)
        bary = dba_average(values, weights, values[ref], cfg.dba_iterations)
        out.append(TimeSeries(f"{d.series[ref].id}{AUG_SUFFIX}{k}", np.maximum(bary, 0.0)))
    return out


# ----------------------------
# Mezclas de AR (GRATIS)
# ----------------------------
def companion_radius(coefficients: np.ndarray) -> float:
    p = len(coefficients)
    companion = np.zeros((p, p))
    companion[0, :] = coefficients
    if p > 1:
        companion[1:, :-1] = np.eye(p - 1)
    return float(np.max(np.abs(np.linalg.eigvals(companion))))


def draw_ar_component(seasonality: int, rng: np.random.Generator) -> tuple[np.ndarray, int, float]:
    order = int(rng.integers(1, 4))
    width = max(order, seasonality) if seasonality > 1 else order
    for _ in range(MAR_MAX_REDRAWS):
        coefs = np.zeros(width)
        coefs[:order] = rng.normal(0.0, MAR_COEF_STD, order)
        if seasonality > 1:
            coefs[seasonality - 1] += rng.normal(0.0, MAR_COEF_STD)
        radius = companion_radius(coefs)
        if radius < 1:
            return coefs, order, radius
    raise DomainError(f"componente AR no estacionaria tras {MAR_MAX_REDRAWS} intentos")


def draw_mar_model(seasonality: int, components: int, rng: np.random.Generator) -> MarModel:
    weights = rng.dirichlet(np.ones(components))
    coefs, orders, radii = [], [], []
    for _ in range(components):
        c, p, r = draw_ar_component(seasonality, rng)
        coefs.append(c)
        orders.append(p)
        radii.append(r)
    return MarModel(weights, coefs, orders, seasonality, radii)


def simulate_mar(model: MarModel, length: int, rng: np.random.Generator) -> np.ndarray:
    width = max(len(c) for c in model.coefficients)
    coefs = np.zeros((len(model.coefficients), width))
    for j, c in enumerate(model.coefficients):
        coefs[j, : len(c)] = c
    burn = 50 + 2 * model.seasonal_lag
    total = burn + length
    choice = rng.choice(len(model.weights), size=total, p=model.weights)
    noise = rng.normal(0.0, 1.0, size=total)
    y = np.zeros(width + total)
    for t in range(total):
        # y[t+width-1], ..., y[t] son los retardos 1..width
        y[t + width] = coefs[choice[t]] @ y[t : t + width][::-1] + noise[t]
    return y[width + burn :]


def scale_to_range(y: np.ndarray, lo: float = MAR_RANGE[0], hi: float = MAR_RANGE[1]) -> np.ndarray:
    y_min, y_max = float(y.min()), float(y.max())
    if y_max - y_min <= 0:
        return np.full(len(y), lo)
    return lo + (hi - lo) * (y - y_min) / (y_max - y_min)


def gratis_generate(
    seasonality: int,
    length: int,
    count: int,
    components: int = DEFAULT_MAR_COMPONENTS,
    seed: int = 0,
    return_models: bool = False,
):
    if components < 2:
        raise ConfigError("la mezcla necesita al menos 2 componentes")
    if length <= 2 * seasonality + 50:
        raise ConfigError(f"longitud {length} insuficiente para S={seasonality} (> 2S + 50)")
    series, models = [], []
    for k in range(count):
        rng = series_rng(seed, k)
        for _ in range(MAR_MAX_REDRAWS):
            model = draw_mar_model(seasonality, components, rng)
            y = simulate_mar(model, length, rng)
            # el cambio de régimen puede divergir aunque cada componente sea estacionaria
            if np.all(np.isfinite(y)) and np.max(np.abs(y)) < 1e12:
                break
        else:
            raise DomainError("la mezcla AR diverge de forma sistemática")
        series.append(TimeSeries(f"gratis{AUG_SUFFIX}{k}", scale_to_range(y)))
        models.append(model)
    if return_models:
        return series, models
    return series


# ----------------------------
# Despacho
# ----------------------------
def augment_dataset(d: Dataset, cfg: AugmentConfig) -> Dataset:
    """Genera el conjunto aumentado con los metadatos de `d`."""
    n = len(d.series)
    if cfg.method == "MBB":
        out = []
        counts = _counts(total_outputs(n, cfg), n)
        for i, s in enumerate(d.series):
            if counts[i]:
                out.extend(mbb_augment(s, d.seasonality, cfg, series_rng(cfg.seed, i), counts[i]))
    elif cfg.method == "DBA":
        out = asd_generate(d, cfg)
    else:
        out = gratis_generate(
            d.seasonality,
            cfg.mar_length or d.max_length,
            total_outputs(n, cfg),
            cfg.mar_components,
            cfg.seed,
        )
    logger.info("aumento %s (seed=%d): %d series generadas", cfg.method, cfg.seed, len(out))
    return d.with_series(out, name=f"{d.name}{AUG_SUFFIX}_{cfg.method}_{cfg.seed}")
