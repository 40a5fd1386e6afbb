"""
Estrategias de transferencia de conocimiento: línea base, entrenamiento conjunto (pooled) con
series aumentadas y las seis arquitecturas TL ({Dense, AddDense, Lstm} x {Freeze, Retrain}).

Nombres de estrategia:
    LSTM.Baseline
    <MBB|DBA>.Pooled
    <MBB|DBA|GRATIS>.TL.<Dense|AddDense|Lstm>.<Freeze|Retrain>
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import AUGMENT_METHODS, DEFAULT_Q, TL_MODES, TL_SCHEMES
from .data import Dataset
from .errors import ConfigError
from .net import Hyperparameters, LayerSpec, Network, forecast, init_layer, network_for, train
from .pipeline import preprocess

logger = logging.getLogger(__name__)

KINDS = ("Baseline", "Pooled", "Transfer")
POOLED_METHODS = ("MBB", "DBA")


@dataclass(frozen=True)
class Strategy:
    kind: str
    method: str | None = None
    scheme: str | None = None
    mode: str | None = None
    q: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"tipo de estrategia desconocido: {self.kind}")
        if self.kind == "Baseline":
            if any(v is not None for v in (self.method, self.scheme, self.mode, self.q)):
                raise ConfigError("LSTM.Baseline no admite método, esquema ni modo")
            return
        if self.method not in AUGMENT_METHODS:
            raise ConfigError(f"método de aumento desconocido: {self.method}")
        if self.kind == "Pooled":
            if self.method not in POOLED_METHODS:
                raise ConfigError(f"{self.method} no se usa en entrenamiento conjunto (solo MBB y DBA)")
            if any(v is not None for v in (self.scheme, self.mode, self.q)):
                raise ConfigError("Pooled no admite esquema, modo ni q")
            return
        if self.scheme not in TL_SCHEMES:
            raise ConfigError(f"esquema TL desconocido: {self.scheme}")
        if self.mode not in TL_MODES:
            raise ConfigError(f"modo TL desconocido: {self.mode}")
        if self.q is not None and self.q < 1:
            raise ConfigError(f"q debe ser >= 1: {self.q}")

    @property
    def name(self) -> str:
        if self.kind == "Baseline":
            return "LSTM.Baseline"
        if self.kind == "Pooled":
            return f"{self.method}.Pooled"
        return f"{self.method}.TL.{self.scheme}.{self.mode}"

    @property
    def added_layers(self) -> int:
        return self.q if self.q is not None else DEFAULT_Q[self.scheme]

    def __str__(self) -> str:
        return self.name


def parse_strategy(name: str, q: int | None = None) -> Strategy:
    parts = name.strip().split(".")
    if parts == ["LSTM", "Baseline"]:
        return Strategy("Baseline")
    if len(parts) == 2 and parts[1] == "Pooled":
        return Strategy("Pooled", parts[0])
    if len(parts) == 4 and parts[1] == "TL":
        return Strategy("Transfer", parts[0], parts[2], parts[3], q)
    raise ConfigError(f"nombre de estrategia no válido: {name!r}")


def enumerate_strategies(q: dict[str, int] | None = None) -> list[Strategy]:
    """Las 21 variantes: línea base, 2 pooled y 18 de transferencia."""
    q = q or {}
    out = [Strategy("Baseline")]
    out += [Strategy("Pooled", m) for m in POOLED_METHODS]
    out += [
        Strategy("Transfer", m, sc, mo, q.get(sc))
        for m in AUGMENT_METHODS
        for sc in TL_SCHEMES
        for mo in TL_MODES
    ]
    return out


# ----------------------------
# Cirugía de arquitectura
# ----------------------------
def build_target(
    base: Network,
    scheme: str,
    mode: str,
    q: int,
    target_m: int,
    init_std: float,
    rng: np.random.Generator,
) -> Network:
    """
    Red destino a partir de una base preentrenada.

    Dense: una capa densa sin sesgo (salida base -> target_m).
    AddDense: q capas densas; las ocultas (m -> m, tanh, con sesgo) y la última sin sesgo.
    Lstm: q capas recurrentes residuales (misma celda que la base) de ancho cell_dim tras la
    pila base y una proyección nueva (cell_dim -> target_m) que sustituye a la cadena densa.
    Freeze congela todos los bloques heredados.
    """
    if scheme not in TL_SCHEMES:
        raise ConfigError(f"esquema TL desconocido: {scheme}")
    if mode not in TL_MODES:
        raise ConfigError(f"modo TL desconocido: {mode}")
    if q < 1:
        raise ConfigError(f"q debe ser >= 1: {q}")

    net = base.copy()
    m = base.output_dim
    if scheme == "Dense":
        new = [LayerSpec("dense", "tl_dense0", m, target_m)]
    elif scheme == "AddDense":
        new = [LayerSpec("dense", f"tl_dense{k}", m, m, bias=True, activation="tanh") for k in range(q - 1)]
        new.append(LayerSpec("dense", f"tl_dense{q - 1}", m, target_m))
    else:
        width = base.cell_dim
        new = [LayerSpec(base.cell, f"tl_{base.cell}{k}", width, width, residual=True) for k in range(q)]
        new.append(LayerSpec("dense", "tl_proj", width, target_m))
        for spec in base.dense:
            for p in spec.param_names():
                del net.params[p]
        net.layers = net.recurrent

    inherited = set(net.params)
    for spec in new:
        net.params.update(init_layer(spec, init_std, rng))
    rec = [s for s in net.layers + new if s.is_recurrent]
    dense = [s for s in net.layers + new if not s.is_recurrent]
    net.layers = rec + dense
    net.frozen = inherited if mode == "Freeze" else set()
    return net


# ----------------------------
# Entrenamiento por semilla
# ----------------------------
def train_model(
    d: Dataset, hp: Hyperparameters, rng: np.random.Generator, net: Network | None = None
):
    states, windowsets = preprocess(d)
    if net is None:
        net = network_for(windowsets, hp, rng)
    net, history = train(net, windowsets, hp, rng)
    return net, states, windowsets, history


def pretrain_base(augmented: Dataset, hp: Hyperparameters, seed: int) -> Network:
    """Red base entrenada solo con las series aumentadas (mismos hiperparámetros)."""
    net, _, _, history = train_model(augmented, hp, np.random.default_rng([seed, 0]))
    logger.debug("base preentrenada (seed=%d): mejor validación %.6f", seed, min(history))
    return net


def median_ensemble(forecasts: list[dict[str, np.ndarray]]) -> dict[str, np.ndarray]:
    if not forecasts:
        raise ConfigError("no hay previsiones que combinar")
    return {sid: np.median(np.stack([f[sid] for f in forecasts]), axis=0) for sid in forecasts[0]}


def fit_strategy(
    s: Strategy,
    original: Dataset,
    augmented: Dataset | None,
    hp: Hyperparameters,
    seed: int,
    base: Network | None = None,
):
    """Entrena una semilla; devuelve (red, estados, ventanas, red base o None)."""
    if s.kind == "Baseline":
        net, states, ws, _ = train_model(original, hp, np.random.default_rng(seed))
        return net, states, ws, None

    if s.kind == "Pooled":
        pooled = original.with_series(original.series + augmented.series, name=f"{original.name}+{augmented.name}")
        net, states, ws, _ = train_model(pooled, hp, np.random.default_rng(seed))
        return net, states, ws, None

    if base is None:
        base = pretrain_base(augmented, hp, seed)
    rng = np.random.default_rng([seed, 1])
    target = build_target(base, s.scheme, s.mode, s.added_layers, original.horizon, hp.init_std, rng)
    net, states, ws, _ = train_model(original, hp, rng, net=target)
    return net, states, ws, base


def _seed_forecast(s, original, augmented, hp, seed, base=None):
    net, states, ws, base = fit_strategy(s, original, augmented, hp, seed, base)
    preds = forecast(net, states, ws)
    # en pooled solo se devuelven las series originales
    return {sid: preds[sid] for sid in original.ids}, base


def run_strategy(
    s: Strategy,
    original: Dataset,
    augmented: Dataset | None,
    hp: Hyperparameters,
    seeds: list[int],
    cache: dict | None = None,
    cache_key=None,
    workers: int = 1,
) -> dict[str, np.ndarray]:
    """
    Mediana elemento a elemento de las previsiones de cada semilla de entrenamiento.

    `cache` guarda las redes base preentrenadas por (cache_key, seed) para que los seis
    esquemas TL de un mismo conjunto aumentado compartan el preentrenamiento.
    """
    if not seeds:
        raise ConfigError("se necesita al menos una semilla de entrenamiento")
    if s.kind != "Baseline" and (augmented is None or not augmented.series):
        raise ConfigError(f"{s.name} necesita un conjunto aumentado no vacío")
    cache = cache if cache is not None else {}
    bases = [cache.get((cache_key, seed)) for seed in seeds]

    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futures = [
                ex.submit(_seed_forecast, s, original, augmented, hp, seed, base)
                for seed, base in zip(seeds, bases)
            ]
            results = [f.result() for f in futures]
    else:
        results = [_seed_forecast(s, original, augmented, hp, seed, base) for seed, base in zip(seeds, bases)]

    for seed, (_, base) in zip(seeds, results):
        if base is not None:
            cache[(cache_key, seed)] = base
    logger.info("%s: %d semillas completadas", s.name, len(seeds))
    return median_ensemble([f for f, _ in results])
