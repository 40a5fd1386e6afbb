"""
Pre-procesado (escala por media, log, descomposición, paradigmas DS/SE, ventanas móviles,
normalización local) y post-procesado (reestacionalización, desnormalización).

preprocess y postprocess son inversos sobre los objetivos de cada ventana.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .decompose import DecomposeConfig, Decomposition, stl_decompose
from .errors import DatasetValidationError, DomainError

logger = logging.getLogger(__name__)


@dataclass
class PreprocessState:
    series_id: str
    scale: float
    log_offset: int
    decomposition: Decomposition
    paradigm: str
    length: int


@dataclass
class Window:
    input: np.ndarray
    target: np.ndarray | None
    norm_factor: float
    position: int
    seasonal_exo: np.ndarray | None = None

    @property
    def features(self) -> np.ndarray:
        """Entrada de la red: ventana (+ estacional exógeno en SE)."""
        if self.seasonal_exo is None:
            return self.input
        return np.concatenate([self.input, self.seasonal_exo])


@dataclass
class WindowSet:
    series_id: str
    windows: list[Window]
    forecast_window: Window

    @property
    def validation_window(self) -> Window:
        return self.windows[-1]

    @property
    def training_windows(self) -> list[Window]:
        return self.windows[:-1]

    def arrays(self, include_forecast: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) en orden cronológico; la fila de previsión lleva objetivo NaN."""
        ws = self.windows + ([self.forecast_window] if include_forecast else [])
        x = np.stack([w.features for w in ws])
        m = len(self.windows[0].target)
        y = np.stack([w.target if w.target is not None else np.full(m, np.nan) for w in ws])
        return x, y


# ----------------------------
# Transformaciones por serie
# ----------------------------
def dataset_log_offset(d: Dataset) -> int:
    return 1 if d.min_value == 0 else 0


def scale_series(values: np.ndarray, series_id: str) -> float:
    scale = float(np.mean(values))
    if scale <= 0:
        raise DomainError(f"[{series_id}] la serie es idénticamente cero; no se puede escalar por la media")
    return scale


def model_sequence(state: PreprocessState) -> np.ndarray:
    dec = state.decomposition
    if state.paradigm == "DS":
        return dec.trend + dec.remainder
    return dec.seasonal + dec.trend + dec.remainder


def _make_window(seq, state: PreprocessState, end: int, n: int, m: int, with_target: bool) -> Window:
    dec = state.decomposition
    inp = seq[end - n + 1 : end + 1]
    if state.paradigm == "DS":
        nf = float(dec.trend[end])
    else:
        nf = float(np.mean(inp))
    targets = np.arange(end + 1, end + 1 + m)
    exo = dec.seasonal_at(targets).copy() if state.paradigm == "SE" else None
    target = seq[targets] - nf if with_target else None
    return Window(input=inp - nf, target=target, norm_factor=nf, position=end, seasonal_exo=exo)


def preprocess_series(
    series_id: str,
    values: np.ndarray,
    d: Dataset,
    log_offset: int,
    cfg: DecomposeConfig | None = None,
) -> tuple[PreprocessState, WindowSet]:
    n, m = d.input_window, d.horizon
    scale = scale_series(values, series_id)
    z = np.log(values / scale + log_offset)
    if not np.all(np.isfinite(z)):
        raise DomainError(f"[{series_id}] log de un valor cero sin desplazamiento +1")
    dec = stl_decompose(z, d.seasonality, cfg)
    state = PreprocessState(series_id, scale, log_offset, dec, d.paradigm, len(values))
    seq = model_sequence(state)

    p = len(seq)
    count = p - n - m + 1
    if count < 1:
        raise DatasetValidationError(
            f"serie demasiado corta para una ventana: {p} < n + M = {n + m}", series_id
        )
    windows = [_make_window(seq, state, end, n, m, True) for end in range(n - 1, p - m)]
    forecast = _make_window(seq, state, p - 1, n, m, False)
    return state, WindowSet(series_id, windows, forecast)


# ----------------------------
# Pipeline
# ----------------------------
def preprocess(
    d: Dataset, cfg: DecomposeConfig | None = None, log_offset: int | None = None
) -> tuple[dict[str, PreprocessState], dict[str, WindowSet]]:
    """`log_offset` fijo (p. ej. el de un checkpoint) o, por defecto, el del propio dataset."""
    if log_offset is None:
        log_offset = dataset_log_offset(d)
    states, windowsets = {}, {}
    for s in d.series:
        states[s.id], windowsets[s.id] = preprocess_series(s.id, s.values, d, log_offset, cfg)
    logger.debug(
        "preprocess %s: %d series, paradigma %s, log_offset=%d",
        d.name, len(states), d.paradigm, log_offset,
    )
    return states, windowsets


def postprocess(pred, w: Window, st: PreprocessState) -> np.ndarray:
    pred = np.asarray(pred, dtype=float)
    if not np.all(np.isfinite(pred)):
        raise DomainError(f"[{st.series_id}] predicción no finita")
    v = pred + w.norm_factor
    if st.paradigm == "DS":
        v = v + st.decomposition.seasonal_at(np.arange(w.position + 1, w.position + 1 + len(pred)))
    out = (np.exp(v) - st.log_offset) * st.scale
    return np.maximum(out, 0.0)
