"""
Datos: carga, validación, serialización y partición train/test de datasets de series.

Formato CSV largo (`series_id,t,value`) + metadatos JSON (`name`, `seasonality`,
`horizon`, `paradigm`, `input_window` opcional, `sampling` informativo).
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import pandas as pd

from .config import DATASET_COLUMNS, INPUT_WINDOW_FACTOR, PARADIGMS
from .errors import DatasetValidationError, DomainError, ParseError


@dataclass
class TimeSeries:
    id: str
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or len(self.values) < 1:
            raise DatasetValidationError("la serie debe tener al menos una observación", self.id)
        if not np.all(np.isfinite(self.values)):
            raise DomainError(f"[{self.id}] hay valores no finitos")
        if np.any(self.values < 0):
            raise DomainError(f"[{self.id}] hay valores negativos (se asumen series no negativas)")

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class Dataset:
    name: str
    series: list[TimeSeries]
    seasonality: int
    horizon: int
    paradigm: str
    input_window: int
    sampling: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.horizon <= 0 or self.input_window <= 0 or self.seasonality < 1:
            raise DatasetValidationError(
                f"metadatos inválidos: S={self.seasonality}, M={self.horizon}, n={self.input_window}"
            )
        if self.paradigm not in PARADIGMS:
            raise DatasetValidationError(f"paradigma desconocido: {self.paradigm} (esperado DS o SE)")

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.series]

    def get(self, series_id: str) -> TimeSeries:
        for s in self.series:
            if s.id == series_id:
                return s
        raise KeyError(series_id)

    @property
    def max_length(self) -> int:
        return max(len(s) for s in self.series)

    @property
    def min_value(self) -> float:
        return float(min(s.values.min() for s in self.series))

    def with_series(self, series: list[TimeSeries], name: str | None = None) -> "Dataset":
        return replace(self, series=list(series), name=name or self.name)

    def validate(self, min_length: int | None = None) -> None:
        """
        Comprueba ids únicos, series no nulas y longitud mínima.

        Por defecto n + 2M + 1: tras el holdout quedan n + M + 1 puntos, que dan una ventana de
        entrenamiento y la de validación.
        """
        if not self.series:
            raise DatasetValidationError(f"[{self.name}] el dataset no tiene series")
        if min_length is None:
            min_length = self.input_window + 2 * self.horizon + 1
        seen = set()
        for s in self.series:
            if s.id in seen:
                raise DatasetValidationError("id de serie duplicado", s.id)
            seen.add(s.id)
            if len(s) < min_length:
                raise DatasetValidationError(
                    f"serie demasiado corta: {len(s)} < {min_length} (n + 2M + 1)", s.id
                )
            if np.all(s.values == 0):
                raise DomainError(f"[{s.id}] la serie es idénticamente cero")


def default_input_window(horizon: int) -> int:
    return int(math.ceil(INPUT_WINDOW_FACTOR * horizon))


# ----------------------------
# Validación / carga
# ----------------------------
def load_csv(path: str | Path) -> pd.DataFrame:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"No existe: {p.resolve()}")
    try:
        return pd.read_csv(
            p, dtype={"series_id": str, "t": str, "value": str}, keep_default_na=False, encoding="utf-8"
        )
    except pd.errors.ParserError as e:
        # pandas solo da la línea dentro del mensaje ("... in line 3, saw 4")
        match = re.search(r"line (\d+)", str(e))
        line = int(match.group(1)) if match else None
        raise ParseError(f"[{p.name}] CSV mal formado: {e}", line=line) from e


def require_columns(df: pd.DataFrame, required: list[str], name: str) -> None:
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise ParseError(f"[{name}] Faltan columnas obligatorias: {missing}", line=1)


def coerce_numeric(df: pd.DataFrame, cols: list[str], name: str) -> pd.DataFrame:
    out = df.copy()
    for c in cols:
        parsed = pd.to_numeric(out[c], errors="coerce")
        bad = out[parsed.isna()]
        if len(bad):
            row = int(bad.index[0])
            # +2: cabecera y base 1
            raise ParseError(
                f"[{name}] valor no numérico en '{c}': {df.loc[row, c]!r}", line=row + 2
            )
        # float() de Python sobre el literal: lectura exacta
        out[c] = out[c].astype(object).map(float)
    return out


def load_meta(path: str | Path) -> dict:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"No existe: {p.resolve()}")
    with open(p, "r", encoding="utf-8") as f:
        try:
            meta = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(f"metadatos JSON inválidos: {e.msg}", line=e.lineno) from e
    missing = [k for k in ("name", "seasonality", "horizon", "paradigm") if k not in meta]
    if missing:
        raise ParseError(f"[{p.name}] Faltan claves obligatorias: {missing}")
    return meta


def load_dataset(path: str | Path, meta: dict | str | Path) -> Dataset:
    """
    Carga un dataset en formato largo y lo valida.

    Si `input_window` no viene en los metadatos se usa n = ceil(1.25 * M).
    """
    if not isinstance(meta, dict):
        meta = load_meta(meta)

    df = load_csv(path)
    require_columns(df, DATASET_COLUMNS, "dataset")
    empty_ids = df[df["series_id"].str.strip() == ""]
    if len(empty_ids):
        raise ParseError("[dataset] series_id vacío", line=int(empty_ids.index[0]) + 2)
    df = coerce_numeric(df, ["t", "value"], "dataset")

    frac = df[df["t"] != np.floor(df["t"])]
    if len(frac):
        raise ParseError("[dataset] 't' debe ser entero", line=int(frac.index[0]) + 2)
    negative = df[df["value"] < 0]
    if len(negative):
        row = int(negative.index[0])
        raise DomainError(
            f"línea {row + 2}: valor negativo {df.loc[row, 'value']} en la serie {df.loc[row, 'series_id']}"
        )

    series = []
    for sid, g in df.groupby("series_id", sort=False):
        g = g.sort_values("t")
        t = g["t"].to_numpy().astype(int)
        if not np.array_equal(t, np.arange(len(t))):
            raise ParseError(
                f"[{sid}] los índices 't' deben ser contiguos desde 0", line=int(g.index[0]) + 2
            )
        series.append(TimeSeries(str(sid), g["value"].to_numpy(dtype=float)))

    horizon = int(meta["horizon"])
    input_window = meta.get("input_window")
    d = Dataset(
        name=str(meta["name"]),
        series=series,
        seasonality=int(meta["seasonality"]),
        horizon=horizon,
        paradigm=str(meta["paradigm"]),
        input_window=int(input_window) if input_window is not None else default_input_window(horizon),
        sampling=str(meta.get("sampling", "")),
    )
    d.validate()
    return d


def dataset_frame(series: list[TimeSeries]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "series_id": np.concatenate([[s.id] * len(s) for s in series]),
            "t": np.concatenate([np.arange(len(s)) for s in series]),
            "value": np.concatenate([s.values for s in series]),
        }
    )


def dataset_meta(d: Dataset) -> dict:
    meta = {
        "name": d.name,
        "seasonality": d.seasonality,
        "horizon": d.horizon,
        "paradigm": d.paradigm,
        "input_window": d.input_window,
    }
    if d.sampling:
        meta["sampling"] = d.sampling
    return meta


def save_dataset(d: Dataset, csv_path: str | Path, meta_path: str | Path | None = None) -> None:
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    dataset_frame(d.series).to_csv(csv_path, index=False, encoding="utf-8")
    if meta_path is not None:
        with open(meta_path, "w", encoding="utf-8") as f:
            json.dump(dataset_meta(d), f, indent=2, ensure_ascii=False)


# ----------------------------
# Holdout / benchmark
# ----------------------------
def split_holdout(d: Dataset) -> tuple[Dataset, dict[str, np.ndarray]]:
    """Quita los últimos M puntos de cada serie; devuelve (train, actuals)."""
    m = d.horizon
    train, actuals = [], {}
    for s in d.series:
        if len(s) <= m:
            raise DatasetValidationError(f"serie de longitud {len(s)} no admite holdout de {m}", s.id)
        train.append(TimeSeries(s.id, s.values[:-m].copy()))
        actuals[s.id] = s.values[-m:].copy()
    return d.with_series(train), actuals


def seasonal_naive(train_series, seasonality: int, horizon: int) -> np.ndarray:
    """Repite el último ciclo observado hasta cubrir el horizonte."""
    x = np.asarray(train_series, dtype=float)
    if seasonality < 1:
        raise DomainError(f"estacionalidad inválida: {seasonality}")
    if len(x) < seasonality:
        raise DatasetValidationError(f"serie más corta ({len(x)}) que la estacionalidad ({seasonality})")
    last_cycle = x[-seasonality:]
    return last_cycle[np.arange(horizon) % seasonality].copy()
