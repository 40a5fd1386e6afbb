"""
Red recurrente residual apilada con proyección MIMO sin sesgo, su entrenamiento
(L1 + L2, BPTT exacta) y el optimizador COCOB-Backprop. La celda es LSTM por defecto;
GRU y Elman se registran en `CELLS` con la misma interfaz.

Los parámetros viven en un dict `nombre -> np.ndarray` (float64). Los bloques congelados
no reciben gradiente ni actualización.
"""
from __future__ import annotations

import json
import logging
from collections.abc import Callable
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import COCOB_ALPHA, COCOB_EPS, DEFAULT_CELL, FORGET_BIAS, HP_RANGES, INTEGER_HPS
from .errors import ConfigError, DatasetValidationError, DomainError
from .pipeline import PreprocessState, WindowSet, postprocess

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = 1


@dataclass(frozen=True)
class Hyperparameters:
    cell_dim: int
    minibatch: int
    epoch_size: int
    max_epochs: int
    layers: int
    noise_std: float
    init_std: float
    l2_weight: float
    cell: str = DEFAULT_CELL

    def __post_init__(self):
        for name, (lo, hi) in HP_RANGES.items():
            value = getattr(self, name)
            if name in INTEGER_HPS and int(value) != value:
                raise ConfigError(f"{name} debe ser entero: {value}")
            if not lo <= value <= hi:
                raise ConfigError(f"{name}={value} fuera del rango [{lo}, {hi}]")
        if self.cell not in CELLS:
            raise ConfigError(f"celda recurrente desconocida: {self.cell} (disponibles: {sorted(CELLS)})")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparameters":
        missing = [k for k in HP_RANGES if k not in d]
        if missing:
            raise ConfigError(f"Faltan hiperparámetros: {missing}")
        values = {k: (int(d[k]) if k in INTEGER_HPS else float(d[k])) for k in HP_RANGES}
        return cls(**values, cell=str(d.get("cell", DEFAULT_CELL)))


@dataclass
class LayerSpec:
    kind: str  # celda recurrente registrada en CELLS, o "dense"
    name: str
    in_dim: int
    out_dim: int
    residual: bool = False
    bias: bool = False
    activation: str = "linear"

    @property
    def is_recurrent(self) -> bool:
        return self.kind != "dense"

    def param_names(self) -> list[str]:
        if self.is_recurrent:
            return [f"{self.name}.W", f"{self.name}.U", f"{self.name}.b"]
        return [f"{self.name}.W"] + ([f"{self.name}.b"] if self.bias else [])


@dataclass
class Network:
    layers: list[LayerSpec]
    params: dict[str, np.ndarray]
    frozen: set[str] = field(default_factory=set)

    @property
    def recurrent(self) -> list[LayerSpec]:
        return [s for s in self.layers if s.is_recurrent]

    @property
    def dense(self) -> list[LayerSpec]:
        return [s for s in self.layers if not s.is_recurrent]

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.dense[-1].out_dim

    @property
    def cell_dim(self) -> int:
        return self.recurrent[0].out_dim

    @property
    def cell(self) -> str:
        return self.recurrent[0].kind

    def weight_names(self) -> list[str]:
        """Matrices de pesos (sin sesgos): las que entran en la regularización L2."""
        return [k for k in self.params if not k.endswith(".b")]

    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def copy(self) -> "Network":
        return Network(
            [LayerSpec(**asdict(s)) for s in self.layers],
            {k: v.copy() for k, v in self.params.items()},
            set(self.frozen),
        )

    def descriptor(self) -> list[dict]:
        return [
            {**asdict(s), "frozen": all(n in self.frozen for n in s.param_names())} for s in self.layers
        ]


# ----------------------------
# Celdas recurrentes
# ----------------------------
def _sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


@dataclass(frozen=True)
class Cell:
    """
    Interfaz de una celda recurrente.

    init(spec, init_std, rng) -> {nombre: array} con W (G*h, in), U (G*h, h) y b (G*h,)
    step(params, spec, inp, state) -> (h, nuevo estado, cache); state[0] es siempre h
    step_backward(params, grads, spec, cache, d_state) -> (d_inp, d_state anterior);
        d_state[0] ya incluye el gradiente que llega por la salida h
    """

    gates: int
    state_size: int
    step: Callable
    step_backward: Callable
    bias_init: Callable | None = None

    def init(self, spec: LayerSpec, init_std: float, rng: np.random.Generator) -> dict[str, np.ndarray]:
        h = spec.out_dim
        b = np.zeros(self.gates * h)
        if self.bias_init is not None:
            self.bias_init(b, h)
        return {
            f"{spec.name}.W": rng.normal(0.0, init_std, (self.gates * h, spec.in_dim)),
            f"{spec.name}.U": rng.normal(0.0, init_std, (self.gates * h, h)),
            f"{spec.name}.b": b,
        }

    def zero_state(self, batch: int, dim: int) -> tuple:
        return tuple(np.zeros((batch, dim)) for _ in range(self.state_size))


def _lstm_forget_bias(b, h):
    b[h : 2 * h] = FORGET_BIAS


def _lstm_step(params, spec: LayerSpec, inp, state):
    h_prev, c_prev = state
    hd = spec.out_dim
    a = inp @ params[f"{spec.name}.W"].T + h_prev @ params[f"{spec.name}.U"].T + params[f"{spec.name}.b"]
    i = _sigmoid(a[:, :hd])
    f = _sigmoid(a[:, hd : 2 * hd])
    g = np.tanh(a[:, 2 * hd : 3 * hd])
    o = _sigmoid(a[:, 3 * hd :])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    return h, (h, c), (inp, h_prev, c_prev, i, f, g, o, tc)


def _lstm_step_backward(params, grads, spec: LayerSpec, cache, d_state):
    inp, h_prev, c_prev, i, f, g, o, tc = cache
    d_h, dc_next = d_state
    do = d_h * tc
    dc = dc_next + d_h * o * (1.0 - tc * tc)
    da = np.concatenate(
        [dc * g * i * (1.0 - i), dc * c_prev * f * (1.0 - f), dc * i * (1.0 - g * g), do * o * (1.0 - o)],
        axis=1,
    )
    grads[f"{spec.name}.W"] += da.T @ inp
    grads[f"{spec.name}.U"] += da.T @ h_prev
    grads[f"{spec.name}.b"] += da.sum(axis=0)
    d_inp = da @ params[f"{spec.name}.W"]
    return d_inp, (da @ params[f"{spec.name}.U"], dc * f)


def _gru_step(params, spec: LayerSpec, inp, state):
    (h_prev,) = state
    hd = spec.out_dim
    ax = inp @ params[f"{spec.name}.W"].T + params[f"{spec.name}.b"]
    ah = h_prev @ params[f"{spec.name}.U"].T
    r = _sigmoid(ax[:, :hd] + ah[:, :hd])
    z = _sigmoid(ax[:, hd : 2 * hd] + ah[:, hd : 2 * hd])
    ah_n = ah[:, 2 * hd :]
    n = np.tanh(ax[:, 2 * hd :] + r * ah_n)
    h = (1.0 - z) * n + z * h_prev
    return h, (h,), (inp, h_prev, r, z, n, ah_n)


def _gru_step_backward(params, grads, spec: LayerSpec, cache, d_state):
    inp, h_prev, r, z, n, ah_n = cache
    (d_h,) = d_state
    dan = d_h * (1.0 - z) * (1.0 - n * n)
    dar = dan * ah_n * r * (1.0 - r)
    daz = d_h * (h_prev - n) * z * (1.0 - z)
    dax = np.concatenate([dar, daz, dan], axis=1)
    dah = np.concatenate([dar, daz, dan * r], axis=1)
    grads[f"{spec.name}.W"] += dax.T @ inp
    grads[f"{spec.name}.U"] += dah.T @ h_prev
    grads[f"{spec.name}.b"] += dax.sum(axis=0)
    d_inp = dax @ params[f"{spec.name}.W"]
    return d_inp, (d_h * z + dah @ params[f"{spec.name}.U"],)


def _elman_step(params, spec: LayerSpec, inp, state):
    (h_prev,) = state
    a = inp @ params[f"{spec.name}.W"].T + h_prev @ params[f"{spec.name}.U"].T + params[f"{spec.name}.b"]
    h = np.tanh(a)
    return h, (h,), (inp, h_prev, h)


def _elman_step_backward(params, grads, spec: LayerSpec, cache, d_state):
    inp, h_prev, h = cache
    da = d_state[0] * (1.0 - h * h)
    grads[f"{spec.name}.W"] += da.T @ inp
    grads[f"{spec.name}.U"] += da.T @ h_prev
    grads[f"{spec.name}.b"] += da.sum(axis=0)
    return da @ params[f"{spec.name}.W"], (da @ params[f"{spec.name}.U"],)


CELLS: dict[str, Cell] = {
    "lstm": Cell(4, 2, _lstm_step, _lstm_step_backward, _lstm_forget_bias),
    "gru": Cell(3, 1, _gru_step, _gru_step_backward),
    "elman": Cell(1, 1, _elman_step, _elman_step_backward),
}


def get_cell(kind: str) -> Cell:
    try:
        return CELLS[kind]
    except KeyError:
        raise ConfigError(f"celda recurrente desconocida: {kind} (disponibles: {sorted(CELLS)})") from None


# ----------------------------
# Construcción
# ----------------------------
def init_dense(spec: LayerSpec, init_std: float, rng: np.random.Generator) -> dict[str, np.ndarray]:
    out = {f"{spec.name}.W": rng.normal(0.0, init_std, (spec.out_dim, spec.in_dim))}
    if spec.bias:
        out[f"{spec.name}.b"] = np.zeros(spec.out_dim)
    return out


def init_layer(spec: LayerSpec, init_std: float, rng: np.random.Generator) -> dict[str, np.ndarray]:
    if spec.is_recurrent:
        return get_cell(spec.kind).init(spec, init_std, rng)
    return init_dense(spec, init_std, rng)


def init_network(
    input_dim: int,
    horizon: int,
    cell_dim: int,
    layers: int,
    init_std: float,
    rng: np.random.Generator,
    cell: str = DEFAULT_CELL,
) -> Network:
    """Pila de `layers` celdas recurrentes (residuales a partir de la segunda) + proyección sin sesgo."""
    get_cell(cell)
    specs = [
        LayerSpec(cell, f"{cell}{k}", input_dim if k == 0 else cell_dim, cell_dim, residual=k > 0)
        for k in range(layers)
    ]
    specs.append(LayerSpec("dense", "proj", cell_dim, horizon))
    params = {}
    for spec in specs:
        params.update(init_layer(spec, init_std, rng))
    return Network(specs, params)


def network_for(windowsets: dict[str, WindowSet], hp: Hyperparameters, rng: np.random.Generator) -> Network:
    first = next(iter(windowsets.values()))
    x, y = first.arrays()
    return init_network(x.shape[1], y.shape[1], hp.cell_dim, hp.layers, hp.init_std, rng, hp.cell)


# ----------------------------
# Lotes
# ----------------------------
@dataclass
class Batch:
    ids: list[str]
    x: np.ndarray  # (B, T, d)
    y: np.ndarray  # (B, T, m), 0 donde no hay objetivo
    train_mask: np.ndarray  # (B, T) ventanas de entrenamiento
    val_index: np.ndarray  # (B,) posición de la ventana de validación
    lengths: np.ndarray  # (B,) pasos reales

    def take(self, rows) -> "Batch":
        rows = np.asarray(rows)
        t = int(self.lengths[rows].max())
        return Batch(
            [self.ids[r] for r in rows],
            self.x[rows, :t],
            self.y[rows, :t],
            self.train_mask[rows, :t],
            self.val_index[rows],
            self.lengths[rows],
        )


def make_batch(windowsets: list[WindowSet], include_forecast: bool = False) -> Batch:
    arrays = [ws.arrays(include_forecast) for ws in windowsets]
    lengths = np.array([len(x) for x, _ in arrays])
    b, t = len(arrays), int(lengths.max())
    d, m = arrays[0][0].shape[1], arrays[0][1].shape[1]
    x = np.zeros((b, t, d))
    y = np.zeros((b, t, m))
    mask = np.zeros((b, t), dtype=bool)
    val_index = np.zeros(b, dtype=int)
    for r, ((xs, ys), ws) in enumerate(zip(arrays, windowsets)):
        if xs.shape[1] != d:
            raise ConfigError(f"[{ws.series_id}] ancho de entrada {xs.shape[1]} distinto de {d}")
        x[r, : len(xs)] = xs
        y[r, : len(ys)] = np.nan_to_num(ys)
        n_train = len(ws.training_windows)
        mask[r, :n_train] = True
        val_index[r] = n_train
    return Batch([ws.series_id for ws in windowsets], x, y, mask, val_index, lengths)


# ----------------------------
# Forward / backward
# ----------------------------
def _run(net: Network, x: np.ndarray, keep_cache: bool = False):
    if x.shape[-1] != net.input_dim:
        raise ConfigError(f"ancho de entrada {x.shape[-1]} distinto del de la red ({net.input_dim})")
    b, t_len, _ = x.shape
    rec, dense = net.recurrent, net.dense
    cells = [get_cell(s.kind) for s in rec]
    state = [cell.zero_state(b, s.out_dim) for cell, s in zip(cells, rec)]
    preds = np.empty((b, t_len, net.output_dim))
    caches = []
    for t in range(t_len):
        inp = x[:, t]
        step, dense_cache = [], []
        for k, (cell, spec) in enumerate(zip(cells, rec)):
            h, state[k], cache = cell.step(net.params, spec, inp, state[k])
            step.append(cache)
            inp = h + inp if spec.residual else h
        for spec in dense:
            z = inp @ net.params[f"{spec.name}.W"].T
            if spec.bias:
                z = z + net.params[f"{spec.name}.b"]
            act = np.tanh(z) if spec.activation == "tanh" else z
            dense_cache.append((inp, act))
            inp = act
        preds[:, t] = inp
        if keep_cache:
            caches.append((step, dense_cache))
    return preds, caches


def _backprop(net: Network, caches, dpred: np.ndarray) -> dict[str, np.ndarray]:
    grads = {k: np.zeros_like(v) for k, v in net.params.items()}
    rec, dense = net.recurrent, net.dense
    cells = [get_cell(s.kind) for s in rec]
    b = dpred.shape[0]
    d_state = [cell.zero_state(b, s.out_dim) for cell, s in zip(cells, rec)]
    for t in range(len(caches) - 1, -1, -1):
        step, dense_cache = caches[t]
        g_out = dpred[:, t]
        for spec, (inp, act) in zip(reversed(dense), reversed(dense_cache)):
            g_z = g_out * (1.0 - act * act) if spec.activation == "tanh" else g_out
            grads[f"{spec.name}.W"] += g_z.T @ inp
            if spec.bias:
                grads[f"{spec.name}.b"] += g_z.sum(axis=0)
            g_out = g_z @ net.params[f"{spec.name}.W"]
        for k in range(len(rec) - 1, -1, -1):
            spec = rec[k]
            ds = (d_state[k][0] + g_out,) + d_state[k][1:]
            d_inp, d_state[k] = cells[k].step_backward(net.params, grads, spec, step[k], ds)
            g_out = d_inp + g_out if spec.residual else d_inp
    return grads


def forward(
    net: Network,
    windowsets: dict[str, WindowSet],
    inject_noise: bool = False,
    rng: np.random.Generator | None = None,
    noise_std: float = 0.0,
    include_forecast: bool = False,
) -> dict[str, np.ndarray]:
    """Predicciones (ventanas, m) por serie; el estado se reinicia entre series."""
    if inject_noise and noise_std <= 0:
        raise ConfigError(f"inject_noise necesita noise_std > 0 (recibido {noise_std})")
    batch = make_batch(list(windowsets.values()), include_forecast)
    x = batch.x
    if inject_noise:
        x = x + (rng or np.random.default_rng()).normal(0.0, noise_std, x.shape)
    preds, _ = _run(net, x)
    return {sid: preds[r, : batch.lengths[r]] for r, sid in enumerate(batch.ids)}


def l2_penalty(net: Network, l2_weight: float) -> float:
    return l2_weight * float(sum(np.sum(net.params[k] ** 2) for k in net.weight_names() if k not in net.frozen))


def loss(preds, targets, net: Network, l2_weight: float) -> float:
    """Media de |pred - objetivo| + l2_weight * suma de pesos^2 no congelados."""
    preds = np.asarray(preds, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if preds.shape != targets.shape:
        raise ConfigError(f"formas distintas: {preds.shape} vs {targets.shape}")
    if not (np.all(np.isfinite(preds)) and np.all(np.isfinite(targets))):
        raise DomainError("valores no finitos en la pérdida")
    return float(np.mean(np.abs(preds - targets))) + l2_penalty(net, l2_weight)


def backward(
    net: Network,
    batch: Batch,
    l2_weight: float,
    noise_std: float = 0.0,
    rng: np.random.Generator | None = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """Pérdida y gradientes exactos (BPTT) sobre las ventanas de entrenamiento del lote."""
    steps = int(np.max(np.nonzero(batch.train_mask.any(axis=0))[0])) + 1
    x = batch.x[:, :steps]
    if noise_std > 0:
        x = x + rng.normal(0.0, noise_std, x.shape)
    preds, caches = _run(net, x, keep_cache=True)
    mask = batch.train_mask[:, :steps]
    diff = preds - batch.y[:, :steps]
    count = int(mask.sum()) * preds.shape[2]
    data_loss = float(np.abs(diff[mask]).sum()) / count
    if not np.isfinite(data_loss):
        raise DomainError("pérdida no finita (desbordamiento numérico)")
    dpred = np.where(mask[:, :, None], np.sign(diff), 0.0) / count
    grads = _backprop(net, caches, dpred)
    for k in net.weight_names():
        grads[k] += 2.0 * l2_weight * net.params[k]
    for k in net.frozen:
        grads[k][...] = 0.0
    return data_loss + l2_penalty(net, l2_weight), grads


def _validation_loss(net: Network, batch: Batch) -> float:
    preds, _ = _run(net, batch.x[:, : int(batch.val_index.max()) + 1])
    rows = np.arange(len(batch.ids))
    err = np.abs(preds[rows, batch.val_index] - batch.y[rows, batch.val_index])
    return float(np.mean(err.mean(axis=1)))


def validation_loss(net: Network, windowsets: dict[str, WindowSet]) -> float:
    return _validation_loss(net, make_batch(list(windowsets.values())))


# ----------------------------
# COCOB-Backprop
# ----------------------------
@dataclass
class OptimizerState:
    initial: dict[str, np.ndarray]
    grad_abs_sum: dict[str, np.ndarray]
    max_scale: dict[str, np.ndarray]
    reward: dict[str, np.ndarray]
    neg_grad_sum: dict[str, np.ndarray]
    alpha: float = COCOB_ALPHA


def init_optimizer(params: dict[str, np.ndarray], frozen=(), alpha: float = COCOB_ALPHA, eps: float = COCOB_EPS):
    names = [k for k in params if k not in frozen]
    return OptimizerState(
        initial={k: params[k].copy() for k in names},
        grad_abs_sum={k: np.zeros_like(params[k]) for k in names},
        max_scale={k: np.full_like(params[k], eps) for k in names},
        reward={k: np.zeros_like(params[k]) for k in names},
        neg_grad_sum={k: np.zeros_like(params[k]) for k in names},
        alpha=alpha,
    )


def cocob_step(state: OptimizerState, params: dict[str, np.ndarray], grads: dict[str, np.ndarray], frozen=()):
    for k, g in grads.items():
        if k in frozen or k not in state.initial:
            continue
        w, w1 = params[k], state.initial[k]
        scale = np.maximum(state.max_scale[k], np.abs(g))
        abs_sum = state.grad_abs_sum[k] + np.abs(g)
        reward = np.maximum(state.reward[k] - (w - w1) * g, 0.0)
        theta = state.neg_grad_sum[k] - g
        params[k] = w1 + theta / (scale * np.maximum(abs_sum + scale, state.alpha * scale)) * (scale + reward)
        state.max_scale[k], state.grad_abs_sum[k] = scale, abs_sum
        state.reward[k], state.neg_grad_sum[k] = reward, theta
    return params


# ----------------------------
# Entrenamiento
# ----------------------------
def train(
    net: Network, windowsets: dict[str, WindowSet], hp: Hyperparameters, rng: np.random.Generator
) -> tuple[Network, list[float]]:
    """
    Hasta max_epochs épocas de epoch_size pasadas completas, minilotes de `minibatch` series.
    Tras cada época se mide la pérdida L1 de validación y se devuelven los parámetros de la mejor.
    """
    if not windowsets:
        raise DatasetValidationError("no hay series para entrenar")
    ws_list = list(windowsets.values())
    for ws in ws_list:
        if not ws.training_windows:
            raise DatasetValidationError("sin ventanas de entrenamiento (solo validación)", ws.series_id)
    full = make_batch(ws_list)
    opt = init_optimizer(net.params, net.frozen)

    history: list[float] = []
    best_val, best_params = np.inf, None
    for epoch in range(hp.max_epochs):
        for _ in range(hp.epoch_size):
            order = rng.permutation(len(ws_list))
            for start in range(0, len(order), hp.minibatch):
                _, grads = backward(net, full.take(order[start : start + hp.minibatch]), hp.l2_weight, hp.noise_std, rng)
                cocob_step(opt, net.params, grads, net.frozen)
        val = _validation_loss(net, full)
        history.append(val)
        logger.debug("época %d: validación L1 = %.6f", epoch + 1, val)
        if best_params is None or val < best_val:
            best_val, best_params = val, {k: v.copy() for k, v in net.params.items()}
    net.params = best_params
    return net, history


def forecast(
    net: Network, states: dict[str, PreprocessState], windowsets: dict[str, WindowSet]
) -> dict[str, np.ndarray]:
    """Previsión del horizonte siguiente al último punto observado, en unidades originales."""
    preds = forward(net, windowsets, include_forecast=True)
    return {
        sid: postprocess(preds[sid][-1], windowsets[sid].forecast_window, states[sid]) for sid in windowsets
    }


# ----------------------------
# Checkpoints
# ----------------------------
def save_network(
    net: Network, path: str | Path, hp: Hyperparameters | None = None, extra: dict | None = None
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "format": CHECKPOINT_FORMAT,
        "version": __version__,
        "layers": [asdict(s) for s in net.layers],
        "frozen": sorted(net.frozen),
        "hyperparameters": hp.to_dict() if hp else None,
        "extra": extra or {},
    }
    arrays = {f"param:{k}": v for k, v in net.params.items()}
    with open(path, "wb") as f:
        np.savez(f, __meta__=np.array(json.dumps(meta)), **arrays)


def load_network(path: str | Path) -> tuple[Network, Hyperparameters | None, dict]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"No existe: {path.resolve()}")
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(str(z["__meta__"]))
        if meta.get("format") != CHECKPOINT_FORMAT:
            raise ConfigError(f"formato de checkpoint no soportado: {meta.get('format')}")
        params = {k[len("param:") :]: z[k].astype(np.float64) for k in z.files if k.startswith("param:")}
    net = Network([LayerSpec(**s) for s in meta["layers"]], params, set(meta["frozen"]))
    hp = Hyperparameters.from_dict(meta["hyperparameters"]) if meta["hyperparameters"] else None
    return net, hp, meta.get("extra", {})
