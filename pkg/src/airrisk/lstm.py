"""From-scratch LSTM sequence regressor in plain numpy.

Forward pass, mean-squared-error loss, backpropagation through time, full-batch
gradient descent, and a central-difference gradient check. Everything runs in
double precision and is bit-deterministic for a fixed seed: same (dims, seed,
data, config) always reproduces the same weights.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionError,
    FormatError,
    TrainingDivergedError,
    ValidationError,
)

MODEL_FORMAT_VERSION = 1

# Parameter names in fixed order; iteration over weights always uses this.
PARAM_NAMES = ("w_i", "w_f", "w_o", "w_c", "b_i", "b_f", "b_o", "b_c", "w_y", "b_y")


@dataclass(frozen=True)
class FeatureMatrix:
    """Input block: one row per data source, one column per time step."""

    data: np.ndarray
    source_labels: tuple[str, ...]

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValidationError(f"feature matrix must be 2-D, got shape {data.shape}")
        if len(self.source_labels) != data.shape[0]:
            raise ValidationError(
                f"{len(self.source_labels)} labels for {data.shape[0]} source rows"
            )
        if len(set(self.source_labels)) != len(self.source_labels):
            raise ValidationError("source labels must be unique")
        if not np.all(np.isfinite(data)):
            raise ValidationError("feature matrix contains non-finite entries")
        object.__setattr__(self, "data", data)

    @property
    def n_sources(self) -> int:
        return self.data.shape[0]

    @property
    def n_steps(self) -> int:
        return self.data.shape[1]

    def row(self, label: str) -> int:
        try:
            return self.source_labels.index(label)
        except ValueError as exc:
            raise KeyError(label) from exc


@dataclass(frozen=True)
class TargetMatrix:
    """Output block: p output dims by q time steps."""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValidationError(f"target matrix must be 2-D, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValidationError("target matrix contains non-finite entries")
        object.__setattr__(self, "data", data)

    @property
    def p_dims(self) -> int:
        return self.data.shape[0]

    @property
    def q_steps(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class CellState:
    """Previous output h and previous memory c; zeros at sequence start."""

    h: np.ndarray
    c: np.ndarray

    def __post_init__(self) -> None:
        h = np.asarray(self.h, dtype=np.float64)
        c = np.asarray(self.c, dtype=np.float64)
        if h.shape != c.shape or h.ndim != 1:
            raise ValidationError(f"state vectors must be 1-D and equal length, got {h.shape}/{c.shape}")
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(c))):
            raise ValidationError("non-finite cell state")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "c", c)

    @classmethod
    def zeros(cls, n_hidden: int) -> "CellState":
        return cls(h=np.zeros(n_hidden), c=np.zeros(n_hidden))


@dataclass(frozen=True)
class LstmModel:
    """Gate weights over [x; h], gate biases, and the linear output head."""

    n_in: int
    n_hidden: int
    n_out: int
    seed: int
    w_i: np.ndarray
    w_f: np.ndarray
    w_o: np.ndarray
    w_c: np.ndarray
    b_i: np.ndarray
    b_f: np.ndarray
    b_o: np.ndarray
    b_c: np.ndarray
    w_y: np.ndarray
    b_y: np.ndarray

    def __post_init__(self) -> None:
        if min(self.n_in, self.n_hidden, self.n_out) < 1:
            raise DimensionError(
                f"dims must be >= 1, got n_in={self.n_in} n_hidden={self.n_hidden} n_out={self.n_out}"
            )
        gate_shape = (self.n_hidden, self.n_in + self.n_hidden)
        expected = {
            "w_i": gate_shape, "w_f": gate_shape, "w_o": gate_shape, "w_c": gate_shape,
            "b_i": (self.n_hidden,), "b_f": (self.n_hidden,),
            "b_o": (self.n_hidden,), "b_c": (self.n_hidden,),
            "w_y": (self.n_out, self.n_hidden), "b_y": (self.n_out,),
        }
        for name, shape in expected.items():
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != shape:
                raise DimensionError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} contains non-finite weights")
            object.__setattr__(self, name, arr)

    def params(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def with_params(self, params: Mapping[str, np.ndarray]) -> "LstmModel":
        return replace(self, **{name: params[name] for name in PARAM_NAMES})


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float
    epochs: int
    loss: str = "mse"
    gradient_clip: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.learning_rate >= 0:
            raise ValidationError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValidationError(f"epochs must be >= 1, got {self.epochs}")
        if self.loss != "mse":
            raise ValidationError(f"unsupported loss {self.loss!r}; only 'mse' is implemented")
        if self.gradient_clip is not None and not self.gradient_clip > 0:
            raise ValidationError(f"gradient_clip must be positive, got {self.gradient_clip}")


@dataclass(frozen=True)
class TrainRecord:
    """Per-epoch full-batch loss, measured before that epoch's update."""

    losses: tuple[float, ...]

    def write_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["epoch", "loss"])
            for epoch, value in enumerate(self.losses):
                writer.writerow([epoch, repr(value)])


def _sigmoid(a: np.ndarray) -> np.ndarray:
    # two-branch form keeps exp() argument non-positive, so no overflow
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    ea = np.exp(a[~pos])
    out[~pos] = ea / (1.0 + ea)
    return out


def init_model(n_in: int, n_hidden: int, n_out: int, seed: int = 0) -> LstmModel:
    """Seeded uniform initialization in [-1/sqrt(fan_in), +1/sqrt(fan_in)].

    The forget-gate bias is set to 1.0 instead of drawn, so early training
    keeps the memory path open. Same (dims, seed) yields bit-identical models.
    """
    if min(n_in, n_hidden, n_out) < 1:
        raise DimensionError(f"dims must be >= 1, got n_in={n_in} n_hidden={n_hidden} n_out={n_out}")
    rng = np.random.default_rng(seed)
    gate_bound = 1.0 / math.sqrt(n_in + n_hidden)
    head_bound = 1.0 / math.sqrt(n_hidden)

    def gate_w() -> np.ndarray:
        return rng.uniform(-gate_bound, gate_bound, size=(n_hidden, n_in + n_hidden))

    def gate_b() -> np.ndarray:
        return rng.uniform(-gate_bound, gate_bound, size=n_hidden)

    # draw order is part of the determinism contract: w_i w_f w_o w_c, then
    # biases (forget fixed at 1), then the output head
    w_i, w_f, w_o, w_c = gate_w(), gate_w(), gate_w(), gate_w()
    b_i = gate_b()
    b_f = np.ones(n_hidden)
    b_o = gate_b()
    b_c = gate_b()
    w_y = rng.uniform(-head_bound, head_bound, size=(n_out, n_hidden))
    b_y = rng.uniform(-head_bound, head_bound, size=n_out)
    return LstmModel(n_in=n_in, n_hidden=n_hidden, n_out=n_out, seed=seed,
                     w_i=w_i, w_f=w_f, w_o=w_o, w_c=w_c,
                     b_i=b_i, b_f=b_f, b_o=b_o, b_c=b_c, w_y=w_y, b_y=b_y)


def cell_step(model: LstmModel, x_t: np.ndarray, state: CellState) -> tuple[np.ndarray, CellState]:
    """One gated step: consume x_t plus (h, c), emit new h and updated state."""
    x_t = np.asarray(x_t, dtype=np.float64)
    if x_t.shape != (model.n_in,):
        raise DimensionError(f"input has shape {x_t.shape}, expected ({model.n_in},)")
    if not np.all(np.isfinite(x_t)):
        raise ValidationError("non-finite input to cell_step")
    if state.h.shape != (model.n_hidden,):
        raise DimensionError(f"state has {state.h.shape[0]} units, model has {model.n_hidden}")

    z = np.concatenate([x_t, state.h])
    i = _sigmoid(model.w_i @ z + model.b_i)
    f = _sigmoid(model.w_f @ z + model.b_f)
    o = _sigmoid(model.w_o @ z + model.b_o)
    g = np.tanh(model.w_c @ z + model.b_c)
    c_new = f * state.c + i * g
    h_new = o * np.tanh(c_new)
    return h_new, CellState(h=h_new, c=c_new)


@dataclass
class _Trace:
    """Per-step activations cached by the forward pass for BPTT."""

    z: list[np.ndarray] = field(default_factory=list)
    i: list[np.ndarray] = field(default_factory=list)
    f: list[np.ndarray] = field(default_factory=list)
    o: list[np.ndarray] = field(default_factory=list)
    g: list[np.ndarray] = field(default_factory=list)
    c: list[np.ndarray] = field(default_factory=list)
    c_prev: list[np.ndarray] = field(default_factory=list)
    tanh_c: list[np.ndarray] = field(default_factory=list)
    h: list[np.ndarray] = field(default_factory=list)


def _forward_trace(model: LstmModel, x: FeatureMatrix) -> tuple[np.ndarray, _Trace]:
    if x.n_sources != model.n_in:
        raise DimensionError(f"feature matrix has {x.n_sources} sources, model expects {model.n_in}")
    m = x.n_steps
    trace = _Trace()
    h = np.zeros(model.n_hidden)
    c = np.zeros(model.n_hidden)
    y = np.empty((model.n_out, m))
    for t in range(m):
        z = np.concatenate([x.data[:, t], h])
        i = _sigmoid(model.w_i @ z + model.b_i)
        f = _sigmoid(model.w_f @ z + model.b_f)
        o = _sigmoid(model.w_o @ z + model.b_o)
        g = np.tanh(model.w_c @ z + model.b_c)
        c_prev = c
        c = f * c_prev + i * g
        tanh_c = np.tanh(c)
        h = o * tanh_c
        y[:, t] = model.w_y @ h + model.b_y
        trace.z.append(z)
        trace.i.append(i)
        trace.f.append(f)
        trace.o.append(o)
        trace.g.append(g)
        trace.c.append(c)
        trace.c_prev.append(c_prev)
        trace.tanh_c.append(tanh_c)
        trace.h.append(h)
    return y, trace


def forward(model: LstmModel, x: FeatureMatrix) -> TargetMatrix:
    """Unroll the cell over every step from zero state; one output column per step."""
    y, _ = _forward_trace(model, x)
    return TargetMatrix(data=y)


def predict(model: LstmModel, x: FeatureMatrix) -> TargetMatrix:
    """Forward on unseen data; state always starts from zero, nothing leaks."""
    return forward(model, x)


def loss(y_pred: TargetMatrix, y_true: TargetMatrix) -> float:
    """Mean squared error over all p*q entries."""
    if y_pred.data.shape != y_true.data.shape:
        raise DimensionError(
            f"prediction shape {y_pred.data.shape} does not match target {y_true.data.shape}"
        )
    diff = y_pred.data - y_true.data
    return float(np.mean(diff * diff))


def _zero_grads(model: LstmModel) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(arr) for name, arr in model.params().items()}


def _backward_trace(
    model: LstmModel, x: FeatureMatrix, y_true: TargetMatrix
) -> tuple[float, dict[str, np.ndarray], np.ndarray]:
    """Loss, weight gradients, and input gradient for a single sequence."""
    y, tr = _forward_trace(model, x)
    if y_true.data.shape != y.shape:
        raise DimensionError(
            f"target shape {y_true.data.shape} does not match output {y.shape}"
        )
    m = x.n_steps
    diff = y - y_true.data
    with np.errstate(over="ignore"):  # overflow to inf is how divergence is detected
        value = float(np.mean(diff * diff))
    if not math.isfinite(value):
        raise TrainingDivergedError("loss is non-finite (forward activations overflowed)")
    dy = (2.0 / diff.size) * diff

    grads = _zero_grads(model)
    dx = np.zeros_like(x.data)
    dh_next = np.zeros(model.n_hidden)
    dc_next = np.zeros(model.n_hidden)
    d = model.n_in
    for t in range(m - 1, -1, -1):
        grads["w_y"] += np.outer(dy[:, t], tr.h[t])
        grads["b_y"] += dy[:, t]
        dh = model.w_y.T @ dy[:, t] + dh_next

        do = dh * tr.tanh_c[t]
        dc = dh * tr.o[t] * (1.0 - tr.tanh_c[t] ** 2) + dc_next
        di = dc * tr.g[t]
        dg = dc * tr.i[t]
        df = dc * tr.c_prev[t]
        dc_next = dc * tr.f[t]

        da_i = di * tr.i[t] * (1.0 - tr.i[t])
        da_f = df * tr.f[t] * (1.0 - tr.f[t])
        da_o = do * tr.o[t] * (1.0 - tr.o[t])
        da_g = dg * (1.0 - tr.g[t] ** 2)

        z = tr.z[t]
        grads["w_i"] += np.outer(da_i, z)
        grads["w_f"] += np.outer(da_f, z)
        grads["w_o"] += np.outer(da_o, z)
        grads["w_c"] += np.outer(da_g, z)
        grads["b_i"] += da_i
        grads["b_f"] += da_f
        grads["b_o"] += da_o
        grads["b_c"] += da_g

        dz = model.w_i.T @ da_i + model.w_f.T @ da_f + model.w_o.T @ da_o + model.w_c.T @ da_g
        dx[:, t] = dz[:d]
        dh_next = dz[d:]
    return value, grads, dx


def backward(model: LstmModel, x: FeatureMatrix, y_true: TargetMatrix) -> dict[str, np.ndarray]:
    """Analytic gradients of the MSE loss w.r.t. every weight and bias.

    Computed by backpropagation through time over the full unrolled sequence;
    keys match :data:`PARAM_NAMES`.
    """
    _, grads, _ = _backward_trace(model, x, y_true)
    return grads


def input_gradient(model: LstmModel, x: FeatureMatrix, y_true: TargetMatrix) -> np.ndarray:
    """Gradient of the loss w.r.t. the input matrix (sensitivity per source/step)."""
    _, _, dx = _backward_trace(model, x, y_true)
    return dx


def train(
    model: LstmModel,
    dataset: Sequence[tuple[FeatureMatrix, TargetMatrix]],
    cfg: TrainConfig,
    on_epoch: Callable[[int, float], None] | None = None,
) -> tuple[LstmModel, TrainRecord]:
    """Full-batch gradient descent for ``cfg.epochs`` epochs.

    Each epoch averages gradients over all samples in index order, applies
    optional global-norm clipping, and steps every parameter by
    -learning_rate * gradient. Deterministic given the dataset order.
    """
    if not dataset:
        raise ValidationError("training dataset is empty")
    for x, y in dataset:
        if x.n_sources != model.n_in:
            raise DimensionError(f"sample has {x.n_sources} sources, model expects {model.n_in}")
        if y.p_dims != model.n_out or y.q_steps != x.n_steps:
            raise DimensionError(
                f"target shape {y.data.shape} does not match ({model.n_out}, {x.n_steps})"
            )

    params = {name: arr.copy() for name, arr in model.params().items()}
    losses: list[float] = []
    n = len(dataset)
    for epoch in range(cfg.epochs):
        try:
            current = model.with_params(params)
        except ValidationError as exc:
            raise TrainingDivergedError(
                f"weights became non-finite at epoch {epoch}; try a smaller learning_rate "
                f"(current {cfg.learning_rate}) or set gradient_clip"
            ) from exc
        total = _zero_grads(model)
        epoch_loss = 0.0
        for x, y in dataset:  # fixed order keeps accumulation bit-reproducible
            try:
                value, grads, _ = _backward_trace(current, x, y)
            except TrainingDivergedError as exc:
                raise TrainingDivergedError(
                    f"{exc} at epoch {epoch}; try a smaller learning_rate "
                    f"(current {cfg.learning_rate}) or set gradient_clip"
                ) from exc
            epoch_loss += value
            for name in PARAM_NAMES:
                total[name] += grads[name]
        epoch_loss /= n
        losses.append(epoch_loss)
        if on_epoch is not None:
            on_epoch(epoch, epoch_loss)

        for name in PARAM_NAMES:
            total[name] /= n
        if cfg.gradient_clip is not None:
            norm = math.sqrt(sum(float(np.sum(g * g)) for g in total.values()))
            if norm > cfg.gradient_clip:
                scale = cfg.gradient_clip / norm
                for name in PARAM_NAMES:
                    total[name] *= scale
        for name in PARAM_NAMES:
            params[name] = params[name] - cfg.learning_rate * total[name]

    return model.with_params(params), TrainRecord(losses=tuple(losses))


def gradient_check(
    model: LstmModel,
    x: FeatureMatrix,
    y_true: TargetMatrix,
    epsilon: float = 1e-5,
    mutate: Callable[[dict[str, np.ndarray]], dict[str, np.ndarray]] | None = None,
) -> float:
    """Worst relative discrepancy between BPTT and central differences.

    Every parameter entry is perturbed by +/- epsilon independently. The
    relative error denominator is guarded by max(|analytic|, |numeric|, 1e-8).
    ``mutate`` lets diagnostics corrupt the analytic gradients on purpose.
    """
    if not epsilon > 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    analytic = backward(model, x, y_true)
    if mutate is not None:
        analytic = mutate(dict(analytic))

    worst = 0.0
    base = {name: arr.copy() for name, arr in model.params().items()}
    for name in PARAM_NAMES:
        arr = base[name]
        it = np.nditer(arr, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            original = arr[idx]
            arr[idx] = original + epsilon
            up = loss(forward(model.with_params(base), x), y_true)
            arr[idx] = original - epsilon
            down = loss(forward(model.with_params(base), x), y_true)
            arr[idx] = original
            numeric = (up - down) / (2.0 * epsilon)
            a = float(analytic[name][idx])
            denom = max(abs(a), abs(numeric), 1e-8)
            worst = max(worst, abs(a - numeric) / denom)
            it.iternext()
    return worst


def model_to_dict(model: LstmModel) -> dict:
    doc: dict = {
        "format_version": MODEL_FORMAT_VERSION,
        "n_in": model.n_in,
        "n_hidden": model.n_hidden,
        "n_out": model.n_out,
        "seed": model.seed,
        "weights": {},
    }
    for name, arr in model.params().items():
        doc["weights"][name] = arr.tolist()
    return doc


def model_from_dict(doc: dict) -> LstmModel:
    try:
        version = doc["format_version"]
        if version != MODEL_FORMAT_VERSION:
            raise FormatError(f"unsupported model format_version {version!r}")
        weights = {name: np.asarray(doc["weights"][name], dtype=np.float64)
                   for name in PARAM_NAMES}
        return LstmModel(
            n_in=int(doc["n_in"]),
            n_hidden=int(doc["n_hidden"]),
            n_out=int(doc["n_out"]),
            seed=int(doc["seed"]),
            **weights,
        )
    except KeyError as exc:
        raise FormatError(f"model document missing field {exc}") from exc


def save_model(model: LstmModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model)) + "\n")


def load_model(path: str | Path) -> LstmModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise FormatError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return model_from_dict(doc)


def feature_matrix_to_dict(x: FeatureMatrix) -> dict:
    return {"sources": list(x.source_labels), "data": x.data.tolist()}


def feature_matrix_from_dict(doc: dict, origin: str = "<payload>") -> FeatureMatrix:
    try:
        return FeatureMatrix(
            data=np.asarray(doc["data"], dtype=np.float64),
            source_labels=tuple(str(s) for s in doc["sources"]),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{origin}: malformed feature matrix document") from exc


def target_matrix_to_dict(y: TargetMatrix) -> dict:
    return {"data": y.data.tolist()}


def target_matrix_from_dict(doc: dict, origin: str = "<payload>") -> TargetMatrix:
    try:
        return TargetMatrix(data=np.asarray(doc["data"], dtype=np.float64))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{origin}: malformed target matrix document") from exc
