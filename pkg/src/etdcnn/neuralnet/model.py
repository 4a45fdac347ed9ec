"""Layer specifications, the sequential model and its gradient computation."""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Sequence, Union

import numpy as np

from . import layers as L
from .layers import NumericError, ShapeError


@dataclass(frozen=True)
class Conv1D:
    filters: int
    kernel: int
    activation: str = "relu"

    def __post_init__(self):
        _check_positive(self, "filters", "kernel")
        _check_activation(self.activation)


@dataclass(frozen=True)
class MaxPool1D:
    pool: int = 2

    def __post_init__(self):
        _check_positive(self, "pool")


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class Dense:
    units: int
    activation: str = "relu"

    def __post_init__(self):
        _check_positive(self, "units")
        _check_activation(self.activation)


LayerSpec = Union[Conv1D, MaxPool1D, Flatten, Dense]
_SPEC_TYPES = {cls.__name__: cls for cls in (Conv1D, MaxPool1D, Flatten, Dense)}


def _check_positive(spec, *names):
    for name in names:
        v = getattr(spec, name)
        if not isinstance(v, (int, np.integer)) or v < 1:
            raise ValueError(f"{type(spec).__name__}.{name} must be a positive integer, got {v!r}")


def _check_activation(name):
    if name not in L.ACTIVATIONS:
        raise ValueError(f"activation must be one of {L.ACTIVATIONS}, got {name!r}")


def spec_to_dict(spec: LayerSpec) -> dict:
    return {"type": type(spec).__name__, **asdict(spec)}


def spec_from_dict(d: dict) -> LayerSpec:
    d = dict(d)
    try:
        cls = _SPEC_TYPES[d.pop("type")]
    except KeyError as exc:
        raise ValueError(f"unknown layer type in {d!r}") from exc
    return cls(**d)


def default_architecture() -> list[LayerSpec]:
    return [
        Conv1D(32, 7, "relu"),
        MaxPool1D(2),
        Conv1D(16, 3, "relu"),
        MaxPool1D(2),
        Flatten(),
        Dense(64, "relu"),
        Dense(1, "sigmoid"),
    ]


def _init_uniform(rng, shape, fan_in, fan_out, activation):
    if activation == "relu":
        limit = np.sqrt(6.0 / fan_in)  # He-uniform
    else:
        limit = np.sqrt(6.0 / (fan_in + fan_out))  # Glorot-uniform
    return rng.uniform(-limit, limit, size=shape)


class Model:
    """A sequential 1-D CNN built for a fixed input length.

    ``params`` holds one dict per layer (``{"w": ..., "b": ...}`` for Conv1D and
    Dense, empty otherwise). ``history`` is filled by training with one
    ``{"epoch", "loss", "accuracy"}`` record per epoch.
    """

    def __init__(self, specs: Sequence[LayerSpec], input_length: int, seed: int = 0, params=None):
        self.specs = list(specs)
        self.input_length = int(input_length)
        self.seed = int(seed)
        self.shapes = self._infer_shapes()
        self.history: list[dict] = []
        if params is None:
            params = self._init_params(np.random.default_rng(self.seed))
        self.params = params
        self._check_param_shapes()

    def _infer_shapes(self):
        if not self.specs:
            raise ValueError("model needs at least one layer")
        last = self.specs[-1]
        if not (isinstance(last, Dense) and last.units == 1 and last.activation == "sigmoid"):
            raise ValueError("final layer must be Dense(units=1, activation='sigmoid')")
        shape = (self.input_length, 1)
        shapes = [shape]
        for i, spec in enumerate(self.specs):
            if isinstance(spec, Conv1D):
                if len(shape) != 2:
                    raise ShapeError(f"layer {i}: Conv1D after Flatten")
                if shape[0] < spec.kernel:
                    raise ShapeError(f"layer {i}: kernel {spec.kernel} > sequence length {shape[0]}")
                shape = (shape[0] - spec.kernel + 1, spec.filters)
            elif isinstance(spec, MaxPool1D):
                if len(shape) != 2:
                    raise ShapeError(f"layer {i}: MaxPool1D after Flatten")
                if shape[0] < spec.pool:
                    raise ShapeError(f"layer {i}: pool {spec.pool} > sequence length {shape[0]}")
                shape = (shape[0] // spec.pool, shape[1])
            elif isinstance(spec, Flatten):
                shape = (int(np.prod(shape)),)
            elif isinstance(spec, Dense):
                if len(shape) != 1:
                    raise ShapeError(f"layer {i}: Dense needs a Flatten before it")
                shape = (spec.units,)
            else:
                raise TypeError(f"layer {i}: unknown spec {spec!r}")
            shapes.append(shape)
        return shapes

    def _init_params(self, rng):
        params = []
        for spec, in_shape in zip(self.specs, self.shapes[:-1]):
            if isinstance(spec, Conv1D):
                c_in = in_shape[1]
                w = _init_uniform(
                    rng,
                    (spec.kernel, c_in, spec.filters),
                    spec.kernel * c_in,
                    spec.kernel * spec.filters,
                    spec.activation,
                )
                params.append({"w": w, "b": np.zeros(spec.filters)})
            elif isinstance(spec, Dense):
                d = in_shape[0]
                w = _init_uniform(rng, (d, spec.units), d, spec.units, spec.activation)
                params.append({"w": w, "b": np.zeros(spec.units)})
            else:
                params.append({})
        return params

    def _check_param_shapes(self):
        expected = self.param_shapes()
        if len(self.params) != len(expected):
            raise ShapeError("parameter list does not match layer specs")
        for i, (p, e) in enumerate(zip(self.params, expected)):
            got = {k: v.shape for k, v in p.items()}
            if got != e:
                raise ShapeError(f"layer {i}: parameter shapes {got} != expected {e}")

    def param_shapes(self) -> list[dict]:
        out = []
        for spec, in_shape in zip(self.specs, self.shapes[:-1]):
            if isinstance(spec, Conv1D):
                out.append({"w": (spec.kernel, in_shape[1], spec.filters), "b": (spec.filters,)})
            elif isinstance(spec, Dense):
                out.append({"w": (in_shape[0], spec.units), "b": (spec.units,)})
            else:
                out.append({})
        return out

    @property
    def n_params(self) -> int:
        return sum(v.size for p in self.params for v in p.values())

    def parameter_arrays(self) -> list[np.ndarray]:
        """Flat list of parameter arrays in layer order, weights before biases."""
        return [p[k] for p in self.params for k in ("w", "b") if k in p]

    def _check_input(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 2:
            x = x[:, :, None]
        if x.ndim != 3 or x.shape[1:] != (self.input_length, 1):
            raise ShapeError(
                f"model expects input (N, {self.input_length}, 1), got {np.shape(x)}"
            )
        return x

    def forward(self, x, keep_cache: bool = False):
        """Return probabilities of shape (N, 1); optionally the per-layer cache."""
        a = self._check_input(x)
        cache = []
        for i, (spec, p) in enumerate(zip(self.specs, self.params)):
            a_in = a
            z = extra = None
            if isinstance(spec, Conv1D):
                z = L.conv1d_forward(a_in, p["w"], p["b"])
                a = L.activate(z, spec.activation)
            elif isinstance(spec, MaxPool1D):
                a, extra = L.maxpool1d_forward(a_in, spec.pool)
            elif isinstance(spec, Flatten):
                a = a_in.reshape(a_in.shape[0], -1)
            else:
                z = L.dense_forward(a_in, p["w"], p["b"])
                a = L.activate(z, spec.activation)
            if not np.all(np.isfinite(a)):
                raise NumericError(f"layer {i} ({type(spec).__name__}) produced non-finite output")
            if keep_cache:
                cache.append((a_in, z, a, extra))
        return (a, cache) if keep_cache else a

    def backward(self, x, y):
        """Return (loss, grads) where grads mirrors ``params``."""
        loss, grads, _ = self.loss_and_grads(x, y)
        return loss, grads

    def loss_and_grads(self, x, y):
        p, cache = self.forward(x, keep_cache=True)
        y = np.asarray(y, dtype=np.float64).reshape(-1, 1)
        if y.shape[0] != p.shape[0]:
            raise ShapeError(f"{p.shape[0]} samples but {y.shape[0]} labels")
        loss = L.bce_loss(p, y)
        grads = [dict() for _ in self.specs]
        dz = L.bce_sigmoid_grad(p, y)  # final Dense(1, sigmoid)
        da = None
        for i in range(len(self.specs) - 1, -1, -1):
            spec, prm = self.specs[i], self.params[i]
            a_in, z, a, extra = cache[i]
            if isinstance(spec, (Conv1D, Dense)):
                if i != len(self.specs) - 1:
                    dz = L.activation_grad(da, z, a, spec.activation)
                if isinstance(spec, Conv1D):
                    da, dw, db = L.conv1d_backward(dz, a_in, prm["w"])
                else:
                    da, dw, db = L.dense_backward(dz, a_in, prm["w"])
                grads[i] = {"w": dw, "b": db}
            elif isinstance(spec, MaxPool1D):
                da = L.maxpool1d_backward(da, extra, a_in.shape, spec.pool)
            else:
                da = da.reshape(a_in.shape)
            for name, g in grads[i].items():
                if not np.all(np.isfinite(g)):
                    raise NumericError(
                        f"layer {i} ({type(spec).__name__}): non-finite gradient for {name}"
                    )
        return loss, grads, p

    def loss(self, x, y) -> float:
        return L.bce_loss(self.forward(x), y)

    def predict_proba(self, x, batch_size: int = 256):
        x = self._check_input(x)
        if x.shape[0] == 0:
            return np.zeros((0, 1))
        return np.concatenate(
            [self.forward(x[i : i + batch_size]) for i in range(0, x.shape[0], batch_size)]
        )

    def copy(self) -> "Model":
        m = Model(
            self.specs,
            self.input_length,
            self.seed,
            params=[{k: v.copy() for k, v in p.items()} for p in self.params],
        )
        m.history = [dict(h) for h in self.history]
        return m


def backward(model: Model, x, y):
    """Gradients of the mean BCE loss w.r.t. every parameter of ``model``."""
    return model.backward(x, y)[1]


def predict_proba(model: Model, x, batch_size: int = 256):
    return model.predict_proba(x, batch_size=batch_size)


def reshape_3d(series_batch):
    """Stack processed series into an (N, T, 1) array plus a 0/1 label vector."""
    series_batch = list(series_batch)
    if not series_batch:
        return np.zeros((0, 0, 1)), np.zeros(0, dtype=np.int64)
    lengths = {len(s.values) for s in series_batch}
    if len(lengths) != 1:
        raise ShapeError(f"series have differing lengths {sorted(lengths)}")
    x = np.stack([np.asarray(s.values, dtype=np.float64) for s in series_batch])[:, :, None]
    y = np.array([int(s.label) for s in series_batch], dtype=np.int64)
    return x, y
