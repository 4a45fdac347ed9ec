from __future__ import annotations

import numpy as np

from .model import Model


def numerical_gradients(model: Model, x, y, h: float = 1e-5) -> list[dict]:
    """Central-difference estimate of dL/dθ for every parameter (slow, exhaustive)."""
    out = []
    for layer in model.params:
        g_layer = {}
        for name, arr in layer.items():
            g = np.zeros_like(arr)
            flat, gflat = arr.reshape(-1), g.reshape(-1)
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + h
                plus = model.loss(x, y)
                flat[j] = orig - h
                minus = model.loss(x, y)
                flat[j] = orig
                gflat[j] = (plus - minus) / (2 * h)
            g_layer[name] = g
        out.append(g_layer)
    return out


def relative_errors(analytic: list[dict], numeric: list[dict]) -> np.ndarray:
    errs = []
    for ga_layer, gn_layer in zip(analytic, numeric):
        for name in ga_layer:
            ga, gn = ga_layer[name].ravel(), gn_layer[name].ravel()
            errs.append(np.abs(ga - gn) / np.maximum(1e-8, np.abs(ga) + np.abs(gn)))
    return np.concatenate(errs) if errs else np.zeros(0)


def gradient_check(model: Model, x, y, h: float = 1e-5) -> float:
    """Largest relative error between backprop and central differences."""
    _, analytic = model.backward(x, y)
    numeric = numerical_gradients(model, x, y, h)
    errs = relative_errors(analytic, numeric)
    return float(errs.max()) if errs.size else 0.0
