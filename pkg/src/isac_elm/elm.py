"""Extreme learning machine: frozen random hidden layer, closed-form output weights."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit as sigmoid

from . import binio
from .errors import InvalidArgumentError, NumericError
from .ls import lstsq_svd
from .rng import stream

ACTIVATIONS = ("linear", "sigmoid")


@dataclass(frozen=True)
class ElmSpec:
    n_input: int
    n_hidden: int
    n_output: int
    activation: str = "linear"
    pre_activation_standardize: bool = False
    init_seed: int = 0
    standardize_divisor: str = "std"
    ridge: float = 0.0

    def __post_init__(self):
        if min(self.n_input, self.n_hidden, self.n_output) < 1:
            raise InvalidArgumentError("layer sizes must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise InvalidArgumentError(f"activation must be one of {ACTIVATIONS}")
        if self.standardize_divisor not in ("std", "var"):
            raise InvalidArgumentError("standardize_divisor must be 'std' or 'var'")
        if self.ridge < 0:
            raise InvalidArgumentError("ridge must be >= 0")


def de_elm(n_input: int, n_output: int, n_hidden: int = 700, init_seed: int = 0) -> ElmSpec:
    """Direct-channel network: linear hidden layer."""
    return ElmSpec(n_input, n_hidden, n_output, "linear", False, init_seed)


def re_elm(n_input: int, n_output: int, n_hidden: int = 1300, init_seed: int = 0) -> ElmSpec:
    """Reflected-channel network: sigmoid hidden layer with pre-activation standardization."""
    return ElmSpec(n_input, n_hidden, n_output, "sigmoid", True, init_seed)


def standardize(x: np.ndarray, divisor: str = "std") -> np.ndarray:
    """Per-sample z-score along the last axis (population statistics).

    Rows whose standard deviation is below 1e-12 map to zeros.  With
    ``divisor="var"`` the centered values are divided by the variance.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 2:
        raise InvalidArgumentError("standardize needs at least two entries")
    centered = x - x.mean(axis=-1, keepdims=True)
    std = np.sqrt(np.mean(centered ** 2, axis=-1, keepdims=True))
    scale = std if divisor == "std" else std ** 2
    degenerate = std < 1e-12
    out = centered / np.where(degenerate, 1.0, scale)
    return np.where(degenerate, 0.0, out)


@dataclass
class ElmModel:
    spec: ElmSpec
    W_in: np.ndarray   # (n_hidden, n_input)
    bias: np.ndarray   # (n_hidden,)
    W_out: np.ndarray  # (n_hidden, n_output)

    def save(self, path: str | Path) -> None:
        binio.write_blob(path, {"kind": "elm", "spec": asdict(self.spec)},
                         {"W_in": self.W_in, "bias": self.bias, "W_out": self.W_out})

    @classmethod
    def load(cls, path: str | Path) -> "ElmModel":
        header, arrays = binio.read_blob(path)
        if header.get("kind") != "elm":
            raise InvalidArgumentError(f"{path} is not an ELM model file")
        return cls(ElmSpec(**header["spec"]), arrays["W_in"], arrays["bias"], arrays["W_out"])


def init_hidden(spec: ElmSpec) -> tuple[np.ndarray, np.ndarray]:
    """Frozen hidden-layer parameters, i.i.d. Uniform(-1, 1).

    Weights and biases come from separate streams filled row by row, so a
    wider layer with the same seed extends a narrower one.
    """
    W_in = stream(spec.init_seed, "elm-weights").uniform(-1.0, 1.0, (spec.n_hidden, spec.n_input))
    bias = stream(spec.init_seed, "elm-bias").uniform(-1.0, 1.0, spec.n_hidden)
    return W_in, bias


def hidden_features(model: ElmModel, inputs: np.ndarray) -> np.ndarray:
    """Hidden-layer output for already-standardized inputs (one row per sample)."""
    inputs = np.asarray(inputs, dtype=float)
    if inputs.shape[-1] != model.spec.n_input:
        raise InvalidArgumentError(
            f"expected input length {model.spec.n_input}, got {inputs.shape[-1]}")
    u = inputs @ model.W_in.T + model.bias
    if model.spec.pre_activation_standardize:
        u = standardize(u, model.spec.standardize_divisor)
    if model.spec.activation == "sigmoid":
        return sigmoid(u)
    return u


def train(spec: ElmSpec, inputs: np.ndarray, targets: np.ndarray) -> ElmModel:
    """Solve the output weights by least squares on standardized ``inputs``."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if inputs.shape[0] < 1 or inputs.shape[0] != targets.shape[0]:
        raise InvalidArgumentError("inputs and targets need the same, non-zero number of rows")
    if targets.shape[1] != spec.n_output:
        raise InvalidArgumentError(f"expected target length {spec.n_output}, got {targets.shape[1]}")
    W_in, bias = init_hidden(spec)
    model = ElmModel(spec, W_in, bias, np.zeros((spec.n_hidden, spec.n_output)))
    F = hidden_features(model, inputs)
    if not np.all(np.isfinite(F)):
        raise NumericError("non-finite hidden-layer features")
    model.W_out = lstsq_svd(F, targets, spec.ridge)
    if not np.all(np.isfinite(model.W_out)):
        raise NumericError("non-finite output weights")
    return model


def fit(spec: ElmSpec, raw_inputs: np.ndarray, targets: np.ndarray) -> ElmModel:
    """Standardize raw inputs per sample, then :func:`train`."""
    return train(spec, standardize(raw_inputs, spec.standardize_divisor), targets)


def predict(model: ElmModel, inputs: np.ndarray) -> np.ndarray:
    """Network output for raw inputs (a single vector or one row per sample)."""
    x = standardize(inputs, model.spec.standardize_divisor)
    return hidden_features(model, x) @ model.W_out
