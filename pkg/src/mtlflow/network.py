"""Three-layer perceptron: forward pass and analytic residual Jacobian.

The network maps an m-value input window through one sigmoid hidden layer
to a linear output layer with one neuron per task.  Residuals follow the
convention prediction minus target, and the Jacobian rows are the partial
derivatives of those residuals with respect to the flat parameter vector
(w1 row-major, b1, w2 row-major, b2).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from .data import WindowedDataset


class NumericOverflowError(ArithmeticError):
    """A forward or Jacobian pass produced a non-finite intermediate."""


def hidden_activation(x):
    """Symmetric sigmoid 2 / (1 + exp(-2x)) - 1, evaluated as tanh(x)."""
    return np.tanh(x)


def hidden_activation_deriv(fx):
    """Derivative 1 - f(x)^2, expressed through the activation output."""
    return 1.0 - fx * fx


class Activation(NamedTuple):
    """Hidden-layer nonlinearity with its derivative in terms of the output."""

    value: Callable[[np.ndarray], np.ndarray]
    deriv_from_output: Callable[[np.ndarray], np.ndarray]


SIGMOID = Activation(hidden_activation, hidden_activation_deriv)

# Test hook: an identity hidden layer makes the model affine in the
# second-layer parameters, so training steps can be checked against a
# closed-form least-squares solution.
IDENTITY = Activation(lambda x: np.asarray(x, dtype=np.float64), np.ones_like)


@dataclass(frozen=True, eq=False)
class MlpParams:
    """Weights and biases of the three-layer network."""

    w1: np.ndarray  # (hidden, input)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (output, hidden)
    b2: np.ndarray  # (output,)

    def __post_init__(self) -> None:
        arrays = {}
        for name in ("w1", "b1", "w2", "b2"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} must be finite")
            arrays[name] = arr
        w1, b1, w2, b2 = arrays["w1"], arrays["b1"], arrays["w2"], arrays["b2"]
        if w1.ndim != 2 or w2.ndim != 2 or b1.ndim != 1 or b2.ndim != 1:
            raise ValueError("w1/w2 must be 2-D and b1/b2 1-D")
        if b1.shape[0] != w1.shape[0]:
            raise ValueError("b1 length must match hidden size")
        if w2.shape[1] != w1.shape[0]:
            raise ValueError("w2 columns must match hidden size")
        if b2.shape[0] != w2.shape[0]:
            raise ValueError("b2 length must match output size")
        for name, arr in arrays.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def input_dim(self) -> int:
        return int(self.w1.shape[1])

    @property
    def hidden_dim(self) -> int:
        return int(self.w1.shape[0])

    @property
    def output_dim(self) -> int:
        return int(self.w2.shape[0])

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.input_dim, self.hidden_dim, self.output_dim)


def param_count(dims: tuple[int, int, int]) -> int:
    """Length of the flat parameter vector for (input, hidden, output) dims."""
    m, h, k = dims
    return h * m + h + k * h + k


def flatten_params(params: MlpParams) -> np.ndarray:
    """Serialize to a flat vector: w1 row-major, b1, w2 row-major, b2."""
    return np.concatenate([params.w1.ravel(), params.b1, params.w2.ravel(), params.b2])


def unflatten_params(vec: np.ndarray, dims: tuple[int, int, int]) -> MlpParams:
    """Rebuild MlpParams from a flat vector; inverse of flatten_params."""
    vec = np.asarray(vec, dtype=np.float64)
    m, h, k = dims
    expected = param_count(dims)
    if vec.ndim != 1 or vec.size != expected:
        raise ValueError(f"expected a flat vector of length {expected}, got shape {vec.shape}")
    o1 = h * m
    o2 = o1 + h
    o3 = o2 + k * h
    return MlpParams(
        w1=vec[:o1].reshape(h, m),
        b1=vec[o1:o2],
        w2=vec[o2:o3].reshape(k, h),
        b2=vec[o3:],
    )


def forward(params: MlpParams, x: np.ndarray, activation: Activation = SIGMOID) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate one input window; returns (outputs, hidden activations)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != params.input_dim:
        raise ValueError(f"input must have length {params.input_dim}, got shape {x.shape}")
    hidden = activation.value(params.w1 @ x + params.b1)
    output = params.w2 @ hidden + params.b2
    return output, hidden


def forward_batch(params: MlpParams, inputs: np.ndarray, activation: Activation = SIGMOID) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate a batch of input windows; returns (N, k) outputs and (N, h) hidden."""
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[1] != params.input_dim:
        raise ValueError(f"inputs must be (N, {params.input_dim}), got shape {inputs.shape}")
    hidden = activation.value(inputs @ params.w1.T + params.b1)
    outputs = hidden @ params.w2.T + params.b2
    return outputs, hidden


def error_vector(params: MlpParams, data: WindowedDataset, activation: Activation = SIGMOID) -> np.ndarray:
    """Residuals prediction - target, sample-major then output-index.

    Length is N * k; entry (i, j) sits at index i * k + j.
    """
    if data.num_outputs != params.output_dim:
        raise ValueError(
            f"dataset has {data.num_outputs} outputs but network has {params.output_dim}"
        )
    outputs, _ = forward_batch(params, data.inputs, activation)
    return (outputs - data.targets).ravel()


def jacobian(params: MlpParams, data: WindowedDataset, activation: Activation = SIGMOID) -> np.ndarray:
    """Analytic Jacobian of the residual vector w.r.t. the flat parameters.

    Shape is (N * k, P).  Row ordering matches :func:`error_vector`; column
    ordering matches :func:`flatten_params`.  Computed by per-output
    backpropagation through the shared hidden layer.
    """
    if data.num_outputs != params.output_dim:
        raise ValueError(
            f"dataset has {data.num_outputs} outputs but network has {params.output_dim}"
        )
    x = data.inputs
    _, hidden = forward_batch(params, x, activation)
    dhidden = activation.deriv_from_output(hidden)
    n, m = x.shape
    h = params.hidden_dim
    k = params.output_dim
    p = param_count(params.dims)
    off_b1 = h * m
    off_w2 = off_b1 + h
    off_b2 = off_w2 + k * h
    jac = np.zeros((n * k, p), dtype=np.float64)
    for j in range(k):
        rows = slice(j, n * k, k)
        # Sensitivity of output j to each hidden pre-activation.
        back = params.w2[j] * dhidden  # (N, h)
        jac[rows, :off_b1] = (back[:, :, None] * x[:, None, :]).reshape(n, h * m)
        jac[rows, off_b1:off_w2] = back
        jac[rows, off_w2 + j * h: off_w2 + (j + 1) * h] = hidden
        jac[rows, off_b2 + j] = 1.0
    if not np.isfinite(jac).all():
        raise NumericOverflowError("Jacobian contains non-finite entries")
    return jac


def save_model(params: MlpParams, path) -> Path:
    """Write the network as plain text: dims line then one block per parameter.

    Floats carry 17 significant digits, enough for exact round-trips.
    """
    path = Path(path)
    m, h, k = params.dims
    lines = [f"dims={m},{h},{k}"]
    for name in ("w1", "b1", "w2", "b2"):
        block = np.asarray(getattr(params, name)).ravel()
        lines.append(f"{name}=" + ",".join(f"{v:.17g}" for v in block))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_model(path) -> MlpParams:
    """Read a network written by :func:`save_model`."""
    path = Path(path)
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}: line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        entries[key.strip()] = value.strip()
    missing = {"dims", "w1", "b1", "w2", "b2"} - entries.keys()
    if missing:
        raise ValueError(f"{path}: missing blocks: {sorted(missing)}")
    try:
        m, h, k = (int(part) for part in entries["dims"].split(","))
    except ValueError:
        raise ValueError(f"{path}: bad dims line {entries['dims']!r}") from None

    def block(name: str, shape: tuple[int, ...]) -> np.ndarray:
        values = np.asarray([float(v) for v in entries[name].split(",")], dtype=np.float64)
        if values.size != int(np.prod(shape)):
            raise ValueError(f"{path}: block {name} has {values.size} values, expected {np.prod(shape)}")
        return values.reshape(shape)

    return MlpParams(
        w1=block("w1", (h, m)),
        b1=block("b1", (h,)),
        w2=block("w2", (k, h)),
        b2=block("b2", (k,)),
    )
