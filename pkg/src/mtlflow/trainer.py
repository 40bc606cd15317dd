"""Levenberg-Marquardt training loop with adaptive damping.

Each epoch proposes a step from the damped normal equations
(J^T J + mu I) delta = J^T e and keeps it only if the sum of squared
residuals drops.  Rejections raise mu and re-propose against the same
Jacobian; acceptance lowers mu.  An epoch is one accepted update.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from . import linalg, network
from .data import WindowedDataset
from .linalg import FactorizationError
from .network import SIGMOID, Activation, MlpParams, NumericOverflowError


class StopReason(Enum):
    GOAL_REACHED = "goal_reached"
    MAX_EPOCHS = "max_epochs"
    MU_EXCEEDED = "mu_exceeded"


@dataclass(frozen=True)
class LmConfig:
    """Damping schedule, stopping rules, and the initialization seed."""

    mu_init: float = 1e-3
    mu_inc: float = 10.0
    mu_dec: float = 0.1
    mu_max: float = 1e10
    max_epochs: int = 300
    error_goal: float = 0.006
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mu_init <= 0:
            raise ValueError("mu_init must be positive")
        if self.mu_inc <= 1:
            raise ValueError("mu_inc must exceed 1")
        if not 0 < self.mu_dec < 1:
            raise ValueError("mu_dec must lie in (0, 1)")
        if self.mu_max <= self.mu_init:
            raise ValueError("mu_max must exceed mu_init")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")
        if self.error_goal <= 0:
            raise ValueError("error_goal must be positive")


@dataclass(frozen=True, eq=False)
class LmState:
    """Optimizer state: flat parameters, damping, and the accepted-epoch curve."""

    x: np.ndarray
    mu: float
    epoch: int
    mse: float
    history: tuple[tuple[int, float, float], ...]  # (epoch, mse, mu)
    stop_reason: StopReason | None = None


def init_params(seed: int, dims: tuple[int, int, int]) -> MlpParams:
    """Draw all weights and biases uniformly from [-0.5, 0.5], seeded."""
    m, h, k = dims
    if m < 1 or h < 1 or k < 1:
        raise ValueError(f"dims must be positive, got {dims}")
    rng = np.random.default_rng(seed)
    vec = rng.uniform(-0.5, 0.5, network.param_count(dims))
    return network.unflatten_params(vec, dims)


def mse(e: np.ndarray) -> float:
    """Mean squared residual over all N*k components, in normalized units."""
    e = np.asarray(e, dtype=np.float64)
    if e.size == 0:
        raise ValueError("error vector must be non-empty")
    return float(np.mean(e * e))


def lm_step(
    state: LmState,
    data: WindowedDataset,
    cfg: LmConfig,
    dims: tuple[int, int, int],
    activation: Activation = SIGMOID,
) -> LmState:
    """One training epoch: propose, and escalate mu until a step is accepted.

    Returns the accepted state with epoch + 1, or a terminal state flagged
    MU_EXCEEDED when damping passes cfg.mu_max without any improvement.
    A factorization failure counts as a rejection.
    """
    params = network.unflatten_params(state.x, dims)
    e = network.error_vector(params, data, activation)
    sse = float(e @ e)
    jac = network.jacobian(params, data, activation)
    gram = linalg.matmul(jac.T, jac)
    grad = linalg.matvec(jac.T, e)
    identity = np.eye(state.x.size)

    mu = state.mu
    while True:
        accepted = False
        try:
            delta = linalg.solve_spd(gram + mu * identity, grad)
        except FactorizationError:
            delta = None
        if delta is not None:
            candidate = state.x - delta
            cand_params = network.unflatten_params(candidate, dims)
            e_cand = network.error_vector(cand_params, data, activation)
            sse_cand = float(e_cand @ e_cand)
            accepted = np.isfinite(sse_cand) and sse_cand < sse
        if accepted:
            epoch = state.epoch + 1
            new_mse = sse_cand / e_cand.size
            return LmState(
                x=candidate,
                mu=mu * cfg.mu_dec,
                epoch=epoch,
                mse=new_mse,
                history=state.history + ((epoch, new_mse, mu),),
            )
        mu *= cfg.mu_inc
        if mu > cfg.mu_max:
            return LmState(
                x=state.x,
                mu=mu,
                epoch=state.epoch,
                mse=state.mse,
                history=state.history,
                stop_reason=StopReason.MU_EXCEEDED,
            )


def train(
    data: WindowedDataset,
    cfg: LmConfig,
    dims: tuple[int, int, int],
    activation: Activation = SIGMOID,
) -> tuple[MlpParams, LmState, StopReason]:
    """Full training run; deterministic given (cfg.seed, data, dims).

    Stops when the normalized MSE reaches cfg.error_goal, when
    cfg.max_epochs accepted updates have been made, or when the damping
    ceiling is hit (a local minimum at machine scale, not an error).
    """
    m, h, k = dims
    if data.window_len != m:
        raise ValueError(f"dataset window length {data.window_len} does not match input dim {m}")
    if data.num_outputs != k:
        raise ValueError(f"dataset has {data.num_outputs} outputs but dims expect {k}")
    params = init_params(cfg.seed, dims)
    x0 = network.flatten_params(params)
    initial_mse = mse(network.error_vector(params, data, activation))
    state = LmState(
        x=x0,
        mu=cfg.mu_init,
        epoch=0,
        mse=initial_mse,
        history=((0, initial_mse, cfg.mu_init),),
    )
    while True:
        if not np.isfinite(state.mse):
            raise NumericOverflowError("training loss is not finite")
        if state.mse <= cfg.error_goal:
            reason = StopReason.GOAL_REACHED
            break
        if state.epoch >= cfg.max_epochs:
            reason = StopReason.MAX_EPOCHS
            break
        state = lm_step(state, data, cfg, dims, activation)
        if state.stop_reason is StopReason.MU_EXCEEDED:
            reason = StopReason.MU_EXCEEDED
            break
    return network.unflatten_params(state.x, dims), state, reason


def save_history(history, path) -> Path:
    """Write the accepted-epoch curve as CSV `epoch,mse,mu`."""
    path = Path(path)
    lines = ["epoch,mse,mu"]
    for epoch, err, mu in history:
        lines.append(f"{epoch},{float(err)!r},{float(mu)!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_history(path) -> tuple[tuple[int, float, float], ...]:
    """Read a history CSV written by :func:`save_history`."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "epoch,mse,mu":
        raise ValueError(f"{path}: expected header 'epoch,mse,mu'")
    out = []
    for line in lines[1:]:
        if not line.strip():
            continue
        epoch_text, mse_text, mu_text = line.split(",")
        out.append((int(epoch_text), float(mse_text), float(mu_text)))
    return tuple(out)
