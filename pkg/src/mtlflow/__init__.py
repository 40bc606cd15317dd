"""Multitask MLP forecasting of 15-minute traffic flows.

A small library plus CLI that trains three-layer perceptrons with
Levenberg-Marquardt on sliding-window flow data and compares single-task
against multitask output layouts on a held-out test span.
"""

from .config import RunConfig, default_config, load_config, parse_config
from .data import (
    CsvParseError,
    NormalizationParams,
    TaskLayout,
    TimeSeries,
    WindowedDataset,
    anchor_bounds,
    denormalize,
    fit_normalizer,
    load_csv,
    make_windows,
    mtl_layout,
    normalize,
    save_csv,
    split_series,
    stl_layout,
)
from .experiment import (
    ComparisonResult,
    EvaluationReport,
    PredictionTrace,
    export_trace,
    improvement,
    load_trace,
    rmse,
    run_comparison,
    run_table,
)
from .linalg import FactorizationError, matmul, matvec, solve_spd
from .network import (
    MlpParams,
    NumericOverflowError,
    error_vector,
    flatten_params,
    forward,
    forward_batch,
    hidden_activation,
    jacobian,
    load_model,
    param_count,
    save_model,
    unflatten_params,
)
from .synthgen import PeakShape, SynthConfig, daily_profile, deterministic_component, generate
from .trainer import LmConfig, LmState, StopReason, init_params, lm_step, mse, train

__version__ = "0.1.0"

__all__ = [
    "ComparisonResult",
    "CsvParseError",
    "EvaluationReport",
    "FactorizationError",
    "LmConfig",
    "LmState",
    "MlpParams",
    "NormalizationParams",
    "NumericOverflowError",
    "PeakShape",
    "PredictionTrace",
    "RunConfig",
    "StopReason",
    "SynthConfig",
    "TaskLayout",
    "TimeSeries",
    "WindowedDataset",
    "anchor_bounds",
    "daily_profile",
    "default_config",
    "denormalize",
    "deterministic_component",
    "error_vector",
    "export_trace",
    "fit_normalizer",
    "flatten_params",
    "forward",
    "forward_batch",
    "generate",
    "hidden_activation",
    "improvement",
    "init_params",
    "jacobian",
    "lm_step",
    "load_config",
    "load_csv",
    "load_model",
    "load_trace",
    "make_windows",
    "matmul",
    "matvec",
    "mse",
    "mtl_layout",
    "normalize",
    "param_count",
    "parse_config",
    "rmse",
    "run_comparison",
    "run_table",
    "save_csv",
    "save_model",
    "solve_spd",
    "split_series",
    "stl_layout",
    "train",
    "unflatten_params",
]
