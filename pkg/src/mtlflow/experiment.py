"""STL-vs-MTL comparison protocol on one flow series.

Both arms share the normalizer, the anchor ranges, and the initialization
seed, so any difference in test RMSE is attributable to the output layout
alone.  Only the offset-0 (main task) output is scored; the extra outputs
of the multitask arm are training signals, not evaluated forecasts.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .data import (
    TimeSeries,
    anchor_bounds,
    denormalize,
    fit_normalizer,
    make_windows,
    mtl_layout,
    normalize,
    split_series,
    stl_layout,
)
from .network import forward_batch
from .trainer import LmConfig, LmState, StopReason, train

DEFAULT_TRAIN_COUNT = 2112
DEFAULT_HIDDEN_UNITS = 15
DEFAULT_WINDOW_LEN = 5

TABLE_CSV_HEADER = "link_id,rmse_stl,rmse_mtl,improvement_pct"


def rmse(predicted: np.ndarray, actual: np.ndarray) -> float:
    """Root mean square error between two equal-length veh/h sequences."""
    predicted = np.asarray(predicted, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    if predicted.shape != actual.shape or predicted.ndim != 1:
        raise ValueError(f"sequence shapes differ: {predicted.shape} vs {actual.shape}")
    if predicted.size == 0:
        raise ValueError("sequences must be non-empty")
    diff = predicted - actual
    return float(np.sqrt(np.mean(diff * diff)))


def improvement(rmse_stl: float, rmse_mtl: float) -> float:
    """Relative RMSE reduction of the multitask arm, in percent.

    Negative when the multitask arm is worse; never clamped.
    """
    if rmse_stl <= 0:
        raise ValueError("rmse_stl must be positive")
    return 100.0 * (rmse_stl - rmse_mtl) / rmse_stl


@dataclass(frozen=True, eq=False)
class PredictionTrace:
    """Denormalized main-task forecasts against actual flows, per anchor."""

    anchors: np.ndarray
    predicted: np.ndarray  # veh/h
    actual: np.ndarray     # veh/h

    def __post_init__(self) -> None:
        anchors = np.asarray(self.anchors, dtype=np.int64)
        predicted = np.asarray(self.predicted, dtype=np.float64)
        actual = np.asarray(self.actual, dtype=np.float64)
        if not (anchors.ndim == predicted.ndim == actual.ndim == 1):
            raise ValueError("trace fields must be 1-D")
        if not (anchors.shape == predicted.shape == actual.shape):
            raise ValueError("trace fields must have equal lengths")
        if anchors.size and (np.diff(anchors) <= 0).any():
            raise ValueError("anchors must be strictly increasing")
        for name, arr in (("anchors", anchors), ("predicted", predicted), ("actual", actual)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return int(self.anchors.size)


@dataclass(frozen=True)
class EvaluationReport:
    """Per-link comparison outcome plus the settings that produced it."""

    link_id: str
    rmse_stl: float
    rmse_mtl: float
    improvement_pct: float
    stop_stl: StopReason
    stop_mtl: StopReason
    seed: int
    n_test: int
    config: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if self.rmse_stl < 0 or self.rmse_mtl < 0:
            raise ValueError("rmse values must be non-negative")


@dataclass(frozen=True, eq=False)
class ComparisonResult:
    """Everything one comparison run produces, training curves included."""

    report: EvaluationReport
    stl_trace: PredictionTrace
    mtl_trace: PredictionTrace
    stl_state: LmState
    mtl_state: LmState


def _config_snapshot(cfg: LmConfig, window_len: int, hidden_units: int, train_count: int) -> tuple[tuple[str, str], ...]:
    pairs = [(f.name, repr(getattr(cfg, f.name))) for f in fields(cfg)]
    pairs += [
        ("window_len", repr(window_len)),
        ("hidden_units", repr(hidden_units)),
        ("train_count", repr(train_count)),
    ]
    return tuple(pairs)


def run_comparison(
    series: TimeSeries,
    cfg: LmConfig,
    *,
    window_len: int = DEFAULT_WINDOW_LEN,
    hidden_units: int = DEFAULT_HIDDEN_UNITS,
    train_count: int = DEFAULT_TRAIN_COUNT,
) -> ComparisonResult:
    """Train both arms on one series and score the main task on the test span.

    The anchor ranges are the multitask-admissible ones for both arms, so the
    two datasets share their input matrices row for row.  Test anchors start
    at train_count; their input windows may reach back across the boundary.
    """
    values = series.values
    train_values, _ = split_series(series, train_count)
    params = fit_normalizer(train_values)
    normed = normalize(values, params)

    stl = stl_layout(window_len)
    mtl = mtl_layout(window_len)
    _, full_hi = anchor_bounds(len(series), mtl)
    train_hi = train_count - max(mtl.target_offsets)
    if train_hi <= window_len:
        raise ValueError("train slice is too short for the window length")
    if full_hi <= train_count:
        raise ValueError("test slice is too short for any admissible anchor")

    datasets = {
        layout.mode: (
            make_windows(normed, layout, window_len, train_hi),
            make_windows(normed, layout, train_count, full_hi),
        )
        for layout in (stl, mtl)
    }

    arms = {}
    for layout in (stl, mtl):
        train_set, test_set = datasets[layout.mode]
        dims = (window_len, hidden_units, layout.num_outputs)
        model, state, reason = train(train_set, cfg, dims)
        outputs, _ = forward_batch(model, test_set.inputs)
        predicted = denormalize(outputs[:, layout.main_task_index], params)
        actual = values[test_set.anchors]
        trace = PredictionTrace(test_set.anchors, predicted, actual)
        arms[layout.mode] = (trace, state, reason, rmse(trace.predicted, trace.actual))

    stl_trace, stl_state, stl_reason, rmse_stl = arms["STL"]
    mtl_trace, mtl_state, mtl_reason, rmse_mtl = arms["MTL"]
    if len(stl_trace) != len(mtl_trace):
        raise AssertionError("protocol violation: arms scored on different anchor sets")
    report = EvaluationReport(
        link_id=series.link_id,
        rmse_stl=rmse_stl,
        rmse_mtl=rmse_mtl,
        improvement_pct=improvement(rmse_stl, rmse_mtl),
        stop_stl=stl_reason,
        stop_mtl=mtl_reason,
        seed=cfg.seed,
        n_test=len(stl_trace),
        config=_config_snapshot(cfg, window_len, hidden_units, train_count),
    )
    return ComparisonResult(report, stl_trace, mtl_trace, stl_state, mtl_state)


def run_table(
    series_list,
    cfg: LmConfig,
    *,
    window_len: int = DEFAULT_WINDOW_LEN,
    hidden_units: int = DEFAULT_HIDDEN_UNITS,
    train_count: int = DEFAULT_TRAIN_COUNT,
    per_link: dict[str, dict] | None = None,
) -> list[EvaluationReport]:
    """Run one comparison per series; per_link entries override settings.

    Override keys may be any LmConfig field plus window_len, hidden_units,
    and train_count.
    """
    series_list = list(series_list)
    if not series_list:
        raise ValueError("need at least one series")
    per_link = per_link or {}
    cfg_fields = {f.name for f in fields(LmConfig)}
    reports = []
    for series in series_list:
        overrides = dict(per_link.get(series.link_id, {}))
        local_window = int(overrides.pop("window_len", window_len))
        local_hidden = int(overrides.pop("hidden_units", hidden_units))
        local_train = int(overrides.pop("train_count", train_count))
        unknown = set(overrides) - cfg_fields
        if unknown:
            raise ValueError(f"unknown override keys for link {series.link_id!r}: {sorted(unknown)}")
        local_cfg = replace(cfg, **overrides) if overrides else cfg
        result = run_comparison(
            series,
            local_cfg,
            window_len=local_window,
            hidden_units=local_hidden,
            train_count=local_train,
        )
        reports.append(result.report)
    return reports


def format_table_csv(reports) -> str:
    """Comparison table as CSV, full float precision."""
    lines = [TABLE_CSV_HEADER]
    for r in reports:
        lines.append(f"{r.link_id},{r.rmse_stl!r},{r.rmse_mtl!r},{r.improvement_pct!r}")
    return "\n".join(lines) + "\n"


def format_table_text(reports) -> str:
    """Comparison table as aligned text for terminals."""
    header = f"{'link':<8}{'rmse_stl':>12}{'rmse_mtl':>12}{'improvement':>14}"
    lines = [header, "-" * len(header)]
    for r in reports:
        lines.append(
            f"{r.link_id:<8}{r.rmse_stl:>12.2f}{r.rmse_mtl:>12.2f}{r.improvement_pct:>13.2f}%"
        )
    return "\n".join(lines) + "\n"


def format_report_text(report: EvaluationReport) -> str:
    """One comparison run as stable key=value lines."""
    lines = [
        f"link_id={report.link_id}",
        f"rmse_stl={report.rmse_stl!r}",
        f"rmse_mtl={report.rmse_mtl!r}",
        f"improvement_pct={report.improvement_pct!r}",
        f"stop_stl={report.stop_stl.value}",
        f"stop_mtl={report.stop_mtl.value}",
        f"seed={report.seed}",
        f"n_test={report.n_test}",
    ]
    for key, value in report.config:
        lines.append(f"config.{key}={value}")
    return "\n".join(lines) + "\n"


def export_trace(trace: PredictionTrace, path) -> Path:
    """Write a trace as CSV `anchor,actual,predicted`, lossless decimals."""
    path = Path(path)
    lines = ["anchor,actual,predicted"]
    for anchor, actual, predicted in zip(trace.anchors, trace.actual, trace.predicted):
        lines.append(f"{int(anchor)},{float(actual)!r},{float(predicted)!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_trace(path) -> PredictionTrace:
    """Read a trace CSV written by :func:`export_trace`."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "anchor,actual,predicted":
        raise ValueError(f"{path}: expected header 'anchor,actual,predicted'")
    anchors, actual, predicted = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ValueError(f"{path}: line {lineno}: expected 3 fields")
        anchors.append(int(parts[0]))
        actual.append(float(parts[1]))
        predicted.append(float(parts[2]))
    return PredictionTrace(
        np.asarray(anchors, dtype=np.int64),
        np.asarray(predicted, dtype=np.float64),
        np.asarray(actual, dtype=np.float64),
    )
