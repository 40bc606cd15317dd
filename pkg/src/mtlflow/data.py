"""Flow-series ingestion, normalization, and sliding-window datasets.

A series is one road link's 15-minute flow record in veh/h.  Supervised
samples are anchored at a time index n: the input window holds the m values
before n and the targets sit at fixed offsets around n (just ``0`` for
single-task training, ``-1, 0, +1`` for the multitask layout).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

FLOW_INTERVAL_MINUTES = 15

STL_MODE = "STL"
MTL_MODE = "MTL"

CSV_HEADER = "link_id,index,value"


class CsvParseError(ValueError):
    """Malformed series file; the message names the offending line."""


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """One road link's flow record at 15-minute resolution, in veh/h."""

    link_id: str
    values: np.ndarray
    interval_minutes: int = FLOW_INTERVAL_MINUTES

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("values must be a non-empty 1-D sequence")
        if not np.isfinite(values).all():
            raise ValueError("flow values must be finite")
        if (values < 0).any():
            raise ValueError("flow values must be non-negative")
        if self.interval_minutes != FLOW_INTERVAL_MINUTES:
            raise ValueError(f"interval is fixed at {FLOW_INTERVAL_MINUTES} minutes")
        if not self.link_id:
            raise ValueError("link_id must be non-empty")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class NormalizationParams:
    """Affine map of a flow range onto [-1, 1], fitted on training data."""

    min_val: float
    max_val: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.min_val) and np.isfinite(self.max_val)):
            raise ValueError("normalization bounds must be finite")
        if self.max_val <= self.min_val:
            raise ValueError("degenerate range: max_val must exceed min_val")

    @property
    def span(self) -> float:
        return self.max_val - self.min_val


@dataclass(frozen=True)
class TaskLayout:
    """Window length and target offsets for one supervised task layout."""

    mode: str
    window_len: int = 5
    target_offsets: tuple[int, ...] = (0,)

    def __post_init__(self) -> None:
        if self.mode not in (STL_MODE, MTL_MODE):
            raise ValueError(f"mode must be {STL_MODE!r} or {MTL_MODE!r}, got {self.mode!r}")
        if self.window_len < 1:
            raise ValueError("window_len must be at least 1")
        offsets = tuple(int(o) for o in self.target_offsets)
        if 0 not in offsets:
            raise ValueError("target offsets must contain 0 (the main task)")
        if any(b <= a for a, b in zip(offsets, offsets[1:])):
            raise ValueError("target offsets must be strictly increasing")
        if self.mode == STL_MODE and offsets != (0,):
            raise ValueError("single-task layout has exactly one offset, 0")
        object.__setattr__(self, "target_offsets", offsets)

    @property
    def main_task_index(self) -> int:
        return self.target_offsets.index(0)

    @property
    def num_outputs(self) -> int:
        return len(self.target_offsets)


def stl_layout(window_len: int = 5) -> TaskLayout:
    """Single-task layout: predict the value at the anchor only."""
    return TaskLayout(STL_MODE, window_len, (0,))


def mtl_layout(window_len: int = 5) -> TaskLayout:
    """Multitask layout: predict the anchor value plus both neighbours."""
    return TaskLayout(MTL_MODE, window_len, (-1, 0, 1))


@dataclass(frozen=True, eq=False)
class WindowedDataset:
    """Paired input windows and target vectors in normalized units.

    Entries may stray slightly outside [-1, 1] when the normalizer was
    fitted on a different slice (test windows); only finiteness is enforced.
    """

    inputs: np.ndarray   # (N, m)
    targets: np.ndarray  # (N, k)
    anchors: np.ndarray  # (N,) indices into the source series

    def __post_init__(self) -> None:
        inputs = np.asarray(self.inputs, dtype=np.float64)
        targets = np.asarray(self.targets, dtype=np.float64)
        anchors = np.asarray(self.anchors, dtype=np.int64)
        if inputs.ndim != 2 or targets.ndim != 2 or anchors.ndim != 1:
            raise ValueError("inputs/targets must be 2-D and anchors 1-D")
        if not (inputs.shape[0] == targets.shape[0] == anchors.shape[0]):
            raise ValueError("inputs, targets, and anchors must have matching row counts")
        if inputs.shape[0] == 0:
            raise ValueError("dataset must contain at least one sample")
        if not np.isfinite(inputs).all() or not np.isfinite(targets).all():
            raise ValueError("dataset entries must be finite")
        if (np.diff(anchors) <= 0).any():
            raise ValueError("anchors must be strictly increasing")
        for name, arr in (("inputs", inputs), ("targets", targets), ("anchors", anchors)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def num_samples(self) -> int:
        return int(self.inputs.shape[0])

    @property
    def window_len(self) -> int:
        return int(self.inputs.shape[1])

    @property
    def num_outputs(self) -> int:
        return int(self.targets.shape[1])


def fit_normalizer(values: np.ndarray) -> NormalizationParams:
    """Fit min/max bounds on a training slice (never on test data)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("cannot fit a normalizer on an empty slice")
    lo = float(values.min())
    hi = float(values.max())
    if hi == lo:
        raise ValueError("degenerate range: slice is constant")
    return NormalizationParams(lo, hi)


def normalize(x, params: NormalizationParams):
    """Map veh/h values onto [-1, 1] per the fitted bounds (not clipped)."""
    return 2.0 * (np.asarray(x, dtype=np.float64) - params.min_val) / params.span - 1.0


def denormalize(x, params: NormalizationParams):
    """Exact algebraic inverse of :func:`normalize`."""
    return (np.asarray(x, dtype=np.float64) + 1.0) * params.span / 2.0 + params.min_val


def anchor_bounds(n_values: int, layout: TaskLayout) -> tuple[int, int]:
    """Largest admissible anchor range [lo, hi) for a series of given length.

    An anchor n is admissible when its window reaches no earlier than index 0
    (n - m >= 0) and its farthest target stays inside the series
    (n + max_offset < n_values).
    """
    lo = layout.window_len
    hi = n_values - max(layout.target_offsets)
    return lo, hi


def make_windows(values: np.ndarray, layout: TaskLayout, lo: int, hi: int) -> WindowedDataset:
    """Build the supervised dataset for anchors n in [lo, hi).

    Each row pairs the input window (t(n-m), ..., t(n-1)) with the targets
    (t(n+o) for each layout offset o).
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise ValueError("values must be 1-D")
    if lo > hi:
        raise ValueError(f"invalid anchor range [{lo}, {hi})")
    if lo == hi:
        raise ValueError(f"no admissible anchors in [{lo}, {hi})")
    full_lo, full_hi = anchor_bounds(values.size, layout)
    if lo < full_lo or hi > full_hi:
        raise ValueError(
            f"anchor range [{lo}, {hi}) exceeds admissible [{full_lo}, {full_hi}) "
            f"for window {layout.window_len} and offsets {layout.target_offsets}"
        )
    anchors = np.arange(lo, hi, dtype=np.int64)
    m = layout.window_len
    input_idx = anchors[:, None] - np.arange(m, 0, -1)[None, :]
    target_idx = anchors[:, None] + np.asarray(layout.target_offsets, dtype=np.int64)[None, :]
    return WindowedDataset(values[input_idx], values[target_idx], anchors)


def split_series(series: TimeSeries, train_count: int) -> tuple[np.ndarray, np.ndarray]:
    """Split values into train [0, train_count) and test [train_count, end).

    The normalizer must be fitted on the train slice only.  Test anchors
    satisfy n >= train_count but their input windows may reach back into
    the train slice.
    """
    n = len(series)
    if not 0 < train_count < n:
        raise ValueError(f"train_count must be in (0, {n}), got {train_count}")
    return series.values[:train_count].copy(), series.values[train_count:].copy()


def load_csv(path) -> list[TimeSeries]:
    """Read `link_id,index,value` rows into one TimeSeries per link.

    Link blocks may interleave, but each link's indices must run 0, 1, 2, ...
    in file order.  Output preserves first-appearance order of links.
    """
    path = Path(path)
    if not path.exists():
        raise CsvParseError(f"{path}: file not found")
    per_link: dict[str, list[float]] = {}
    with path.open("r", encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != CSV_HEADER:
        raise CsvParseError(f"{path}: line 1: expected header '{CSV_HEADER}'")
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise CsvParseError(f"{path}: line {lineno}: expected 3 fields, got {len(parts)}")
        link_id, index_text, value_text = (p.strip() for p in parts)
        if not link_id:
            raise CsvParseError(f"{path}: line {lineno}: empty link_id")
        try:
            index = int(index_text)
        except ValueError:
            raise CsvParseError(f"{path}: line {lineno}: bad index {index_text!r}") from None
        try:
            value = float(value_text)
        except ValueError:
            raise CsvParseError(f"{path}: line {lineno}: bad value {value_text!r}") from None
        if not np.isfinite(value) or value < 0:
            raise CsvParseError(f"{path}: line {lineno}: value must be finite and non-negative")
        bucket = per_link.setdefault(link_id, [])
        if index != len(bucket):
            raise CsvParseError(
                f"{path}: line {lineno}: non-contiguous index {index} for link "
                f"{link_id!r} (expected {len(bucket)})"
            )
        bucket.append(value)
    if not per_link:
        raise CsvParseError(f"{path}: no data rows")
    return [TimeSeries(link_id, np.asarray(vals)) for link_id, vals in per_link.items()]


def save_csv(series_list, path) -> Path:
    """Write series to the `link_id,index,value` schema read by load_csv."""
    path = Path(path)
    rows = [CSV_HEADER]
    for series in series_list:
        for index, value in enumerate(series.values):
            rows.append(f"{series.link_id},{index},{float(value)!r}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path
