from __future__ import annotations

import numpy as np
import pytest

from mtlflow.experiment import (
    EvaluationReport,
    PredictionTrace,
    export_trace,
    format_report_text,
    format_table_csv,
    format_table_text,
    improvement,
    load_trace,
    rmse,
    run_comparison,
    run_table,
)
from mtlflow.synthgen import SynthConfig, generate
from mtlflow.trainer import LmConfig, StopReason

# Published comparison pairs: (single-task RMSE, multitask RMSE, improvement %).
TABLE_PAIRS = [
    ("Cf", 93.03, 86.26, 7.28),
    ("Db", 55.04, 52.85, 3.98),
    ("Ff", 85.28, 82.02, 3.82),
    ("Gb", 84.89, 82.90, 2.34),
    ("Hi", 92.28, 88.02, 4.62),
    ("Bb", 77.46, 70.25, 9.31),
]


def small_series(seed: int = 1, days: int = 4):
    return generate(SynthConfig(days=days, noise_std=20.0, ar_coeff=0.6, seed=seed))


def small_cfg(seed: int = 3) -> LmConfig:
    return LmConfig(max_epochs=12, seed=seed)


class TestRmse:
    def test_identical_sequences(self) -> None:
        x = np.array([1.0, 2.0, 3.0])
        assert rmse(x, x) == 0.0

    def test_constant_offset(self) -> None:
        a = np.array([10.0, 20.0, 30.0])
        assert rmse(a + 4.0, a) == pytest.approx(4.0, abs=1e-12)
        assert rmse(a - 4.0, a) == pytest.approx(4.0, abs=1e-12)

    def test_hand_arithmetic(self) -> None:
        # Differences (0, 0, 2): sqrt(4 / 3).
        value = rmse(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 5.0]))
        assert value == pytest.approx(np.sqrt(4.0 / 3.0), abs=1e-12)
        assert value == pytest.approx(1.1547, abs=1e-4)

    def test_length_mismatch_rejected(self) -> None:
        with pytest.raises(ValueError):
            rmse(np.array([1.0]), np.array([1.0, 2.0]))

    def test_empty_rejected(self) -> None:
        with pytest.raises(ValueError):
            rmse(np.array([]), np.array([]))

    def test_translation_detecting(self) -> None:
        rng = np.random.default_rng(90)
        a = rng.uniform(0.0, 100.0, size=50)
        assert rmse(a, a) == 0.0
        for c in (0.5, -3.0, 12.0):
            assert rmse(a + c, a) > 0.0


class TestImprovement:
    def test_published_headline_pair(self) -> None:
        assert improvement(77.46, 70.25) == pytest.approx(9.31, abs=0.01)

    @pytest.mark.parametrize("link_id,rmse_stl,rmse_mtl,expected", TABLE_PAIRS)
    def test_published_table_rows(self, link_id, rmse_stl, rmse_mtl, expected) -> None:
        assert improvement(rmse_stl, rmse_mtl) == pytest.approx(expected, abs=0.01)

    def test_equal_inputs_give_zero(self) -> None:
        assert improvement(50.0, 50.0) == 0.0

    def test_negative_when_multitask_worse(self) -> None:
        assert improvement(50.0, 60.0) == pytest.approx(-20.0, abs=1e-12)

    def test_antisymmetric_sense(self) -> None:
        assert (improvement(80.0, 70.0) > 0) == (70.0 < 80.0)
        assert (improvement(70.0, 80.0) > 0) == (80.0 < 70.0)

    def test_zero_baseline_rejected(self) -> None:
        with pytest.raises(ValueError):
            improvement(0.0, 10.0)


class TestTraces:
    def test_export_round_trip(self, tmp_path) -> None:
        trace = PredictionTrace(
            anchors=np.array([10, 11, 13]),
            predicted=np.array([100.25, 98.5, 101.125]),
            actual=np.array([99.0, 98.0, 103.5]),
        )
        path = export_trace(trace, tmp_path / "trace.csv")
        loaded = load_trace(path)
        assert np.array_equal(loaded.anchors, trace.anchors)
        assert np.array_equal(loaded.predicted, trace.predicted)
        assert np.array_equal(loaded.actual, trace.actual)

    def test_empty_trace_writes_header_only(self, tmp_path) -> None:
        trace = PredictionTrace(np.array([], dtype=int), np.array([]), np.array([]))
        path = export_trace(trace, tmp_path / "empty.csv")
        assert path.read_text(encoding="utf-8") == "anchor,actual,predicted\n"
        assert len(load_trace(path)) == 0

    def test_unequal_lengths_rejected(self) -> None:
        with pytest.raises(ValueError):
            PredictionTrace(np.array([1, 2]), np.array([1.0]), np.array([1.0, 2.0]))

    def test_non_increasing_anchors_rejected(self) -> None:
        with pytest.raises(ValueError):
            PredictionTrace(np.array([2, 1]), np.array([1.0, 2.0]), np.array([1.0, 2.0]))


class TestRunComparison:
    def test_arms_score_identical_anchor_sets(self) -> None:
        series = small_series()
        result = run_comparison(series, small_cfg(), train_count=288)
        assert np.array_equal(result.stl_trace.anchors, result.mtl_trace.anchors)
        assert np.array_equal(result.stl_trace.actual, result.mtl_trace.actual)
        assert result.report.n_test == len(result.stl_trace)

    def test_full_scale_test_count(self, tmp_path) -> None:
        # 2400 points split at 2112 leave 287 anchors shared by both arms.
        series = generate(SynthConfig(seed=1))
        cfg = LmConfig(max_epochs=1, seed=1)
        result = run_comparison(series, cfg)
        assert result.report.n_test == 287
        assert result.stl_trace.anchors[0] == 2112
        assert result.stl_trace.anchors[-1] == 2398
        path = export_trace(result.mtl_trace, tmp_path / "full.csv")
        lines = path.read_text(encoding="utf-8").strip().split("\n")
        assert len(lines) == 288  # header + 287 data rows

    def test_deterministic_reports_and_traces(self, tmp_path) -> None:
        series = small_series()
        first = run_comparison(series, small_cfg(), train_count=288)
        second = run_comparison(series, small_cfg(), train_count=288)
        assert format_report_text(first.report) == format_report_text(second.report)
        p1 = export_trace(first.stl_trace, tmp_path / "a.csv")
        p2 = export_trace(second.stl_trace, tmp_path / "b.csv")
        assert p1.read_bytes() == p2.read_bytes()

    def test_report_carries_protocol_settings(self) -> None:
        series = small_series()
        cfg = small_cfg(seed=11)
        result = run_comparison(series, cfg, train_count=288)
        report = result.report
        assert report.link_id == series.link_id
        assert report.seed == 11
        assert report.improvement_pct == pytest.approx(
            improvement(report.rmse_stl, report.rmse_mtl), abs=1e-12
        )
        snapshot = dict(report.config)
        assert snapshot["train_count"] == "288"
        assert snapshot["seed"] == "11"

    def test_actuals_match_source_series(self) -> None:
        series = small_series()
        result = run_comparison(series, small_cfg(), train_count=288)
        assert np.array_equal(result.stl_trace.actual, series.values[result.stl_trace.anchors])

    def test_short_series_rejected(self) -> None:
        series = small_series(days=1)
        with pytest.raises(ValueError):
            run_comparison(series, small_cfg(), train_count=95)


class TestRunTable:
    def test_single_link_gives_single_row(self) -> None:
        series = small_series()
        reports = run_table([series], small_cfg(), train_count=288)
        assert len(reports) == 1
        csv_text = format_table_csv(reports)
        lines = csv_text.strip().split("\n")
        assert lines[0] == "link_id,rmse_stl,rmse_mtl,improvement_pct"
        assert len(lines) == 2
        assert lines[1].startswith(series.link_id + ",")

    def test_empty_set_rejected(self) -> None:
        with pytest.raises(ValueError):
            run_table([], small_cfg())

    def test_per_link_override_changes_seed(self) -> None:
        series = small_series()
        base = run_table([series], small_cfg(seed=3), train_count=288)[0]
        overridden = run_table(
            [series],
            small_cfg(seed=3),
            train_count=288,
            per_link={series.link_id: {"seed": 4}},
        )[0]
        assert base.seed == 3
        assert overridden.seed == 4

    def test_unknown_override_rejected(self) -> None:
        series = small_series()
        with pytest.raises(ValueError, match="unknown override"):
            run_table([series], small_cfg(), train_count=288, per_link={series.link_id: {"bogus": 1}})


class TestFormatting:
    def make_report(self, link_id: str, rmse_stl: float, rmse_mtl: float) -> EvaluationReport:
        return EvaluationReport(
            link_id=link_id,
            rmse_stl=rmse_stl,
            rmse_mtl=rmse_mtl,
            improvement_pct=improvement(rmse_stl, rmse_mtl),
            stop_stl=StopReason.MAX_EPOCHS,
            stop_mtl=StopReason.MAX_EPOCHS,
            seed=0,
            n_test=287,
            config=(("seed", "0"),),
        )

    def test_aligned_text_matches_published_rows(self) -> None:
        reports = [self.make_report(link, s, m) for link, s, m, _ in TABLE_PAIRS]
        text = format_table_text(reports)
        lines = text.strip().split("\n")
        assert len(lines) == 2 + len(TABLE_PAIRS)
        for line, (link, _, _, expected) in zip(lines[2:], TABLE_PAIRS):
            assert line.startswith(link)
            assert line.endswith(f"{expected:.2f}%")

    def test_report_text_is_key_value(self) -> None:
        report = self.make_report("Bb", 77.46, 70.25)
        text = format_report_text(report)
        assert "link_id=Bb" in text
        assert "stop_stl=max_epochs" in text
        assert "config.seed=0" in text
