"""Command-line surface: generate data, train arms, compare, tabulate, plot.

Exit codes: 0 on success, 2 on usage errors (argparse), 1 on runtime
failures.  The config path can also come from the MTLFLOW_CONFIG
environment variable when --config is not given.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import figures
from .config import RunConfig, default_config, load_config, resolve_link
from .data import load_csv, make_windows, mtl_layout, normalize, save_csv, split_series, stl_layout, fit_normalizer
from .experiment import (
    export_trace,
    format_report_text,
    format_table_csv,
    format_table_text,
    load_trace,
    run_comparison,
    run_table,
)
from .network import save_model
from .synthgen import generate
from .trainer import save_history, train

CONFIG_ENV_VAR = "MTLFLOW_CONFIG"


def _seed_range(text: str) -> tuple[int, int]:
    """Parse an inclusive seed range of the form A..B."""
    parts = text.split("..")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}")
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integer bounds in {text!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
    return lo, hi


def _load_run_config(args) -> RunConfig:
    path = args.config or os.environ.get(CONFIG_ENV_VAR)
    return load_config(path) if path else default_config()


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _pick_series(series_list, link_id: str):
    if len(series_list) == 1:
        return series_list[0]
    for series in series_list:
        if series.link_id == link_id:
            return series
    available = [s.link_id for s in series_list]
    raise ValueError(f"link {link_id!r} not found in data file; available: {available}")


def _cmd_gen(args) -> int:
    cfg = _load_run_config(args)
    synth = cfg.synth if args.seed is None else replace(cfg.synth, seed=args.seed)
    series = generate(synth, cfg.link_id)
    save_csv([series], args.out)
    _say(args, f"wrote {len(series)} points for link {series.link_id} to {args.out}")
    return 0


def _cmd_train(args) -> int:
    cfg = _load_run_config(args)
    series = _pick_series(load_csv(args.data), cfg.link_id)
    cfg = resolve_link(cfg, series.link_id)
    trainer_cfg = cfg.trainer if args.seed is None else replace(cfg.trainer, seed=args.seed)

    layout = stl_layout(cfg.window_len) if args.mode == "stl" else mtl_layout(cfg.window_len)
    train_values, _ = split_series(series, cfg.train_count)
    params = fit_normalizer(train_values)
    normed = normalize(series.values, params)
    train_hi = cfg.train_count - max(layout.target_offsets)
    dataset = make_windows(normed, layout, cfg.window_len, train_hi)

    dims = (cfg.window_len, cfg.hidden_units, layout.num_outputs)
    model, state, reason = train(dataset, trainer_cfg, dims)

    out_path = Path(args.out)
    save_model(model, out_path)
    history_path = out_path.with_name(out_path.stem + "_history.csv")
    save_history(state.history, history_path)
    figure_path = out_path.with_name(out_path.stem + "_history.png")
    figures.plot_histories({args.mode: state.history}, figure_path, trainer_cfg.error_goal)
    _say(
        args,
        f"trained {args.mode} arm on link {series.link_id}: stop={reason.value} "
        f"epoch={state.epoch} mse={state.mse:.6f}",
    )
    _say(args, f"model -> {out_path}; history -> {history_path}; figure -> {figure_path}")
    return 0


def _write_comparison(result, dest: Path, error_goal: float) -> None:
    dest.mkdir(parents=True, exist_ok=True)
    (dest / "report.txt").write_text(format_report_text(result.report), encoding="utf-8")
    export_trace(result.stl_trace, dest / "trace_stl.csv")
    export_trace(result.mtl_trace, dest / "trace_mtl.csv")
    link = result.report.link_id
    figures.plot_trace(result.stl_trace, dest / "trace_stl.png", f"Single-task forecast, link {link}")
    figures.plot_trace(result.mtl_trace, dest / "trace_mtl.png", f"Multitask forecast, link {link}")
    figures.plot_histories(
        {"stl": result.stl_state.history, "mtl": result.mtl_state.history},
        dest / "history.png",
        error_goal,
    )


def _cmd_compare(args) -> int:
    cfg = _load_run_config(args)
    series = _pick_series(load_csv(args.data), cfg.link_id)
    cfg = resolve_link(cfg, series.link_id)

    if args.seeds is not None:
        seeds = list(range(args.seeds[0], args.seeds[1] + 1))
    elif args.seed is not None:
        seeds = [args.seed]
    else:
        seeds = [cfg.trainer.seed]

    out_dir = Path(args.out)
    reports = []
    for seed in seeds:
        trainer_cfg = replace(cfg.trainer, seed=seed)
        result = run_comparison(
            series,
            trainer_cfg,
            window_len=cfg.window_len,
            hidden_units=cfg.hidden_units,
            train_count=cfg.train_count,
        )
        dest = out_dir if len(seeds) == 1 else out_dir / f"seed_{seed:03d}"
        _write_comparison(result, dest, trainer_cfg.error_goal)
        reports.append(result.report)

    _say(args, format_table_text(reports).rstrip("\n"))
    if len(seeds) > 1:
        lines = ["seed,rmse_stl,rmse_mtl,improvement_pct"]
        for seed, report in zip(seeds, reports):
            lines.append(f"{seed},{report.rmse_stl!r},{report.rmse_mtl!r},{report.improvement_pct!r}")
        (out_dir / "aggregate.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        median = float(np.median([r.improvement_pct for r in reports]))
        _say(args, f"median improvement over seeds {seeds[0]}..{seeds[-1]}: {median:.2f}%")
    _say(args, f"outputs -> {out_dir}")
    return 0


def _cmd_table(args) -> int:
    cfg = _load_run_config(args)
    series_list = load_csv(args.data)
    reports = run_table(
        series_list,
        cfg.trainer,
        window_len=cfg.window_len,
        hidden_units=cfg.hidden_units,
        train_count=cfg.train_count,
        per_link=cfg.per_link,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "table.csv").write_text(format_table_csv(reports), encoding="utf-8")
    (out_dir / "table.txt").write_text(format_table_text(reports), encoding="utf-8")
    figures.plot_improvements(reports, out_dir / "improvement.png")
    _say(args, format_table_text(reports).rstrip("\n"))
    _say(args, f"outputs -> {out_dir}")
    return 0


def _cmd_export(args) -> int:
    trace = load_trace(args.data)
    figures.plot_trace(trace, args.out)
    _say(args, f"rendered {len(trace)} points -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtlflow",
        description="Multitask MLP traffic-flow forecasting with Levenberg-Marquardt training.",
        epilog=f"The {CONFIG_ENV_VAR} environment variable supplies a config path when --config is absent.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=False):
        p.add_argument("--config", help="key=value config file")
        if data:
            p.add_argument("--data", required=True, help="input CSV path")
        p.add_argument("--quiet", action="store_true", help="suppress status output")

    p = sub.add_parser("gen", help="generate a synthetic flow series CSV")
    common(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--seed", type=int, help="override the generator seed")
    p.set_defaults(handler=_cmd_gen)

    p = sub.add_parser("train", help="train one arm and save model plus history")
    common(p, data=True)
    p.add_argument("--mode", required=True, choices=("stl", "mtl"), help="task layout")
    p.add_argument("--out", required=True, help="model output path")
    p.add_argument("--seed", type=int, help="override the training seed")
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("compare", help="train both arms and report RMSE improvement")
    common(p, data=True)
    p.add_argument("--out", required=True, help="output directory")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--seed", type=int, help="single training seed")
    group.add_argument("--seeds", type=_seed_range, help="inclusive seed range A..B")
    p.set_defaults(handler=_cmd_compare)

    p = sub.add_parser("table", help="per-link comparison table over a multi-link CSV")
    common(p, data=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=_cmd_table)

    p = sub.add_parser("export", help="render a saved trace CSV to an image")
    p.add_argument("--data", required=True, help="trace CSV path")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--quiet", action="store_true", help="suppress status output")
    p.set_defaults(handler=_cmd_export)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
