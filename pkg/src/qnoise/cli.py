"""Command-line experiment runner.

    qnoise prep        --config exp.ini   # balanced, split, angle-scaled data
    qnoise train       --config exp.ini   # history.csv, metrics.json, params.json, *.svg
    qnoise eval        --config exp.ini   # re-score the test split with saved params
    qnoise noise-sweep --config exp.ini   # sweep.csv + sweep.svg from saved params
    qnoise report      runs/              # comparison table across run directories

Exit codes: 0 success, 1 runtime failure, 2 configuration/usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import load_config, render_config
from .data import prepare
from .errors import ConfigError, EmptyDataError, SchemaError, StateError
from .pipeline import (
    REPORT_HEADER,
    SWEEP_HEADER,
    format_table,
    load_dataset,
    load_trained,
    metrics_json,
    noise_sweep,
    prep_config,
    report_rows,
    run_experiment,
    write_csv,
    write_history,
    write_malformed,
)
from .svg import write_chart

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


def _out_dir(cfg) -> Path:
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args):
    cfg = load_config(args.config)
    return cfg.with_overrides(
        seed=args.seed, out=args.out, placement=getattr(args, "noise_placement", None), grid_step=getattr(args, "grid_step", None)
    )


def _prepared(cfg, out):
    ds = load_dataset(cfg)
    write_malformed(out / "malformed_rows.csv", ds)
    if ds.dropped:
        print(f"dropped {ds.dropped} malformed row(s); see {out / 'malformed_rows.csv'}", file=sys.stderr)
    return ds, prepare(ds, prep_config(cfg))


def cmd_prep(args) -> int:
    cfg = _load(args)
    out = _out_dir(cfg)
    _, prep = _prepared(cfg, out)
    width = prep.x_train.shape[1]
    header = [f"x{i}" for i in range(width)] + ["label"]
    for name, x, y in (("train.csv", prep.x_train, prep.y_train), ("test.csv", prep.x_test, prep.y_test)):
        write_csv(out / name, header, [(*row, int(lab)) for row, lab in zip(x, y)])
    print(f"train {len(prep.y_train)} rows, test {len(prep.y_test)} rows, {width} columns -> {out}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _load(args)
    out = _out_dir(cfg)
    ds = load_dataset(cfg)
    write_malformed(out / "malformed_rows.csv", ds)
    record, trained, _ = run_experiment(cfg, ds)
    (out / "config.ini").write_text(render_config(cfg), encoding="utf-8")
    write_history(out / "history.csv", record.history)
    (out / "metrics.json").write_text(metrics_json(record.metrics), encoding="utf-8")
    (out / "params.json").write_text(json.dumps(trained.to_json(), indent=2) + "\n", encoding="utf-8")
    (out / "record.json").write_text(record.to_json(), encoding="utf-8")
    epochs = list(range(1, len(record.history["loss"]) + 1))
    kind = cfg.model.kind.value
    write_chart(out / "loss.svg", {kind: (epochs, record.history["loss"])}, title=f"{kind} training loss", xlabel="epoch", ylabel="loss")
    write_chart(
        out / "accuracy.svg",
        {kind: (epochs, record.history["accuracy"])},
        title=f"{kind} training accuracy",
        xlabel="epoch",
        ylabel="accuracy",
        ylim=(0, 1),
    )
    m = record.metrics
    print(f"{kind}: accuracy {m['accuracy']:.4f}  f1 {m['f1']:.4f}  ({record.runtime_seconds:.1f}s) -> {out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _load(args)
    out = _out_dir(cfg)
    trained = load_trained(cfg, out)
    _, prep = _prepared(cfg, out)
    text = metrics_json(trained.evaluate(prep.x_test, prep.y_test))
    (out / "eval.json").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_noise_sweep(args) -> int:
    cfg = _load(args)
    out = _out_dir(cfg)
    trained = load_trained(cfg, out)
    _, prep = _prepared(cfg, out)
    rows = noise_sweep(trained, prep.x_test, prep.y_test, cfg.noise.models, cfg.noise.grid, cfg.noise.placement)
    path = out / "sweep.csv"
    write_csv(path, SWEEP_HEADER, [[getattr(r, k) for k in SWEEP_HEADER] for r in rows])
    series = {}
    for r in rows:
        xs, ys = series.setdefault(r.noise_model, ([], []))
        xs.append(r.p)
        ys.append(r.accuracy)
    write_chart(
        out / "sweep.svg",
        series,
        title=f"{cfg.model.kind.value} test accuracy under noise ({cfg.noise.placement.value})",
        xlabel="noise parameter p",
        ylabel="accuracy",
        ylim=(0, 1),
    )
    print(f"{len(rows)} sweep rows -> {path}")
    return EXIT_OK


def cmd_report(args) -> int:
    if args.directory is not None:
        directory = Path(args.directory)
    elif args.config is not None:
        directory = Path(_load(args).output)
    else:
        raise ConfigError("report needs a run directory or --config")
    if not directory.is_dir():
        raise ConfigError(f"not a directory: {directory}")
    rows = report_rows(directory)
    if not rows:
        raise StateError(f"no run records under {directory}")
    write_csv(directory / "report.csv", REPORT_HEADER, [[r[k] for k in REPORT_HEADER] for r in rows])
    sys.stdout.write(format_table(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qnoise", description="QNN training and noise-robustness experiments.")
    parser.add_argument("--version", action="version", version=f"qnoise {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, metavar="PATH", help="experiment config file")
        p.add_argument("--seed", type=int, metavar="N", help="override [train] seed")
        p.add_argument("--out", metavar="DIR", help="override [output] dir")
        p.add_argument("--noise-placement", choices=["after-each-gate", "end-of-circuit"], help="override [noise] placement")
        p.add_argument("--grid-step", type=float, metavar="FLOAT", help="override [noise] grid_step")
        return p

    common(sub.add_parser("prep", help="prepare and save the train/test split")).set_defaults(func=cmd_prep)
    common(sub.add_parser("train", help="train the configured architecture")).set_defaults(func=cmd_train)
    common(sub.add_parser("eval", help="evaluate saved params on the test split")).set_defaults(func=cmd_eval)
    common(sub.add_parser("noise-sweep", help="test accuracy across noise models and strengths")).set_defaults(
        func=cmd_noise_sweep
    )
    rep = common(sub.add_parser("report", help="tabulate metrics across runs"), config_required=False)
    rep.add_argument("directory", nargs="?", help="directory holding run directories")
    rep.set_defaults(func=cmd_report)
    return parser


def _message(exc: BaseException) -> str:
    return str(exc.args[0]) if isinstance(exc, KeyError) and exc.args else str(exc)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SchemaError, StateError, EmptyDataError) as exc:
        print(f"qnoise: error: {_message(exc)}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - any other failure is a runtime failure
        print(f"qnoise: {type(exc).__name__}: {_message(exc)}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
