"""Operator entry points.

Subcommands: simulate, extract, train-forecast, train-activity, evaluate,
serve, demo. Every stochastic step is seeded, so each subcommand is
reproducible; `demo` in particular writes byte-identical files when rerun
with the same seed.

Exit codes: 0 success, 1 runtime error (message on stderr), 2 usage
error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import errors
from .activity import classify, load_classifier, save_classifier, train_classifier
from .domain import ActivityLabel, Demographics, Sex, kv_decode
from .forecasting import load_forecaster, predict, save_forecaster, train_forecaster
from .ingest import load_mhealth, load_vitals_csv
from .metrics import balanced_accuracy, confusion, save_metrics_csv, split
from .nn import Loss, TrainConfig
from .service import MonitorService, make_server
from .signals import (
    build_timeline,
    infer_sample_rate,
    save_vitals_csv,
    segment_instances,
    sliding_activity_windows,
)
from .simulator import (
    ActivityScript,
    SimConfig,
    load_sim_config,
    read_stream,
    simulate,
    write_stream,
)

# Stand-in demographics for file-based training where no patient record
# exists; overridable through the --config file.
DEFAULT_DEMOGRAPHICS = Demographics(age_years=50, sex=Sex.Female, height_cm=170.0, weight_kg=70.0)


def _load_config_kv(path) -> dict[str, str]:
    if not path:
        return {}
    if not os.path.exists(path):
        raise errors.MissingFile(f"no such config file: {path}")
    with open(path) as fh:
        text = "\n".join(
            line for line in fh.read().splitlines() if line.strip() and not line.lstrip().startswith("#")
        )
    return kv_decode(text)


def _demographics_from(kv: dict[str, str]) -> Demographics:
    return Demographics(
        age_years=int(kv.get("age_years", DEFAULT_DEMOGRAPHICS.age_years)),
        sex=Sex[kv.get("sex", DEFAULT_DEMOGRAPHICS.sex.name)],
        height_cm=float(kv.get("height_cm", DEFAULT_DEMOGRAPHICS.height_cm)),
        weight_kg=float(kv.get("weight_kg", DEFAULT_DEMOGRAPHICS.weight_kg)),
    )


def _cmd_simulate(args) -> int:
    config, script = load_sim_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    stream = simulate(config, script)
    write_stream(stream, args.out)
    print(f"wrote {len(stream)} readings to {args.out}")
    return 0


def _cmd_extract(args) -> int:
    stream = read_stream(args.stream)
    rate = infer_sample_rate(stream)
    timeline = build_timeline(stream, sample_rate_hz=rate)
    save_vitals_csv(timeline, args.out)
    print(f"wrote {len(timeline)} minutes to {args.out} (rate {rate:.3g} Hz)")
    return 0


def _cmd_train_forecast(args) -> int:
    kv = _load_config_kv(args.config)
    timeline = load_vitals_csv(args.vitals)
    demographics = _demographics_from(kv)
    instances = segment_instances(timeline, demographics)
    cfg = TrainConfig(
        epochs=args.epochs,
        seed=args.seed,
        loss=Loss.MAE,
        learning_rate=float(kv.get("learning_rate", 0.1)),
        batch_size=int(kv.get("batch_size", 32)),
    )
    model = train_forecaster(instances, cfg)
    save_forecaster(model, args.out)
    print(f"trained on {len(instances)} instances; model saved to {args.out}")
    return 0


def _cmd_train_activity(args) -> int:
    kv = _load_config_kv(args.config)
    subject = int(kv.get("subject", 1))
    windows = load_mhealth(args.data_dir, subject)
    cfg = TrainConfig(
        epochs=args.epochs,
        seed=args.seed,
        loss=Loss.BCE,
        learning_rate=float(kv.get("learning_rate", 0.01)),
        batch_size=int(kv.get("batch_size", 32)),
    )
    model = train_classifier(windows, cfg, threshold=float(kv.get("threshold", 0.5)))
    save_classifier(model, args.out)
    print(f"trained on {len(windows)} windows; model saved to {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    kv = _load_config_kv(args.config)
    subject = int(kv.get("subject", 1))
    windows = load_mhealth(args.data_dir, subject)
    train_windows, test_windows = split(windows)
    cfg = TrainConfig(
        epochs=args.epochs,
        seed=args.seed,
        loss=Loss.BCE,
        learning_rate=float(kv.get("learning_rate", 0.01)),
        batch_size=int(kv.get("batch_size", 32)),
    )
    model = train_classifier(train_windows, cfg, threshold=float(kv.get("threshold", 0.5)))
    decisions = [classify(model, w) for w in test_windows]
    truths = [w.truth for w in test_windows]
    counts = confusion(decisions, truths)
    bal = balanced_accuracy(decisions, truths)
    save_metrics_csv(counts, bal, args.out)
    print(
        f"evaluated {len(test_windows)} held-out windows"
        f" (trained on {len(train_windows)}); balanced accuracy {bal:.4f};"
        f" report at {args.out}"
    )
    return 0


def _cmd_serve(args) -> int:
    kv = _load_config_kv(args.config)
    forecaster = load_forecaster(kv["forecast_model"]) if "forecast_model" in kv else None
    classifier = load_classifier(kv["activity_model"]) if "activity_model" in kv else None
    service = MonitorService(
        forecaster=forecaster,
        classifier=classifier,
        sample_rate_hz=float(kv.get("sample_rate", 50.0)),
        data_dir=args.data_dir,
    )
    if args.data_dir:
        recovered = service.recover()
        if recovered:
            print(f"recovered sessions: {', '.join(recovered)}")
    server = make_server(service, port=args.port)
    print(f"serving on 127.0.0.1:{args.port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


# The scripted six-hour patient behind `demo`.
DEMO_HR_SCHEDULE = ((0, 70.0), (60, 74.0), (120, 80.0), (180, 76.0), (240, 72.0), (300, 78.0))
DEMO_RR_SCHEDULE = ((0, 14.0), (90, 16.0), (180, 18.0), (270, 15.0))
DEMO_SCRIPT = (
    (0, ActivityLabel.LyingDown),
    (60, ActivityLabel.SittingRelaxing),
    (120, ActivityLabel.Walking),
    (180, ActivityLabel.ClimbingStairs),
    (240, ActivityLabel.Running),
    (300, ActivityLabel.StandingStill),
)
DEMO_RATE_HZ = 10.0
DEMO_DEMOGRAPHICS = Demographics(age_years=52, sex=Sex.Female, height_cm=168.0, weight_kg=74.0)


def _cmd_demo(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    script = ActivityScript(segments=DEMO_SCRIPT)
    config = SimConfig(
        duration_minutes=360,
        hr_schedule=DEMO_HR_SCHEDULE,
        rr_schedule=DEMO_RR_SCHEDULE,
        sample_rate_hz=DEMO_RATE_HZ,
        seed=args.seed,
    )
    stream = simulate(config, script)
    timeline = build_timeline(stream, sample_rate_hz=DEMO_RATE_HZ)
    vitals_path = os.path.join(args.out, "vitals.csv")
    save_vitals_csv(timeline, vitals_path)

    instances = segment_instances(timeline, DEMO_DEMOGRAPHICS)
    fcfg = TrainConfig(
        epochs=args.epochs, seed=args.seed, loss=Loss.MAE, learning_rate=0.1
    )
    forecaster = train_forecaster(instances, fcfg)
    series, _ = predict(forecaster, timeline.samples[-75:], DEMO_DEMOGRAPHICS)
    forecast_path = os.path.join(args.out, "forecast.csv")
    with open(forecast_path, "w") as fh:
        fh.write("issued_at_minute,step,minute,heart_rate_bpm,respiration_bpm\n")
        for step in range(1, 13):
            minute = series.issued_at_minute + 15 * step - 1
            fh.write(
                f"{series.issued_at_minute},{step},{minute},"
                f"{series.heart_rate[step - 1]!r},{series.respiration[step - 1]!r}\n"
            )

    windows = sliding_activity_windows(stream, sample_rate_hz=DEMO_RATE_HZ)
    window_ms = int(round(128 * 1000 / DEMO_RATE_HZ))
    labeled = [
        replace(
            w,
            truth=script.label_at(int((w.start_ms + window_ms // 2) // 60000)),
        )
        for w in windows
    ]
    acfg = TrainConfig(
        epochs=min(args.epochs, 40), seed=args.seed, loss=Loss.BCE, learning_rate=0.01
    )
    model = train_classifier(labeled, acfg)
    decisions = [classify(model, w) for w in windows]

    activity_path = os.path.join(args.out, "activity.csv")
    with open(activity_path, "w") as fh:
        fh.write("start_ms,current_status\n")
        for w, d in zip(windows, decisions):
            fh.write(f"{w.start_ms},{d.current_status.name}\n")

    probs_path = os.path.join(args.out, "probabilities.csv")
    with open(probs_path, "w") as fh:
        fh.write("start_ms," + ",".join(f"p_{l.name}" for l in ActivityLabel) + "\n")
        for w, d in zip(windows, decisions):
            row = ",".join(repr(p) for p in d.probabilities.probs)
            fh.write(f"{w.start_ms},{row}\n")

    print(
        "demo wrote "
        + ", ".join(
            os.path.relpath(p)
            for p in (vitals_path, forecast_path, activity_path, probs_path)
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wardmonitor",
        description="Ward monitoring pipeline: simulate, extract, train, evaluate, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    data_dir_default = os.environ.get("WARD_MONITOR_DATA_DIR")

    p = sub.add_parser("simulate", help="synthesize a tag stream from a config file")
    p.add_argument("--config", required=True, help="simulation config (key=value file)")
    p.add_argument("--out", required=True, help="output stream file")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("extract", help="stream file to per-minute vitals CSV")
    p.add_argument("stream", help="input stream file")
    p.add_argument("--out", required=True, help="output vitals CSV")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("train-forecast", help="train the vitals forecaster from a vitals CSV")
    p.add_argument("vitals", help="input vitals CSV")
    p.add_argument("--out", required=True, help="output model directory")
    p.add_argument("--config", default=None, help="training options (key=value file)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=800)
    p.set_defaults(func=_cmd_train_forecast)

    p = sub.add_parser("train-activity", help="train the activity classifier from sensor logs")
    p.add_argument("--data-dir", default=data_dir_default, required=data_dir_default is None,
                   help="dataset directory (default: WARD_MONITOR_DATA_DIR)")
    p.add_argument("--out", required=True, help="output model directory")
    p.add_argument("--config", default=None, help="training options (key=value file)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=40)
    p.set_defaults(func=_cmd_train_activity)

    p = sub.add_parser("evaluate", help="train/test split evaluation with a metrics CSV report")
    p.add_argument("--data-dir", default=data_dir_default, required=data_dir_default is None,
                   help="dataset directory (default: WARD_MONITOR_DATA_DIR)")
    p.add_argument("--out", required=True, help="output metrics CSV")
    p.add_argument("--config", default=None, help="training options (key=value file)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=40)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("serve", help="run the monitoring HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--config", default=None, help="service options (key=value file)")
    p.add_argument("--data-dir", default=data_dir_default,
                   help="event-log directory for restart recovery (default: WARD_MONITOR_DATA_DIR)")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("demo", help="full pipeline on a scripted six-hour synthetic patient")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", default="demo-out", help="output directory")
    p.add_argument("--epochs", type=int, default=800, help="forecaster training epochs")
    p.set_defaults(func=_cmd_demo)

    return parser


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except errors.WardMonitorError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
