#!/usr/bin/env python3
"""Train a vitals forecaster on one synthetic day and compare it with the
persistence baseline on held-out evening hours."""

import argparse
import tempfile

import numpy as np

from wardmonitor.domain import Demographics, Quality, Sex, VitalSample
from wardmonitor.forecasting import (
    load_forecaster,
    persistence_baseline,
    predict,
    save_forecaster,
    train_forecaster,
)
from wardmonitor.metrics import mae, split
from wardmonitor.nn import Loss, TrainConfig, forward
from wardmonitor.signals import VitalsTimeline, segment_instances


def drifting_day(n_minutes=1440):
    """A slow circadian swing: hr cycles over 6 hours, rr over 8."""
    m = np.arange(n_minutes)
    hr = 72 + 6 * np.sin(2 * np.pi * m / 360)
    rr = 15 + 3 * np.sin(2 * np.pi * m / 480 + 1.0)
    return VitalsTimeline(
        samples=tuple(
            VitalSample(int(i), float(hr[i]), float(rr[i]), Quality.Good)
            for i in m
        )
    )


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--epochs", type=int, default=600)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    patient = Demographics(age_years=71, sex=Sex.Male, height_cm=178.0, weight_kg=84.0)
    timeline = drifting_day()
    instances = segment_instances(timeline, patient)
    train_set, test_set = split(instances)
    print(f"{len(instances)} instances, {len(train_set)} train / {len(test_set)} held out")

    cfg = TrainConfig(
        epochs=args.epochs, seed=args.seed, loss=Loss.MAE, learning_rate=0.1
    )
    model = train_forecaster(train_set, cfg)

    # score both vitals on the held-out instances
    for name, lo, hi, col in (("hr", 0, 12, 74), ("rr", 12, 24, 149)):
        net = model.hr_net if name == "hr" else model.rr_net
        preds, persists, truths = [], [], []
        for inst in test_set:
            z = model.normalizer.transform(inst.features)
            preds.append(forward(net, z))
            persists.append(np.full(12, inst.features[col]))
            truths.append(inst.targets[lo:hi])
        model_mae = mae(np.concatenate(preds), np.concatenate(truths))
        persist_mae = mae(np.concatenate(persists), np.concatenate(truths))
        print(f"{name}: model {model_mae:.2f} bpm vs persistence {persist_mae:.2f} bpm")

    # issue one real forecast from the trailing 75 minutes of the day
    history = timeline.samples[-75:]
    series, clamped = predict(model, history, patient)
    baseline = persistence_baseline(history)
    print(f"\nforecast issued at minute {series.issued_at_minute}"
          f"{' (clamped)' if clamped else ''}")
    print("step  minute  hr model  hr persist")
    for k in range(12):
        minute = series.issued_at_minute + 14 + 15 * k
        print(f"{k + 1:>4}  {minute:>6}  {series.heart_rate[k]:8.1f}"
              f"  {baseline.heart_rate[k]:10.1f}")

    # the bundle round-trips through disk unchanged
    with tempfile.TemporaryDirectory() as d:
        save_forecaster(model, d)
        reloaded = load_forecaster(d)
        again, _ = predict(reloaded, history, patient)
        assert again.heart_rate == series.heart_rate
    print("\nsaved bundle reproduces the forecast exactly")


if __name__ == "__main__":
    main()
