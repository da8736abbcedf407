#!/usr/bin/env python3
# One full session against the HTTP service: train small models, start a
# server, register a patient, stream 80 minutes of telemetry, and query
# every endpoint. Replayed batches are acknowledged but change nothing.

import http.client
import threading

import numpy as np

from wardmonitor.activity import train_classifier
from wardmonitor.domain import ActivityLabel, Quality, VitalSample
from wardmonitor.forecasting import train_forecaster
from wardmonitor.metrics import split
from wardmonitor.nn import Loss, TrainConfig
from wardmonitor.service import MonitorService, make_server
from wardmonitor.signals import (
    ActivityWindow,
    VitalsTimeline,
    segment_instances,
    sliding_activity_windows,
)
from wardmonitor.simulator import (
    ActivityScript,
    SimConfig,
    constant_schedule,
    format_reading,
    simulate,
)

RATE_HZ = 10.0
DEMOGRAPHICS_KV = (
    "patient_id=bed-3\nage_years=64\nsex=Male\nheight_cm=180.0\nweight_kg=77.0\n"
)


def call(port, method, path, body=None):
    conn = http.client.HTTPConnection("127.0.0.1", port, timeout=30)
    try:
        conn.request(method, path, body=body)
        resp = conn.getresponse()
        return resp.status, resp.read().decode()
    finally:
        conn.close()


def quick_forecaster():
    # piecewise-constant levels, like the scripted patients it will see
    rng = np.random.default_rng(3)
    samples = []
    minute = 0
    while minute < 1800:
        hold = int(rng.integers(45, 120))
        hr = float(rng.uniform(60.0, 95.0))
        rr = float(rng.uniform(10.0, 20.0))
        for _ in range(hold):
            if minute >= 1800:
                break
            samples.append(VitalSample(minute, hr, rr, Quality.Good))
            minute += 1
    timeline = VitalsTimeline(samples=tuple(samples))
    from wardmonitor.domain import Demographics, Sex

    instances = segment_instances(
        timeline, Demographics(64, Sex.Male, 180.0, 77.0)
    )
    train_set, _ = split(instances)
    cfg = TrainConfig(epochs=900, seed=0, loss=Loss.MAE, learning_rate=0.1)
    return train_forecaster(train_set, cfg)


def quick_classifier():
    # windows cut from two scripted streams, labeled by their scripts
    windows = []
    for seed, label in ((1, ActivityLabel.Walking), (2, ActivityLabel.LyingDown)):
        config = SimConfig(
            duration_minutes=4,
            hr_schedule=constant_schedule(72.0),
            rr_schedule=constant_schedule(15.0),
            sample_rate_hz=RATE_HZ,
            seed=seed,
        )
        stream = simulate(config, ActivityScript(segments=((0, label),)))
        for w in sliding_activity_windows(stream, sample_rate_hz=RATE_HZ):
            windows.append(ActivityWindow(features=w.features, truth=label))
    cfg = TrainConfig(epochs=30, seed=0, loss=Loss.BCE, learning_rate=0.01)
    return train_classifier(windows, cfg)


print("training a small forecaster and classifier...")
service = MonitorService(
    forecaster=quick_forecaster(),
    classifier=quick_classifier(),
    sample_rate_hz=RATE_HZ,
)
server = make_server(service, port=0)
port = server.server_address[1]
threading.Thread(target=server.serve_forever, daemon=True).start()
print(f"service listening on 127.0.0.1:{port}")

status, body = call(port, "POST", "/api/v1/patients", DEMOGRAPHICS_KV)
print(f"\nregister -> {status}: {body.strip()}")

# 80 minutes of a patient who starts walking at minute 40
config = SimConfig(
    duration_minutes=80,
    hr_schedule=((0, 66.0), (40, 88.0)),
    rr_schedule=((0, 12.0), (40, 17.0)),
    sample_rate_hz=RATE_HZ,
    seed=9,
)
script = ActivityScript(
    segments=((0, ActivityLabel.LyingDown), (40, ActivityLabel.Walking))
)
stream = simulate(config, script)

chunks = []
for lo in range(0, 80, 20):
    block = [
        format_reading(r)
        for r in stream
        if lo * 60_000 <= r.timestamp_ms < (lo + 20) * 60_000
    ]
    chunks.append("\n".join(block) + "\n")

for i, chunk in enumerate(chunks):
    status, body = call(port, "POST", "/api/v1/patients/bed-3/readings", chunk)
    print(f"batch {i} ({20 * (i + 1)} min in) -> {status}: {body.strip()}")

for what in ("vitals/current", "forecast", "activity"):
    status, body = call(port, "GET", f"/api/v1/patients/bed-3/{what}")
    print(f"\nGET {what} -> {status}")
    print(body.strip())

status, body = call(port, "GET", "/api/v1/patients/bed-3/history?from=38&to=42")
print(f"\nGET history minutes [38, 42) -> {status}")
print(body.strip())

# a retransmitted batch is safe: every reading is already known
status, body = call(port, "POST", "/api/v1/patients/bed-3/readings", chunks[1])
print(f"\nreplay of batch 1 -> {status}: {body.strip()}")

server.shutdown()
server.server_close()
print("\nserver stopped")
