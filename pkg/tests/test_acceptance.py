"""End-to-end acceptance checks, one test per shipping criterion.

Each test prints a single pass/fail line through the `acceptance` fixture
and enforces its own runtime budget. The dataset-based classifier check
runs against a generated subject log by default; point
WARD_MONITOR_MHEALTH_DIR at a directory holding mHealth_subject1.log to
run it against recorded data instead.
"""

import http.client
import os
import threading
import time
from collections import Counter

import numpy as np

from wardmonitor.activity import classify, train_classifier
from wardmonitor.cli import run
from wardmonitor.domain import (
    ActivityLabel,
    Demographics,
    Quality,
    Sex,
    VitalSample,
    kv_decode,
)
from wardmonitor.forecasting import train_forecaster
from wardmonitor.ingest import load_mhealth, mhealth_log_path
from wardmonitor.metrics import balanced_accuracy, confusion, mae, mse, save_metrics_csv, split
from wardmonitor.nn import (
    Activation,
    Loss,
    MLP,
    TrainConfig,
    bce_loss,
    forward,
    gradient_check,
    init_mlp,
    mae_loss,
)
from wardmonitor.service import MonitorService, make_server
from wardmonitor.signals import (
    ActivityWindow,
    ForecastInstance,
    VitalsTimeline,
    build_timeline,
    expected_instance_count,
    segment_instances,
)
from wardmonitor.simulator import (
    ActivityScript,
    SimConfig,
    constant_schedule,
    format_reading,
    ground_truth,
    simulate,
)

DEMOGRAPHICS = Demographics(age_years=50, sex=Sex.Female, height_cm=170.0, weight_kg=70.0)


def test_gradient_fidelity(acceptance):
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(5):
        rng = np.random.default_rng(100 + seed)
        mae_net = init_mlp([6, 8, 4], [Activation.ReLU, Activation.Identity], seed)
        worst = max(
            worst,
            gradient_check(
                mae_net, rng.normal(size=(3, 6)), rng.normal(size=(3, 4)), Loss.MAE
            ),
        )
        bce_net = init_mlp([5, 6, 3], [Activation.ReLU, Activation.Sigmoid], seed)
        worst = max(
            worst,
            gradient_check(
                bce_net,
                rng.normal(size=(3, 5)),
                rng.integers(0, 2, size=(3, 3)).astype(float),
                Loss.BCE,
            ),
        )
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-4 and elapsed < 30
    acceptance("gradient fidelity", ok, elapsed, f"max relative error {worst:.2e}")
    assert worst < 1e-4
    assert elapsed < 30


def test_vitals_roundtrip_grid(acceptance):
    t0 = time.perf_counter()
    minutes_per_cell = 5
    hits = 0
    total = 0
    for hr in (50.0, 72.0, 96.0, 120.0):
        for rr in (8.0, 15.0, 20.0, 25.0):
            config = SimConfig(
                duration_minutes=minutes_per_cell,
                hr_schedule=constant_schedule(hr),
                rr_schedule=constant_schedule(rr),
                sample_rate_hz=50.0,
                seed=int(hr * 100 + rr),
            )
            script = ActivityScript(segments=((0, ActivityLabel.StandingStill),))
            stream = simulate(config, script)
            timeline = build_timeline(stream, sample_rate_hz=50.0)
            for sample in timeline.samples:
                true_hr, true_rr, _ = ground_truth(config, script, sample.minute_index)
                total += 1
                if (
                    sample.quality is not Quality.Bad
                    and abs(sample.heart_rate_bpm - true_hr) <= 2.0
                    and abs(sample.respiration_bpm - true_rr) <= 1.0
                ):
                    hits += 1
    elapsed = time.perf_counter() - t0
    fraction = hits / total
    ok = fraction >= 0.95 and elapsed < 120
    acceptance(
        "vitals roundtrip grid", ok, elapsed, f"{hits}/{total} minutes in tolerance"
    )
    assert fraction >= 0.95
    assert elapsed < 120


def test_windowing_arithmetic(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    mismatches = 0
    for length in rng.integers(0, 900, size=1000):
        n = int(length)
        brute = sum(1 for a in range(75, n + 1, 15) if a + 180 <= n)
        closed = expected_instance_count(n)
        timeline = VitalsTimeline(
            samples=tuple(VitalSample(m, 72.0, 15.0, Quality.Good) for m in range(n))
        )
        cut = len(segment_instances(timeline, DEMOGRAPHICS))
        if not (brute == closed == cut):
            mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0
    acceptance(
        "windowing arithmetic", ok, elapsed, f"{mismatches} mismatches in 1000 lengths"
    )
    assert mismatches == 0


def drifting_timeline(n=1440):
    minutes = np.arange(n)
    hr = 72 + 6 * np.sin(2 * np.pi * minutes / 360)
    rr = 15 + 3 * np.sin(2 * np.pi * minutes / 480 + 1.0)
    return VitalsTimeline(
        samples=tuple(
            VitalSample(int(m), float(hr[m]), float(rr[m]), Quality.Good)
            for m in minutes
        )
    )


def test_forecaster_beats_persistence(acceptance):
    t0 = time.perf_counter()
    instances = segment_instances(drifting_timeline(), DEMOGRAPHICS)
    train_set, test_set = split(instances)
    cfg = TrainConfig(epochs=600, seed=0, loss=Loss.MAE, learning_rate=0.1)
    model = train_forecaster(train_set, cfg)

    model_pred = {"hr": [], "rr": []}
    persist_pred = {"hr": [], "rr": []}
    truth = {"hr": [], "rr": []}
    for inst in test_set:
        z = model.normalizer.transform(inst.features)
        model_pred["hr"].append(forward(model.hr_net, z))
        model_pred["rr"].append(forward(model.rr_net, z))
        persist_pred["hr"].append(np.full(12, inst.features[74]))
        persist_pred["rr"].append(np.full(12, inst.features[149]))
        truth["hr"].append(inst.targets[:12])
        truth["rr"].append(inst.targets[12:])

    results = {}
    for vital in ("hr", "rr"):
        results[vital] = (
            mae(np.concatenate(model_pred[vital]), np.concatenate(truth[vital])),
            mae(np.concatenate(persist_pred[vital]), np.concatenate(truth[vital])),
        )
    elapsed = time.perf_counter() - t0
    ok = all(m <= p for m, p in results.values()) and elapsed < 300
    detail = ", ".join(
        f"{v} {m:.2f} vs persistence {p:.2f} bpm" for v, (m, p) in results.items()
    )
    acceptance("forecaster beats persistence", ok, elapsed, detail)
    for vital, (m, p) in results.items():
        assert m <= p, f"{vital}: model {m:.3f} worse than persistence {p:.3f}"
    assert elapsed < 300


def two_cluster_windows(n_per_label=40, seed=0):
    rng = np.random.default_rng(seed)
    windows = []
    for k, label in enumerate((ActivityLabel.LyingDown, ActivityLabel.Running)):
        center = np.zeros(24)
        center[k * 4 : k * 4 + 4] = 4.0 + 3.0 * k
        for _ in range(n_per_label):
            windows.append(
                ActivityWindow(
                    features=center + rng.normal(scale=0.4, size=24), truth=label
                )
            )
    return windows


def test_classifier_sanity(acceptance, mhealth_dir, tmp_path):
    t0 = time.perf_counter()
    # (a) separable synthetic clusters
    windows = two_cluster_windows()
    train_w, test_w = split(windows)
    cfg = TrainConfig(epochs=40, seed=0, loss=Loss.BCE, learning_rate=0.01)
    model = train_classifier(train_w, cfg)
    synth_bal = balanced_accuracy(
        [classify(model, w) for w in test_w], [w.truth for w in test_w]
    )

    # (b) a full subject log with the 10-label mapping and 80/20 split
    data_dir = os.environ.get("WARD_MONITOR_MHEALTH_DIR") or mhealth_dir
    if not os.path.exists(mhealth_log_path(data_dir, 1)):
        data_dir = mhealth_dir
    subject_windows = load_mhealth(data_dir, 1)
    train_w, test_w = split(subject_windows)
    model = train_classifier(train_w, cfg)
    decisions = [classify(model, w) for w in test_w]
    truths = [w.truth for w in test_w]
    subject_bal = balanced_accuracy(decisions, truths)
    majority = Counter(truths).most_common(1)[0][0]
    majority_bal = balanced_accuracy([majority] * len(truths), truths)
    report = tmp_path / "confusion.csv"
    save_metrics_csv(confusion(decisions, truths), subject_bal, report)

    elapsed = time.perf_counter() - t0
    ok = (
        synth_bal >= 0.95
        and subject_bal > 0.10
        and subject_bal > majority_bal
        and report.exists()
        and elapsed < 300
    )
    acceptance(
        "classifier sanity",
        ok,
        elapsed,
        f"clusters {synth_bal:.3f}, subject {subject_bal:.3f}"
        f" vs majority {majority_bal:.3f}",
    )
    assert synth_bal >= 0.95
    assert subject_bal > 0.10
    assert subject_bal > majority_bal
    assert len(report.read_text().splitlines()) == 12
    assert elapsed < 300


def loop_forward(model: MLP, x):
    values = list(x)
    for layer in model.layers:
        nxt = []
        for i in range(layer.out_dim):
            z = layer.bias[i]
            for j in range(layer.in_dim):
                z += layer.weights[i, j] * values[j]
            if layer.activation is Activation.ReLU:
                z = max(0.0, z)
            elif layer.activation is Activation.Sigmoid:
                z = 1.0 / (1.0 + np.exp(-z))
            nxt.append(z)
        values = nxt
    return np.array(values)


def test_loss_and_metric_oracles(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(42)
    worst_forward = 0.0
    worst_loss = 0.0
    worst_metric = 0.0
    for trial in range(100):
        dims = [int(d) for d in rng.integers(2, 6, size=3)]
        net = init_mlp(
            dims, [Activation.ReLU, rng.choice([Activation.Identity, Activation.Sigmoid])], trial
        )
        x = rng.normal(size=dims[0])
        worst_forward = max(worst_forward, float(np.max(np.abs(forward(net, x) - loop_forward(net, x)))))

        n = int(rng.integers(1, 30))
        p = rng.normal(size=n)
        t = rng.normal(size=n)
        worst_loss = max(worst_loss, abs(mae_loss(p, t) - sum(abs(a - b) for a, b in zip(p, t)) / n))
        worst_loss = max(worst_loss, abs(mae(p, t) - sum(abs(a - b) for a, b in zip(p, t)) / n))
        worst_loss = max(worst_loss, abs(mse(p, t) - sum((a - b) ** 2 for a, b in zip(p, t)) / n))
        probs = rng.uniform(0.01, 0.99, size=n)
        labels = rng.integers(0, 2, size=n).astype(float)
        bce_ref = -sum(
            y * np.log(q) + (1 - y) * np.log(1 - q) for q, y in zip(probs, labels)
        ) / n
        worst_loss = max(worst_loss, abs(bce_loss(probs, labels) - bce_ref))

        k = int(rng.integers(1, 50))
        preds = [ActivityLabel(int(i)) for i in rng.integers(0, 10, size=k)]
        truths = [ActivityLabel(int(i)) for i in rng.integers(0, 10, size=k)]
        counts = confusion(preds, truths)
        for label in ActivityLabel:
            tp = sum(1 for pp, tt in zip(preds, truths) if pp is label is tt)
            fp = sum(1 for pp, tt in zip(preds, truths) if pp is label and tt is not label)
            fn = sum(1 for pp, tt in zip(preds, truths) if pp is not label and tt is label)
            c = counts.per_label[label]
            if (c.tp, c.fp, c.fn, c.tn) != (tp, fp, fn, k - tp - fp - fn):
                worst_metric = max(worst_metric, 1.0)
        present = set(truths)
        recall_ref = np.mean(
            [
                (
                    counts.per_label[l].tp / (counts.per_label[l].tp + counts.per_label[l].fn)
                    if counts.per_label[l].tp + counts.per_label[l].fn
                    else 0.0
                )
                for l in present
            ]
        )
        worst_metric = max(worst_metric, abs(balanced_accuracy(preds, truths) - recall_ref))
    elapsed = time.perf_counter() - t0
    ok = worst_forward < 1e-9 and worst_loss < 1e-12 and worst_metric < 1e-9
    acceptance(
        "loss and metric oracles",
        ok,
        elapsed,
        f"forward {worst_forward:.1e}, losses {worst_loss:.1e}, metrics {worst_metric:.1e}",
    )
    assert worst_forward < 1e-9
    assert worst_loss < 1e-12
    assert worst_metric < 1e-9


def quick_models():
    feats = np.concatenate([np.full(75, 72.0), np.full(75, 15.0), [50, 0, 170, 70]])
    targets = np.concatenate([np.full(12, 72.0), np.full(12, 15.0)])
    instances = [ForecastInstance(features=feats, targets=targets)] * 4
    forecaster = train_forecaster(
        instances, TrainConfig(epochs=300, seed=0, loss=Loss.MAE, learning_rate=0.1)
    )
    rng = np.random.default_rng(1)
    windows = [
        ActivityWindow(features=rng.normal(size=24), truth=ActivityLabel.StandingStill)
        for _ in range(6)
    ] + [
        ActivityWindow(features=5 + rng.normal(size=24), truth=ActivityLabel.Walking)
        for _ in range(6)
    ]
    classifier = train_classifier(
        windows, TrainConfig(epochs=10, seed=0, loss=Loss.BCE, learning_rate=0.01)
    )
    return forecaster, classifier


def http_request(port, method, path, body=None):
    conn = http.client.HTTPConnection("127.0.0.1", port, timeout=30)
    try:
        conn.request(method, path, body=body)
        resp = conn.getresponse()
        return resp.status, resp.read().decode()
    finally:
        conn.close()


def test_end_to_end_service(acceptance):
    t0 = time.perf_counter()
    forecaster, classifier = quick_models()
    service = MonitorService(
        forecaster=forecaster, classifier=classifier, sample_rate_hz=8.0
    )
    server = make_server(service, port=0)
    port = server.server_address[1]
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        config = SimConfig(
            duration_minutes=255,
            hr_schedule=((0, 72.0), (120, 88.0)),
            rr_schedule=((0, 15.0), (150, 18.0)),
            sample_rate_hz=8.0,
            seed=17,
        )
        script = ActivityScript(segments=((0, ActivityLabel.Walking),))
        stream = simulate(config, script)

        status, _ = http_request(
            port,
            "POST",
            "/api/v1/patients",
            "patient_id=bed-7\nage_years=50\nsex=Female\nheight_cm=170.0\nweight_kg=70.0\n",
        )
        assert status == 201

        # status-code contract before any data arrives
        assert http_request(port, "GET", "/api/v1/patients/bed-7/vitals/current")[0] == 503
        assert http_request(port, "GET", "/api/v1/patients/bed-7/forecast")[0] == 503
        assert http_request(port, "GET", "/api/v1/patients/bed-7/activity")[0] == 503
        assert http_request(port, "GET", "/api/v1/patients/ghost/forecast")[0] == 404
        assert http_request(port, "GET", "/api/v1/wards")[0] == 404
        assert http_request(port, "POST", "/api/v1/patients/bed-7/readings", "")[0] == 400
        assert (
            http_request(
                port, "GET", "/api/v1/patients/bed-7/history?from=9&to=2"
            )[0]
            == 400
        )

        chunks = []
        chunk_minutes = 15
        for lo in range(0, 255, chunk_minutes):
            hi = min(lo + chunk_minutes, 255)
            block = [
                format_reading(r)
                for r in stream
                if lo * 60_000 <= r.timestamp_ms < hi * 60_000
            ]
            chunks.append("\n".join(block) + "\n")
        accepted_total = 0
        for chunk in chunks:
            status, body = http_request(
                port, "POST", "/api/v1/patients/bed-7/readings", chunk
            )
            assert status == 200
            accepted_total += int(kv_decode(body)["accepted"])
        assert accepted_total == len(stream)

        status, current = http_request(port, "GET", "/api/v1/patients/bed-7/vitals/current")
        assert status == 200
        status, forecast = http_request(port, "GET", "/api/v1/patients/bed-7/forecast")
        assert status == 200
        fc = kv_decode(forecast)
        assert fc["issued_at_minute"] == "255"
        assert len(fc["heart_rate"].split(",")) == 12
        assert len(fc["respiration"].split(",")) == 12
        status, activity = http_request(port, "GET", "/api/v1/patients/bed-7/activity")
        assert status == 200
        assert "current_status=" in activity
        status, history = http_request(
            port, "GET", "/api/v1/patients/bed-7/history?from=0&to=500"
        )
        assert status == 200
        assert history.startswith("count=255\n")

        # full replay changes nothing
        for chunk in chunks[:4]:
            status, body = http_request(
                port, "POST", "/api/v1/patients/bed-7/readings", chunk
            )
            assert status == 200
            assert kv_decode(body)["accepted"] == "0"
        assert http_request(port, "GET", "/api/v1/patients/bed-7/vitals/current")[1] == current
        assert http_request(port, "GET", "/api/v1/patients/bed-7/forecast")[1] == forecast
        assert http_request(port, "GET", "/api/v1/patients/bed-7/activity")[1] == activity

        duplicate = http_request(
            port,
            "POST",
            "/api/v1/patients",
            "patient_id=bed-7\nage_years=50\nsex=Female\nheight_cm=170.0\nweight_kg=70.0\n",
        )
        assert duplicate[0] == 409
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)
    elapsed = time.perf_counter() - t0
    ok = elapsed < 180
    acceptance("end-to-end service", ok, elapsed, "ingest, queries, replay, status codes")
    assert elapsed < 180


def test_demo_determinism(acceptance, tmp_path, capsys):
    t0 = time.perf_counter()
    out_a = tmp_path / "run-a"
    out_b = tmp_path / "run-b"
    assert run(["demo", "--seed", "7", "--out", str(out_a)]) == 0
    assert run(["demo", "--seed", "7", "--out", str(out_b)]) == 0
    capsys.readouterr()
    names = ["vitals.csv", "forecast.csv", "activity.csv", "probabilities.csv"]
    identical = all((out_a / n).read_bytes() == (out_b / n).read_bytes() for n in names)
    elapsed = time.perf_counter() - t0
    acceptance("demo determinism", identical, elapsed, "four reports byte-compared")
    assert identical
