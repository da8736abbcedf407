"""Live monitoring: per-patient ingestion, triggered processing, queries.

Processing is driven entirely by data arrival, never by wall-clock
timers, so a replayed stream reproduces the exact session state:

* a minute is processed once Chest and Abdomen both hold its last sample,
* a forecast is issued at timeline lengths 75, 90, 105, ... when a
  forecaster model is attached,
* an activity decision is refreshed per completed 128-sample limb window
  (hop 64) when a classifier model is attached.

Replays are idempotent: each placement keeps a high-water timestamp and
readings at or below it are rejected individually.

The HTTP layer is a thin text-over-HTTP adapter: flat key=value payloads
on GET, newline-delimited reading records on ingest POST.
"""

from __future__ import annotations

import os
import re
import threading
from bisect import bisect_left
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlsplit

import numpy as np

from . import errors
from .activity import ActivityDecision, ActivityModel, classify
from .domain import (
    ActivityProbabilities,
    Demographics,
    ForecastSeries,
    Quality,
    TagPlacement,
    VitalSample,
    kv_decode,
)
from .forecasting import ForecastModel, predict
from .signals import (
    HISTORY_MINUTES,
    WINDOW_HOP,
    WINDOW_SAMPLES,
    ActivityWindow,
    _extract_from_buffers,
    window_stats,
)
from .simulator import format_reading, parse_reading

FORECAST_CADENCE_MINUTES = 15
MS_PER_MINUTE = 60000

_LIMB_ORDER = (TagPlacement.LeftArm, TagPlacement.RightAnkle)


@dataclass
class _Buffers:
    ts: list[int] = field(default_factory=list)
    rssi: list[float] = field(default_factory=list)
    phase: list[float] = field(default_factory=list)
    channel: list[float] = field(default_factory=list)


@dataclass
class PatientSession:
    patient_id: str
    demographics: Demographics
    samples: list[VitalSample] = field(default_factory=list)
    latest_forecast: ForecastSeries | None = None
    latest_activity: ActivityDecision | None = None
    watermark: dict[TagPlacement, int] = field(
        default_factory=lambda: {p: -1 for p in TagPlacement}
    )
    buffers: dict[TagPlacement, _Buffers] = field(
        default_factory=lambda: {p: _Buffers() for p in TagPlacement}
    )
    next_minute: int = 0
    next_window_start: int = 0
    forecasts_issued: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)


class MonitorService:
    """In-memory session store with optional append-only event logs.

    Ingestion is serialized per patient by the session lock; queries take
    the same lock briefly to copy a consistent snapshot. Different
    patients never contend.
    """

    def __init__(
        self,
        forecaster: ForecastModel | None = None,
        classifier: ActivityModel | None = None,
        sample_rate_hz: float = 50.0,
        data_dir: str | None = None,
    ):
        if sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be > 0")
        self.forecaster = forecaster
        self.classifier = classifier
        self.sample_rate_hz = sample_rate_hz
        self.period_ms = int(round(1000.0 / sample_rate_hz))
        self.data_dir = data_dir
        self._sessions: dict[str, PatientSession] = {}
        self._registry_lock = threading.Lock()
        if data_dir:
            os.makedirs(data_dir, exist_ok=True)

    # -- registration -------------------------------------------------

    def register(self, patient_id: str, demographics: Demographics) -> None:
        if not patient_id or "/" in patient_id:
            raise ValueError(f"invalid patient id {patient_id!r}")
        with self._registry_lock:
            if patient_id in self._sessions:
                raise errors.DuplicatePatient(f"patient {patient_id!r} already registered")
            self._sessions[patient_id] = PatientSession(patient_id, demographics)
        if self.data_dir:
            meta_path = os.path.join(self.data_dir, f"{patient_id}.meta")
            with open(meta_path, "w") as fh:
                fh.write(demographics.to_kv() + "\n")

    def _session(self, patient_id: str) -> PatientSession:
        with self._registry_lock:
            session = self._sessions.get(patient_id)
        if session is None:
            raise errors.UnknownPatient(f"no patient {patient_id!r}")
        return session

    def patient_ids(self) -> list[str]:
        with self._registry_lock:
            return sorted(self._sessions)

    # -- ingestion ----------------------------------------------------

    def ingest(self, patient_id: str, batch) -> int:
        """Accept new readings, advance processing, return accepted count."""
        batch = list(batch)
        if not batch:
            raise errors.EmptyBatch("no readings in batch")
        session = self._session(patient_id)
        with session.lock:
            accepted = []
            for reading in batch:
                if reading.timestamp_ms <= session.watermark[reading.placement]:
                    continue
                buf = session.buffers[reading.placement]
                buf.ts.append(reading.timestamp_ms)
                buf.rssi.append(reading.rssi_dbm)
                buf.phase.append(reading.phase_rad)
                buf.channel.append(reading.channel_mhz)
                session.watermark[reading.placement] = reading.timestamp_ms
                accepted.append(reading)
            if accepted and self.data_dir:
                log_path = os.path.join(self.data_dir, f"{patient_id}.log")
                with open(log_path, "a") as fh:
                    for reading in accepted:
                        fh.write(format_reading(reading) + "\n")
            self._advance_minutes(session)
            self._advance_windows(session)
            return len(accepted)

    def _minute_complete(self, session: PatientSession, minute: int) -> bool:
        last_needed = (minute + 1) * MS_PER_MINUTE - self.period_ms
        return (
            session.watermark[TagPlacement.Chest] >= last_needed
            and session.watermark[TagPlacement.Abdomen] >= last_needed
        )

    def _minute_values(self, buf: _Buffers, minute: int) -> np.ndarray:
        lo = bisect_left(buf.ts, minute * MS_PER_MINUTE)
        hi = bisect_left(buf.ts, (minute + 1) * MS_PER_MINUTE)
        return np.array(buf.rssi[lo:hi])

    def _advance_minutes(self, session: PatientSession) -> None:
        while self._minute_complete(session, session.next_minute):
            minute = session.next_minute
            try:
                sample = _extract_from_buffers(
                    self._minute_values(session.buffers[TagPlacement.Chest], minute),
                    self._minute_values(session.buffers[TagPlacement.Abdomen], minute),
                    minute,
                    self.sample_rate_hz,
                )
            except errors.InsufficientSamples:
                sample = VitalSample(minute, float("nan"), float("nan"), Quality.Bad)
            session.samples.append(sample)
            session.next_minute += 1
            self._maybe_forecast(session)

    def _maybe_forecast(self, session: PatientSession) -> None:
        if self.forecaster is None:
            return
        n = len(session.samples)
        if n < HISTORY_MINUTES or (n - HISTORY_MINUTES) % FORECAST_CADENCE_MINUTES:
            return
        history = session.samples[n - HISTORY_MINUTES : n]
        try:
            series, _ = predict(self.forecaster, history, session.demographics)
        except errors.IncompleteHistory:
            return  # Bad minutes in range; retry at the next cadence point
        session.latest_forecast = series
        session.forecasts_issued += 1

    def _advance_windows(self, session: PatientSession) -> None:
        if self.classifier is None:
            return
        left = session.buffers[TagPlacement.LeftArm]
        right = session.buffers[TagPlacement.RightAnkle]
        while True:
            start = session.next_window_start
            if min(len(left.ts), len(right.ts)) < start + WINDOW_SAMPLES:
                return
            sel = slice(start, start + WINDOW_SAMPLES)
            matrix = np.stack(
                [
                    np.array(getattr(session.buffers[p], name)[sel])
                    for p in _LIMB_ORDER
                    for name in ("rssi", "phase", "channel")
                ],
                axis=1,
            )
            window = ActivityWindow(
                features=window_stats(matrix, self.sample_rate_hz),
                start_ms=left.ts[start],
            )
            session.latest_activity = classify(self.classifier, window)
            session.next_window_start += WINDOW_HOP

    # -- queries --------------------------------------------------------

    def query_current(self, patient_id: str) -> VitalSample:
        session = self._session(patient_id)
        with session.lock:
            if not session.samples:
                raise errors.Unavailable("no completed minute yet")
            return session.samples[-1]

    def query_forecast(self, patient_id: str) -> ForecastSeries:
        session = self._session(patient_id)
        with session.lock:
            if session.latest_forecast is None:
                raise errors.Unavailable(
                    f"forecast needs {HISTORY_MINUTES} minutes of history"
                )
            return session.latest_forecast

    def query_activity(self, patient_id: str) -> ActivityDecision:
        session = self._session(patient_id)
        with session.lock:
            if session.latest_activity is None:
                raise errors.Unavailable("no completed activity window yet")
            return session.latest_activity

    def query_history(self, patient_id: str, from_minute: int, to_minute: int) -> list[VitalSample]:
        """Samples with from_minute <= minute_index < to_minute."""
        if from_minute < 0 or to_minute < from_minute:
            raise errors.BadRange(f"bad range [{from_minute}, {to_minute})")
        session = self._session(patient_id)
        with session.lock:
            return [
                s for s in session.samples if from_minute <= s.minute_index < to_minute
            ]

    # -- restart recovery ---------------------------------------------

    def recover(self) -> list[str]:
        """Rebuild sessions from the event-log directory; returns ids."""
        if not self.data_dir:
            return []
        recovered = []
        for name in sorted(os.listdir(self.data_dir)):
            if not name.endswith(".meta"):
                continue
            patient_id = name[: -len(".meta")]
            with open(os.path.join(self.data_dir, name)) as fh:
                demographics = Demographics.from_kv(fh.read())
            with self._registry_lock:
                if patient_id in self._sessions:
                    continue
                self._sessions[patient_id] = PatientSession(patient_id, demographics)
            log_path = os.path.join(self.data_dir, f"{patient_id}.log")
            if os.path.exists(log_path):
                with open(log_path) as fh:
                    readings = [parse_reading(line) for line in fh if line.strip()]
                if readings:
                    # Replay without re-appending to the log.
                    data_dir, self.data_dir = self.data_dir, None
                    try:
                        self.ingest(patient_id, readings)
                    finally:
                        self.data_dir = data_dir
            recovered.append(patient_id)
        return recovered


# -- HTTP adapter -------------------------------------------------------

_ROUTE_PATIENTS = re.compile(r"/api/v1/patients/?$")
_ROUTE_READINGS = re.compile(r"/api/v1/patients/([^/]+)/readings/?$")
_ROUTE_QUERY = re.compile(r"/api/v1/patients/([^/]+)/(vitals/current|forecast|activity|history)/?$")


class _Handler(BaseHTTPRequestHandler):
    service: MonitorService  # injected by make_server

    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # default stderr chatter off
        pass

    def _send(self, code: int, body: str) -> None:
        payload = body.encode()
        self.send_response(code)
        self.send_header("Content-Type", "text/plain; charset=utf-8")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _read_body(self) -> str:
        length = int(self.headers.get("Content-Length", "0"))
        return self.rfile.read(length).decode()

    def do_POST(self):
        path = urlsplit(self.path).path
        try:
            if _ROUTE_PATIENTS.fullmatch(path):
                kv = kv_decode(self._read_body())
                patient_id = kv.pop("patient_id", "")
                demographics = Demographics.from_kv(
                    "\n".join(f"{k}={v}" for k, v in kv.items())
                )
                self.service.register(patient_id, demographics)
                self._send(201, f"patient_id={patient_id}\n")
                return
            m = _ROUTE_READINGS.fullmatch(path)
            if m:
                body = self._read_body()
                readings = [parse_reading(line) for line in body.splitlines() if line.strip()]
                accepted = self.service.ingest(m.group(1), readings)
                self._send(200, f"accepted={accepted}\n")
                return
            self._send(404, "error=unknown path\n")
        except errors.UnknownPatient as e:
            self._send(404, f"error={e}\n")
        except errors.DuplicatePatient as e:
            self._send(409, f"error={e}\n")
        except (errors.EmptyBatch, ValueError, KeyError) as e:
            self._send(400, f"error={e}\n")

    def do_GET(self):
        parts = urlsplit(self.path)
        m = _ROUTE_QUERY.fullmatch(parts.path)
        if not m:
            self._send(404, "error=unknown path\n")
            return
        patient_id, what = m.group(1), m.group(2)
        try:
            if what == "vitals/current":
                self._send(200, self.service.query_current(patient_id).to_kv() + "\n")
            elif what == "forecast":
                self._send(200, self.service.query_forecast(patient_id).to_kv() + "\n")
            elif what == "activity":
                self._send(200, self.service.query_activity(patient_id).to_kv() + "\n")
            else:
                params = parse_qs(parts.query)
                try:
                    from_minute = int(params["from"][0])
                    to_minute = int(params["to"][0])
                except (KeyError, ValueError, IndexError):
                    raise errors.BadRange(
                        "history needs integer from= and to= parameters"
                    ) from None
                samples = self.service.query_history(patient_id, from_minute, to_minute)
                blocks = [s.to_kv() for s in samples]
                self._send(200, f"count={len(samples)}\n" + "\n\n".join(blocks) + ("\n" if blocks else ""))
        except errors.UnknownPatient as e:
            self._send(404, f"error={e}\n")
        except errors.Unavailable as e:
            self._send(503, f"error={e}\n")
        except errors.BadRange as e:
            self._send(400, f"error={e}\n")


def make_server(service: MonitorService, host: str = "127.0.0.1", port: int = 8000) -> ThreadingHTTPServer:
    """HTTP server bound to the service; call serve_forever() to run."""
    handler = type("BoundHandler", (_Handler,), {"service": service})
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    return server
