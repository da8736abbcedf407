"""Deterministic four-tag RFID telemetry synthesis.

Stands in for the UHF reader hardware: RSSI and phase of the four
body-placed tags are modulated by a configured heart rate / respiration
schedule and a scripted activity timeline.

Signal model (one stream epoch, t in seconds):

* Chest RSSI   = baseline + resp_depth * sin(2*pi*(rr/60)*t)
                 + heart_depth * g(t)  + noise,
  where g is a train of unit-energy Gaussian pulses at the scheduled
  heart period (pulse width 5% of the period).
* Abdomen RSSI = baseline + resp_depth * sin(2*pi*(rr/60)*t) + noise.
* Limb RSSI    = baseline + motion_depth * A * sin(2*pi*f*t + lag) + noise,
  limb phase   = offset + A * sin(2*pi*f*t + lag) + phase noise,
  with (A, f, offset) looked up per scripted activity in MOTION_TEMPLATES
  and a fixed per-tag lag.

Everything is a pure function of (config, script, seed): equal seeds give
bit-identical streams, different seeds change only the noise realization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import errors
from .domain import (
    HR_BOUNDS_BPM,
    RR_BOUNDS_BPM,
    TWO_PI,
    ActivityLabel,
    TagPlacement,
    TagReading,
)

READER_CHANNEL_MHZ = 870.0

# Static carrier phase per torso tag; limb phase comes from the motion model.
CARRIER_PHASE_RAD = {TagPlacement.Chest: 0.7, TagPlacement.Abdomen: 1.9}

# Phase noise scale relative to the RSSI noise figure.
PHASE_NOISE_RAD_PER_DB = 0.02

# Fixed lag between the two limb tags so their waveforms are not clones.
LIMB_LAG_RAD = {TagPlacement.LeftArm: 0.0, TagPlacement.RightAnkle: math.pi / 3.0}

# Per-activity limb motion template: (amplitude_rad, frequency_hz, offset_rad).
# The three sedentary postures have near-zero amplitude and are told apart
# by their static phase offsets.
MOTION_TEMPLATES: dict[ActivityLabel, tuple[float, float, float]] = {
    ActivityLabel.StandingStill: (0.02, 0.30, 0.6),
    ActivityLabel.ClimbingStairs: (0.90, 1.60, 1.2),
    ActivityLabel.SittingRelaxing: (0.02, 0.25, 2.4),
    ActivityLabel.LyingDown: (0.015, 0.20, 4.4),
    ActivityLabel.Walking: (0.70, 1.80, 1.0),
    ActivityLabel.WaistBendsForward: (1.10, 0.50, 2.0),
    ActivityLabel.Running: (1.50, 2.80, 1.4),
    ActivityLabel.FrontalElevationOfArms: (1.00, 0.70, 3.0),
    ActivityLabel.KneesBending: (0.90, 0.90, 2.6),
    ActivityLabel.JumpFrontBack: (1.60, 2.20, 3.4),
}

HEART_PULSE_WIDTH_FRACTION = 0.05

Schedule = tuple[tuple[int, float], ...]


def constant_schedule(value: float) -> Schedule:
    return ((0, float(value)),)


def _check_segment_starts(starts, duration_minutes: int, what: str) -> None:
    if len(starts) == 0:
        raise errors.InvalidSchedule(f"{what} is empty")
    if starts[0] != 0:
        raise errors.InvalidSchedule(f"{what} must start at minute 0, got {starts[0]}")
    for a, b in zip(starts, starts[1:]):
        if b <= a:
            raise errors.InvalidSchedule(
                f"{what} start minutes must be strictly increasing ({a} then {b})"
            )
    if duration_minutes is not None and starts[-1] >= duration_minutes:
        raise errors.InvalidSchedule(
            f"{what} has a segment starting at {starts[-1]},"
            f" beyond the {duration_minutes}-minute duration"
        )


def _schedule_value_at(schedule: Schedule, minute: int) -> float:
    value = schedule[0][1]
    for start, v in schedule:
        if start <= minute:
            value = v
        else:
            break
    return value


@dataclass(frozen=True)
class ActivityScript:
    """Scripted activity timeline: (start_minute, label) segments.

    Segments are sorted, start at minute 0 and have no duplicate starts;
    each label holds until the next segment begins.
    """

    segments: tuple[tuple[int, ActivityLabel], ...]

    def __post_init__(self):
        starts = [s for s, _ in self.segments]
        _check_segment_starts(starts, None, "activity script")
        for _, label in self.segments:
            if not isinstance(label, ActivityLabel):
                raise errors.InvalidSchedule(f"not an activity label: {label!r}")

    def label_at(self, minute: int) -> ActivityLabel:
        label = self.segments[0][1]
        for start, l in self.segments:
            if start <= minute:
                label = l
            else:
                break
        return label


@dataclass(frozen=True)
class SimConfig:
    """Everything the synthesis needs besides the activity script.

    Schedules are piecewise-constant bpm over minutes, encoded as
    (start_minute, bpm) pairs covering [0, duration_minutes).
    """

    duration_minutes: int
    hr_schedule: Schedule
    rr_schedule: Schedule
    sample_rate_hz: float = 50.0
    heart_mod_depth: float = 0.8
    resp_mod_depth: float = 1.0
    motion_mod_depth: float = 1.0
    noise_sigma_db: float = 0.3
    baseline_rssi_dbm: float = -50.0
    seed: int = 0

    def __post_init__(self):
        if self.duration_minutes <= 0:
            raise ValueError(f"duration_minutes must be > 0, got {self.duration_minutes}")
        if not 0.0 < self.sample_rate_hz <= 500.0:
            raise ValueError(
                f"sample_rate_hz must be in (0, 500], got {self.sample_rate_hz}"
            )
        if self.noise_sigma_db < 0:
            raise ValueError(f"noise_sigma_db must be >= 0, got {self.noise_sigma_db}")
        for name, schedule, (lo, hi) in (
            ("hr_schedule", self.hr_schedule, HR_BOUNDS_BPM),
            ("rr_schedule", self.rr_schedule, RR_BOUNDS_BPM),
        ):
            _check_segment_starts(
                [s for s, _ in schedule], self.duration_minutes, name
            )
            for _, bpm in schedule:
                if not lo <= bpm <= hi:
                    raise errors.InvalidSchedule(
                        f"{name} value {bpm} outside [{lo}, {hi}]"
                    )


def ground_truth(
    config: SimConfig, script: ActivityScript, minute: int
) -> tuple[float, float, ActivityLabel]:
    """The scheduled (hr_bpm, rr_bpm, label) governing a given minute."""
    if not 0 <= minute < config.duration_minutes:
        raise errors.OutOfRange(
            f"minute {minute} outside [0, {config.duration_minutes})"
        )
    return (
        _schedule_value_at(config.hr_schedule, minute),
        _schedule_value_at(config.rr_schedule, minute),
        script.label_at(minute),
    )


def _heart_pulse_train(t: np.ndarray, minute_bounds: np.ndarray, hr_by_minute: np.ndarray) -> np.ndarray:
    """Unit-energy Gaussian pulse train, beats laid out minute by minute."""
    pulse = np.zeros_like(t)
    for m in range(len(hr_by_minute)):
        lo, hi = minute_bounds[m], minute_bounds[m + 1]
        if hi <= lo:
            continue
        hr = hr_by_minute[m]
        period = 60.0 / hr
        sigma = HEART_PULSE_WIDTH_FRACTION * period
        # beats b with 60*m + b*period < 60*(m+1)
        n_beats = int(math.floor(hr - 1e-12)) + 1
        beat_times = 60.0 * m + np.arange(n_beats) * period
        amp = (math.pi * sigma * sigma) ** -0.25
        diff = t[lo:hi, None] - beat_times[None, :]
        pulse[lo:hi] = amp * np.exp(-(diff * diff) / (2.0 * sigma * sigma)).sum(axis=1)
    return pulse


def _wrap_phase(phase: np.ndarray) -> np.ndarray:
    wrapped = np.mod(phase, TWO_PI)
    # np.mod of a tiny negative can round up to exactly 2*pi
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


def simulate(config: SimConfig, script: ActivityScript) -> list[TagReading]:
    """Synthesize the full four-tag stream, interleaved by timestamp.

    Emits duration*60*sample_rate readings per placement. Ties in
    timestamp are ordered Chest, Abdomen, LeftArm, RightAnkle.
    """
    rate = config.sample_rate_hz
    duration = config.duration_minutes
    n = int(round(duration * 60 * rate))
    k = np.arange(n)
    ts_ms = np.round(k * (1000.0 / rate)).astype(np.int64)
    t = k / rate

    minute = (ts_ms // 60000).astype(np.int64)
    minute_bounds = np.searchsorted(minute, np.arange(duration + 1))
    hr_by_minute = np.array(
        [_schedule_value_at(config.hr_schedule, m) for m in range(duration)]
    )
    rr_by_minute = np.array(
        [_schedule_value_at(config.rr_schedule, m) for m in range(duration)]
    )
    label_by_minute = np.array(
        [script.label_at(m).value for m in range(duration)], dtype=np.int64
    )

    rr_t = rr_by_minute[minute]
    resp_wave = np.sin(TWO_PI * (rr_t / 60.0) * t)
    pulse = _heart_pulse_train(t, minute_bounds, hr_by_minute)

    amp_by_label = np.zeros(10)
    freq_by_label = np.zeros(10)
    off_by_label = np.zeros(10)
    for label, (a, f, o) in MOTION_TEMPLATES.items():
        amp_by_label[label.value] = a
        freq_by_label[label.value] = f
        off_by_label[label.value] = o
    label_t = label_by_minute[minute]
    amp_t = amp_by_label[label_t]
    freq_t = freq_by_label[label_t]
    off_t = off_by_label[label_t]

    rng = np.random.default_rng(config.seed)
    sigma = config.noise_sigma_db
    phase_sigma = sigma * PHASE_NOISE_RAD_PER_DB

    def noise() -> np.ndarray:
        if sigma == 0.0:
            return np.zeros(n)
        return rng.normal(0.0, sigma, n)

    def phase_noise() -> np.ndarray:
        if phase_sigma == 0.0:
            return np.zeros(n)
        return rng.normal(0.0, phase_sigma, n)

    rssi: dict[TagPlacement, np.ndarray] = {}
    phase: dict[TagPlacement, np.ndarray] = {}

    base = config.baseline_rssi_dbm
    # Noise draws happen in a fixed placement order so a seed pins the stream.
    rssi[TagPlacement.Chest] = (
        base
        + config.resp_mod_depth * resp_wave
        + config.heart_mod_depth * pulse
        + noise()
    )
    phase[TagPlacement.Chest] = _wrap_phase(
        CARRIER_PHASE_RAD[TagPlacement.Chest] + phase_noise()
    )
    rssi[TagPlacement.Abdomen] = base + config.resp_mod_depth * resp_wave + noise()
    phase[TagPlacement.Abdomen] = _wrap_phase(
        CARRIER_PHASE_RAD[TagPlacement.Abdomen] + phase_noise()
    )
    for placement in (TagPlacement.LeftArm, TagPlacement.RightAnkle):
        lag = LIMB_LAG_RAD[placement]
        wave = np.sin(TWO_PI * freq_t * t + lag)
        rssi[placement] = base + config.motion_mod_depth * amp_t * wave + noise()
        phase[placement] = _wrap_phase(off_t + amp_t * wave + phase_noise())

    placements = list(TagPlacement)
    readings: list[TagReading] = []
    append = readings.append
    for i in range(n):
        ts = int(ts_ms[i])
        for placement in placements:
            append(
                TagReading(
                    placement=placement,
                    timestamp_ms=ts,
                    rssi_dbm=float(rssi[placement][i]),
                    phase_rad=float(phase[placement][i]),
                    channel_mhz=READER_CHANNEL_MHZ,
                )
            )
    return readings


# --- stream and config text formats -------------------------------------

def format_reading(r: TagReading) -> str:
    """One stream record: timestamp_ms placement rssi phase channel."""
    return (
        f"{r.timestamp_ms} {r.placement.name} {r.rssi_dbm!r}"
        f" {r.phase_rad!r} {r.channel_mhz!r}"
    )


def parse_reading(line: str) -> TagReading:
    parts = line.split()
    if len(parts) != 5:
        raise ValueError(f"expected 5 fields, got {len(parts)}: {line!r}")
    return TagReading(
        placement=TagPlacement[parts[1]],
        timestamp_ms=int(parts[0]),
        rssi_dbm=float(parts[2]),
        phase_rad=float(parts[3]),
        channel_mhz=float(parts[4]),
    )


def write_stream(readings, path) -> None:
    with open(path, "w") as fh:
        for r in readings:
            fh.write(format_reading(r))
            fh.write("\n")


def read_stream(path) -> list[TagReading]:
    with open(path) as fh:
        return [parse_reading(line) for line in fh if line.strip()]


def _parse_schedule(text: str, cast):
    segments = []
    for piece in text.split(","):
        start, _, value = piece.partition(":")
        segments.append((int(start), cast(value)))
    return tuple(segments)


def load_sim_config(path) -> tuple[SimConfig, ActivityScript]:
    """Read a SimConfig (plus optional activity_script) from key=value text.

    Schedules are encoded as comma-joined start:value pairs, e.g.
    ``hr_schedule=0:72,120:95``; the script uses label names,
    ``activity_script=0:LyingDown,60:Walking``. A missing script defaults
    to StandingStill throughout.
    """
    kv: dict[str, str] = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            kv[key.strip()] = value.strip()

    script_text = kv.pop("activity_script", "0:StandingStill")
    script = ActivityScript(
        segments=tuple(
            (int(p.partition(":")[0]), ActivityLabel[p.partition(":")[2]])
            for p in script_text.split(",")
        )
    )
    config = SimConfig(
        duration_minutes=int(kv["duration_minutes"]),
        hr_schedule=_parse_schedule(kv["hr_schedule"], float),
        rr_schedule=_parse_schedule(kv["rr_schedule"], float),
        sample_rate_hz=float(kv.get("sample_rate_hz", 50.0)),
        heart_mod_depth=float(kv.get("heart_mod_depth", 0.8)),
        resp_mod_depth=float(kv.get("resp_mod_depth", 1.0)),
        motion_mod_depth=float(kv.get("motion_mod_depth", 1.0)),
        noise_sigma_db=float(kv.get("noise_sigma_db", 0.3)),
        baseline_rssi_dbm=float(kv.get("baseline_rssi_dbm", -50.0)),
        seed=int(kv.get("seed", 0)),
    )
    return config, script
