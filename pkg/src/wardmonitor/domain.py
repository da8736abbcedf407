"""Shared domain vocabulary for the monitoring stack.

Tag readings, per-minute vitals, patient demographics, activity labels and
forecast series. All types are immutable value records and safe to share
across threads.

Each type has a canonical flat key/value text form (one ``name=value`` pair
per line, sequences comma-joined, enums by name) used by the service
payloads and the file formats downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from . import errors

TWO_PI = 2.0 * math.pi


class TagPlacement(Enum):
    """Body placement of the four passive tags.

    Chest sources heart rate, Abdomen sources respiration, the two limb
    tags source motion.
    """

    Chest = "Chest"
    Abdomen = "Abdomen"
    LeftArm = "LeftArm"
    RightAnkle = "RightAnkle"


LIMB_PLACEMENTS = (TagPlacement.LeftArm, TagPlacement.RightAnkle)


class Quality(Enum):
    Good = "Good"
    Degraded = "Degraded"
    Bad = "Bad"


class Sex(Enum):
    Female = 0
    Male = 1


class ActivityLabel(Enum):
    """The ten recognised physical activities, with fixed indices."""

    StandingStill = 0
    ClimbingStairs = 1
    SittingRelaxing = 2
    LyingDown = 3
    Walking = 4
    WaistBendsForward = 5
    Running = 6
    FrontalElevationOfArms = 7
    KneesBending = 8
    JumpFrontBack = 9


def label_index(label: ActivityLabel) -> int:
    return label.value


def label_from_index(index: int) -> ActivityLabel:
    """Inverse of label_index; raises UnknownIndex outside [0, 9]."""
    if not isinstance(index, int) or isinstance(index, bool) or not 0 <= index <= 9:
        raise errors.UnknownIndex(f"no activity label with index {index!r}")
    return ActivityLabel(index)


# Plausibility bounds used to gate obvious extraction failures.
HR_BOUNDS_BPM = (20.0, 250.0)
RR_BOUNDS_BPM = (4.0, 60.0)

FORECAST_STEP_MINUTES = 15
FORECAST_HORIZON_STEPS = 12


def _fmt(value: float) -> str:
    # repr() of a Python float is the shortest string that round-trips.
    return repr(float(value))


def _fmt_seq(values) -> str:
    return ",".join(_fmt(v) for v in values)


def kv_decode(text: str) -> dict[str, str]:
    """Parse flat ``name=value`` lines into a dict; blank lines ignored."""
    out: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"not a key=value pair: {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


@dataclass(frozen=True)
class TagReading:
    """One timestamped RSSI/phase sample from one body-placed tag.

    timestamp_ms is milliseconds since the stream epoch, not wall clock,
    so identical simulations replay identically.
    """

    placement: TagPlacement
    timestamp_ms: int
    rssi_dbm: float
    phase_rad: float
    channel_mhz: float

    def __post_init__(self):
        if not 0.0 <= self.phase_rad < TWO_PI:
            raise ValueError(
                f"phase_rad {self.phase_rad} outside [0, 2*pi)"
            )

    def to_kv(self) -> str:
        return "\n".join(
            [
                f"placement={self.placement.name}",
                f"timestamp_ms={self.timestamp_ms}",
                f"rssi_dbm={_fmt(self.rssi_dbm)}",
                f"phase_rad={_fmt(self.phase_rad)}",
                f"channel_mhz={_fmt(self.channel_mhz)}",
            ]
        )

    @classmethod
    def from_kv(cls, text: str) -> "TagReading":
        kv = kv_decode(text)
        return cls(
            placement=TagPlacement[kv["placement"]],
            timestamp_ms=int(kv["timestamp_ms"]),
            rssi_dbm=float(kv["rssi_dbm"]),
            phase_rad=float(kv["phase_rad"]),
            channel_mhz=float(kv["channel_mhz"]),
        )


@dataclass(frozen=True)
class VitalSample:
    """Per-minute heart rate and respiration with a quality flag.

    When quality is Bad both vitals are unset (NaN). Otherwise they must
    sit inside the plausibility bounds.
    """

    minute_index: int
    heart_rate_bpm: float
    respiration_bpm: float
    quality: Quality

    def __post_init__(self):
        if self.quality is not Quality.Bad:
            lo, hi = HR_BOUNDS_BPM
            if not lo <= self.heart_rate_bpm <= hi:
                raise ValueError(
                    f"heart_rate_bpm {self.heart_rate_bpm} outside [{lo}, {hi}]"
                )
            lo, hi = RR_BOUNDS_BPM
            if not lo <= self.respiration_bpm <= hi:
                raise ValueError(
                    f"respiration_bpm {self.respiration_bpm} outside [{lo}, {hi}]"
                )

    def to_kv(self) -> str:
        return "\n".join(
            [
                f"minute_index={self.minute_index}",
                f"heart_rate_bpm={_fmt(self.heart_rate_bpm)}",
                f"respiration_bpm={_fmt(self.respiration_bpm)}",
                f"quality={self.quality.name}",
            ]
        )

    @classmethod
    def from_kv(cls, text: str) -> "VitalSample":
        kv = kv_decode(text)
        return cls(
            minute_index=int(kv["minute_index"]),
            heart_rate_bpm=float(kv["heart_rate_bpm"]),
            respiration_bpm=float(kv["respiration_bpm"]),
            quality=Quality[kv["quality"]],
        )


@dataclass(frozen=True)
class Demographics:
    age_years: int
    sex: Sex
    height_cm: float
    weight_kg: float

    def __post_init__(self):
        if not 0 <= self.age_years <= 120:
            raise ValueError(f"age_years {self.age_years} outside [0, 120]")
        if not (math.isfinite(self.height_cm) and self.height_cm > 0):
            raise ValueError(f"height_cm must be finite and > 0, got {self.height_cm}")
        if not (math.isfinite(self.weight_kg) and self.weight_kg > 0):
            raise ValueError(f"weight_kg must be finite and > 0, got {self.weight_kg}")

    def to_kv(self) -> str:
        return "\n".join(
            [
                f"age_years={self.age_years}",
                f"sex={self.sex.name}",
                f"height_cm={_fmt(self.height_cm)}",
                f"weight_kg={_fmt(self.weight_kg)}",
            ]
        )

    @classmethod
    def from_kv(cls, text: str) -> "Demographics":
        kv = kv_decode(text)
        return cls(
            age_years=int(kv["age_years"]),
            sex=Sex[kv["sex"]],
            height_cm=float(kv["height_cm"]),
            weight_kg=float(kv["weight_kg"]),
        )


def bmi(d: Demographics) -> float:
    """Body mass index in kg/m^2."""
    if d.height_cm <= 0:
        raise errors.NonPositiveHeight(f"height_cm must be > 0, got {d.height_cm}")
    height_m = d.height_cm / 100.0
    return d.weight_kg / (height_m * height_m)


@dataclass(frozen=True)
class ActivityProbabilities:
    """Ten per-label sigmoid outputs, index-aligned with ActivityLabel.

    Independent probabilities, so no sum-to-one constraint.
    """

    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.probs) != 10:
            raise ValueError(f"expected 10 probabilities, got {len(self.probs)}")
        for p in self.probs:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))

    def to_kv(self) -> str:
        return f"probs={_fmt_seq(self.probs)}"

    @classmethod
    def from_kv(cls, text: str) -> "ActivityProbabilities":
        kv = kv_decode(text)
        return cls(probs=tuple(float(p) for p in kv["probs"].split(",")))


@dataclass(frozen=True)
class ForecastSeries:
    """Twelve 15-minute steps of predicted heart rate and respiration.

    Covers the 180 minutes after issued_at_minute.
    """

    issued_at_minute: int
    heart_rate: tuple[float, ...]
    respiration: tuple[float, ...]
    step_minutes: int = FORECAST_STEP_MINUTES
    horizon_steps: int = FORECAST_HORIZON_STEPS

    def __post_init__(self):
        if self.step_minutes != FORECAST_STEP_MINUTES:
            raise ValueError(f"step_minutes must be {FORECAST_STEP_MINUTES}")
        if self.horizon_steps != FORECAST_HORIZON_STEPS:
            raise ValueError(f"horizon_steps must be {FORECAST_HORIZON_STEPS}")
        for name, seq in (("heart_rate", self.heart_rate), ("respiration", self.respiration)):
            if len(seq) != self.horizon_steps:
                raise ValueError(
                    f"{name} must have exactly {self.horizon_steps} values, got {len(seq)}"
                )
        object.__setattr__(self, "heart_rate", tuple(float(v) for v in self.heart_rate))
        object.__setattr__(self, "respiration", tuple(float(v) for v in self.respiration))

    def to_kv(self) -> str:
        return "\n".join(
            [
                f"issued_at_minute={self.issued_at_minute}",
                f"step_minutes={self.step_minutes}",
                f"horizon_steps={self.horizon_steps}",
                f"heart_rate={_fmt_seq(self.heart_rate)}",
                f"respiration={_fmt_seq(self.respiration)}",
            ]
        )

    @classmethod
    def from_kv(cls, text: str) -> "ForecastSeries":
        kv = kv_decode(text)
        return cls(
            issued_at_minute=int(kv["issued_at_minute"]),
            heart_rate=tuple(float(v) for v in kv["heart_rate"].split(",")),
            respiration=tuple(float(v) for v in kv["respiration"].split(",")),
            step_minutes=int(kv["step_minutes"]),
            horizon_steps=int(kv["horizon_steps"]),
        )
