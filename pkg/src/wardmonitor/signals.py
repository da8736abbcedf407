"""Raw tag streams to per-minute vitals, forecast instances and activity windows.

Vital extraction is spectral: each minute of Chest / Abdomen RSSI is
detrended (mean and linear trend removed) and the magnitude spectrum peak
is picked inside a physiological band,

* heart rate   from Chest,   band 0.8 to 2.5 Hz,
* respiration  from Abdomen, band 0.1 to 0.5 Hz,

then converted to bpm. Quality grades on how far the in-band peak rises
above the median out-of-band magnitude.

Forecast feature vectors have a fixed layout: positions 0..74 are the 75
heart-rate history minutes, 75..149 the respiration history, 150..153 the
demographics (age, sex, height, weight). Targets are 12 future heart-rate
values then 12 future respiration values, one per 15-minute step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import detrend

from . import errors
from .domain import (
    ActivityLabel,
    Demographics,
    Quality,
    TagPlacement,
    TagReading,
    VitalSample,
)

HR_BAND_HZ = (0.8, 2.5)
RR_BAND_HZ = (0.1, 0.5)
GOOD_PEAK_RATIO = 3.0
DEGRADED_PEAK_RATIO = 1.5
MIN_SAMPLE_FRACTION = 0.8

HISTORY_MINUTES = 75
HORIZON_MINUTES = 180
ANCHOR_STEP_MINUTES = 15
FEATURE_LEN = 154
TARGET_LEN = 24

WINDOW_SAMPLES = 128
WINDOW_HOP = 64
CHANNELS_PER_TAG = 3  # rssi, phase, channel
ACTIVITY_FEATURES = 24  # 3 channels x 2 limb tags x 4 statistics


@dataclass(frozen=True)
class VitalsTimeline:
    """Consecutive per-minute samples, minute_index 0, 1, 2, ..."""

    samples: tuple[VitalSample, ...]

    def __post_init__(self):
        for i, s in enumerate(self.samples):
            if s.minute_index != i:
                raise ValueError(
                    f"minute indices must be contiguous from 0;"
                    f" position {i} has minute_index {s.minute_index}"
                )

    def __len__(self) -> int:
        return len(self.samples)

    def heart_rates(self) -> np.ndarray:
        return np.array([s.heart_rate_bpm for s in self.samples])

    def respirations(self) -> np.ndarray:
        return np.array([s.respiration_bpm for s in self.samples])


@dataclass(frozen=True)
class ForecastInstance:
    """154 history+demographics features paired with 24 future targets."""

    features: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "features", np.asarray(self.features, dtype=float))
        object.__setattr__(self, "targets", np.asarray(self.targets, dtype=float))
        if self.features.shape != (FEATURE_LEN,):
            raise ValueError(f"features must have length {FEATURE_LEN}")
        if self.targets.shape != (TARGET_LEN,):
            raise ValueError(f"targets must have length {TARGET_LEN}")
        if not np.all(np.isfinite(self.features)) or not np.all(np.isfinite(self.targets)):
            raise ValueError("features and targets must be finite")


@dataclass(frozen=True)
class ActivityWindow:
    """Fixed-length limb-motion feature vector, optionally labeled."""

    features: np.ndarray
    truth: ActivityLabel | None = None
    start_ms: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "features", np.asarray(self.features, dtype=float))
        if self.features.shape != (ACTIVITY_FEATURES,):
            raise ValueError(f"features must have length {ACTIVITY_FEATURES}")


def _quality_rank(q: Quality) -> int:
    return {Quality.Good: 2, Quality.Degraded: 1, Quality.Bad: 0}[q]


def _worse(a: Quality, b: Quality) -> Quality:
    return a if _quality_rank(a) <= _quality_rank(b) else b


def _band_peak(x: np.ndarray, rate: float, band: tuple[float, float]):
    """Peak frequency in band plus the quality grade of that peak."""
    x = np.asarray(x, dtype=float)
    scale = float(np.max(np.abs(x))) if x.size else 0.0
    x = detrend(x, type="linear")
    spectrum = np.abs(np.fft.rfft(x))
    freqs = np.fft.rfftfreq(len(x), d=1.0 / rate)
    in_band = (freqs >= band[0]) & (freqs <= band[1])
    if not np.any(in_band):
        return 0.0, Quality.Bad
    out_band = ~in_band
    out_band[0] = False  # DC is neither in nor out of band
    peak_value = spectrum[in_band].max()
    # detrending an exactly constant signal leaves eps-scale residue whose
    # spectrum peak is arbitrary; anything at that scale is not physiology
    if peak_value <= len(x) * 1e-12 * max(1.0, scale):
        return 0.0, Quality.Bad
    peak_freq = freqs[in_band][np.argmax(spectrum[in_band])]
    median_out = np.median(spectrum[out_band]) if np.any(out_band) else 0.0
    if median_out <= 0.0:
        ratio = np.inf
    else:
        ratio = peak_value / median_out
    if ratio >= GOOD_PEAK_RATIO:
        quality = Quality.Good
    elif ratio >= DEGRADED_PEAK_RATIO:
        quality = Quality.Degraded
    else:
        quality = Quality.Bad
    return float(peak_freq), quality


def _extract_from_buffers(
    chest: np.ndarray, abdomen: np.ndarray, minute: int, sample_rate_hz: float
) -> VitalSample:
    expected = 60.0 * sample_rate_hz
    for name, buf in (("Chest", chest), ("Abdomen", abdomen)):
        if len(buf) < MIN_SAMPLE_FRACTION * expected:
            raise errors.InsufficientSamples(
                f"minute {minute}: {len(buf)} {name} samples,"
                f" need at least {MIN_SAMPLE_FRACTION:.0%} of {expected:.0f}"
            )
    hr_freq, hr_quality = _band_peak(chest, sample_rate_hz, HR_BAND_HZ)
    rr_freq, rr_quality = _band_peak(abdomen, sample_rate_hz, RR_BAND_HZ)
    quality = _worse(hr_quality, rr_quality)
    if quality is Quality.Bad:
        return VitalSample(minute, float("nan"), float("nan"), Quality.Bad)
    return VitalSample(minute, 60.0 * hr_freq, 60.0 * rr_freq, quality)


def _minute_slice(ts: np.ndarray, values: np.ndarray, minute: int) -> np.ndarray:
    lo, hi = np.searchsorted(ts, [minute * 60000, (minute + 1) * 60000])
    return values[lo:hi]


def _bucket_stream(stream) -> dict[TagPlacement, tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
    """Split into per-placement (timestamps, rssi, phase, channel) arrays."""
    ts: dict[TagPlacement, list[int]] = {p: [] for p in TagPlacement}
    rssi: dict[TagPlacement, list[float]] = {p: [] for p in TagPlacement}
    phase: dict[TagPlacement, list[float]] = {p: [] for p in TagPlacement}
    channel: dict[TagPlacement, list[float]] = {p: [] for p in TagPlacement}
    for r in stream:
        ts[r.placement].append(r.timestamp_ms)
        rssi[r.placement].append(r.rssi_dbm)
        phase[r.placement].append(r.phase_rad)
        channel[r.placement].append(r.channel_mhz)
    out = {}
    for p in TagPlacement:
        t = np.array(ts[p], dtype=np.int64)
        if len(t) > 1 and np.any(np.diff(t) <= 0):
            raise ValueError(f"{p.name} timestamps are not strictly increasing")
        out[p] = (t, np.array(rssi[p]), np.array(phase[p]), np.array(channel[p]))
    return out


def extract_vitals(stream, minute: int, sample_rate_hz: float = 50.0) -> VitalSample:
    """Spectral heart rate and respiration for one whole minute.

    Needs at least 80% of the expected Chest and Abdomen samples for the
    minute, else InsufficientSamples.
    """
    buckets = _bucket_stream(stream)
    chest_ts, chest_rssi = buckets[TagPlacement.Chest][:2]
    abd_ts, abd_rssi = buckets[TagPlacement.Abdomen][:2]
    return _extract_from_buffers(
        _minute_slice(chest_ts, chest_rssi, minute),
        _minute_slice(abd_ts, abd_rssi, minute),
        minute,
        sample_rate_hz,
    )


def _interpolate_bad(samples: list[VitalSample]) -> list[VitalSample]:
    """Fill interior Bad minutes between Good neighbors, marked Degraded."""
    good = [i for i, s in enumerate(samples) if s.quality is Quality.Good]
    if not good:
        return samples
    out = list(samples)
    for i, s in enumerate(samples):
        if s.quality is not Quality.Bad:
            continue
        left = max((g for g in good if g < i), default=None)
        right = min((g for g in good if g > i), default=None)
        if left is None or right is None:
            continue  # leading/trailing Bad stays Bad
        w = (i - left) / (right - left)
        hr = (1 - w) * samples[left].heart_rate_bpm + w * samples[right].heart_rate_bpm
        rr = (1 - w) * samples[left].respiration_bpm + w * samples[right].respiration_bpm
        out[i] = VitalSample(i, hr, rr, Quality.Degraded)
    return out


def build_timeline(stream, sample_rate_hz: float = 50.0) -> VitalsTimeline:
    """Per-minute vitals over every whole minute the stream covers.

    Minutes whose extraction fails or grades Bad are linearly interpolated
    between their nearest Good neighbors and flagged Degraded; Bad minutes
    with no Good sample on one side stay Bad.
    """
    stream = list(stream)
    if not stream:
        raise errors.EmptyStream("no readings")
    buckets = _bucket_stream(stream)
    chest_ts, chest_rssi = buckets[TagPlacement.Chest][:2]
    abd_ts, abd_rssi = buckets[TagPlacement.Abdomen][:2]
    last_ts = max(int(b[0][-1]) for b in buckets.values() if len(b[0]))
    n_minutes = last_ts // 60000 + 1

    samples = []
    for minute in range(n_minutes):
        try:
            sample = _extract_from_buffers(
                _minute_slice(chest_ts, chest_rssi, minute),
                _minute_slice(abd_ts, abd_rssi, minute),
                minute,
                sample_rate_hz,
            )
        except errors.InsufficientSamples:
            sample = VitalSample(minute, float("nan"), float("nan"), Quality.Bad)
        samples.append(sample)
    return VitalsTimeline(samples=tuple(_interpolate_bad(samples)))


def segment_instances(
    timeline: VitalsTimeline, demographics: Demographics
) -> list[ForecastInstance]:
    """Cut the timeline into forecast instances.

    One instance per anchor minute a in {75, 90, 105, ...} with
    a + 180 <= len(timeline): features are minutes [a-75, a) of both
    vitals plus demographics, targets the value at the end of each of the
    12 future 15-minute steps. Anchors whose span touches a Bad minute
    are skipped (a complete timeline never has any).
    """
    n = len(timeline)
    hr = timeline.heart_rates()
    rr = timeline.respirations()
    bad = np.array([s.quality is Quality.Bad for s in timeline.samples])
    demo = np.array(
        [
            demographics.age_years,
            demographics.sex.value,
            demographics.height_cm,
            demographics.weight_kg,
        ],
        dtype=float,
    )
    instances = []
    a = HISTORY_MINUTES
    while a + HORIZON_MINUTES <= n:
        if not bad[a - HISTORY_MINUTES : a + HORIZON_MINUTES].any():
            features = np.concatenate(
                [hr[a - HISTORY_MINUTES : a], rr[a - HISTORY_MINUTES : a], demo]
            )
            target_idx = np.arange(a + ANCHOR_STEP_MINUTES - 1, a + HORIZON_MINUTES, ANCHOR_STEP_MINUTES)
            targets = np.concatenate([hr[target_idx], rr[target_idx]])
            instances.append(ForecastInstance(features=features, targets=targets))
        a += ANCHOR_STEP_MINUTES
    return instances


def expected_instance_count(timeline_length: int) -> int:
    """Closed-form instance count for a clean timeline of a given length."""
    if timeline_length < HISTORY_MINUTES + HORIZON_MINUTES:
        return 0
    return (timeline_length - (HISTORY_MINUTES + HORIZON_MINUTES)) // ANCHOR_STEP_MINUTES + 1


def window_stats(matrix: np.ndarray, sample_rate_hz: float) -> np.ndarray:
    """Per-channel (mean, std, energy, dominant frequency) statistics.

    matrix has one column per channel and WINDOW_SAMPLES rows. Energy is
    the sum of squares after mean removal, so a constant channel scores
    std 0, energy 0 and dominant frequency 0.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape[0] != WINDOW_SAMPLES:
        raise errors.InsufficientSamples(
            f"window needs {WINDOW_SAMPLES} rows, got {matrix.shape[0]}"
        )
    feats = []
    freqs = np.fft.rfftfreq(WINDOW_SAMPLES, d=1.0 / sample_rate_hz)
    for col in matrix.T:
        mean = col.mean()
        centered = col - mean
        std = centered.std()
        energy = float(np.sum(centered * centered))
        spectrum = np.abs(np.fft.rfft(centered))[1:]  # skip DC
        if spectrum.size == 0 or spectrum.max() <= 0.0:
            dom_freq = 0.0
        else:
            dom_freq = float(freqs[1:][np.argmax(spectrum)])
        feats.extend([float(mean), float(std), energy, dom_freq])
    return np.array(feats)


def _limb_matrix(buckets, start_ms: int) -> np.ndarray:
    """(WINDOW_SAMPLES, 6) matrix of limb rssi/phase/channel columns."""
    columns = []
    for placement in (TagPlacement.LeftArm, TagPlacement.RightAnkle):
        ts, rssi, phase, channel = buckets[placement]
        lo = int(np.searchsorted(ts, start_ms))
        if lo + WINDOW_SAMPLES > len(ts):
            raise errors.InsufficientSamples(
                f"{placement.name}: {len(ts) - lo} samples from {start_ms} ms,"
                f" need {WINDOW_SAMPLES}"
            )
        sel = slice(lo, lo + WINDOW_SAMPLES)
        columns.extend([rssi[sel], phase[sel], channel[sel]])
    return np.stack(columns, axis=1)


def activity_window(stream, start_ms: int, sample_rate_hz: float = 50.0) -> ActivityWindow:
    """Feature window over 128 consecutive limb-tag samples from start_ms.

    Channels per limb tag are rssi, phase and carrier frequency; each
    yields mean, std, energy and dominant frequency, 24 features total.
    """
    buckets = _bucket_stream(stream)
    matrix = _limb_matrix(buckets, start_ms)
    return ActivityWindow(
        features=window_stats(matrix, sample_rate_hz), start_ms=start_ms
    )


def sliding_activity_windows(stream, sample_rate_hz: float = 50.0) -> list[ActivityWindow]:
    """All 128-sample windows, advancing by a 64-sample hop."""
    buckets = _bucket_stream(stream)
    left_ts = buckets[TagPlacement.LeftArm][0]
    right_ts = buckets[TagPlacement.RightAnkle][0]
    n = min(len(left_ts), len(right_ts))
    windows = []
    start = 0
    while start + WINDOW_SAMPLES <= n:
        matrix_cols = []
        for placement in (TagPlacement.LeftArm, TagPlacement.RightAnkle):
            ts, rssi, phase, channel = buckets[placement]
            sel = slice(start, start + WINDOW_SAMPLES)
            matrix_cols.extend([rssi[sel], phase[sel], channel[sel]])
        matrix = np.stack(matrix_cols, axis=1)
        windows.append(
            ActivityWindow(
                features=window_stats(matrix, sample_rate_hz),
                start_ms=int(left_ts[start]),
            )
        )
        start += WINDOW_HOP
    return windows


def infer_sample_rate(stream) -> float:
    """Samples per second, from the median Chest inter-sample gap.

    Streams do not carry their rate, so readers recover it from the
    timestamps themselves.
    """
    ts = [r.timestamp_ms for r in stream if r.placement is TagPlacement.Chest]
    if len(ts) < 2:
        raise errors.InsufficientSamples("need at least two Chest samples")
    period_ms = float(np.median(np.diff(ts)))
    if period_ms <= 0:
        raise ValueError("Chest timestamps do not advance")
    return 1000.0 / period_ms


def save_vitals_csv(timeline: VitalsTimeline, path) -> None:
    """Write the canonical vitals CSV: minute,heart_rate,respiration,quality."""
    with open(path, "w") as fh:
        fh.write("minute,heart_rate,respiration,quality\n")
        for s in timeline.samples:
            fh.write(
                f"{s.minute_index},{s.heart_rate_bpm!r},{s.respiration_bpm!r},{s.quality.name}\n"
            )
