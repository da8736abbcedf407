"""Dataset loaders: body-worn-sensor activity logs and vitals CSV files.

The activity loader reads the public MHEALTH log format: whitespace
separated text, 24 numeric columns per 50 Hz sample, the last column an
integer activity code 0..12. Codes 0 (null), 9 (cycling) and 10 (jogging)
are dropped; the remaining ten map onto ActivityLabel through a fixed
table. Windows of 128 samples (hop 64) are cut inside contiguous
same-label runs only, so every window has a single unambiguous truth
label.

The vitals loader reads the canonical timeline CSV written by
save_vitals_csv, enforcing the exact header and minute contiguity.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from . import errors
from .domain import ActivityLabel, Quality, VitalSample
from .signals import (
    WINDOW_HOP,
    WINDOW_SAMPLES,
    ActivityWindow,
    VitalsTimeline,
    window_stats,
)

MHEALTH_RATE_HZ = 50.0
MHEALTH_COLUMNS = 24
MHEALTH_LABEL_COLUMN = 23
# Left-ankle and right-arm accelerometer triplets: the closest public
# analogue of the two limb tags. Chest acceleration is deliberately not
# used so the feature width matches the tag pipeline (2 sensors x 3
# channels x 4 statistics = 24).
MHEALTH_CHANNEL_COLUMNS = (5, 6, 7, 14, 15, 16)

# Dataset activity code -> domain label. Codes 0, 9, 10 are dropped.
MHEALTH_LABEL_MAP = {
    1: ActivityLabel.StandingStill,
    2: ActivityLabel.SittingRelaxing,
    3: ActivityLabel.LyingDown,
    4: ActivityLabel.Walking,
    5: ActivityLabel.ClimbingStairs,
    6: ActivityLabel.WaistBendsForward,
    7: ActivityLabel.FrontalElevationOfArms,
    8: ActivityLabel.KneesBending,
    11: ActivityLabel.Running,
    12: ActivityLabel.JumpFrontBack,
}
MHEALTH_DROPPED_CODES = frozenset({0, 9, 10})


def mhealth_log_path(data_dir, subject_id: int) -> str:
    return os.path.join(data_dir, f"mHealth_subject{subject_id}.log")


def _scan_for_malformed_row(path) -> None:
    """Slow per-line pass that pinpoints the first bad row."""
    with open(path) as fh:
        for line_number, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            fields = raw.split()
            if len(fields) != MHEALTH_COLUMNS:
                raise errors.MalformedRow(
                    line_number, f"expected {MHEALTH_COLUMNS} columns, got {len(fields)}"
                )
            for field in fields:
                try:
                    float(field)
                except ValueError:
                    raise errors.MalformedRow(
                        line_number, f"non-numeric field {field!r}"
                    ) from None


def _read_mhealth_matrix(path) -> np.ndarray:
    if not os.path.exists(path):
        raise errors.MissingFile(f"no such file: {path}")
    try:
        matrix = np.loadtxt(path, ndmin=2)
    except ValueError:
        _scan_for_malformed_row(path)
        raise  # unreachable unless loadtxt and the scan disagree
    if matrix.size == 0:
        return np.empty((0, MHEALTH_COLUMNS))
    if matrix.shape[1] != MHEALTH_COLUMNS:
        _scan_for_malformed_row(path)
    return matrix


def _label_runs(labels: np.ndarray, keep: np.ndarray):
    """Contiguous same-label runs of kept rows, as (start, stop) pairs.

    A run breaks where the label changes or where dropped rows interrupt
    it, so no window ever mixes labels.
    """
    runs = []
    start = None
    for i in range(len(labels)):
        if not keep[i]:
            if start is not None:
                runs.append((start, i))
                start = None
            continue
        if start is None:
            start = i
        elif labels[i] != labels[start]:
            runs.append((start, i))
            start = i
    if start is not None:
        runs.append((start, len(labels)))
    return runs


def load_mhealth(data_dir, subject_id: int) -> list[ActivityWindow]:
    """Labeled activity windows for one subject's log file."""
    path = mhealth_log_path(data_dir, subject_id)
    matrix = _read_mhealth_matrix(path)
    if len(matrix) == 0:
        return []

    raw_labels = matrix[:, MHEALTH_LABEL_COLUMN]
    rounded = np.rint(raw_labels)
    bad = ~np.isclose(raw_labels, rounded) | (rounded < 0) | (rounded > 12)
    if np.any(bad):
        line_number = int(np.argmax(bad)) + 1
        raise errors.MalformedRow(
            line_number, f"activity code {raw_labels[line_number - 1]!r} not an integer in [0, 12]"
        )
    codes = rounded.astype(int)
    keep = np.array([c not in MHEALTH_DROPPED_CODES for c in codes])

    channels = matrix[:, MHEALTH_CHANNEL_COLUMNS]
    period_ms = 1000.0 / MHEALTH_RATE_HZ
    windows = []
    for run_start, run_stop in _label_runs(codes, keep):
        label = MHEALTH_LABEL_MAP[codes[run_start]]
        offset = run_start
        while offset + WINDOW_SAMPLES <= run_stop:
            block = channels[offset : offset + WINDOW_SAMPLES]
            windows.append(
                ActivityWindow(
                    features=window_stats(block, MHEALTH_RATE_HZ),
                    truth=label,
                    start_ms=int(round(offset * period_ms)),
                )
            )
            offset += WINDOW_HOP
    return windows


VITALS_HEADER = "minute,heart_rate,respiration,quality"


def load_vitals_csv(path) -> VitalsTimeline:
    """Read the canonical vitals CSV back into a timeline."""
    if not os.path.exists(path):
        raise errors.MissingFile(f"no such file: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise errors.HeaderMismatch("empty file") from None
        if ",".join(header) != VITALS_HEADER:
            raise errors.HeaderMismatch(
                f"expected header {VITALS_HEADER!r}, got {','.join(header)!r}"
            )
        samples = []
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise errors.MalformedRow(line_number, f"expected 4 fields, got {len(row)}")
            try:
                minute = int(row[0])
                hr = float(row[1])
                rr = float(row[2])
                quality = Quality[row[3]]
            except (ValueError, KeyError) as e:
                raise errors.MalformedRow(line_number, str(e)) from None
            if minute != len(samples):
                raise errors.NonContiguousMinutes(
                    f"line {line_number}: minute {minute}, expected {len(samples)}"
                )
            try:
                samples.append(VitalSample(minute, hr, rr, quality))
            except ValueError as e:
                raise errors.MalformedRow(line_number, str(e)) from None
    return VitalsTimeline(samples=tuple(samples))
