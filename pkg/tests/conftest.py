"""Shared test helpers: stream builders, a synthetic activity-log writer
in the standard 24-column format, and acceptance reporting.
"""

from __future__ import annotations

import numpy as np
import pytest

from wardmonitor.domain import ActivityLabel
from wardmonitor.simulator import ActivityScript, SimConfig, constant_schedule, simulate

_ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def _record(name: str, ok: bool, elapsed_s: float, detail: str = "") -> None:
        suffix = f", {detail}" if detail else ""
        line = f"{name}: {'PASS' if ok else 'FAIL'} ({elapsed_s:.1f}s{suffix})"
        _ACCEPTANCE_LINES.append(line)
        print(f"[acceptance] {line}")

    return _record


def make_stream(
    duration_minutes: int,
    hr: float = 72.0,
    rr: float = 15.0,
    rate: float = 50.0,
    seed: int = 0,
    label: ActivityLabel = ActivityLabel.StandingStill,
    noise: float = 0.3,
):
    config = SimConfig(
        duration_minutes=duration_minutes,
        hr_schedule=constant_schedule(hr),
        rr_schedule=constant_schedule(rr),
        sample_rate_hz=rate,
        noise_sigma_db=noise,
        seed=seed,
    )
    script = ActivityScript(segments=((0, label),))
    return simulate(config, script), config, script


# Per dataset activity code: limb acceleration (amplitude g, frequency Hz,
# baseline offset g). Static postures near-flat, dynamic ones big and fast,
# all mutually distinguishable through window statistics.
MHEALTH_CODE_SIGNATURES = {
    1: (0.05, 0.40, 0.2),
    2: (0.04, 0.30, 0.6),
    3: (0.03, 0.20, 1.0),
    4: (0.90, 1.80, 1.4),
    5: (1.10, 1.50, 1.8),
    6: (1.30, 0.50, 2.2),
    7: (1.00, 0.70, 2.6),
    8: (1.20, 0.90, 3.0),
    9: (1.50, 2.00, 3.4),
    10: (2.20, 2.50, 3.8),
    11: (2.80, 2.90, 4.2),
    12: (3.20, 2.20, 4.6),
}

MHEALTH_RATE = 50.0


def write_mhealth_log(path, seed: int = 0, rows_per_run: int = 600, passes: int = 3):
    """Deterministic subject log in the standard 24-column layout.

    Activities appear in code order within each pass, separated by short
    null-label stretches, the way scripted collection sessions look. All
    12 codes are present so the loader's dropping rules get exercised.
    """
    rng = np.random.default_rng(seed)
    rows = []
    t = 0

    def emit(code: int, n: int):
        nonlocal t
        amp, freq, dc = MHEALTH_CODE_SIGNATURES.get(code, (0.01, 0.1, 0.0))
        for _ in range(n):
            ts = t / MHEALTH_RATE
            row = np.zeros(24)
            # chest acc: gravity plus a faint copy of the motion
            row[0:3] = [0.1 * amp * np.sin(2 * np.pi * freq * ts), 0.0, 9.8]
            # ECG columns: plain noise
            row[3:5] = rng.normal(0.0, 0.05, 2)
            # left-ankle then right-arm acceleration: the loaded channels
            for base, phase in ((5, 0.0), (14, 0.7)):
                row[base + 0] = dc + amp * np.sin(2 * np.pi * freq * ts + phase)
                row[base + 1] = dc + amp * np.sin(2 * np.pi * freq * ts + phase + 2.1)
                row[base + 2] = 9.8 - dc + amp * np.cos(2 * np.pi * freq * ts + phase)
            # gyro/magnetometer columns: noise only
            row[8:14] = rng.normal(0.0, 0.1, 6)
            row[17:23] = rng.normal(0.0, 0.1, 6)
            row[0:23] += rng.normal(0.0, 0.05, 23)
            row[23] = code
            rows.append(row)
            t += 1

    for _ in range(passes):
        for code in range(1, 13):
            emit(0, 40)
            emit(code, rows_per_run)
    with open(path, "w") as fh:
        for row in rows:
            cells = ["%.4f" % v for v in row[:23]] + ["%d" % row[23]]
            fh.write("\t".join(cells) + "\n")
    return len(rows)


@pytest.fixture(scope="session")
def mhealth_dir(tmp_path_factory):
    """Directory holding a generated subject-1 log."""
    d = tmp_path_factory.mktemp("mhealth")
    write_mhealth_log(d / "mHealth_subject1.log", seed=11)
    return d
