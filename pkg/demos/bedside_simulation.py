#!/usr/bin/env python3
# Simulate ten minutes at a bedside, write the raw tag stream to disk,
# read it back, and check the extracted vitals against the schedule.

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from wardmonitor.domain import ActivityLabel, Quality
from wardmonitor.signals import build_timeline
from wardmonitor.simulator import (
    ActivityScript,
    SimConfig,
    ground_truth,
    read_stream,
    simulate,
    write_stream,
)

out_dir = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(out_dir, exist_ok=True)

# a patient who gets out of bed halfway through: heart rate steps up,
# breathing follows a minute later
config = SimConfig(
    duration_minutes=10,
    hr_schedule=((0, 68.0), (5, 92.0)),
    rr_schedule=((0, 13.0), (6, 19.0)),
    sample_rate_hz=25.0,
    seed=42,
)
script = ActivityScript(
    segments=((0, ActivityLabel.LyingDown), (5, ActivityLabel.Walking))
)

stream = simulate(config, script)
print(f"simulated {len(stream)} tag readings over {config.duration_minutes} minutes")

# the stream survives a round trip through the text format
path = os.path.join(out_dir, "bedside.stream")
write_stream(stream, path)
stream = read_stream(path)
print(f"wrote and re-read {path} ({os.path.getsize(path)} bytes)")

timeline = build_timeline(stream, sample_rate_hz=config.sample_rate_hz)

print()
print("minute  scheduled hr/rr    extracted hr/rr    quality")
for s in timeline.samples:
    hr, rr, label = ground_truth(config, script, s.minute_index)
    print(
        f"{s.minute_index:>6}  {hr:5.1f} / {rr:4.1f}       "
        f"{s.heart_rate_bpm:5.1f} / {s.respiration_bpm:4.1f}        {s.quality.name}"
    )

good = sum(1 for s in timeline.samples if s.quality is Quality.Good)
print(f"\n{good}/{len(timeline.samples)} minutes graded Good")

minutes = [s.minute_index for s in timeline.samples]
scheduled = [ground_truth(config, script, m)[0] for m in minutes]
extracted = [s.heart_rate_bpm for s in timeline.samples]

plt.figure(figsize=(7, 3))
plt.step(minutes, scheduled, where="post", label="scheduled", color="gray")
plt.plot(minutes, extracted, "o-", label="extracted")
plt.xlabel("minute")
plt.ylabel("heart rate (bpm)")
plt.legend()
plt.tight_layout()
fig_path = os.path.join(out_dir, "bedside_hr.png")
plt.savefig(fig_path, dpi=120)
print(f"saved {fig_path}")
