"""Vital-sign forecaster: 75 minutes of history in, 3 hours of future out.

Two independent networks, one per vital, each mapping the 154-feature
history vector to 12 values at 15-minute steps. Inputs are z-scored with
statistics fitted on training data only; targets stay in raw bpm so the
training loss reads in clinical units.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np

from . import errors
from .domain import (
    Demographics,
    ForecastSeries,
    HR_BOUNDS_BPM,
    Quality,
    RR_BOUNDS_BPM,
    VitalSample,
    kv_decode,
)
from .nn import MLP, Activation, Loss, TrainConfig, forward, init_mlp, load_mlp, save_mlp, train
from .signals import FEATURE_LEN, HISTORY_MINUTES, ForecastInstance

HIDDEN_SIZES = (128, 64, 32)
NORMALIZER_FORMAT = "normalizer 1"
MANIFEST_NAME = "manifest.txt"
BUNDLE_FORMAT = "forecast-bundle 1"


@dataclass(frozen=True)
class Normalizer:
    """Per-feature z-scoring fitted on training inputs.

    Constant features (zero deviation) are only centered, never divided,
    so they transform to exactly 0 on the data they were fitted on.
    """

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "std", np.asarray(self.std, dtype=float))
        if self.mean.shape != self.std.shape or self.mean.ndim != 1:
            raise ValueError("mean and std must be 1-D and the same length")
        if np.any(self.std < 0):
            raise ValueError("std entries must be >= 0")

    @classmethod
    def fit(cls, X: np.ndarray) -> "Normalizer":
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or len(X) == 0:
            raise errors.EmptyDataset("need at least one row to fit")
        return cls(mean=X.mean(axis=0), std=X.std(axis=0))

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        scale = np.where(self.std > 0, self.std, 1.0)
        return (x - self.mean) / scale


def save_normalizer(norm: Normalizer, path) -> None:
    with open(path, "w") as fh:
        fh.write(NORMALIZER_FORMAT + "\n")
        fh.write(f"{norm.mean.size}\n")
        fh.write(" ".join("%.17g" % v for v in norm.mean) + "\n")
        fh.write(" ".join("%.17g" % v for v in norm.std) + "\n")


def load_normalizer(path) -> Normalizer:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != NORMALIZER_FORMAT:
        raise ValueError("unsupported normalizer format")
    n = int(lines[1])
    mean = np.array([float(v) for v in lines[2].split()])
    std = np.array([float(v) for v in lines[3].split()])
    if mean.size != n or std.size != n:
        raise ValueError(f"expected {n} entries")
    return Normalizer(mean=mean, std=std)


@dataclass(frozen=True)
class ForecastModel:
    hr_net: MLP
    rr_net: MLP
    normalizer: Normalizer

    def __post_init__(self):
        for name, net in (("hr_net", self.hr_net), ("rr_net", self.rr_net)):
            if net.in_dim != FEATURE_LEN or net.out_dim != 12:
                raise ValueError(
                    f"{name} must map {FEATURE_LEN} inputs to 12 outputs,"
                    f" got {net.in_dim} -> {net.out_dim}"
                )


def _new_net(seed: int) -> MLP:
    sizes = [FEATURE_LEN, *HIDDEN_SIZES, 12]
    activations = [Activation.ReLU] * len(HIDDEN_SIZES) + [Activation.Identity]
    return init_mlp(sizes, activations, seed)


def train_forecaster(
    instances: list[ForecastInstance], cfg: TrainConfig
) -> ForecastModel:
    """Fit the normalizer and both nets; deterministic under cfg.seed.

    The respiration net uses seed + 1 so the two networks never share an
    initialization or shuffle order.
    """
    if cfg.loss is not Loss.MAE:
        raise ValueError("forecaster training uses the MAE loss")
    if not instances:
        raise errors.EmptyDataset("no forecast instances")
    X = np.stack([inst.features for inst in instances])
    Y = np.stack([inst.targets for inst in instances])
    normalizer = Normalizer.fit(X)
    Z = normalizer.transform(X)

    hr_net = _new_net(cfg.seed)
    rr_net = _new_net(cfg.seed + 1)
    hr_net, _ = train(hr_net, (Z, Y[:, :12]), cfg)
    rr_net, _ = train(rr_net, (Z, Y[:, 12:]), replace(cfg, seed=cfg.seed + 1))
    return ForecastModel(hr_net=hr_net, rr_net=rr_net, normalizer=normalizer)


def _history_features(history, demographics: Demographics) -> tuple[np.ndarray, int]:
    """Validate the trailing 75 minutes and build the 154-feature vector."""
    samples: list[VitalSample] = list(history)
    if len(samples) < HISTORY_MINUTES:
        raise errors.IncompleteHistory(
            f"need {HISTORY_MINUTES} minutes of history, got {len(samples)}"
        )
    window = samples[-HISTORY_MINUTES:]
    for prev, cur in zip(window, window[1:]):
        if cur.minute_index != prev.minute_index + 1:
            raise errors.IncompleteHistory(
                f"history minutes not consecutive at {cur.minute_index}"
            )
    if any(s.quality is Quality.Bad for s in window):
        raise errors.IncompleteHistory("history contains Bad minutes")
    hr = [s.heart_rate_bpm for s in window]
    rr = [s.respiration_bpm for s in window]
    demo = [
        float(demographics.age_years),
        float(demographics.sex.value),
        demographics.height_cm,
        demographics.weight_kg,
    ]
    features = np.array(hr + rr + demo)
    return features, window[-1].minute_index + 1


def predict(
    model: ForecastModel, history, demographics: Demographics
) -> tuple[ForecastSeries, bool]:
    """Forecast 12 steps of both vitals from the trailing 75 minutes.

    Outputs are clamped into the plausibility bounds; the returned flag is
    True when any step needed clamping.
    """
    features, issued_at = _history_features(history, demographics)
    z = model.normalizer.transform(features)
    hr_raw = forward(model.hr_net, z)
    rr_raw = forward(model.rr_net, z)
    hr = np.clip(hr_raw, *HR_BOUNDS_BPM)
    rr = np.clip(rr_raw, *RR_BOUNDS_BPM)
    clamped = bool(np.any(hr != hr_raw) or np.any(rr != rr_raw))
    series = ForecastSeries(
        issued_at_minute=issued_at,
        heart_rate=tuple(hr),
        respiration=tuple(rr),
    )
    return series, clamped


def persistence_baseline(history) -> ForecastSeries:
    """Reference forecaster: repeat the last observed values 12 times."""
    samples = list(history)
    if not samples:
        raise errors.EmptyHistory("no history to persist")
    last = samples[-1]
    return ForecastSeries(
        issued_at_minute=last.minute_index + 1,
        heart_rate=(last.heart_rate_bpm,) * 12,
        respiration=(last.respiration_bpm,) * 12,
    )


def save_forecaster(model: ForecastModel, directory) -> None:
    """Persist as two model files plus a normalizer, listed in a manifest."""
    os.makedirs(directory, exist_ok=True)
    save_mlp(model.hr_net, os.path.join(directory, "hr.mlp"))
    save_mlp(model.rr_net, os.path.join(directory, "rr.mlp"))
    save_normalizer(model.normalizer, os.path.join(directory, "normalizer.txt"))
    with open(os.path.join(directory, MANIFEST_NAME), "w") as fh:
        fh.write(f"format={BUNDLE_FORMAT}\n")
        fh.write("hr_model=hr.mlp\n")
        fh.write("rr_model=rr.mlp\n")
        fh.write("normalizer=normalizer.txt\n")


def load_forecaster(directory) -> ForecastModel:
    manifest_path = os.path.join(directory, MANIFEST_NAME)
    if not os.path.exists(manifest_path):
        raise errors.MissingFile(f"no manifest at {manifest_path}")
    with open(manifest_path) as fh:
        manifest = kv_decode(fh.read())
    if manifest.get("format") != BUNDLE_FORMAT:
        raise ValueError(f"unsupported bundle format: {manifest.get('format')!r}")
    return ForecastModel(
        hr_net=load_mlp(os.path.join(directory, manifest["hr_model"])),
        rr_net=load_mlp(os.path.join(directory, manifest["rr_model"])),
        normalizer=load_normalizer(os.path.join(directory, manifest["normalizer"])),
    )
