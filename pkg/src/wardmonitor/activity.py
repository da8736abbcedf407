"""Ten-label activity classifier over limb-motion feature windows.

A single network maps the 24 window statistics to 10 independent sigmoid
probabilities. Training uses binary cross-entropy against one-hot
targets. A decision carries both readings of the outputs: the thresholded
label set and a single argmax "current status".
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import errors
from .domain import ActivityLabel, ActivityProbabilities, kv_decode, label_from_index
from .forecasting import Normalizer, load_normalizer, save_normalizer
from .nn import MLP, Activation, Loss, TrainConfig, forward, init_mlp, load_mlp, save_mlp, train
from .signals import ACTIVITY_FEATURES, ActivityWindow

HIDDEN_SIZES = (64, 32, 16)
N_LABELS = 10
DEFAULT_THRESHOLD = 0.5
MANIFEST_NAME = "manifest.txt"
BUNDLE_FORMAT = "activity-bundle 1"


@dataclass(frozen=True)
class ActivityModel:
    net: MLP
    normalizer: Normalizer
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if self.net.in_dim != ACTIVITY_FEATURES or self.net.out_dim != N_LABELS:
            raise ValueError(
                f"net must map {ACTIVITY_FEATURES} inputs to {N_LABELS} outputs,"
                f" got {self.net.in_dim} -> {self.net.out_dim}"
            )
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold {self.threshold} outside (0, 1)")


@dataclass(frozen=True)
class ActivityDecision:
    """Probabilities plus the two derived readings of them.

    active_labels is every label whose probability meets the threshold
    (possibly empty); current_status is always defined as the argmax,
    lowest index winning ties.
    """

    probabilities: ActivityProbabilities
    active_labels: frozenset[ActivityLabel]
    current_status: ActivityLabel

    def to_kv(self) -> str:
        active = ",".join(
            sorted((l.name for l in self.active_labels), key=lambda n: ActivityLabel[n].value)
        )
        return "\n".join(
            [
                self.probabilities.to_kv(),
                f"active_labels={active}",
                f"current_status={self.current_status.name}",
            ]
        )

    @classmethod
    def from_kv(cls, text: str) -> "ActivityDecision":
        kv = kv_decode(text)
        probs = ActivityProbabilities.from_kv(f"probs={kv['probs']}")
        active_raw = kv.get("active_labels", "")
        active = frozenset(
            ActivityLabel[name] for name in active_raw.split(",") if name
        )
        return cls(
            probabilities=probs,
            active_labels=active,
            current_status=ActivityLabel[kv["current_status"]],
        )


def _one_hot(label: ActivityLabel) -> np.ndarray:
    target = np.zeros(N_LABELS)
    target[label.value] = 1.0
    return target


def train_classifier(
    windows: list[ActivityWindow], cfg: TrainConfig, threshold: float = DEFAULT_THRESHOLD
) -> ActivityModel:
    """Fit the normalizer and the net on labeled windows.

    Every window must carry a truth label; targets are one-hot vectors.
    Deterministic under cfg.seed.
    """
    if cfg.loss is not Loss.BCE:
        raise ValueError("classifier training uses the BCE loss")
    if not windows:
        raise errors.EmptyDataset("no activity windows")
    for i, w in enumerate(windows):
        if w.truth is None:
            raise errors.UnlabeledWindow(f"window {i} has no truth label")
    X = np.stack([w.features for w in windows])
    Y = np.stack([_one_hot(w.truth) for w in windows])
    normalizer = Normalizer.fit(X)
    Z = normalizer.transform(X)

    sizes = [ACTIVITY_FEATURES, *HIDDEN_SIZES, N_LABELS]
    activations = [Activation.ReLU] * len(HIDDEN_SIZES) + [Activation.Sigmoid]
    net = init_mlp(sizes, activations, cfg.seed)
    net, _ = train(net, (Z, Y), cfg)
    return ActivityModel(net=net, normalizer=normalizer, threshold=threshold)


def decide(probs: np.ndarray, threshold: float) -> ActivityDecision:
    """Turn raw probabilities into a decision under a threshold."""
    probs = np.asarray(probs, dtype=float)
    active = frozenset(
        label_from_index(i) for i in range(N_LABELS) if probs[i] >= threshold
    )
    # argmax returns the first maximal index, which is the tie-break rule.
    status = label_from_index(int(np.argmax(probs)))
    return ActivityDecision(
        probabilities=ActivityProbabilities(probs=tuple(probs)),
        active_labels=active,
        current_status=status,
    )


def classify(model: ActivityModel, window: ActivityWindow) -> ActivityDecision:
    features = np.asarray(window.features, dtype=float)
    if features.shape != (ACTIVITY_FEATURES,):
        raise errors.DimensionMismatch(
            f"expected {ACTIVITY_FEATURES} features, got shape {features.shape}"
        )
    probs = forward(model.net, model.normalizer.transform(features))
    return decide(probs, model.threshold)


def save_classifier(model: ActivityModel, directory) -> None:
    """Persist as model file plus normalizer, threshold in the manifest."""
    os.makedirs(directory, exist_ok=True)
    save_mlp(model.net, os.path.join(directory, "net.mlp"))
    save_normalizer(model.normalizer, os.path.join(directory, "normalizer.txt"))
    with open(os.path.join(directory, MANIFEST_NAME), "w") as fh:
        fh.write(f"format={BUNDLE_FORMAT}\n")
        fh.write("model=net.mlp\n")
        fh.write("normalizer=normalizer.txt\n")
        fh.write(f"threshold={model.threshold!r}\n")


def load_classifier(directory) -> ActivityModel:
    manifest_path = os.path.join(directory, MANIFEST_NAME)
    if not os.path.exists(manifest_path):
        raise errors.MissingFile(f"no manifest at {manifest_path}")
    with open(manifest_path) as fh:
        manifest = kv_decode(fh.read())
    if manifest.get("format") != BUNDLE_FORMAT:
        raise ValueError(f"unsupported bundle format: {manifest.get('format')!r}")
    return ActivityModel(
        net=load_mlp(os.path.join(directory, manifest["model"])),
        normalizer=load_normalizer(os.path.join(directory, manifest["normalizer"])),
        threshold=float(manifest["threshold"]),
    )
