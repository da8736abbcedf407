import numpy as np
import pytest

from wardmonitor import errors
from wardmonitor.domain import ActivityLabel
from wardmonitor.metrics import (
    LabelCounts,
    balanced_accuracy,
    confusion,
    mae,
    mse,
    save_metrics_csv,
    split,
)

L = list(ActivityLabel)


# --- regression errors ---------------------------------------------------


def test_mae_mse_examples():
    assert mae([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert mae([3.0, 0.0], [1.0, 1.0]) == 1.5
    assert mse([3.0, 0.0], [1.0, 1.0]) == 2.5
    assert mse([2.0], [5.0]) == 9.0


def test_mae_mse_against_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = rng.integers(1, 40)
        p = rng.normal(size=n)
        t = rng.normal(size=n)
        assert mae(p, t) == pytest.approx(sum(abs(a - b) for a, b in zip(p, t)) / n, rel=1e-12)
        assert mse(p, t) == pytest.approx(sum((a - b) ** 2 for a, b in zip(p, t)) / n, rel=1e-12)


def test_errors_reject_bad_shapes():
    with pytest.raises(errors.DimensionMismatch):
        mae([1.0], [1.0, 2.0])
    with pytest.raises(errors.DimensionMismatch):
        mse([], [])


# --- confusion counts ----------------------------------------------------


def test_perfect_predictions():
    truths = [L[0], L[1], L[2], L[1]]
    counts = confusion(truths, truths)
    assert counts.total == 4
    assert counts.per_label[L[1]] == LabelCounts(tp=2, fp=0, fn=0, tn=2)
    assert counts.per_label[L[0]] == LabelCounts(tp=1, fp=0, fn=0, tn=3)
    assert counts.per_label[L[5]] == LabelCounts(tp=0, fp=0, fn=0, tn=4)
    assert balanced_accuracy(truths, truths) == 1.0


def test_hand_counted_fixture():
    # ten decisions, three labels; counted by hand on paper
    truths = [L[0]] * 4 + [L[1]] * 3 + [L[2]] * 3
    preds = [L[0], L[0], L[1], L[2], L[1], L[1], L[0], L[2], L[2], L[0]]
    counts = confusion(preds, truths)
    assert counts.per_label[L[0]] == LabelCounts(tp=2, fp=2, fn=2, tn=4)
    assert counts.per_label[L[1]] == LabelCounts(tp=2, fp=1, fn=1, tn=6)
    assert counts.per_label[L[2]] == LabelCounts(tp=2, fp=1, fn=1, tn=6)
    assert counts.per_label[L[0]].precision == 0.5
    assert counts.per_label[L[0]].recall == 0.5
    assert counts.per_label[L[1]].precision == pytest.approx(2 / 3)
    assert counts.per_label[L[1]].f1 == pytest.approx(2 / 3)
    # recalls: 1/2, 2/3, 2/3 over the three labels present
    assert balanced_accuracy(preds, truths) == pytest.approx((0.5 + 2 / 3 + 2 / 3) / 3)


def test_absent_label_scores_zero_not_nan():
    counts = confusion([L[0], L[0]], [L[0], L[0]])
    absent = counts.per_label[L[7]]
    assert absent.precision == 0.0
    assert absent.recall == 0.0
    assert absent.f1 == 0.0


def test_counts_conserved_over_random_trials():
    rng = np.random.default_rng(7)
    for _ in range(25):
        n = int(rng.integers(1, 60))
        preds = [L[i] for i in rng.integers(0, 10, size=n)]
        truths = [L[i] for i in rng.integers(0, 10, size=n)]
        counts = confusion(preds, truths)
        for label in L:
            c = counts.per_label[label]
            assert c.tp + c.fp + c.fn + c.tn == n
        # each sample is a tp for at most one label
        assert sum(counts.per_label[l].tp for l in L) == sum(
            1 for p, t in zip(preds, truths) if p is t
        )


def test_length_mismatch_rejected():
    with pytest.raises(errors.DimensionMismatch):
        confusion([L[0]], [L[0], L[1]])
    with pytest.raises(errors.DimensionMismatch):
        confusion([], [])


# --- balanced accuracy ---------------------------------------------------


def test_constant_predictor_on_two_balanced_labels():
    truths = [L[0]] * 5 + [L[1]] * 5
    preds = [L[0]] * 10
    assert balanced_accuracy(preds, truths) == 0.5


def test_random_predictor_near_chance():
    rng = np.random.default_rng(123)
    truths = [L[i] for i in rng.integers(0, 4, size=10_000)]
    preds = [L[i] for i in rng.integers(0, 4, size=10_000)]
    assert balanced_accuracy(preds, truths) == pytest.approx(0.25, abs=0.05)


def test_only_present_labels_count():
    # a predictor that nails the two labels actually present scores 1.0
    # regardless of the eight absent ones
    truths = [L[3], L[8], L[3]]
    assert balanced_accuracy(truths, truths) == 1.0


# --- chronological split -------------------------------------------------


def test_split_sizes():
    train, test = split(list(range(10)))
    assert train == list(range(8))
    assert test == [8, 9]
    train, test = split(list(range(9)))
    assert len(train) == 7
    assert len(test) == 2
    train, test = split(list(range(5)))
    assert len(train) == 4
    assert len(test) == 1


def test_split_preserves_order():
    items = ["a", "b", "c", "d", "e", "f"]
    train, test = split(items)
    assert train + test == items


def test_split_rejects_tiny_sets():
    with pytest.raises(errors.TooFewInstances):
        split([1, 2, 3, 4])


# --- csv report ----------------------------------------------------------


def test_metrics_csv_layout(tmp_path):
    truths = [L[0]] * 4 + [L[1]] * 3 + [L[2]] * 3
    preds = [L[0], L[0], L[1], L[2], L[1], L[1], L[0], L[2], L[2], L[0]]
    counts = confusion(preds, truths)
    path = tmp_path / "metrics.csv"
    save_metrics_csv(counts, balanced_accuracy(preds, truths), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "label,tp,fp,fn,tn,precision,recall,f1"
    assert len(lines) == 12  # header + 10 labels + summary
    assert lines[1].startswith("StandingStill,2,2,2,4,")
    assert lines[-1].startswith("balanced_accuracy,")
    assert float(lines[-1].split(",")[1]) == pytest.approx((0.5 + 2 / 3 + 2 / 3) / 3)
    names = [line.split(",")[0] for line in lines[1:11]]
    assert names == [label.name for label in ActivityLabel]
