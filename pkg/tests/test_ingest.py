import numpy as np
import pytest

from conftest import write_mhealth_log
from wardmonitor import errors
from wardmonitor.domain import ActivityLabel, Quality
from wardmonitor.ingest import (
    MHEALTH_LABEL_MAP,
    load_mhealth,
    load_vitals_csv,
    mhealth_log_path,
)


def write_rows(path, specs):
    """Minimal 24-column log: one (code, count) block after another."""
    i = 0
    with open(path, "w") as fh:
        for code, count in specs:
            for _ in range(count):
                cells = ["%.4f" % (0.1 * ((i + c) % 7)) for c in range(23)]
                fh.write("\t".join(cells) + f"\t{code}\n")
                i += 1


@pytest.fixture
def log_dir(tmp_path):
    return tmp_path


def load(tmp_path, specs, subject=1):
    write_rows(mhealth_log_path(tmp_path, subject), specs)
    return load_mhealth(tmp_path, subject)


def test_path_naming(tmp_path):
    assert mhealth_log_path(tmp_path, 7).endswith("mHealth_subject7.log")


def test_generated_subject_counts(mhealth_dir):
    windows = load_mhealth(mhealth_dir, 1)
    # 10 kept codes per pass, 3 passes, 8 windows per 600-row run
    assert len(windows) == 240
    per_label = {}
    for w in windows:
        per_label[w.truth] = per_label.get(w.truth, 0) + 1
    assert set(per_label) == set(ActivityLabel)
    assert all(n == 24 for n in per_label.values())
    assert all(w.features.shape == (24,) for w in windows)


def test_code_mapping_spot_checks(tmp_path):
    windows = load(tmp_path, [(11, 128)])
    assert len(windows) == 1
    assert windows[0].truth is ActivityLabel.Running
    windows = load(tmp_path, [(12, 128)])
    assert windows[0].truth is ActivityLabel.JumpFrontBack
    assert MHEALTH_LABEL_MAP[1] is ActivityLabel.StandingStill


def test_null_code_rows_produce_nothing(tmp_path):
    assert load(tmp_path, [(0, 500)]) == []
    assert load(tmp_path, [(9, 300), (10, 300)]) == []


def test_dropped_rows_break_runs(tmp_path):
    # 128 + 1 null + 128: two one-window runs, no straddling window
    windows = load(tmp_path, [(4, 128), (0, 1), (4, 128)])
    assert len(windows) == 2
    assert all(w.truth is ActivityLabel.Walking for w in windows)


def test_label_change_breaks_runs(tmp_path):
    # 100 + 100 contiguous kept rows, but neither single-label run is
    # long enough for a window
    assert load(tmp_path, [(1, 100), (2, 100)]) == []


def test_windows_never_mix_labels(tmp_path):
    windows = load(tmp_path, [(1, 192), (2, 192)])
    # each 192-row run yields 2 windows: offsets 0 and 64
    assert [w.truth for w in windows] == [
        ActivityLabel.StandingStill,
        ActivityLabel.StandingStill,
        ActivityLabel.SittingRelaxing,
        ActivityLabel.SittingRelaxing,
    ]


def test_hop_and_start_times(tmp_path):
    windows = load(tmp_path, [(3, 300)])
    # floor((300 - 128) / 64) + 1 = 3 windows at 0, 64, 128 samples
    assert len(windows) == 3
    assert [w.start_ms for w in windows] == [0, 1280, 2560]


def test_window_count_formula(tmp_path):
    for n in (127, 128, 191, 192, 600):
        windows = load(tmp_path, [(5, n)])
        expected = 0 if n < 128 else (n - 128) // 64 + 1
        assert len(windows) == expected, n


def test_short_column_row_is_pinpointed(tmp_path):
    path = mhealth_log_path(tmp_path, 1)
    write_rows(path, [(1, 56)])
    with open(path, "a") as fh:
        fh.write("\t".join(["1.0"] * 23) + "\n")  # 23 columns at line 57
    with pytest.raises(errors.MalformedRow) as exc:
        load_mhealth(tmp_path, 1)
    assert exc.value.line_number == 57


def test_non_numeric_field_is_pinpointed(tmp_path):
    path = mhealth_log_path(tmp_path, 1)
    write_rows(path, [(1, 3)])
    with open(path, "a") as fh:
        fh.write("\t".join(["oops"] + ["1.0"] * 22) + "\t1\n")
    with pytest.raises(errors.MalformedRow) as exc:
        load_mhealth(tmp_path, 1)
    assert exc.value.line_number == 4


def test_fractional_activity_code_rejected(tmp_path):
    path = mhealth_log_path(tmp_path, 1)
    write_rows(path, [(1, 2)])
    with open(path, "a") as fh:
        fh.write("\t".join(["1.0"] * 23) + "\t3.5\n")
    with pytest.raises(errors.MalformedRow) as exc:
        load_mhealth(tmp_path, 1)
    assert exc.value.line_number == 3


def test_out_of_range_code_rejected(tmp_path):
    path = mhealth_log_path(tmp_path, 1)
    write_rows(path, [(13, 10)])
    with pytest.raises(errors.MalformedRow):
        load_mhealth(tmp_path, 1)


def test_missing_log_file(tmp_path):
    with pytest.raises(errors.MissingFile):
        load_mhealth(tmp_path, 99)


def test_log_writer_is_deterministic(tmp_path):
    write_mhealth_log(tmp_path / "a.log", seed=5, rows_per_run=130, passes=1)
    write_mhealth_log(tmp_path / "b.log", seed=5, rows_per_run=130, passes=1)
    assert (tmp_path / "a.log").read_bytes() == (tmp_path / "b.log").read_bytes()


# --- vitals csv loader ----------------------------------------------------


def test_vitals_missing_file(tmp_path):
    with pytest.raises(errors.MissingFile):
        load_vitals_csv(tmp_path / "none.csv")


def test_vitals_header_enforced(tmp_path):
    path = tmp_path / "v.csv"
    path.write_text("minute,hr,rr,quality\n0,72.0,15.0,Good\n")
    with pytest.raises(errors.HeaderMismatch):
        load_vitals_csv(path)
    path.write_text("")
    with pytest.raises(errors.HeaderMismatch):
        load_vitals_csv(path)


def test_vitals_good_file(tmp_path):
    path = tmp_path / "v.csv"
    path.write_text(
        "minute,heart_rate,respiration,quality\n"
        "0,72.0,15.0,Good\n"
        "1,nan,nan,Bad\n"
        "2,74.5,16.0,Degraded\n"
    )
    timeline = load_vitals_csv(path)
    assert len(timeline) == 3
    assert timeline.samples[0].heart_rate_bpm == 72.0
    assert timeline.samples[1].quality is Quality.Bad
    assert np.isnan(timeline.samples[1].heart_rate_bpm)
    assert timeline.samples[2].quality is Quality.Degraded


def test_vitals_field_count_and_types(tmp_path):
    path = tmp_path / "v.csv"
    path.write_text("minute,heart_rate,respiration,quality\n0,72.0,15.0\n")
    with pytest.raises(errors.MalformedRow) as exc:
        load_vitals_csv(path)
    assert exc.value.line_number == 2
    path.write_text("minute,heart_rate,respiration,quality\n0,seventy,15.0,Good\n")
    with pytest.raises(errors.MalformedRow):
        load_vitals_csv(path)
    path.write_text("minute,heart_rate,respiration,quality\n0,72.0,15.0,Excellent\n")
    with pytest.raises(errors.MalformedRow):
        load_vitals_csv(path)


def test_vitals_bounds_checked(tmp_path):
    path = tmp_path / "v.csv"
    path.write_text("minute,heart_rate,respiration,quality\n0,500.0,15.0,Good\n")
    with pytest.raises(errors.MalformedRow) as exc:
        load_vitals_csv(path)
    assert exc.value.line_number == 2


def test_vitals_minutes_must_be_contiguous(tmp_path):
    path = tmp_path / "v.csv"
    path.write_text(
        "minute,heart_rate,respiration,quality\n"
        "0,72.0,15.0,Good\n"
        "2,73.0,15.0,Good\n"
    )
    with pytest.raises(errors.NonContiguousMinutes):
        load_vitals_csv(path)
