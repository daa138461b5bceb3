import json

import numpy as np
import pytest
from scipy.io import savemat

from galconvert import ConvertError, MissingSeries, SourceParseError, convert_participant
from galconvert.fixtures import KIN_NAMES, write_fixture

MANIFEST_KEYS = ["channel_names", "eeg_sample_rate_hz", "eeg_samples",
                 "ica_cleaned", "kin_sample_rate_hz", "kin_samples",
                 "participant_id", "source"]


def read_events(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "trial_id,onset_s,rest_s"
    out = []
    for line in lines[1:]:
        tid, onset, rest = line.split(",")
        out.append((int(tid), float(onset), float(rest)))
    return out


def test_roundtrip_matches_fixture_truth(tmp_path):
    truth = write_fixture(tmp_path / "src", participant="P2", n_channels=5,
                          n_series=3, trials_per_series=4,
                          samples_per_series=2500, seed=7)
    out = tmp_path / "bundle"
    summary = convert_participant(tmp_path / "src", out, "P2")

    assert summary.n_series == 3
    assert summary.n_trials == 12
    assert summary.n_dropped == 0
    assert summary.channel_names == truth.channel_names

    manifest = json.loads((out / "manifest.json").read_text())
    assert sorted(manifest) == MANIFEST_KEYS
    assert manifest["participant_id"] == "P2"
    assert manifest["channel_names"] == truth.channel_names
    assert manifest["eeg_sample_rate_hz"] == truth.eeg_rate
    assert manifest["kin_sample_rate_hz"] == truth.kin_rate
    assert manifest["eeg_samples"] == 3 * 2500
    assert manifest["kin_samples"] == 3 * 2500
    assert manifest["ica_cleaned"] is False
    assert manifest["source"] == "WAY-EEG-GAL"

    eeg = np.fromfile(out / "eeg.f32", dtype="<f4").reshape(5, 7500)
    assert np.array_equal(eeg, truth.eeg.astype(np.float32))

    rows = np.loadtxt(out / "kinematics.csv", delimiter=",", skiprows=1)
    assert rows.shape == (7500, 4)
    assert np.array_equal(rows[:, 1:].astype(np.float32),
                          truth.kin.astype(np.float32))
    t_expect = (np.arange(7500) / truth.kin_rate).astype(np.float32)
    assert np.array_equal(rows[:, 0].astype(np.float32), t_expect)

    events = read_events(out / "events.csv")
    assert [tid for tid, _, _ in events] == list(range(12))
    for (_, onset, rest), (t_on, t_off) in zip(events, truth.events):
        assert onset == pytest.approx(t_on, abs=1e-6)
        assert rest == pytest.approx(t_off, abs=1e-6)


def test_manifest_serialization_is_canonical(tmp_path):
    write_fixture(tmp_path / "src", n_series=1, trials_per_series=2,
                  samples_per_series=1000)
    convert_participant(tmp_path / "src", tmp_path / "b", "P1")
    text = (tmp_path / "b" / "manifest.json").read_text()
    assert text.endswith("\n")
    assert text == json.dumps(json.loads(text), sort_keys=True, indent=2) + "\n"
    for name in ("kinematics.csv", "events.csv"):
        assert (tmp_path / "b" / name).read_text().endswith("\n")


def test_events_are_sorted_and_inside_recording(tmp_path):
    write_fixture(tmp_path / "src", n_series=2, trials_per_series=5,
                  samples_per_series=3000, seed=3)
    convert_participant(tmp_path / "src", tmp_path / "b", "P1")
    events = read_events(tmp_path / "b" / "events.csv")
    length_s = 2 * 3000 / 500.0
    last = 0.0
    for _, onset, rest in events:
        assert last <= onset < rest <= length_s
        last = onset


def test_missing_timing_drops_trial_with_reason(tmp_path):
    truth = write_fixture(tmp_path / "src", n_series=2, trials_per_series=3,
                          samples_per_series=1000, missing=[(2, 1)])
    summary = convert_participant(tmp_path / "src", tmp_path / "b", "P1")
    assert truth.n_dropped == 1
    assert summary.n_trials == 5
    assert summary.n_dropped == 1
    assert summary.dropped == [(2, 1, "missing timing")]
    assert len(read_events(tmp_path / "b" / "events.csv")) == 5


def test_swapped_event_fields_leave_no_usable_lifts(tmp_path):
    write_fixture(tmp_path / "src", n_series=1, trials_per_series=2,
                  samples_per_series=1000)
    with pytest.raises(ConvertError, match="no usable lifts"):
        convert_participant(tmp_path / "src", tmp_path / "b", "P1",
                            onset_field="tHandStop", rest_field="tHandStart")


def test_alternate_event_fields(tmp_path):
    # LEDOn comes before hand movement, so it widens every trial window
    write_fixture(tmp_path / "src", n_series=1, trials_per_series=3,
                  samples_per_series=2000, seed=5)
    convert_participant(tmp_path / "src", tmp_path / "a", "P1")
    convert_participant(tmp_path / "src", tmp_path / "b", "P1",
                        onset_field="LEDOn")
    default = read_events(tmp_path / "a" / "events.csv")
    early = read_events(tmp_path / "b" / "events.csv")
    for (_, onset_d, rest_d), (_, onset_e, rest_e) in zip(default, early):
        assert onset_e < onset_d
        assert rest_e == rest_d


def test_series_gap_is_an_error(tmp_path):
    write_fixture(tmp_path / "src", n_series=3, trials_per_series=2,
                  samples_per_series=1000)
    (tmp_path / "src" / "HS_P1_S2.mat").unlink()
    with pytest.raises(MissingSeries, match=r"\[2\]"):
        convert_participant(tmp_path / "src", tmp_path / "b", "P1")


def test_missing_lift_table_is_an_error(tmp_path):
    write_fixture(tmp_path / "src", n_series=1, trials_per_series=2,
                  samples_per_series=1000)
    (tmp_path / "src" / "P1_AllLifts.mat").unlink()
    with pytest.raises(MissingSeries, match="AllLifts"):
        convert_participant(tmp_path / "src", tmp_path / "b", "P1")


def test_unreadable_series_file(tmp_path):
    write_fixture(tmp_path / "src", n_series=1, trials_per_series=2,
                  samples_per_series=1000)
    (tmp_path / "src" / "HS_P1_S1.mat").write_bytes(b"not a mat file")
    with pytest.raises(SourceParseError):
        convert_participant(tmp_path / "src", tmp_path / "b", "P1")


def test_conversion_is_deterministic(tmp_path):
    write_fixture(tmp_path / "src", n_series=2, trials_per_series=3,
                  samples_per_series=1500, seed=9)
    convert_participant(tmp_path / "src", tmp_path / "a", "P1")
    convert_participant(tmp_path / "src", tmp_path / "b", "P1")
    for name in ("manifest.json", "eeg.f32", "kinematics.csv", "events.csv"):
        assert (tmp_path / "a" / name).read_bytes() == \
               (tmp_path / "b" / name).read_bytes()


def test_channel_whitelist_subsets_and_reorders(tmp_path):
    truth = write_fixture(tmp_path / "src", n_channels=6, n_series=1,
                          trials_per_series=2, samples_per_series=1000)
    wanted = [truth.channel_names[4], truth.channel_names[1]]
    summary = convert_participant(tmp_path / "src", tmp_path / "b", "P1",
                                  channel_whitelist=wanted)
    assert summary.channel_names == wanted
    manifest = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert manifest["channel_names"] == wanted
    eeg = np.fromfile(tmp_path / "b" / "eeg.f32", dtype="<f4").reshape(2, 1000)
    assert np.array_equal(eeg, truth.eeg[[4, 1]].astype(np.float32))


def test_unknown_whitelist_channel_is_an_error(tmp_path):
    write_fixture(tmp_path / "src", n_channels=4, n_series=1,
                  trials_per_series=2, samples_per_series=1000)
    with pytest.raises(SourceParseError, match="Nope"):
        convert_participant(tmp_path / "src", tmp_path / "b", "P1",
                            channel_whitelist=["Fp1", "Nope"])


def test_unknown_event_column_is_an_error(tmp_path):
    write_fixture(tmp_path / "src", n_series=1, trials_per_series=2,
                  samples_per_series=1000)
    with pytest.raises(SourceParseError, match="tNoSuchField"):
        convert_participant(tmp_path / "src", tmp_path / "b", "P1",
                            onset_field="tNoSuchField")


def test_mismatched_series_rates_are_rejected(tmp_path):
    truth = write_fixture(tmp_path / "src", n_channels=3, n_series=1,
                          trials_per_series=2, samples_per_series=1000)
    rng = np.random.default_rng(1)
    savemat(tmp_path / "src" / "HS_P1_S2.mat", {"hs": {
        "eeg": {"sig": rng.standard_normal((500, 3)),
                "names": np.array(truth.channel_names, dtype=object),
                "samplingrate": 250.0},
        "kin": {"sig": rng.standard_normal((500, 6)),
                "names": np.array(KIN_NAMES, dtype=object),
                "samplingrate": 250.0},
    }})
    with pytest.raises(SourceParseError, match="rates differ"):
        convert_participant(tmp_path / "src", tmp_path / "b", "P1")


def test_mismatched_channel_names_are_rejected(tmp_path):
    write_fixture(tmp_path / "src", n_channels=3, n_series=1,
                  trials_per_series=2, samples_per_series=1000)
    rng = np.random.default_rng(1)
    savemat(tmp_path / "src" / "HS_P1_S2.mat", {"hs": {
        "eeg": {"sig": rng.standard_normal((1000, 3)),
                "names": np.array(["A", "B", "C"], dtype=object),
                "samplingrate": 500.0},
        "kin": {"sig": rng.standard_normal((1000, 6)),
                "names": np.array(KIN_NAMES, dtype=object),
                "samplingrate": 500.0},
    }})
    with pytest.raises(SourceParseError, match="names differ"):
        convert_participant(tmp_path / "src", tmp_path / "b", "P1")
