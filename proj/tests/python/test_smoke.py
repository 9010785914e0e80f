import numpy as np
import pytest

import evtraj


@pytest.fixture(scope="module")
def throw():
    events, truth = evtraj.simulate(seed=4, index=0)
    return events, truth, evtraj.track(events)


def test_simulated_events_are_sorted_and_on_sensor(throw):
    events, truth, _ = throw
    assert events.shape[1] == 4 and len(events) > 1000
    assert np.all(np.diff(events[:, 2]) >= 0)
    assert events[:, 0].max() < evtraj.SENSOR_WIDTH and events[:, 1].max() < evtraj.SENSOR_HEIGHT
    assert truth.shape[1] == 3


def test_tracker_follows_the_ball(throw):
    _, truth, track = throw
    assert len(track) > 50
    centres = np.stack([np.interp(track[:, 2], truth[:, 2], truth[:, k]) for k in (0, 1)], axis=1)
    err = np.hypot(*(track[:, :2] - centres).T)
    assert np.median(err) < 8.0


def test_spatial_samples_respect_delta(throw):
    _, _, track = throw
    s = evtraj.subsample(track, "spatial", 4.0)
    assert len(s) < len(track)
    assert np.all(np.hypot(*np.diff(s[:, :2], axis=0).T) >= 4.0)
    np.testing.assert_array_equal(evtraj.subsample(s, "spatial", 4.0), s)


def test_fixed_rate_and_mean_rate(throw):
    _, _, track = throw
    s = evtraj.subsample(track, "fixed", 10.0)
    assert np.all(np.diff(s[:, 2]) >= 10_000)
    mean, std = evtraj.mean_rate(s)
    assert 0 < mean <= 100.0 and std >= 0


def test_flip_is_an_involution(throw):
    _, _, track = throw
    once = evtraj.flip(track)
    np.testing.assert_array_equal(once[:, 0], 303.0 - track[:, 0])
    np.testing.assert_array_equal(evtraj.flip(once), track)


def test_error_decompose_345():
    truth = np.array([[10.0, 10.0, 0.0], [20.0, 20.0, 1000.0]])
    pred = truth + np.array([3.0, 4.0, 0.0])
    assert evtraj.error_decompose(pred, truth) == pytest.approx((5.0, 0.0))


def test_model_predicts_future_points(throw):
    _, _, track = throw
    model = evtraj.Model.initialized(seed=1, hidden_size=8)
    assert model.hidden_size == 8 and model.parameter_count > 0
    recent = evtraj.subsample(track, "spatial", 2.0)[:30]
    out = model.predict(recent, 20, 5)
    assert out.shape == (5, 3)
    assert np.all(np.isfinite(out))


def test_track_round_trip(tmp_path, throw):
    _, _, track = throw
    for name in ("t.trk", "t.csv"):
        evtraj.save_track(tmp_path / name, track)
        np.testing.assert_array_equal(evtraj.load_track(tmp_path / name), track)


def test_errors_map_to_python_exceptions(tmp_path):
    with pytest.raises(ValueError):
        evtraj.subsample(np.zeros((3, 3)), "spatial", -1.0)
    with pytest.raises(ValueError):
        evtraj.subsample(np.zeros((3, 2)), "spatial", 1.0)
    with pytest.raises(OSError):
        evtraj.load_track(tmp_path / "missing.trk")
    bad = tmp_path / "bad.trk"
    bad.write_bytes(b"NOPE")
    with pytest.raises(evtraj.FormatError):
        evtraj.load_track(bad)


def test_seed_derivation_is_stable():
    assert evtraj.derive_seed(7, 2) == evtraj.derive_seed(7, 2)
    assert evtraj.derive_seed(7, 2) != evtraj.derive_seed(7, 3)
