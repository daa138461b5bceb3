"""Correlation metric, early stopping, and the training loop."""
import warnings

import numpy as np
import pytest

from eegtraj.decoders import build_decoder, net_predict
from eegtraj.errors import DivergedTraining, ShapeError, UndefinedCorrelation
from eegtraj.epoching import TrialTensorPair
from eegtraj.harness import (
    EarlyStopper,
    TrainConfig,
    evaluate_model,
    export_trajectories,
    mean_std,
    pcc,
    per_axis_pcc,
    train,
)


# --------------------------------------------------------------------------
# pcc
# --------------------------------------------------------------------------

def test_pcc_documented_exact_cases():
    assert pcc([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5, abs=1e-12)
    assert pcc([1, 2, 3], [4, 5, 6]) == pytest.approx(1.0, abs=1e-12)
    assert pcc([1, 2, 3], [-1, -2, -3]) == pytest.approx(-1.0, abs=1e-12)
    assert pcc([1, 2, 3, 4], [1, 2, 4, 3]) == pytest.approx(0.8, abs=1e-12)


def test_pcc_matches_numpy_oracle():
    rng = np.random.default_rng(0)
    for _ in range(50):
        x = rng.standard_normal(rng.integers(5, 200))
        y = rng.standard_normal(x.size) + 0.3 * x
        assert pcc(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)


def test_pcc_affine_invariance_property():
    rng = np.random.default_rng(1)
    for _ in range(200):
        x = rng.standard_normal(60)
        y = rng.standard_normal(60)
        base = pcc(x, y)
        a = rng.uniform(0.1, 100.0)
        b = rng.uniform(-50.0, 50.0)
        assert pcc(a * x + b, y) == pytest.approx(base, abs=1e-12)
        assert pcc(-a * x + b, y) == pytest.approx(-base, abs=1e-12)


def test_pcc_rejects_degenerate_inputs():
    with pytest.raises(UndefinedCorrelation):
        pcc([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(UndefinedCorrelation):
        pcc([1.0, 2.0, 3.0], [7.0, 7.0, 7.0])
    with pytest.raises(UndefinedCorrelation):
        pcc([1.0], [2.0])
    with pytest.raises(ShapeError):
        pcc([1.0, 2.0], [1.0, 2.0, 3.0])


def test_per_axis_pcc_and_aggregation():
    rng = np.random.default_rng(2)
    true = rng.standard_normal((500, 3))
    pred = true * [1.0, -2.0, 0.5] + rng.standard_normal((500, 3)) * [0.0, 0.0, 10.0]
    r = per_axis_pcc(pred, true)
    assert r[0] == pytest.approx(1.0, abs=1e-12)
    assert r[1] == pytest.approx(-1.0, abs=1e-12)
    assert abs(r[2]) < 0.3
    mean, std = mean_std([1.0, 2.0, 3.0, 4.0])
    assert mean == 2.5
    assert std == pytest.approx(np.sqrt(1.25), abs=1e-15)     # population, not sample


def test_evaluate_model_and_export(tmp_path):
    rng = np.random.default_rng(0)
    pairs = [TrialTensorPair(tid, rng.standard_normal((4, 6)),
                             rng.standard_normal((4, 3)))
             for tid in (3, 7)]
    offset = np.array([0.5, -0.25, 2.0])
    result = evaluate_model(lambda X: X[:, :3] + offset, pairs, per_trial=True)
    assert result.r.shape == (3,)
    assert result.r_per_trial_mean.shape == (3,)
    assert [t.trial_id for t in result.trials] == [3, 7]

    paths = export_trajectories(result, tmp_path, sample_rate_hz=100.0)
    assert [p.name for p in paths] == ["trial_0003.csv", "trial_0007.csv"]
    lines = paths[0].read_text().splitlines()
    assert lines[0] == "t_s,x_meas,y_meas,z_meas,x_pred,y_pred,z_pred"
    assert len(lines) == 5
    # measured columns parse back to the targets exactly
    got = np.array([[float(v) for v in ln.split(",")[1:4]] for ln in lines[1:]])
    assert np.array_equal(got, pairs[0].Y)
    assert lines[1].split(",")[0] == "0.0"
    assert lines[2].split(",")[0] == "0.01"

    # two runs produce identical bytes
    again = export_trajectories(result, tmp_path / "again", sample_rate_hz=100.0)
    assert again[0].read_bytes() == paths[0].read_bytes()

    with pytest.raises(ShapeError):
        evaluate_model(lambda X: X, [])


# --------------------------------------------------------------------------
# early stopping
# --------------------------------------------------------------------------

def test_early_stopper_documented_sequence():
    stopper = EarlyStopper(patience=2)
    decisions = [stopper.update(v) for v in [3.0, 2.0, 2.1, 2.2]]
    assert decisions == [False, False, False, True]
    assert stopper.best_epoch == 2
    assert stopper.best == 2.0


def test_early_stopper_streak_resets_on_improvement():
    stopper = EarlyStopper(patience=2)
    values = [3.0, 2.5, 2.6, 2.4, 2.6, 2.6]
    decisions = [stopper.update(v) for v in values]
    assert decisions == [False, False, False, False, False, True]
    assert stopper.best_epoch == 4
    # a tie is not an improvement
    tie = EarlyStopper(patience=1)
    tie.update(1.0)
    assert tie.update(1.0) is True
    with pytest.raises(ShapeError):
        EarlyStopper(0)


# --------------------------------------------------------------------------
# training loop
# --------------------------------------------------------------------------

def toy_data(seed, rows=200, lag=15, n_ch=2):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((rows, lag * n_ch))
    W = rng.standard_normal((lag * n_ch, 3)) * 0.3
    Y = X @ W + 0.1 * rng.standard_normal((rows, 3))
    cut = int(rows * 0.8)
    return (X[:cut], Y[:cut]), (X[cut:], Y[cut:])


@pytest.mark.parametrize("kind", ["mlp", "cnnlstm"])
def test_training_is_seed_deterministic(kind):
    (Xtr, Ytr), (Xv, Yv) = toy_data(3)
    cfg = TrainConfig(max_epochs=3, patience=5, seed=42)

    def run():
        net = build_decoder(kind, 15, 2, seed=7)
        result = train(net, Xtr, Ytr, Xv, Yv, cfg, lag=15)
        return net, result

    net_a, res_a = run()
    net_b, res_b = run()
    for pa, pb in zip(net_a.params(), net_b.params()):
        assert np.array_equal(pa.data, pb.data)
    assert res_a.history == res_b.history


def test_training_reduces_loss_and_restores_best_weights():
    (Xtr, Ytr), (Xv, Yv) = toy_data(4)
    net = build_decoder("mlp", 15, 2, seed=1)
    cfg = TrainConfig(max_epochs=15, patience=4, seed=0)
    result = train(net, Xtr, Ytr, Xv, Yv, cfg, lag=15)

    assert result.history[0][2] > result.best_val_loss
    assert result.best_val_loss == min(h[2] for h in result.history)
    # the returned network is the best epoch's network, not the last one
    val_now = float(np.mean((net_predict(net, Xv, 15) - Yv) ** 2))
    assert val_now == pytest.approx(result.best_val_loss, rel=1e-12)
    assert result.best_epoch <= result.stopped_epoch <= cfg.max_epochs


def test_training_stops_early_when_patience_runs_out():
    (Xtr, Ytr), (Xv, Yv) = toy_data(5, rows=120)
    net = build_decoder("mlp", 15, 2, seed=2)
    # huge lr makes validation bounce around, so patience triggers quickly
    cfg = TrainConfig(max_epochs=200, patience=2, lr=0.5, seed=0)
    result = train(net, Xtr, Ytr, Xv, Yv, cfg, lag=15)
    assert result.stopped_epoch < 200
    assert len(result.history) == result.stopped_epoch


def test_training_diverges_with_absurd_learning_rate():
    (Xtr, Ytr), (Xv, Yv) = toy_data(6, rows=100)
    net = build_decoder("mlp", 15, 2, seed=3)
    # Adam normalizes step size to ~lr, so the weights jump to ~1e40 and the
    # squared error overflows float64 on the following forward pass
    cfg = TrainConfig(max_epochs=5, patience=5, lr=1e40, seed=0)
    with pytest.raises(DivergedTraining) as info:
        with np.errstate(over="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            train(net, Xtr, Ytr, Xv, Yv, cfg, lag=15)
    assert info.value.epoch >= 1


def test_training_shape_guard():
    net = build_decoder("mlp", 15, 2, seed=0)
    with pytest.raises(ShapeError):
        train(net, np.zeros((5, 30)), np.zeros((4, 3)), np.zeros((2, 30)),
              np.zeros((2, 3)), TrainConfig(), lag=15)
