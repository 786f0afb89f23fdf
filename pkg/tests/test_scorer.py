import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import gradient_rel_error, monotone_set
from xlstr.corpus import Split, STRInstance
from xlstr.errors import (
    DimensionMismatch,
    EmptyBatch,
    EmptySentence,
    LengthMismatch,
    NonFiniteLoss,
    UnlabeledDev,
)
from xlstr.evaluation import spearman
from xlstr.scorer import (
    DIM,
    FEATURE_NAMES,
    ScorerParams,
    TrainConfig,
    dev_spearman,
    extract_features,
    featurize,
    format_trace,
    gradient,
    load_checkpoint,
    mse_loss,
    predict,
    save_checkpoint,
    train,
)


# --- features -----------------------------------------------------------------

def test_identity_pair():
    f = extract_features("The cat sat.", "the CAT sat.")
    assert np.all(f == 1.0)


def test_disjoint_pair():
    f = dict(zip(FEATURE_NAMES, extract_features("aaaa", "zzzz")))
    for name in ("char3_cos", "char4_cos", "tok_jaccard", "tok_dice", "tok_overlap"):
        assert f[name] == 0.0
    assert f["len_ratio"] == 1.0


def test_token_features_hand_computed():
    a = dict(zip(FEATURE_NAMES, extract_features("ab", "ab")))
    b = dict(zip(FEATURE_NAMES, extract_features("ab", "ab ab")))
    assert (a["tok_jaccard"], b["tok_jaccard"]) == (1.0, 1.0)
    assert (a["len_ratio"], b["len_ratio"]) == (1.0, 0.5)
    assert b["tok_overlap"] == 0.5


def test_features_from_instance_and_errors():
    inst = STRInstance("p", "x y", "x z", "eng", Split.DEV, 0.5)
    np.testing.assert_array_equal(extract_features(inst), extract_features("x y", "x z"))
    with pytest.raises(EmptySentence):
        extract_features("  ", "x")


words = st.text("abcdé ", min_size=1, max_size=25).filter(str.strip)


@given(words, words)
def test_features_bounded(a, b):
    f = extract_features(a, b)
    assert f.shape == (DIM,) and np.all(np.isfinite(f)) and np.all((f >= 0) & (f <= 1))


# --- predict / loss ---------------------------------------------------------------

def test_predict_examples():
    f = np.zeros(DIM)
    f[0] = 0.88
    assert predict(ScorerParams.zeros(), np.random.rand(DIM)) == 0.5
    assert predict(ScorerParams(np.zeros(DIM), 10.0), f) > 0.9999
    w = np.zeros(DIM)
    w[0] = 1.0
    oracle = 1.0 / (1.0 + math.exp(-0.88))
    assert predict(ScorerParams(w, 0.0), f) == pytest.approx(oracle, abs=1e-15)
    assert round(oracle, 4) == 0.7068


def test_predict_bounds_and_dims():
    assert 0.0 < predict(ScorerParams(np.zeros(DIM), 1e4), np.zeros(DIM)) < 1.0
    assert 0.0 < predict(ScorerParams(np.zeros(DIM), -1e4), np.zeros(DIM)) < 1.0
    with pytest.raises(DimensionMismatch):
        predict(ScorerParams.zeros(), np.zeros(DIM + 1))


def test_mse_examples():
    assert mse_loss([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert mse_loss([0], [1]) == 1.0
    assert mse_loss([0.5, 0.5], [0, 1]) == 0.25
    with pytest.raises(LengthMismatch):
        mse_loss([0.1], [0.1, 0.2])
    with pytest.raises(EmptyBatch):
        mse_loss([], [])


# --- gradient -------------------------------------------------------------------

def test_gradient_zero_at_minimum():
    rng = np.random.default_rng(1)
    p = ScorerParams(rng.normal(size=DIM), 0.2)
    X = rng.random((7, DIM))
    gw, gb = gradient(p, X, predict(p, X), 0.0)
    assert np.allclose(gw, 0.0, atol=1e-15) and gb == pytest.approx(0.0, abs=1e-15)


def test_gradient_decay_only():
    w = np.zeros(DIM)
    w[0] = 1.0
    p = ScorerParams(w, 0.0)
    X = np.random.default_rng(2).random((4, DIM))
    gw, gb = gradient(p, X, predict(p, X), 1e-3)
    expected = np.zeros(DIM)
    expected[0] = 1e-3
    np.testing.assert_allclose(gw, expected, atol=1e-15)
    assert gb == pytest.approx(0.0, abs=1e-15)


def test_gradient_check_100_seeds():
    assert max(gradient_rel_error(s) for s in range(100)) < 1e-5


def test_gradient_empty():
    with pytest.raises(EmptyBatch):
        gradient(ScorerParams.zeros(), np.zeros((0, DIM)), [], 0.0)


# --- training -------------------------------------------------------------------

@pytest.fixture(scope="module")
def monotone():
    return monotone_set(1200, 1), monotone_set(300, 2)


def test_monotone_dev_rho(monotone):
    (X, y), (Xd, yd) = monotone
    res = train(X, y, Xd, yd, TrainConfig(eval_every=20))
    assert spearman(predict(res.params, Xd), yd) >= 0.95


def test_epoch5_below_epoch0(monotone):
    (X, y), (Xd, yd) = monotone
    res = train(X, y, Xd, yd, TrainConfig(learning_rate=0.1, max_epochs=6, patience=100))
    assert res.epoch_losses[5] < res.epoch_losses[0]


def test_frozen_metric_stops_after_patience(monotone):
    (X, y), (Xd, yd) = monotone
    cfg = TrainConfig(eval_every=10)
    res = train(X, y, Xd, yd, cfg, metric=lambda p: 0.5)
    assert len(res.trace) == 1 + cfg.patience and res.stopped_early
    assert res.best_step == cfg.eval_every


def test_constant_gold_dev_stops_after_patience(monotone):
    (X, y), (Xd, _) = monotone
    cfg = TrainConfig(eval_every=10)
    res = train(X, y, Xd, np.full(len(Xd), 0.4), cfg)
    assert len(res.trace) == 9 and all(math.isnan(t.dev_rho) for t in res.trace)


def test_best_params_match_best_trace_point(monotone):
    (X, y), (Xd, yd) = monotone
    res = train(X[:300], y[:300], Xd, yd, TrainConfig(eval_every=3, learning_rate=0.5, patience=4))
    best = max(t.dev_rho for t in res.trace)
    assert dev_spearman(res.params, Xd, yd) == best


def test_deterministic(monotone):
    (X, y), (Xd, yd) = monotone
    a = train(X, y, Xd, yd, TrainConfig(seed=4, eval_every=25))
    b = train(X, y, Xd, yd, TrainConfig(seed=4, eval_every=25))
    assert a.params == b.params and a.trace == b.trace


def test_adamw_descends(monotone):
    (X, y), (Xd, yd) = monotone
    res = train(X, y, Xd, yd, TrainConfig(optimizer="adamw", learning_rate=0.05, max_epochs=5))
    assert res.epoch_losses[-1] < res.epoch_losses[0]


def test_max_epochs_zero(monotone):
    (X, y), (Xd, yd) = monotone
    init = ScorerParams(np.arange(DIM) / 10, 0.3)
    res = train(X, y, Xd, yd, TrainConfig(max_epochs=0), init=init)
    assert res.params == init and res.trace == []


def test_training_errors(monotone):
    (X, y), (Xd, yd) = monotone
    with pytest.raises(UnlabeledDev):
        train(X, y, Xd, [], TrainConfig())
    bad = X.copy()
    bad[0, 0] = np.nan
    with pytest.raises(NonFiniteLoss):
        train(bad, y, Xd, yd, TrainConfig())
    with pytest.raises(ValueError):
        TrainConfig(patience=0)


def test_checkpoint_and_trace(tmp_path, monotone):
    (X, y), (Xd, yd) = monotone
    res = train(X[:200], y[:200], Xd, yd, TrainConfig(eval_every=5, max_epochs=2))
    path = save_checkpoint(res.params, tmp_path / "m.ckpt", "cafe01")
    assert path.read_text().startswith("xlstr-scorer v1\n")
    assert load_checkpoint(path) == res.params
    lines = format_trace(res.trace).splitlines()
    assert lines[0] == "step\tloss\tdev_rho" and len(lines) == len(res.trace) + 1
    bad = tmp_path / "bad.ckpt"
    bad.write_text("something else\n")
    with pytest.raises(ValueError):
        load_checkpoint(bad)


def test_featurize_order():
    insts = [STRInstance(f"p{i}", f"a{i} b", "a1 b", "eng", Split.DEV, 0.5) for i in range(3)]
    F = featurize(insts)
    np.testing.assert_array_equal(F[1], extract_features("a1 b", "a1 b"))
