"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import assm


@pytest.fixture(scope="module")
def tiny_dataset():
    gen = assm.GenConfig()
    gen.n_train = 40
    gen.n_test = 10
    gen.seq_len = 50
    gen.seed = 5
    return assm.generate_dataset(gen)


def make_config(state_dim=4, seed=3):
    config = assm.ModelConfig()
    config.input_dim = 1
    config.state_dim = state_dim
    config.seed = seed
    return config


def test_init_and_step_shapes():
    config = make_config(state_dim=6)
    params = assm.init_parameters(config)
    assert params.A.shape == (6, 6)
    assert params.B.shape == (6, 1)
    assert params.W_f.shape == (1, 6)
    assert params.all_finite()

    state = assm.initial_state(config)
    next_state, out = assm.step(config, params, state, np.array([0.5]))
    assert next_state.t == 1
    assert out.score >= 0.0
    assert out.gate.shape == (6,)


def test_score_sequence_matches_run_sequence():
    config = make_config()
    params = assm.init_parameters(config)
    xs = np.sin(np.linspace(0.0, 6.0, 80)).reshape(-1, 1)
    outputs = assm.run_sequence(config, params, xs)
    scores = assm.score_sequence(config, params, xs)
    assert len(outputs) == 80
    assert scores == [o.score for o in outputs]


def test_zero_fixed_point():
    config = make_config()
    params = assm.init_parameters(config)
    params.b_f = np.zeros(1)
    scores = assm.score_sequence(config, params, np.zeros((30, 1)))
    assert scores == [0.0] * 30


def test_gradcheck_small_model():
    config = make_config(state_dim=2, seed=11)
    params = assm.init_parameters(config)
    rng = np.random.default_rng(0)
    xs = rng.normal(size=(8, 1))
    ys = [int(v) for v in rng.integers(0, 2, size=8)]
    seq = assm.LabeledSequence(xs, ys)

    analytic = assm.backward(config, params, seq, 1.0, 8)
    numeric = assm.finite_difference_gradient(config, params, seq, 1.0, 1e-5)
    assert np.allclose(analytic.A, numeric.A, rtol=1e-4, atol=1e-7)
    assert np.allclose(analytic.W_f, numeric.W_f, rtol=1e-4, atol=1e-7)
    assert math.isclose(analytic.gamma, numeric.gamma, rel_tol=1e-4, abs_tol=1e-7)


def test_train_and_evaluate(tiny_dataset):
    config = make_config()
    tconfig = assm.TrainConfig()
    tconfig.epochs = 3
    tconfig.batch_size = 8
    tconfig.seed = 1

    params, report = assm.train(config, tconfig, tiny_dataset.train)
    assert len(report.total_loss) == 3
    assert report.total_loss[-1] <= report.total_loss[0]

    scores, labels = [], []
    for seq in tiny_dataset.test:
        scores.extend(assm.score_sequence(config, params, seq.xs))
        labels.extend(seq.ys)
    if any(labels) and not all(labels):
        assert assm.roc_auc(scores, labels) > 0.5


def test_kf_baseline(tiny_dataset):
    model = assm.default_kf_model(1, 0.05)
    seq = tiny_dataset.test[0]
    scores = assm.kf_run(model, seq.xs)
    assert len(scores) == seq.xs.shape[0]
    assert all(s >= 0.0 for s in scores)


def test_metrics():
    assert assm.f1_score([1, 1, 0, 0], [1, 0, 1, 0]) == pytest.approx(0.5)
    assert assm.roc_auc([0.1, 0.9], [0, 1]) == 1.0
    result = assm.calibrate_threshold([0.1, 0.9], [0, 1])
    assert result.threshold == pytest.approx(0.5)
    assert result.f1 == 1.0
    latency = assm.detection_latency([0, 0, 1, 0], [0, 1, 1, 0], 25)
    assert latency.mean == 1.0


def test_stream_matches_batch():
    config = make_config(seed=9)
    params = assm.init_parameters(config)
    xs = np.random.default_rng(1).normal(size=(60, 1))
    batch = assm.score_sequence(config, params, xs)

    sc = assm.StreamConfig()
    sc.threshold = float(np.median(batch))
    handle = assm.open_stream(config, params, sc)
    for t in range(60):
        verdict = handle.push(xs[t])
        assert verdict.score == batch[t]
        assert verdict.is_anomaly == (batch[t] > sc.threshold)
    assert handle.samples_seen == 60


def test_stream_rejects_bad_samples():
    config = make_config()
    params = assm.init_parameters(config)
    handle = assm.open_stream(config, params, assm.StreamConfig())
    with pytest.raises(ValueError):
        handle.push(np.array([float("nan")]))
    with pytest.raises(ValueError):
        handle.push(np.array([1.0, 2.0]))


def test_checkpoint_roundtrip(tmp_path):
    config = make_config(seed=21)
    ck = assm.Checkpoint()
    ck.config = config
    ck.params = assm.init_parameters(config)
    ck.threshold = 0.75
    ck.meta.epochs = 4

    path = str(tmp_path / "model.ckpt")
    assm.save_checkpoint(path, ck)
    loaded = assm.load_checkpoint(path)
    assert loaded.threshold == 0.75
    assert loaded.meta.epochs == 4
    assert loaded.params.bitwise_equal(ck.params)

    with pytest.raises(IOError):
        assm.load_checkpoint(str(tmp_path / "missing.ckpt"))


def test_validation_errors_map_to_python():
    config = make_config()
    config.state_dim = 0
    with pytest.raises(ValueError):
        assm.init_parameters(config)
