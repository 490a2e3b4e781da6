import numpy as np
import pytest

from argrel.cli import toy_batch
from argrel.corpus import Relation
from argrel.models import (
    ARCHITECTURES,
    AttentionModel,
    Batch,
    ModelConfig,
    NeuralClassifier,
    build_model,
    check_model_gradients,
    similarity_scores,
)
from argrel.nn import GRU, load_checkpoint
from argrel.synthetic import marker_corpus

SMALL = dict(gru_hidden=4, seq_len=5, dense_sizes=(32,), ae_hidden=8)
EMB = 6


def small_model(arch, seed=0, **kw):
    config = ModelConfig(architecture=arch, seed=seed, **{**SMALL, **kw})
    return config, build_model(config, EMB)


def small_batch(config, seed=0, n=4):
    return toy_batch(np.random.default_rng(seed), config, EMB, n)


def test_config_defaults():
    c = ModelConfig()
    assert (c.batch_size, c.epochs, c.seed, c.gru_hidden, c.ae_hidden) == (32, 10, 42, 128, 128)
    assert ModelConfig(architecture="concat").dense_sizes == (256, 64)
    assert ModelConfig(architecture="mix").dense_sizes == (256, 64)
    assert ModelConfig(architecture="autoencoder").dense_sizes == (32,)
    assert ModelConfig(architecture="attention").dense_sizes == (128,)


@pytest.mark.parametrize("bad", [dict(dense_sizes=(100,)), dict(dense_sizes=(32, 32, 32)),
                                 dict(architecture="lstm"), dict(feature_set="lexical")])
def test_config_rejects(bad):
    with pytest.raises(ValueError):
        ModelConfig(**bad)


def test_config_dict_roundtrip():
    c = ModelConfig(architecture="mix", dense_sizes=(64,), seed=3)
    assert ModelConfig.from_dict(c.to_dict()) == c


@pytest.mark.parametrize("arch", ARCHITECTURES)
def test_valid_probabilities(arch):
    config, model = small_model(arch)
    batch = small_batch(config)
    if arch == "autoencoder":
        model.fit_scaler([model.raw_input(batch)])
    p = model.forward(batch)
    assert p.shape == (4, 2)
    assert np.all(p > 0) and np.allclose(p.sum(axis=1), 1.0, atol=1e-12)
    batch.features[...] = 0.0
    p0 = model.forward(batch)
    assert np.all(np.isfinite(p0)) and np.allclose(p0.sum(axis=1), 1.0)


@pytest.mark.parametrize("arch", ["concat", "mix", "attention"])
def test_child_parent_swap_is_asymmetric(arch):
    config, model = small_model(arch)
    b = small_batch(config)
    swapped = Batch(b.parent, b.parent_mask, b.child, b.child_mask, b.features)
    assert not np.allclose(model.forward(b), model.forward(swapped))


@pytest.mark.parametrize("arch", ARCHITECTURES)
def test_shape_mismatch_raises(arch):
    config, model = small_model(arch)
    b = small_batch(config)
    with pytest.raises(ValueError):
        model.forward(Batch(b.child[..., :3], b.child_mask, b.parent, b.parent_mask, b.features))
    with pytest.raises(ValueError):
        model.forward(Batch(b.child, b.child_mask, b.parent, b.parent_mask, b.features[:, :5]))


def test_mix_with_masked_parent_equals_child_only_gru():
    config, model = small_model("mix")
    b = small_batch(config)
    b.parent_mask[...] = False
    b.parent[...] = 0.0
    probs = model.forward(b)
    _, child_only = model.gru.forward(b.child, b.child_mask)
    logits = model.head.forward(np.concatenate([child_only, b.features], axis=1))
    expected = np.exp(logits - logits.max(axis=1, keepdims=True))
    expected /= expected.sum(axis=1, keepdims=True)
    np.testing.assert_allclose(probs, expected, rtol=0, atol=1e-15)


def test_similarity_matches_scalar_oracle(rng):
    C, P = rng.normal(size=(2, 3)), rng.normal(size=(2, 3))
    w, b = rng.normal(size=6), 0.7
    s = similarity_scores(C, P, w, b)
    for i in range(2):
        for j in range(2):
            expected = sum(w[k] * C[i, k] for k in range(3)) + sum(w[3 + k] * P[j, k] for k in range(3)) + b
            assert s[i, j] == pytest.approx(expected, abs=1e-14)


def test_attention_single_step():
    config, model = small_model("attention", seq_len=1)
    b = small_batch(config)
    model.forward(b)
    np.testing.assert_array_equal(model.alpha, np.ones((4, 1, 1)))
    C, P = model._cache
    np.testing.assert_array_equal(model.alpha @ P, P)


@pytest.mark.parametrize("seed", range(5))
def test_attention_rows_normalised(seed):
    config, model = small_model("attention", seed=seed)
    b = small_batch(config, seed=seed, n=6)
    model.forward(b)
    for weights, mask in ((model.alpha, b.parent_mask), (model.beta, b.child_mask)):
        np.testing.assert_allclose(weights.sum(axis=2), 1.0, atol=1e-9)
        assert np.all(weights[np.broadcast_to(~mask[:, None, :], weights.shape)] == 0.0)


def test_autoencoder_code():
    config = ModelConfig(architecture="autoencoder", seq_len=5)
    model = build_model(config, EMB)
    b = small_batch(config)
    model.fit_scaler([model.raw_input(b)])
    code = model.encode(b)
    assert code.shape == (4, 128)
    assert np.all((code > 0) & (code < 1))


def test_autoencoder_pretrain_reduces_loss():
    config, model = small_model("autoencoder")
    b = small_batch(config, n=16)
    model.fit_scaler([model.raw_input(b)])
    x = model.scale(model.raw_input(b))
    history = model.pretrain(lambda epoch: [x], epochs=60, lr=1e-2)
    assert history[-1] < history[0]
    # average trend: later windows never above earlier windows
    windows = np.array(history).reshape(6, 10).mean(axis=1)
    assert np.all(np.diff(windows) <= 0)


def test_autoencoder_rejects_unscaled_input():
    config, model = small_model("autoencoder")
    b = small_batch(config)
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        model.pretrain(lambda epoch: [model.raw_input(b) * 10], epochs=1, lr=1e-3)


def test_autoencoder_classifier_phase_freezes_encoder():
    config, model = small_model("autoencoder")
    names = {p.name for p in model.params()}
    assert not any(n.startswith(("encoder", "decoder")) for n in names)


@pytest.mark.parametrize("arch", ARCHITECTURES)
def test_gradients(arch):
    config, model = small_model(arch, seed=3)
    b = small_batch(config, seed=3, n=3)
    if arch == "autoencoder":
        model.fit_scaler([model.raw_input(b)])
    for report in check_model_gradients(model, b, 1e-4):
        assert report.passed, report.lines()


def _small_classifier(arch, resources, seed=5):
    config = ModelConfig(architecture=arch, gru_hidden=8, seq_len=10, dense_sizes=(32,),
                         ae_hidden=16, ae_epochs=2, epochs=2, seed=seed)
    return NeuralClassifier(config, resources)


@pytest.mark.parametrize("arch", ARCHITECTURES)
def test_training_is_deterministic(arch, marker_resources):
    pairs = marker_corpus(24, seed=1)
    a, b = _small_classifier(arch, marker_resources), _small_classifier(arch, marker_resources)
    ha, hb = a.fit(pairs), b.fit(pairs)
    assert ha.losses == hb.losses
    for k, v in a.model.state_dict().items():
        np.testing.assert_array_equal(v, b.model.state_dict()[k])


@pytest.mark.parametrize("arch", ARCHITECTURES)
def test_checkpoint_roundtrip_bitwise(arch, marker_resources, tmp_path):
    pairs = marker_corpus(16, seed=2)
    clf = _small_classifier(arch, marker_resources)
    clf.fit(pairs)
    clf.save(tmp_path / "m.npz")
    arrays, meta = load_checkpoint(tmp_path / "m.npz")
    again = NeuralClassifier.from_checkpoint(arrays, meta, marker_resources)
    np.testing.assert_array_equal(clf.predict_proba(pairs), again.predict_proba(pairs))


def test_predictions_invariant_to_order(marker_resources):
    pairs = marker_corpus(20, seed=3)
    clf = _small_classifier("concat", marker_resources)
    clf.fit(pairs)
    p = clf.predict_proba(pairs)
    order = np.random.default_rng(0).permutation(len(pairs))
    np.testing.assert_allclose(clf.predict_proba([pairs[i] for i in order]), p[order], rtol=0, atol=1e-15)


def test_single_class_training_warns(marker_resources):
    pairs = [p for p in marker_corpus(10, seed=4) if p.label is Relation.SUPPORT]
    with pytest.warns(RuntimeWarning, match="single class"):
        _small_classifier("concat", marker_resources).fit(pairs)


def test_empty_training_raises(marker_resources):
    with pytest.raises(ValueError):
        _small_classifier("concat", marker_resources).fit([])
