import json

import numpy as np
import pytest

import axg

TINY = [
    "data.keyword.class_count=3",
    "data.keyword.clips_per_class=10",
    "data.emotion.class_count=3",
    "data.emotion.words=2",
    "data.emotion.clips_per_class=4",
    "codec_train.epochs=1",
    "classifier.epochs=3",
    "classifier.hidden=8",
    "attribution.ig_steps=4",
    "eval.runs=2",
]


def tiny(root):
    return TINY + [f"paths.{k}={root / k}" for k in ("data", "checkpoints", "reports")]


def test_clip_round_trip(tmp_path):
    clip = axg.noise_clip(4096, 0.5, seed=3)
    assert len(clip) == 4096
    assert np.abs(clip.samples).max() <= 0.5
    axg.wav_write(clip, tmp_path / "a.wav")
    back = axg.wav_read(tmp_path / "a.wav")
    np.testing.assert_allclose(back.samples, clip.samples, atol=1.0 / 32767)


def test_clip_clamps():
    clip = axg.AudioClip(np.array([2.0, -3.0, 0.25]))
    np.testing.assert_array_equal(clip.samples, np.array([1.0, -1.0, 0.25], dtype=np.float32))


def test_codec_shapes():
    codec = axg.Codec.init(seed=7)
    z = codec.encode(axg.noise_clip(16384, 0.1, seed=1))
    assert (z.frames, z.channels) == (256, 32)
    assert z.numpy().shape == (256, 32)
    assert len(codec.decode(z)) == 16384


def test_short_clip_rejected():
    codec = axg.Codec.init()
    with pytest.raises(ValueError):
        codec.encode(axg.noise_clip(64, 0.1, seed=1))


def test_selection_and_masking():
    att = axg.random_attribution(4, 8, seed=5)
    keep = axg.select_top(att, 0.25)
    assert keep.count() == 8
    scores = att.numpy().ravel()
    chosen = set(keep.indices())
    assert min(scores[i] for i in chosen) >= max(scores[i] for i in range(32) if i not in chosen)
    z = axg.LatentGrid(np.ones((4, 8)))
    base = axg.LatentGrid(np.zeros((4, 8)))
    kept = axg.apply_keep(z, keep, base).numpy().ravel()
    removed = axg.apply_remove(z, keep, base).numpy().ravel()
    np.testing.assert_array_equal(kept + removed, np.ones(32))
    assert kept.sum() == 8


def test_bad_override_is_config_error():
    with pytest.raises(axg.ConfigError):
        axg.config_hash(["no_such_section.x=1"])


def test_missing_checkpoint(tmp_path):
    with pytest.raises(axg.MissingCheckpointError):
        axg.train_classifier(axg.TaskKind.Keyword, tiny(tmp_path))


def test_tiny_pipeline(tmp_path):
    cfg = tiny(tmp_path)
    axg.synth_data(cfg)
    axg.train_codec(cfg)
    axg.train_classifier(axg.TaskKind.Keyword, cfg)
    axg.eval_fidelity(axg.TaskKind.Keyword, cfg)

    report = json.loads((tmp_path / "reports" / "keyword" / "fidelity-latent-ig.json").read_text())
    assert report

    codec = axg.Codec.load(tmp_path / "checkpoints" / "codec.axg")
    clf = axg.Classifier.load(tmp_path / "checkpoints" / "classifier-keyword.axg")
    clip = axg.noise_clip(16384, 0.3, seed=9)
    z = codec.encode(clip)
    base = axg.base_latent(codec, 16384)
    target = clf.predict(z)
    att = axg.latent_ig(z, base, clf, target, steps=32)
    gap = clf.logits(z)[target] - clf.logits(base)[target]
    assert att.total() == pytest.approx(gap, rel=0.05, abs=1e-3)
    assert sum(clf.probabilities(z)) == pytest.approx(1.0, abs=1e-5)
    out = axg.synthesize(axg.apply_keep(z, axg.select_top(att, 1.0), base), codec)
    np.testing.assert_allclose(out.samples, codec.decode(z).samples, atol=1e-6)
