import numpy as np
import pytest

from speechmark import synth
from speechmark.dsp import FrameSpec
from speechmark.errors import AliasedHarmonics
from speechmark.vad import Label


def test_deterministic():
    a = synth.make_corpus(5, seed=7)
    b = synth.make_corpus(5, seed=7)
    for x, y in zip(a, b):
        assert np.array_equal(x.clip.samples, y.clip.samples)
        assert x.frame_truth == y.frame_truth
    c = synth.make_corpus(5, seed=8)
    assert any(len(x.clip) != len(y.clip) for x, y in zip(a, c))
    assert np.array_equal(synth.make_cover(seed=3).samples, synth.make_cover(seed=3).samples)


def test_harmonic_train_shape():
    x = synth.harmonic_train(200.0, 800, 8000)
    assert np.max(np.abs(x)) == pytest.approx(synth.VOICED_PEAK)
    # period 40 samples
    assert np.allclose(x[:40], x[40:80])
    with pytest.raises(AliasedHarmonics):
        synth.harmonic_train(900.0, 100, 8000)


def test_segmented_boundaries():
    item = synth.make_segmented([("silence", 0.5), ("unvoiced", 0.25), ("voiced", 0.25)], seed=1)
    s = item.clip.samples
    assert len(s) == 8000
    assert np.all(s[:4000] == 0)
    assert np.max(np.abs(s[4000:6000])) <= synth.UNVOICED_AMPLITUDE
    assert np.max(np.abs(s[6000:])) == pytest.approx(synth.VOICED_PEAK)
    spec = FrameSpec()
    assert len(item.frame_truth) == spec.count(8000) == 61
    # frame i spans [128 i, 128 i + 256)
    assert item.frame_truth[29] is Label.SILENCE      # 3712..3968
    assert item.frame_truth[31] is Label.UNVOICED     # 3968..4224, majority unvoiced
    assert item.frame_truth[-1] is Label.VOICED
    assert all(f == 200.0 for f, lab in zip(item.f0_truth, item.frame_truth) if lab is Label.VOICED)


def test_label_tie_goes_to_first_label():
    labels = np.array([Label.SILENCE] * 128 + [Label.VOICED] * 128, dtype=object)
    assert synth.label_frames(labels, FrameSpec()) == (Label.VOICED,)


def test_corpus_patterns():
    for item in synth.make_corpus(20, seed=5):
        n = len(item.clip)
        assert 3 * 0.4 * 8000 - 3 <= n <= 6 * 1.2 * 8000 + 6
        assert Label.VOICED in item.frame_truth or Label.UNVOICED in item.frame_truth


def test_cover_properties():
    c = synth.make_cover()
    assert len(c) == 70560 and c.sample_rate == 22050
    assert np.max(np.abs(c.samples)) == pytest.approx(synth.COVER_PEAK)
    power = np.abs(np.fft.rfft(c.samples)) ** 2
    f = np.fft.rfftfreq(len(c), 1 / 22050)
    assert power[f >= 0.75 * 11025].sum() / power.sum() < 0.01


def test_sweep_truth():
    item = synth.make_sweep(100, 200, 1.0)
    assert item.f0_truth[0] < item.f0_truth[-1]
    assert 100 <= min(item.f0_truth) and max(item.f0_truth) <= 200
