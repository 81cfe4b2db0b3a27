"""Acceptance gate: one PASS/FAIL line per criterion, each at its stated tolerance.

The lines are collected into an "acceptance criteria" section of the pytest
terminal summary (and printed directly when run with ``-s``).
"""

import time

import numpy as np
import pytest

from oracles import acf_period, direct_dft
from speechmark import synth
from speechmark import watermark as wm
from speechmark.audio_io import AudioClip, parse_wav_bytes, wav_bytes
from speechmark.dsp import FrameSpec, Window, apply_window, dft, frame_signal, idft
from speechmark.errors import PayloadTooLarge, SilentInput, WatermarkError
from speechmark.metrics import snr
from speechmark.normalize import cmvn, log_denormalize, log_normalize, wiener_denoise
from speechmark.pipeline import hide, reveal
from speechmark.pitch import PITCH_FRAME_LEN, estimate_pitch, pitch_frame, quefrency_band
from speechmark.vad import Label, classify, zero_crossing_rate


def test_criterion_01_dft_oracle(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst_direct = max(
        float(np.max(np.abs(dft(x).bins - direct_dft(x))))
        for x in (rng.standard_normal(L) for L in (64, 128, 256))
    )
    worst_rt = max(
        float(np.max(np.abs(idft(dft(x)) - x)))
        for x in (rng.standard_normal(L) for L in (64, 128, 256, 1024, 4096))
    )
    dt = time.perf_counter() - t0
    ok = worst_direct < 1e-7 and worst_rt < 1e-9 and dt < 5
    verdict(1, ok, f"vs direct sum {worst_direct:.1e} (<1e-7), roundtrip {worst_rt:.1e} (<1e-9), {dt:.2f}s (<5s)")
    assert ok


def test_criterion_02_vad_accuracy(verdict):
    t0 = time.perf_counter()
    items = synth.make_corpus(100, seed=2024)
    hits = total = 0
    for item in items:
        labels = classify(item.clip).labels
        hits += sum(a is b for a, b in zip(labels, item.frame_truth))
        total += len(labels)
    dt = time.perf_counter() - t0
    acc = hits / total
    ok = acc >= 0.95 and dt < 10
    verdict(2, ok, f"frame accuracy {acc:.4f} over {total} frames (>=0.95), {dt:.2f}s (<10s)")
    assert ok


def test_criterion_03_zcr_law(verdict):
    spec = FrameSpec()
    worst = 0.0
    for f in range(100, 1001, 100):
        x = 0.5 * np.sin(2 * np.pi * f * np.arange(8000) / 8000)
        frames = frame_signal(AudioClip(x, 8000), spec).frames
        dev = max(abs(zero_crossing_rate(fr) - 2 * f / 8000) for fr in frames)
        worst = max(worst, dev)
    ok = worst <= 2 / spec.frame_len
    verdict(3, ok, f"max |zcr - 2f/fs| = {worst:.5f} (<= 2/L = {2 / spec.frame_len:.5f})")
    assert ok


def test_criterion_04_pitch(verdict):
    # 8 kHz: at 280 Hz both neighbouring integer quefrencies (28 -> 285.7 Hz,
    # 29 -> 275.9 Hz) are more than 3 Hz away, capping the pooled rate at 6/7.
    t0 = time.perf_counter()
    fs = 8000
    lo, hi = quefrency_band(fs, 50, 400)
    within = agree = total = 0
    per_f0 = {}
    for f0 in range(80, 321, 40):
        clip = synth.make_voiced(f0, 1.0, fs).clip
        res = classify(clip)
        good = 0
        for start, label in zip(res.starts, res.labels):
            if label is not Label.VOICED:
                continue
            frame = apply_window(pitch_frame(clip.samples, int(start) + 128, PITCH_FRAME_LEN), Window.HAMMING)
            est = estimate_pitch(frame, fs)
            total += 1
            good += abs(est.f0 - f0) <= 3
            agree += abs(acf_period(frame, lo, hi) - est.quefrency) <= 1
        within += good
        per_f0[f0] = good / sum(lab is Label.VOICED for lab in res.labels)
    dt = time.perf_counter() - t0
    rate, acf_rate = within / total, agree / total
    ok = rate >= 0.95 and acf_rate >= 0.95 and dt < 10
    worst = min(per_f0, key=per_f0.get)
    verdict(4, ok, f"within 3 Hz {rate:.4f} (>=0.95; worst f0 {worst} Hz at {per_f0[worst]:.2f}), "
                   f"acf agreement {acf_rate:.4f} (>=0.95), {dt:.2f}s (<10s)")
    assert ok


def test_criterion_05_normalization(verdict):
    rng = np.random.default_rng(5)
    worst_peak = worst_inv = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 2000))
        x = rng.uniform(-1, 1, n) * 10 ** rng.uniform(-4, 0)
        if not np.any(x):
            x[0] = 1e-3
        ns = log_normalize(AudioClip(x, 8000))
        worst_peak = max(worst_peak, abs(float(ns.samples.max()) - 1.0))
        worst_inv = max(worst_inv, float(np.max(np.abs(log_denormalize(ns).samples - np.abs(x)))))
    try:
        log_normalize(AudioClip(np.zeros(100), 8000))
        silent = False
    except SilentInput:
        silent = True
    ok = worst_peak <= 1e-9 and worst_inv <= 1e-6 and silent
    verdict(5, ok, f"|max-1| {worst_peak:.1e} (<=1e-9), denorm error {worst_inv:.1e} (<=1e-6), "
                   f"SilentInput raised: {silent}")
    assert ok


def test_criterion_06_cmvn_affine(verdict):
    rng = np.random.default_rng(6)
    x = rng.standard_normal((200, 13)) * rng.uniform(0.5, 3, 13) + rng.uniform(-2, 2, 13)
    base, _ = cmvn(x)
    worst = max(
        float(np.max(np.abs(cmvn(alpha * x + h)[0] - base)))
        for alpha in (0.1, 2.5, 10.0) for h in (-3.0, 0.7)
    )
    ok = worst <= 1e-9
    verdict(6, ok, f"max element-wise difference {worst:.1e} (<=1e-9)")
    assert ok


def test_criterion_07_capacity_fit(verdict):
    payload = wm.WatermarkPayload(8000, bytes(np.random.default_rng(7).integers(0, 256, 2126, dtype=np.uint8)))
    cover = synth.make_cover(duration=70641 / 22050)
    full = wm.capacity(AudioClip(np.zeros(70641), 22050)).slots
    wm.embed(cover, payload)
    fits_23 = wm.extract(wm.embed(AudioClip(cover.samples[: 23 * 1024], 22050), payload)) == payload
    try:
        wm.embed(AudioClip(cover.samples[: 23 * 1024 - 1], 22050), payload)
        rejects_22 = False
    except PayloadTooLarge:
        rejects_22 = True
    c23 = wm.capacity(AudioClip(np.zeros(23 * 1024), 22050)).slots
    c22 = wm.capacity(AudioClip(np.zeros(22 * 1024), 22050)).slots
    ok = (len(payload) == 2143 and full == 6596 and c23 == 2231 and c22 == 2134
          and fits_23 and rejects_22)
    verdict(7, ok, f"need {len(payload)}, full cover {full} slots, 23 blocks {c23} fits={fits_23}, "
                   f"22 blocks {c22} rejected={rejects_22}")
    assert ok


def test_criterion_08_end_to_end(verdict):
    t0 = time.perf_counter()
    # clips without a voiced segment have nothing to hide
    items = [it for it in synth.make_corpus(100, seed=88) if Label.VOICED in it.frame_truth]
    exact_mem = exact_pcm = 0
    worst_snr = np.inf
    for i, item in enumerate(items):
        cover = synth.make_cover(duration=8.0, seed=i)
        stego, payload, report = hide(item.clip, cover)
        exact_mem += reveal(stego) == payload
        exact_pcm += reveal(parse_wav_bytes(wav_bytes(stego))) == payload
        worst_snr = min(worst_snr, report.snr_db)
    dt = time.perf_counter() - t0
    n = len(items)
    ok = exact_mem == n and exact_pcm == n and worst_snr >= 30 and dt < 30
    verdict(8, ok, f"bit-exact {exact_mem}/{n} in memory, {exact_pcm}/{n} via PCM16, "
                   f"min SNR {worst_snr:.2f} dB (>=30), {dt:.2f}s (<30s)")
    assert ok


def test_criterion_09_qim_robustness(verdict):
    cover = synth.make_cover(seed=9)
    rng = np.random.default_rng(9)
    exact = wrong_accepted = detected = 0
    trials = 20
    for t in range(trials):
        payload = wm.WatermarkPayload(8000, bytes(rng.integers(0, 256, 2126, dtype=np.uint8)))
        stego = wm.embed(cover, payload)
        low = wm.perturb_magnitudes(stego, len(payload), 0.45 * wm.DEFAULT_DELTA, rng)
        exact += wm.extract(low) == payload
        high = wm.perturb_magnitudes(stego, len(payload), 0.60 * wm.DEFAULT_DELTA, rng)
        try:
            got = wm.extract(high)
        except WatermarkError:
            detected += 1
        else:
            wrong_accepted += got != payload
    ok = exact == trials and wrong_accepted == 0
    verdict(9, ok, f"0.45 delta bit-exact {exact}/{trials}; 0.60 delta detected {detected}/{trials}, "
                   f"silently wrong {wrong_accepted}")
    assert ok


def test_criterion_10_wiener(verdict):
    rng = np.random.default_rng(10)
    n = 16000
    clean = 0.5 * np.sin(2 * np.pi * 440 * np.arange(n) / 8000)
    sigma = np.sqrt(np.mean(clean**2))
    noisy = AudioClip(clean + rng.normal(0, sigma, n), 8000)
    ref = AudioClip(clean, 8000)
    before = snr(ref, noisy)
    after = snr(ref, wiener_denoise(noisy, AudioClip(rng.normal(0, sigma, n), 8000)))
    voiced = synth.make_voiced(180, 1.0).clip
    ident = float(np.max(np.abs(wiener_denoise(voiced, AudioClip(np.zeros(n), 8000)).samples - voiced.samples)))
    ok = after - before >= 6 and ident <= 1e-6
    verdict(10, ok, f"input {before:.2f} dB -> {after:.2f} dB, gain {after - before:.2f} dB (>=6); "
                    f"silent-noise identity {ident:.1e} (<=1e-6)")
    assert ok
