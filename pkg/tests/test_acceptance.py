"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line (shown in the pytest terminal
summary, or printed when this file is run as a script) and then asserts the
criterion at its stated tolerance and runtime budget.
"""

import sys
import time

import numpy as np
import pytest

from hybridfb.filterbank import AuditorySpec, make_auditory, make_random, make_stft
from hybridfb.frames import frame_bounds_exact, frame_bounds_fft, kappa_gradient, reconstruct
from hybridfb.montecarlo import verify_hybrid_tightness, verify_random_tightness
from hybridfb.objectives import si_sdr
from hybridfb.trainer import TrainConfig, enhance, ideal_ratio_mask, tighten

from conftest import fd_kappa_gradient, non_degenerate_banks

pytestmark = pytest.mark.acceptance

RESULTS = {}


def record(number, title, ok, detail, elapsed, budget):
    in_time = elapsed < budget
    status = "PASS" if ok and in_time else "FAIL"
    line = (f"{status} criterion {number} ({title}): {detail}; "
            f"{elapsed:.2f} s of {budget:g} s")
    RESULTS[number] = line
    print(line)
    assert ok, line
    assert in_time, line


def tone_complex(n, fs, seed=0):
    """Harmonic complex with 1/k amplitudes, vibrato and a syllable-rate envelope."""
    t = np.arange(n) / fs
    f0 = 150.0 * (1 + 0.05 * np.sin(2 * np.pi * 3 * t))
    phase = 2 * np.pi * np.cumsum(f0) / fs
    offsets = np.random.default_rng(seed).uniform(0, 2 * np.pi, 26)
    envelope = 0.6 + 0.4 * np.sin(2 * np.pi * 4 * t)
    return envelope * sum(np.sin(k * phase + offsets[k - 1]) / k for k in range(1, 27))


def test_criterion_1_stft_condition_number():
    start = time.perf_counter()
    kappa = frame_bounds_exact(make_stft(32, 64, 32), 256).kappa
    elapsed = time.perf_counter() - start
    # context only: the same window over all 64 bins
    full = frame_bounds_exact(make_stft(64, 64, 32), 256).kappa
    record(1, "STFT kappa = 2", abs(kappa - 2.0) <= 1e-6,
           f"Hann STFT 32 ch, window 64, hop 32, N 256: kappa = {kappa:.10g} "
           f"(all 64 bins: {full:.10g})", elapsed, 1)


def test_criterion_2_tight_audlet():
    start = time.perf_counter()
    n = 1024
    fb = make_auditory(AuditorySpec(channels=32, filter_length=512, signal_length=n))
    kappa = frame_bounds_fft(fb, n).kappa
    rng = np.random.default_rng(2)
    errors = [reconstruct(fb, rng.normal(size=n))[1] for _ in range(10)]
    elapsed = time.perf_counter() - start
    record(2, "tight audlet", abs(kappa - 1) <= 1e-8 and max(errors) <= 1e-8,
           f"kappa - 1 = {kappa - 1:.2e}, max recon error = {max(errors):.2e}", elapsed, 5)


def test_criterion_3_random_identity():
    start = time.perf_counter()
    est = verify_random_tightness(4, 8, 1 / 32, 64, trials=10_000, seed=0)
    elapsed = time.perf_counter() - start
    ok = abs(est.mean_ratio - 1) <= 3 * est.stderr and est.stderr < 0.02
    record(3, "random tightness in expectation", ok,
           f"mean ratio {est.mean_ratio:.5f}, stderr {est.stderr:.5f}", elapsed, 10)


def test_criterion_4_hybrid_identity():
    start = time.perf_counter()
    fixed = make_auditory(AuditorySpec(channels=8, filter_length=64, signal_length=256))
    est = verify_hybrid_tightness(fixed, 8, 1 / 8, 256, trials=10_000, seed=0)
    elapsed = time.perf_counter() - start
    ok = abs(est.mean_ratio - 1) <= 3 * est.stderr
    record(4, "hybrid tightness in expectation", ok,
           f"mean ratio {est.mean_ratio:.5f}, stderr {est.stderr:.5f}, "
           f"constant {est.expected_constant:.6f}", elapsed, 30)


def test_criterion_5_gradient():
    start = time.perf_counter()
    worst = 0.0
    for fb in non_degenerate_banks(20, 4, 8, 32, seed=5):
        analytic = kappa_gradient(fb, 32).grad.real
        fd = fd_kappa_gradient(fb.filters, 32).real
        floor = 1e-3 * np.abs(fd).max()
        worst = max(worst, float(np.max(np.abs(analytic - fd) / np.maximum(np.abs(fd), floor))))
    elapsed = time.perf_counter() - start
    record(5, "kappa gradient vs finite differences", worst < 1e-5,
           f"worst relative error {worst:.2e} over 20 banks", elapsed, 10)


def test_criterion_6_tighten():
    start = time.perf_counter()
    report = tighten(make_random(8, 16, seed=0), 256, TrainConfig(learning_rate=1e-3, steps=500))
    elapsed = time.perf_counter() - start
    kappas = report.kappas
    final = frame_bounds_fft(report.filterbank, 256).kappa
    excess = float(np.max(kappas / np.minimum.accumulate(kappas)) - 1)
    record(6, "kappa-penalized training", final <= 1.1 and excess <= 0.1,
           f"kappa {kappas[0]:.3f} -> {final:.4f}, worst rise over running min {excess:.1%}",
           elapsed, 30)


def test_criterion_7_oracle_enhancement():
    start = time.perf_counter()
    fs = n = 16000
    clean = tone_complex(n, fs)
    noise = np.random.default_rng(7).normal(size=n)
    noise *= np.linalg.norm(clean) / np.linalg.norm(noise)
    noisy = clean + noise
    fb = make_auditory(AuditorySpec(channels=32, filter_length=512, signal_length=n))
    enhanced = enhance(fb, noisy, ideal_ratio_mask(clean, noisy, fb))
    before, after = si_sdr(clean, noisy), si_sdr(clean, enhanced)
    elapsed = time.perf_counter() - start
    record(7, "oracle-mask enhancement", after - before >= 5,
           f"SI-SDR {before:.2f} dB -> {after:.2f} dB (gain {after - before:.2f} dB)",
           elapsed, 10)


def test_criterion_8_fft_equals_exact():
    start = time.perf_counter()
    rng = np.random.default_rng(8)
    worst = 0.0
    for i in range(20):
        n = int(rng.choice([64, 128, 256, 512]))
        fb = make_random(int(rng.integers(1, 9)), int(rng.integers(1, 33)), seed=100 + i)
        fast, exact = frame_bounds_fft(fb, n), frame_bounds_exact(fb, n)
        worst = max(worst, abs(fast.A - exact.A) / exact.A, abs(fast.B - exact.B) / exact.B)
    elapsed = time.perf_counter() - start
    record(8, "DFT bounds equal exact bounds at hop 1", worst <= 1e-9,
           f"worst relative difference {worst:.2e} over 20 banks", elapsed, 30)


def test_criterion_9_not_reproducible():
    RESULTS[9] = ("N/A  criterion 9 (corpus-scale PESQ and SI-SDR): needs the full speech "
                  "corpus and mask network; out of scope, replaced by criteria 1-8")
    print(RESULTS[9])
    pytest.skip("corpus-scale results are out of scope")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
