import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridfb.errors import NotAFrameError
from hybridfb.filterbank import Filterbank, canonical_tight, make_delta, make_random
from hybridfb.frames import frame_bounds_fft
from hybridfb.objectives import (MCSParams, compress, mcs, mcs_beta, mcs_terms, recon_snr,
                                 si_sdr)
from hybridfb.signal import analyze


def two_level_bank(n):
    """Delta plus a filter whose spectrum is the indicator of a symmetric bin set.

    The summed spectrum is 1 off the set and 2 on it, so kappa is exactly 2.
    """
    indicator = np.zeros(n)
    indicator[[1, n - 1]] = 1.0
    return Filterbank(np.stack([np.eye(1, n)[0], np.fft.ifft(indicator)]))


def explicit_mcs(x, y, fb, c, gamma):
    """Loss written out coefficient by coefficient with polar forms."""
    cx, cy = analyze(fb, x).values.ravel(), analyze(fb, y).values.ravel()
    phase, mag = 0.0, 0.0
    for a, b in zip(cx, cy):
        ra, rb = abs(a), abs(b)
        pa = np.angle(a) if ra > 0 else 0.0
        pb = np.angle(b) if rb > 0 else 0.0
        phase += abs(ra**c * np.exp(1j * pa) - rb**c * np.exp(1j * pb)) ** 2
        mag += (ra**c - rb**c) ** 2
    return gamma * phase + (1 - gamma) * mag


class TestMCSParams:
    def test_defaults(self):
        p = MCSParams()
        assert (p.c, p.gamma, p.beta) == (0.3, 0.3, 1e-5)

    @pytest.mark.parametrize("kwargs", [{"c": 0}, {"c": 1.5}, {"gamma": -0.1},
                                        {"gamma": 1.01}, {"beta": -1e-9}])
    def test_ranges(self, kwargs):
        with pytest.raises(ValueError):
            MCSParams(**kwargs)


class TestCompress:
    def test_zero_has_zero_phase(self):
        np.testing.assert_array_equal(compress(np.array([0j, 4.0, -4.0]), 0.5), [0, 2, -2])

    def test_keeps_phase(self, rng):
        z = rng.normal(size=20) + 1j * rng.normal(size=20)
        out = compress(z, 0.3)
        np.testing.assert_allclose(np.angle(out), np.angle(z), atol=1e-12)
        np.testing.assert_allclose(np.abs(out), np.abs(z) ** 0.3, rtol=1e-12)


class TestMCS:
    def test_identical_is_zero(self, rng):
        x = rng.normal(size=64)
        assert mcs(x, x, make_random(4, 8, seed=0)) == 0.0

    def test_linear_limit(self, rng):
        fb = make_random(3, 6, hop=2, seed=1)
        x, y = rng.normal(size=32), rng.normal(size=32)
        expected = np.sum(np.abs(analyze(fb, x).values - analyze(fb, y).values) ** 2)
        got = mcs(x, y, fb, MCSParams(c=1.0, gamma=1.0))
        assert got == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("c", [0.1, 0.3, 1.0])
    def test_sign_flip_magnitude_only(self, rng, c):
        fb = Filterbank(rng.normal(size=(3, 5)) + 1j * rng.normal(size=(3, 5)))
        x = rng.normal(size=40)
        scale = np.sum(np.abs(compress(analyze(fb, x).values, c)) ** 2)
        assert mcs(x, -x, fb, MCSParams(c=c, gamma=0.0)) <= 1e-24 * scale

    def test_matches_explicit_polar_form(self, rng):
        fb = Filterbank(rng.normal(size=(2, 4)) + 1j * rng.normal(size=(2, 4)), hop=2)
        y = rng.normal(size=16)
        x = np.zeros(16)
        x[3] = 1.0  # leaves some coefficients exactly zero
        got = mcs(x, y, fb, MCSParams(c=0.3, gamma=0.3))
        assert got == pytest.approx(explicit_mcs(x, y, fb, 0.3, 0.3), rel=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            mcs(np.ones(8), np.ones(9), make_delta(1))

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**16), gamma=st.floats(0, 1), c=st.floats(0.05, 1))
    def test_symmetric(self, seed, gamma, c):
        r = np.random.default_rng(seed)
        fb = Filterbank(r.normal(size=(3, 5)) + 1j * r.normal(size=(3, 5)))
        x, y = r.normal(size=20), r.normal(size=20)
        p = MCSParams(c=c, gamma=gamma)
        assert mcs(x, y, fb, p) == pytest.approx(mcs(y, x, fb, p), rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**16), gamma=st.floats(0, 1))
    def test_affine_in_gamma(self, seed, gamma):
        r = np.random.default_rng(seed)
        fb = make_random(3, 5, seed=seed)
        x, y = r.normal(size=20), r.normal(size=20)
        phase_term, mag_term = mcs_terms(x, y, fb, 0.3)
        expected = gamma * phase_term + (1 - gamma) * mag_term
        assert mcs(x, y, fb, MCSParams(gamma=gamma)) == pytest.approx(expected, rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**16), index=st.integers(0, 19),
           delta=st.sampled_from([1e-6, -1e-6, 1e-3, 0.5]))
    def test_single_change_is_positive(self, seed, index, delta):
        r = np.random.default_rng(seed)
        x = r.normal(size=20)
        y = x.copy()
        y[index] += delta
        # identity filter: one sample change is one coefficient change
        assert mcs(x, y, make_delta(1)) > 0


class TestMCSBeta:
    def test_tight_bank_identity(self, rng):
        fb = canonical_tight(make_random(3, 6, seed=2), 32)
        x = rng.normal(size=32)
        p = MCSParams(beta=1e-3)
        assert mcs_beta(x, x, fb, p) == pytest.approx(1e-3, rel=1e-12)

    def test_beta_zero_equals_mcs(self, rng):
        fb = make_random(3, 6, seed=3)
        x, y = rng.normal(size=32), rng.normal(size=32)
        p = MCSParams(beta=0.0)
        assert mcs_beta(x, y, fb, p) == mcs(x, y, fb, p)

    def test_two_level_spectrum(self, rng):
        fb = two_level_bank(16)
        spectrum = frame_bounds_fft(fb, 16).spectrum
        assert set(np.round(spectrum, 12)) == {1.0, 2.0}
        x = rng.normal(size=16)
        assert mcs_beta(x, x, fb, MCSParams(beta=0.5)) == pytest.approx(1.0, rel=1e-12)

    def test_exactly_beta_kappa(self, rng):
        fb = make_random(4, 8, seed=5)
        x = rng.normal(size=64)
        kappa = frame_bounds_fft(fb, 64).kappa
        assert mcs_beta(x, x, fb, MCSParams(beta=0.25)) == 0.25 * kappa

    def test_not_a_frame(self):
        with pytest.raises(NotAFrameError, match="loss undefined"):
            mcs_beta(np.ones(8), np.ones(8), Filterbank([[1.0, 1.0]]))


class TestSISDR:
    def test_identity_and_scale(self, rng):
        x = rng.normal(size=100)
        assert si_sdr(x, x) == float("inf")
        assert si_sdr(x, 2 * x) == float("inf")

    def test_orthogonal_equal_energy_noise(self, rng):
        x = rng.normal(size=100)
        n = rng.normal(size=100)
        n -= (n @ x) / (x @ x) * x
        n *= np.linalg.norm(x) / np.linalg.norm(n)
        assert si_sdr(x, x + n) == pytest.approx(0.0, abs=1e-10)

    def test_orthogonal_estimate(self):
        assert si_sdr([1.0, 0.0], [0.0, 1.0]) == float("-inf")

    def test_zero_reference(self):
        with pytest.raises(ValueError):
            si_sdr(np.zeros(4), np.ones(4))

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**16), scale=st.floats(1e-3, 1e3))
    def test_scale_invariant(self, seed, scale):
        r = np.random.default_rng(seed)
        x, y = r.normal(size=64), r.normal(size=64)
        assert si_sdr(x, scale * y) == pytest.approx(si_sdr(x, y), abs=1e-10)


class TestReconSNR:
    def test_exact(self, rng):
        x = rng.normal(size=50)
        assert recon_snr(x, x) == float("inf")

    def test_zero_estimate(self, rng):
        x = rng.normal(size=50)
        assert recon_snr(x, np.zeros(50)) == pytest.approx(0.0, abs=1e-12)

    def test_small_relative_error(self, rng):
        x = rng.normal(size=50)
        assert recon_snr(x, x * (1 + 1e-4)) == pytest.approx(80.0, abs=1e-6)

    def test_zero_reference(self):
        with pytest.raises(ValueError):
            recon_snr(np.zeros(3), np.ones(3))
