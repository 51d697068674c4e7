"""Mixed compressed spectral loss on encoder coefficients, and metrics."""

from dataclasses import dataclass

import numpy as np

from .errors import NotAFrameError
from .frames import frame_bounds_fft
from .signal import analysis_values, as_samples


@dataclass(frozen=True)
class MCSParams:
    """Compression exponent ``c``, phase/magnitude mix ``gamma``, kappa weight ``beta``."""

    c: float = 0.3
    gamma: float = 0.3
    beta: float = 1e-5

    def __post_init__(self):
        if not 0 < self.c <= 1:
            raise ValueError(f"compression exponent c must be in (0, 1], got {self.c}")
        if not 0 <= self.gamma <= 1:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")


def compress(coeffs, c):
    """``|C|^c * exp(i * angle(C))`` with the phase taken as 0 where ``C = 0``."""
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    mag = np.abs(coeffs)
    scale = np.ones_like(mag)
    np.power(mag, c - 1.0, out=scale, where=mag > 0)
    return coeffs * scale


def mcs_terms(x, x_est, fb, c=0.3):
    """Phase-aware and magnitude-only squared distances of compressed coefficients.

    Both are unnormalized sums over all frames and channels.
    """
    x, x_est = as_samples(x), as_samples(x_est)
    if x.shape != x_est.shape:
        raise ValueError(f"length mismatch: {x.size} vs {x_est.size}")
    ref = analysis_values(fb.filters, fb.hop, x)
    est = analysis_values(fb.filters, fb.hop, x_est)
    ref_c, est_c = compress(ref, c), compress(est, c)
    phase_term = float(np.sum(np.abs(ref_c - est_c) ** 2))
    mag_term = float(np.sum((np.abs(ref_c) - np.abs(est_c)) ** 2))
    return phase_term, mag_term


def mcs(x, x_est, fb, params=MCSParams()):
    """Mixed compressed spectral loss between a reference and an estimate."""
    phase_term, mag_term = mcs_terms(x, x_est, fb, params.c)
    return params.gamma * phase_term + (1.0 - params.gamma) * mag_term


def mcs_beta(x, x_est, fb, params=MCSParams(), n=None):
    """`mcs` plus ``beta * kappa`` with kappa from the undecimated spectrum at length n."""
    n = as_samples(x).size if n is None else n
    bounds = frame_bounds_fft(fb, n)
    if not bounds.is_frame:
        raise NotAFrameError("loss undefined: not a frame", lower_bound=bounds.A)
    return mcs(x, x_est, fb, params) + params.beta * bounds.kappa


def si_sdr(reference, estimate):
    """Scale-invariant signal-to-distortion ratio in dB.

    Returns ``+inf`` when the estimate is an exact positive or negative
    multiple of the reference (up to round-off) and ``-inf`` when it is
    orthogonal to it.
    """
    reference, estimate = as_samples(reference), as_samples(estimate)
    if reference.shape != estimate.shape:
        raise ValueError(f"length mismatch: {reference.size} vs {estimate.size}")
    ref_energy = float(np.dot(reference, reference))
    if ref_energy == 0:
        raise ValueError("SI-SDR is undefined for an all-zero reference")
    alpha = float(np.dot(estimate, reference)) / ref_energy
    if alpha == 0:
        return float("-inf")
    target = alpha * reference
    target_energy = float(np.dot(target, target))
    residual = target - estimate
    noise_energy = float(np.dot(residual, residual))
    if noise_energy <= np.finfo(np.float64).eps ** 2 * reference.size * target_energy:
        return float("inf")
    return 10.0 * np.log10(target_energy / noise_energy)


def recon_snr(reference, estimate):
    """``10 log10(||ref||^2 / ||ref - est||^2)``; ``+inf`` on an exact match."""
    reference, estimate = as_samples(reference), as_samples(estimate)
    if reference.shape != estimate.shape:
        raise ValueError(f"length mismatch: {reference.size} vs {estimate.size}")
    ref_energy = float(np.dot(reference, reference))
    if ref_energy == 0:
        raise ValueError("reconstruction SNR is undefined for an all-zero reference")
    err = reference - estimate
    err_energy = float(np.dot(err, err))
    if err_energy == 0:
        return float("inf")
    return 10.0 * np.log10(ref_energy / err_energy)
