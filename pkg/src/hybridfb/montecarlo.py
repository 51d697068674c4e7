"""Monte Carlo checks that random and random-hybrid filterbanks are tight in expectation.

For i.i.d. Gaussian filters of length T and variance sigma2 the expected
analysis energy is ``J * T * sigma2 * ||x||^2``; composing with a tight bank
of bound ``A`` gives ``A * T * sigma2 * ||x||^2``. Each estimate fixes one
unit-norm signal and averages over independently drawn filterbanks.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .filterbank import compose_hybrid, make_random
from .frames import frame_bounds_fft
from .signal import analysis_values


@dataclass(frozen=True)
class TightnessEstimate:
    mean_ratio: float
    stderr: float
    trials: int
    expected_constant: float

    @property
    def within_3_stderr(self):
        return abs(self.mean_ratio - 1.0) <= 3.0 * self.stderr

    def to_dict(self):
        return dict(asdict(self), within_3_stderr=self.within_3_stderr)


def _unit_signal(n, seed):
    x = np.random.default_rng(seed).standard_normal(n)
    return x / np.linalg.norm(x)


def _trial_rng(seed, trial):
    # per-trial streams make results independent of evaluation order
    return np.random.default_rng([seed, trial + 1])


def _estimate(ratios, constant):
    ratios = np.asarray(ratios)
    stderr = float(np.std(ratios, ddof=1) / np.sqrt(ratios.size))
    return TightnessEstimate(float(np.mean(ratios)), stderr, int(ratios.size),
                             float(constant))


def _check_trials(trials):
    if trials < 100:
        raise ValueError(f"need at least 100 trials, got {trials}")


def verify_random_tightness(num_filters, length, sigma2, n, trials=10_000, seed=0,
                            x=None):
    """Estimate ``E||Phi x||^2 / (J T sigma2 ||x||^2)`` over random banks at hop 1."""
    _check_trials(trials)
    x = _unit_signal(n, seed) if x is None else np.asarray(x, dtype=np.float64)
    constant = num_filters * length * sigma2
    energy = float(np.dot(x, x))
    ratios = np.empty(trials)
    for i in range(trials):
        fb = make_random(num_filters, length, sigma2, hop=1, seed=_trial_rng(seed, i))
        coeffs = analysis_values(fb.filters, 1, x)
        ratios[i] = np.sum(np.abs(coeffs) ** 2) / (constant * energy)
    return _estimate(ratios, constant)


def verify_hybrid_tightness(fixed, length, sigma2, n, trials=10_000, seed=0, x=None,
                            tol=1e-6):
    """Estimate ``E||Phi_Psi x||^2 / (A_Psi T sigma2 ||x||^2)`` for a tight fixed bank.

    A fresh random trainable bank (one filter per band of ``fixed``) is
    drawn each trial and composed circularly at length ``n``, hop 1.

    Raises
    ------
    ValueError
        If ``fixed`` is not tight at length ``n`` within ``tol``.
    """
    _check_trials(trials)
    bounds = frame_bounds_fft(fixed, n)
    if not bounds.kappa <= 1 + tol:
        raise ValueError(
            f"fixed filterbank is not tight (kappa = {bounds.kappa:.6g}); "
            "the hybrid identity requires a tight fixed part"
        )
    fixed = fixed.with_hop(1)
    x = _unit_signal(n, seed) if x is None else np.asarray(x, dtype=np.float64)
    constant = bounds.A * length * sigma2
    energy = float(np.dot(x, x))
    ratios = np.empty(trials)
    for i in range(trials):
        trainable = make_random(fixed.num_bands, length, sigma2, seed=_trial_rng(seed, i))
        hybrid = compose_hybrid(fixed, trainable, hop=1, length=n)
        coeffs = analysis_values(hybrid.filters, 1, x)
        ratios[i] = np.sum(np.abs(coeffs) ** 2) / (constant * energy)
    return _estimate(ratios, constant)
