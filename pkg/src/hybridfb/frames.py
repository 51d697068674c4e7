"""Frame bounds, condition number and its subgradient.

For an undecimated filterbank the frame operator is diagonalized by the DFT
with diagonal ``S[k] = sum_j |w_j^[k]|^2``; the optimal frame bounds are the
extreme values of S. `frame_bounds_exact` instead builds the decimated frame
operator densely and serves as an oracle.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NotAFrameError, ResourceLimitError
from .signal import Signal, analysis_values, as_samples, synthesis_values

EXACT_MAX_LENGTH = 4096
# spectra below this fraction of B are round-off, reported as A = 0
ZERO_TOLERANCE = 64 * np.finfo(np.float64).eps


@dataclass(frozen=True)
class FrameBounds:
    A: float
    B: float
    kappa: float
    spectrum: np.ndarray
    argmin_bin: int
    argmax_bin: int

    @property
    def is_frame(self):
        return self.A > 0


def spectrum_bounds(spectrum):
    """Return ``(A, B, argmin, argmax)`` of a frame spectrum; ties go to the lowest bin."""
    k_min = int(np.argmin(spectrum))
    k_max = int(np.argmax(spectrum))
    lower, upper = float(spectrum[k_min]), float(spectrum[k_max])
    if lower <= ZERO_TOLERANCE * upper:
        lower = 0.0
    return lower, upper, k_min, k_max


def _condition(lower, upper):
    return upper / lower if lower > 0 else float("inf")


def power_spectrum(filters, n):
    """``S[k] = sum_j |w_j^[k]|^2`` of the filters zero-padded to length n."""
    filters = np.asarray(filters, dtype=np.complex128)
    if filters.shape[-1] > n:
        raise ValueError(f"filter length {filters.shape[-1]} exceeds n = {n}")
    return np.sum(np.abs(np.fft.fft(filters, n, axis=-1)) ** 2, axis=-2)


def frame_bounds_fft(fb, n):
    """Frame bounds of the undecimated bank from its DFT spectrum (hop ignored)."""
    spectrum = power_spectrum(fb.filters, n)
    lower, upper, k_min, k_max = spectrum_bounds(spectrum)
    return FrameBounds(lower, upper, _condition(lower, upper), spectrum, k_min, k_max)


def frame_operator(fb, n, hop=None, block=64):
    """Dense real N x N matrix of ``Phi^T Phi`` for the decimated bank."""
    hop = fb.hop if hop is None else hop
    if n > EXACT_MAX_LENGTH:
        raise ResourceLimitError(
            f"n = {n} exceeds the dense limit {EXACT_MAX_LENGTH}; "
            "use frame_bounds_fft instead"
        )
    op = np.empty((n, n))
    for start in range(0, n, block):
        basis = np.eye(n)[start:start + block]
        coeffs = analysis_values(fb.filters, hop, basis)
        op[:, start:start + block] = synthesis_values(fb.filters, hop, coeffs, n).T
    return op


def frame_bounds_exact(fb, n, hop=None):
    """Frame bounds from the eigenvalues of the dense decimated frame operator.

    Parameters
    ----------
    fb : Filterbank
    n : int
        Signal length, at most ``EXACT_MAX_LENGTH``.
    hop : int, optional
        Decimation factor; defaults to ``fb.hop``.

    Returns
    -------
    FrameBounds
        ``spectrum`` holds the eigenvalues in ascending order.
    """
    op = frame_operator(fb, n, hop)
    eig = np.clip(np.linalg.eigvalsh(0.5 * (op + op.T)), 0.0, None)
    lower, upper, k_min, k_max = spectrum_bounds(eig)
    return FrameBounds(lower, upper, _condition(lower, upper), eig, k_min, k_max)


def is_tight(fb, n, tol=1e-8):
    """True iff the frame condition number is at most ``1 + tol``.

    Decimated banks use the exact frame operator when ``n`` is within
    ``EXACT_MAX_LENGTH``; otherwise the undecimated spectrum is used.
    """
    if fb.hop > 1 and n <= EXACT_MAX_LENGTH:
        return frame_bounds_exact(fb, n).kappa <= 1 + tol
    return frame_bounds_fft(fb, n).kappa <= 1 + tol


class KappaGradient(NamedTuple):
    """Subgradient of the condition number with respect to filter entries.

    ``grad`` packs ``d kappa / d Re w`` in its real part and
    ``d kappa / d Im w`` in its imaginary part. ``smooth`` is False when the
    extreme spectral values are (nearly) tied, in which case ``grad`` is one
    element of the subdifferential rather than a gradient.
    """

    grad: np.ndarray
    kappa: float
    A: float
    B: float
    argmin_bin: int
    argmax_bin: int
    smooth: bool


def _gap_ok(spectrum, upper, rel=1e-6):
    if spectrum.size < 2:
        return True
    s = np.sort(spectrum)
    return (s[1] - s[0] > rel * upper) and (s[-1] - s[-2] > rel * upper)


def kappa_gradient(fb, n, trainable_mask=None):
    """Analytic subgradient of ``kappa = B / A`` of the undecimated spectrum.

    For a hybrid bank the parameters are the filters of its trainable parent
    and the derivative is propagated through the fixed filters by the
    convolution theorem; the fixed filters receive no gradient. For any
    other bank the parameters are its own filters.

    ``trainable_mask`` is a boolean per parameter filter; masked-out filters
    get a zero gradient.
    """
    filters = fb.filters
    if filters.shape[1] > n:
        raise ValueError(f"filter length {filters.shape[1]} exceeds n = {n}")
    spectra = np.fft.fft(filters, n, axis=1)
    if fb.parents is not None:
        fixed, trainable = fb.parents
        length = fb.metadata.get("compose_length")
        if length is not None and length != n:
            raise ValueError(
                f"hybrid composed circularly at length {length}, cannot "
                f"differentiate its spectrum at n = {n}"
            )
        params = trainable.filters
        index = (np.arange(fixed.num_filters) if params.shape[0] == fixed.num_filters
                 else fixed.bands)
        chain = np.conj(np.fft.fft(fixed.filters, n, axis=1))
    else:
        params = filters
        index = np.arange(filters.shape[0])
        chain = None

    spectrum = np.sum(np.abs(spectra) ** 2, axis=0)
    lower, upper, k_min, k_max = spectrum_bounds(spectrum)
    if lower == 0:
        raise NotAFrameError("gradient undefined: not a frame", lower_bound=0.0)

    t = np.arange(params.shape[1])

    def d_spectrum(k):
        per_filter = spectra[:, k] if chain is None else spectra[:, k] * chain[:, k]
        per_param = np.zeros(params.shape[0], dtype=np.complex128)
        np.add.at(per_param, index, per_filter)
        return 2.0 * per_param[:, None] * np.exp(2j * np.pi * k * t / n)[None, :]

    grad = (d_spectrum(k_max) * lower - upper * d_spectrum(k_min)) / lower**2
    if trainable_mask is not None:
        mask = np.asarray(trainable_mask, dtype=bool)
        if mask.shape != (params.shape[0],):
            raise ValueError(
                f"trainable_mask needs one flag per filter ({params.shape[0]})"
            )
        grad[~mask] = 0.0
    # real filters pair bins k and n-k; that tie is harmless for real parameters
    real = not np.iscomplexobj(params) or not np.any(params.imag)
    if real and fb.is_real:
        gap = _gap_ok(spectrum[: n // 2 + 1], upper)
    else:
        gap = _gap_ok(spectrum, upper)
    return KappaGradient(grad, upper / lower, lower, upper, k_min, k_max, gap)


def reconstruct(fb, x, scaling="lower"):
    """Decode ``Phi^T Phi x`` with a scalar inverse and report the relative error.

    ``scaling="lower"`` divides by the lower frame bound, which is exact for
    tight banks; ``"midpoint"`` divides by ``(A + B) / 2``. Bounds come from
    the undecimated spectrum divided by the hop (the alias-free part of the
    decimated frame operator).

    Returns
    -------
    (Signal, float)
        The reconstruction and ``||x_hat - x|| / ||x||`` (0 for ``x = 0``).
    """
    rate = x.sample_rate if isinstance(x, Signal) else 16000
    x = as_samples(x)
    bounds = frame_bounds_fft(fb, x.size)
    if not bounds.is_frame:
        raise NotAFrameError("cannot reconstruct: not a frame", lower_bound=bounds.A)
    lower, upper = bounds.A / fb.hop, bounds.B / fb.hop
    if scaling == "lower":
        scale = 1.0 / lower
    elif scaling == "midpoint":
        scale = 2.0 / (lower + upper)
    else:
        raise ValueError(f"unknown scaling {scaling!r}")
    coeffs = analysis_values(fb.filters, fb.hop, x)
    x_hat = scale * synthesis_values(fb.filters, fb.hop, coeffs, x.size)
    norm = np.linalg.norm(x)
    error = 0.0 if norm == 0 else float(np.linalg.norm(x_hat - x) / norm)
    return Signal(x_hat, rate), error
