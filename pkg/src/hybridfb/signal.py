"""Vector primitives and the convolutional analysis/synthesis operators.

All convolutions are circular (indices taken mod N). The DFT is the
unnormalized forward transform with kernel ``exp(-2j*pi*k*n/N)``; the inverse
carries the 1/N factor.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Signal:
    """A finite, real-valued mono audio signal."""

    samples: np.ndarray
    sample_rate: int = 16000

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("signal must be a non-empty 1-D vector")
        if not np.all(np.isfinite(samples)):
            raise ValueError("signal contains NaN or Inf samples")
        if int(self.sample_rate) <= 0:
            raise ValueError("sample_rate must be a positive integer")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.samples, dtype=dtype)


@dataclass(frozen=True)
class Coefficients:
    """Encoder responses, rows indexed by frame ``n`` and columns by channel ``j``."""

    values: np.ndarray
    hop: int
    source_length: int

    def __post_init__(self):
        if self.values.shape[-2] != -(-self.source_length // self.hop):
            raise ValueError(
                f"{self.values.shape[-2]} frames is inconsistent with "
                f"length {self.source_length} at hop {self.hop}"
            )

    @property
    def shape(self):
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def as_samples(x):
    """Return the sample vector of a `Signal` or array-like as float64."""
    if isinstance(x, Signal):
        return x.samples
    return np.asarray(x, dtype=np.float64)


def dft(v):
    """Unnormalized forward DFT of a (complex) vector."""
    v = np.asarray(v, dtype=np.complex128)
    if v.size == 0:
        raise ValueError("dft of an empty vector is undefined")
    return np.fft.fft(v)


def idft(v):
    """Inverse of `dft` (carries the 1/N factor)."""
    v = np.asarray(v, dtype=np.complex128)
    if v.size == 0:
        raise ValueError("idft of an empty vector is undefined")
    return np.fft.ifft(v)


def circular_convolve(x, w, method="fft"):
    """Circular convolution ``out[n] = sum_k w[k] x[(n - k) mod N]``.

    Parameters
    ----------
    x : array_like, shape (N,)
        Real signal.
    w : array_like, shape (T,)
        Complex kernel with ``T <= N``.
    method : {"fft", "direct"}
        ``"direct"`` evaluates the modular sum literally; ``"fft"`` uses the
        convolution theorem. Both agree to round-off.

    Returns
    -------
    ndarray of complex128, shape (N,)
    """
    x = as_samples(x)
    w = np.asarray(w, dtype=np.complex128)
    n, t = x.size, w.size
    if t > n:
        raise ValueError(f"kernel length {t} exceeds signal length {n}")
    if method == "direct":
        idx = (np.arange(n)[:, None] - np.arange(t)[None, :]) % n
        return (x[idx] * w[None, :]).sum(axis=1)
    if method == "fft":
        return np.fft.ifft(np.fft.fft(x) * np.fft.fft(w, n))
    raise ValueError(f"unknown convolution method {method!r}")


def _check_operator(filters, hop, n):
    if filters.shape[-1] > n:
        raise ValueError(
            f"filter length {filters.shape[-1]} exceeds signal length {n}"
        )
    if hop < 1 or n % hop:
        raise ValueError(f"hop {hop} does not divide signal length {n}")


def filter_spectra(filters, n):
    """Real and imaginary parts of the filters, zero-padded and rFFT'd to length n."""
    filters = np.asarray(filters, dtype=np.complex128)
    return (np.fft.rfft(filters.real, n, axis=-1),
            np.fft.rfft(filters.imag, n, axis=-1))


def analysis_values(filters, hop, x):
    """Array form of `analyze` for raw filters and a batch ``x[..., N]``.

    The real and imaginary parts of the filters are convolved with the real
    input separately and recombined.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    _check_operator(filters, hop, n)
    spec_re, spec_im = filter_spectra(filters, n)
    xs = np.fft.rfft(x, axis=-1)[..., None, :]
    resp = (np.fft.irfft(xs * spec_re, n, axis=-1)
            + 1j * np.fft.irfft(xs * spec_im, n, axis=-1))
    return np.swapaxes(resp[..., ::hop], -1, -2)


def synthesis_values(filters, hop, c, n):
    """Array form of `synthesize`: the transpose of `analysis_values`.

    ``c`` has shape ``(..., N // hop, J)``; the result has shape ``(..., N)``.
    """
    c = np.asarray(c, dtype=np.complex128)
    _check_operator(filters, hop, n)
    frames = n // hop
    if c.shape[-2:] != (frames, filters.shape[0]):
        raise ValueError(
            f"coefficient shape {c.shape[-2:]} does not match "
            f"({frames}, {filters.shape[0]}) for length {n} at hop {hop}"
        )
    up = np.zeros(c.shape[:-2] + (filters.shape[0], n), dtype=np.complex128)
    up[..., ::hop] = np.swapaxes(c, -1, -2)
    spec_re, spec_im = filter_spectra(filters, n)
    # Re(conj(c) * w) = c_re * w_re + c_im * w_im, correlated per channel
    acc = (np.fft.rfft(up.real, axis=-1) * np.conj(spec_re)
           + np.fft.rfft(up.imag, axis=-1) * np.conj(spec_im))
    return np.fft.irfft(acc.sum(axis=-2), n, axis=-1)


def analyze(fb, x):
    """Apply the encoder ``fb`` to the signal ``x``.

    ``values[m, j]`` is the circular convolution of ``x`` with filter ``j``
    sampled at ``m * fb.hop``.
    """
    x = as_samples(x)
    if x.ndim != 1:
        raise ValueError("analyze expects a single 1-D signal")
    values = analysis_values(fb.filters, fb.hop, x)
    return Coefficients(values=values, hop=fb.hop, source_length=x.size)


def synthesize(fb, c, length=None, sample_rate=16000):
    """Apply the transposed encoder (the decoder) to coefficients ``c``.

    This is the exact adjoint of `analyze` under the real inner product
    ``Re<Phi x, c> = <x, Phi^T c>``.
    """
    if isinstance(c, Coefficients):
        if length is not None and length != c.source_length:
            raise ValueError("length disagrees with the coefficients' source length")
        length, values = c.source_length, c.values
    else:
        values = np.asarray(c, dtype=np.complex128)
        if length is None:
            length = values.shape[0] * fb.hop
    if values.ndim != 2:
        raise ValueError("coefficients must be a 2-D (frames, channels) array")
    return Signal(synthesis_values(fb.filters, fb.hop, values, length), sample_rate)
