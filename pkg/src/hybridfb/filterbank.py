"""Filterbank construction: STFT, auditory (mel-spaced), random and hybrid encoders.

A `Filterbank` stores its J impulse responses as rows of a complex (J, T)
array together with the hop size used for decimation.
"""

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import FilterbankFormatError, NotAFrameError
from .frames import spectrum_bounds

TAGS = ("stft", "auditory", "random", "hybrid", "custom")
FORMAT_NAME = "hybridfb.filterbank"
FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class Filterbank:
    """J complex FIR filters plus a hop size.

    Attributes
    ----------
    filters : ndarray of complex128, shape (J, T)
    hop : int
    tag : str
        One of ``TAGS``.
    metadata : dict
        JSON-serializable annotations. ``metadata["bands"]``, when present,
        maps every filter to the index of the band it belongs to (conjugate
        twins share the band of their positive-frequency partner).
    parents : tuple of (Filterbank, Filterbank) or None
        ``(fixed, trainable)`` for hybrid banks built by `compose_hybrid`.
    """

    filters: np.ndarray
    hop: int = 1
    tag: str = "custom"
    metadata: dict = field(default_factory=dict)
    parents: Optional[tuple] = None

    def __post_init__(self):
        filters = np.array(self.filters, dtype=np.complex128)
        if filters.ndim == 1:
            filters = filters[None, :]
        if filters.ndim != 2 or filters.shape[0] < 1 or filters.shape[1] < 1:
            raise ValueError("filterbank needs at least one non-empty filter")
        if not np.all(np.isfinite(filters)):
            raise ValueError("filter coefficients must be finite")
        if int(self.hop) < 1:
            raise ValueError("hop must be a positive integer")
        if self.tag not in TAGS:
            raise ValueError(f"unknown filterbank tag {self.tag!r}")
        filters.setflags(write=False)
        object.__setattr__(self, "filters", filters)
        object.__setattr__(self, "hop", int(self.hop))
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def num_filters(self):
        return self.filters.shape[0]

    @property
    def filter_length(self):
        return self.filters.shape[1]

    @property
    def bands(self):
        """Band index of every filter (identity when no twins are recorded)."""
        if "bands" in self.metadata:
            return np.asarray(self.metadata["bands"], dtype=int)
        return np.arange(self.num_filters)

    @property
    def num_bands(self):
        return int(self.bands.max()) + 1

    @property
    def is_real(self):
        return not np.any(self.filters.imag)

    def with_filters(self, filters):
        return Filterbank(filters, self.hop, self.tag, self.metadata, self.parents)

    def with_hop(self, hop):
        return Filterbank(self.filters, hop, self.tag, self.metadata, self.parents)

    def scaled(self, factor):
        return self.with_filters(factor * self.filters)

    def with_trainable(self, filters):
        """Recompose a hybrid bank after replacing its trainable filters."""
        if self.parents is None:
            raise ValueError("not a hybrid filterbank")
        fixed, trainable = self.parents
        return compose_hybrid(
            fixed,
            trainable.with_filters(filters),
            hop=self.hop,
            length=self.metadata.get("compose_length"),
        )

    def __eq__(self, other):
        if not isinstance(other, Filterbank):
            return NotImplemented
        return (
            self.hop == other.hop
            and self.tag == other.tag
            and self.filters.shape == other.filters.shape
            and np.array_equal(self.filters, other.filters)
            and self.metadata == other.metadata
            and self.parents == other.parents
        )

    __hash__ = None


def make_delta(num_filters=1, length=None, hop=1):
    """Unit impulses delayed by 0, 1, ..., num_filters - 1 samples."""
    length = num_filters if length is None else length
    if length < num_filters:
        raise ValueError("length must accommodate every shifted impulse")
    return Filterbank(np.eye(num_filters, length), hop, "custom")


def make_random(num_filters, length, sigma2=None, hop=1, seed=None):
    """Real i.i.d. Gaussian filters with variance ``sigma2``.

    ``sigma2`` defaults to ``1 / (num_filters * length)``, which makes the
    bank tight in expectation with constant 1.
    """
    if num_filters < 1 or length < 1:
        raise ValueError("num_filters and length must be positive")
    if sigma2 is None:
        sigma2 = 1.0 / (num_filters * length)
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    rng = np.random.default_rng(seed)
    weights = rng.normal(0.0, np.sqrt(sigma2), size=(num_filters, length))
    meta = {"sigma2": float(sigma2)}
    if isinstance(seed, (int, np.integer)):
        meta["seed"] = int(seed)
    return Filterbank(weights.astype(np.complex128), hop, "random", meta)


def periodic_hann(length):
    t = np.arange(length)
    return 0.5 - 0.5 * np.cos(2 * np.pi * t / length)


def make_stft(num_channels, window_length, hop, sample_rate=None):
    """Modulated periodic Hann windows, one channel per DFT bin 0..num_channels-1."""
    if num_channels < 1:
        raise ValueError("num_channels must be positive")
    if num_channels > window_length:
        raise ValueError(
            f"num_channels {num_channels} exceeds window length {window_length}"
        )
    t = np.arange(window_length)
    bins = np.arange(num_channels)
    filters = periodic_hann(window_length) * np.exp(
        2j * np.pi * bins[:, None] * t[None, :] / window_length
    )
    meta = {"window": "hann", "window_length": int(window_length),
            "bins": bins.tolist()}
    if sample_rate is not None:
        meta["sample_rate"] = int(sample_rate)
        meta["center_frequencies"] = (bins * sample_rate / window_length).tolist()
    return Filterbank(filters, hop, "stft", meta)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_centers(channels, f_min, f_max):
    """Center frequencies equally spaced on the mel scale, endpoints included."""
    return mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), channels))


@dataclass(frozen=True)
class AuditorySpec:
    """Parameters of the mel-spaced auditory filterbank.

    ``signal_length`` is the length at which the bank is made exactly tight;
    it defaults to ``filter_length``. Tightening returns filters of that
    length.
    """

    channels: int
    sample_rate: int = 16000
    f_min: float = 0.0
    f_max: Optional[float] = None
    filter_length: int = 512
    hop: int = 1
    signal_length: Optional[int] = None

    def __post_init__(self):
        nyquist = self.sample_rate / 2
        f_max = nyquist if self.f_max is None else float(self.f_max)
        object.__setattr__(self, "f_max", f_max)
        if self.channels < 2:
            raise ValueError("an auditory filterbank needs at least 2 channels")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if not 0 <= self.f_min < f_max <= nyquist:
            raise ValueError(
                f"need 0 <= f_min < f_max <= {nyquist}, "
                f"got f_min={self.f_min}, f_max={f_max}"
            )
        if self.filter_length < 2 or self.hop < 1:
            raise ValueError("filter_length must be >= 2 and hop >= 1")
        if self.signal_length is not None and self.signal_length < self.filter_length:
            raise ValueError("signal_length must be at least filter_length")


def _band_response(freqs, centers, j):
    """Power-complementary (Hann in power) response of band j on freqs >= 0.

    Neighboring bands cross at amplitude 1/sqrt(2) (-3 dB); the outermost
    bands extend flat to DC and Nyquist so the whole axis is covered.
    """
    c = centers[j]
    resp = np.zeros_like(freqs)
    if j == 0:
        resp[freqs <= c] = 1.0
    else:
        lo = centers[j - 1]
        m = (freqs >= lo) & (freqs <= c)
        resp[m] = np.cos(0.5 * np.pi * (c - freqs[m]) / (c - lo))
    if j == len(centers) - 1:
        resp[freqs >= c] = 1.0
    else:
        hi = centers[j + 1]
        m = (freqs >= c) & (freqs <= hi)
        resp[m] = np.cos(0.5 * np.pi * (freqs[m] - c) / (hi - c))
    return resp


def _truncate(g, length):
    """Cut ``length`` samples centered on the energy peak and taper the ends."""
    peak = int(np.argmax(np.abs(g)))
    cut = np.roll(g, length // 2 - peak)[:length].copy()
    ramp = max(1, length // 20)
    taper = np.sin(0.5 * np.pi * np.arange(1, ramp + 1) / (ramp + 1)) ** 2
    cut[:ramp] *= taper
    cut[-ramp:] *= taper[::-1]
    return cut


def make_auditory(spec):
    """Tight auditory filterbank with mel-spaced center frequencies.

    Bands centered strictly between DC and Nyquist are analytic (one-sided)
    and get a conjugate twin appended after the ``spec.channels`` primary
    filters; bands at DC or Nyquist are real. The frequency-domain design is
    truncated to ``spec.filter_length`` taps and then made tight by
    `canonical_tight` at ``spec.signal_length``.
    """
    fs = spec.sample_rate
    nyquist = fs / 2
    centers = mel_centers(spec.channels, spec.f_min, spec.f_max)
    design_len = max(8 * spec.filter_length, 1024)
    freqs = np.fft.fftfreq(design_len, 1.0 / fs)
    edge = np.isclose(np.abs(freqs), 0.0) | np.isclose(np.abs(freqs), nyquist)

    primary, twins, twin_bands = [], [], []
    for j in range(spec.channels):
        resp = _band_response(np.abs(freqs), centers, j)
        if 0.0 < centers[j] < nyquist:
            one_sided = np.where(freqs >= 0, resp, 0.0)
            # DC/Nyquist bins are shared with the twin: split their power
            one_sided[edge] = resp[edge] / np.sqrt(2.0)
            g = np.fft.ifft(one_sided)
            primary.append(_truncate(g, spec.filter_length))
            twins.append(np.conj(primary[-1]))
            twin_bands.append(j)
        else:
            primary.append(_truncate(np.fft.ifft(resp), spec.filter_length))

    bands = list(range(spec.channels)) + twin_bands
    meta = {
        "sample_rate": int(fs),
        "f_min": float(spec.f_min),
        "f_max": float(spec.f_max),
        "center_frequencies": centers.tolist(),
        "bands": bands,
        "conjugate": [False] * spec.channels + [True] * len(twins),
        "mel_formula": "2595*log10(1+f/700)",
    }
    fb = Filterbank(np.array(primary + twins), spec.hop, "auditory", meta)
    return canonical_tight(fb, spec.signal_length or spec.filter_length)


def compose_hybrid(fixed, trainable, hop=None, length=None):
    """Channel-wise convolution of a fixed bank with a trainable bank.

    Filter j of the result is ``trainable[j] * fixed[j]``. When ``fixed``
    records conjugate twins (``metadata["bands"]``), ``trainable`` may carry
    one filter per band; each trainable filter is then shared by the band
    and its twin.

    Parameters
    ----------
    fixed, trainable : Filterbank
    hop : int, optional
        Hop of the composed bank; defaults to ``fixed.hop``.
    length : int, optional
        If given, the composition is circular modulo ``length`` (filters of
        the result have exactly that length). Otherwise it is a linear
        convolution of length ``T_fixed + T_trainable - 1``.
    """
    if trainable.num_filters == fixed.num_filters:
        index = np.arange(fixed.num_filters)
    elif trainable.num_filters == fixed.num_bands < fixed.num_filters:
        index = fixed.bands
    else:
        raise ValueError(
            f"channel count mismatch: fixed bank has {fixed.num_filters} filters "
            f"({fixed.num_bands} bands), trainable bank has {trainable.num_filters}"
        )
    psi = fixed.filters
    w = trainable.filters[index]
    out = np.array([np.convolve(psi[j], w[j]) for j in range(fixed.num_filters)])
    if length is not None:
        if length < max(fixed.filter_length, trainable.filter_length):
            raise ValueError("circular length shorter than a parent filter")
        pad = -out.shape[1] % length
        out = np.pad(out, ((0, 0), (0, pad)))
        out = out.reshape(out.shape[0], -1, length).sum(axis=1)
    meta = {
        "fixed_tag": fixed.tag,
        "trainable_tag": trainable.tag,
        "compose_length": None if length is None else int(length),
    }
    for key in ("bands", "conjugate", "center_frequencies", "sample_rate"):
        if key in fixed.metadata:
            meta[key] = fixed.metadata[key]
    return Filterbank(out, fixed.hop if hop is None else hop, "hybrid", meta,
                      (fixed, trainable))


def canonical_tight(fb, n):
    """Canonical tight filterbank at signal length ``n``.

    Every zero-padded filter spectrum is divided by ``sqrt(S[k])`` with
    ``S[k] = sum_j |w_j^[k]|^2``, so the result has a flat spectrum of ones.
    Filters are returned at full length ``n``.
    """
    if fb.filter_length > n:
        raise ValueError(f"filter length {fb.filter_length} exceeds n = {n}")
    spectra = np.fft.fft(fb.filters, n, axis=1)
    power = np.sum(np.abs(spectra) ** 2, axis=0)
    lower, _, k_min, _ = spectrum_bounds(power)
    if lower == 0:
        raise NotAFrameError(
            f"filterbank does not cover the spectrum (S = 0 at bin {k_min})",
            lower_bound=0.0,
        )
    tight = np.fft.ifft(spectra / np.sqrt(power), axis=1)
    meta = dict(fb.metadata, tightened_length=int(n))
    return Filterbank(tight, fb.hop, fb.tag, meta)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def to_document(fb):
    """Plain-dict form of a filterbank (see ``docs/filterbank_format.md``)."""
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "tag": fb.tag,
        "hop": fb.hop,
        "metadata": _jsonable(fb.metadata),
        "filters": [[[float(z.real), float(z.imag)] for z in row]
                    for row in fb.filters],
    }
    if fb.parents is not None:
        doc["parents"] = {"fixed": to_document(fb.parents[0]),
                          "trainable": to_document(fb.parents[1])}
    return doc


def from_document(doc):
    if not isinstance(doc, dict):
        raise FilterbankFormatError("filterbank document must be a JSON object")
    for key in ("format", "version", "tag", "hop", "filters"):
        if key not in doc:
            raise FilterbankFormatError(f"missing field {key!r}")
    if doc["format"] != FORMAT_NAME:
        raise FilterbankFormatError(f"unexpected format {doc['format']!r}")
    if doc["version"] != FORMAT_VERSION:
        raise FilterbankFormatError(
            f"unsupported version {doc['version']!r} (expected {FORMAT_VERSION})"
        )
    try:
        pairs = np.asarray(doc["filters"], dtype=np.float64)
        if pairs.ndim != 3 or pairs.shape[2] != 2:
            raise ValueError("filters must be a J x T x [re, im] array")
        parents = None
        if "parents" in doc:
            parents = (from_document(doc["parents"]["fixed"]),
                       from_document(doc["parents"]["trainable"]))
        return Filterbank(pairs[..., 0] + 1j * pairs[..., 1], doc["hop"],
                          doc["tag"], doc.get("metadata", {}), parents)
    except FilterbankFormatError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise FilterbankFormatError(f"invalid filterbank document: {exc}") from exc


def save(fb, path):
    # float repr is the shortest string that round-trips (at most 17 digits)
    with open(path, "w") as fh:
        json.dump(to_document(fb), fh)
        fh.write("\n")


def load(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FilterbankFormatError(f"{path}: malformed JSON ({exc})") from exc
    return from_document(doc)
