"""Mono WAV reading and writing (16-bit PCM and 32-bit IEEE float)."""

import numpy as np
from scipy.io import wavfile

from .errors import WavFormatError
from .signal import Signal


def wav_read(path):
    """Read a mono WAV file into a `Signal`.

    16-bit PCM is scaled by 1/32768 into [-1, 1); float32 samples are
    widened to double precision unchanged.
    """
    try:
        rate, data = wavfile.read(path)
    except (ValueError, EOFError) as exc:
        raise WavFormatError(f"{path}: not a readable RIFF/WAVE file ({exc})") from exc
    if data.ndim != 1:
        raise WavFormatError(
            f"{path}: unsupported channel count {data.shape[1]} (mono only)"
        )
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise WavFormatError(
            f"{path}: unsupported sample encoding {data.dtype} "
            "(expected 16-bit PCM or 32-bit float)"
        )
    if samples.size == 0:
        raise WavFormatError(f"{path}: file contains no samples")
    return Signal(samples, int(rate))


def wav_write(path, signal, encoding="float32"):
    """Write a `Signal` as mono WAV.

    ``encoding="pcm16"`` rounds to 16-bit integers, clipping to the
    representable range.
    """
    samples = signal.samples
    if encoding == "float32":
        data = samples.astype(np.float32)
    elif encoding == "pcm16":
        data = np.clip(np.round(samples * 32768.0), -32768, 32767).astype(np.int16)
    else:
        raise ValueError(f"unknown WAV encoding {encoding!r}")
    wavfile.write(path, signal.sample_rate, data)
