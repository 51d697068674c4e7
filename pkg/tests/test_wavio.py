import numpy as np
import pytest
from scipy.io import wavfile

from hybridfb.errors import WavFormatError
from hybridfb.signal import Signal
from hybridfb.wavio import wav_read, wav_write


def test_float32_round_trip(tmp_path, rng):
    noise = rng.uniform(-1, 1, 16000).astype(np.float32).astype(np.float64)
    path = tmp_path / "noise.wav"
    wav_write(path, Signal(noise, 16000))
    back = wav_read(path)
    assert back.sample_rate == 16000
    assert np.array_equal(back.samples, noise)


def test_pcm16_scaling(tmp_path):
    path = tmp_path / "pcm.wav"
    wavfile.write(path, 8000, np.array([-32768, 0, 16384, 32767], dtype=np.int16))
    x = wav_read(path)
    assert x.samples[0] == -1.0
    np.testing.assert_array_equal(x.samples[:3], [-1.0, 0.0, 0.5])
    assert x.samples[3] < 1.0


def test_pcm16_write(tmp_path):
    path = tmp_path / "pcm.wav"
    wav_write(path, Signal([-1.0, 0.5, 2.0]), encoding="pcm16")
    np.testing.assert_array_equal(wav_read(path).samples, [-1.0, 0.5, 32767 / 32768])


def test_stereo_rejected(tmp_path):
    path = tmp_path / "stereo.wav"
    wavfile.write(path, 16000, np.zeros((10, 2), dtype=np.float32))
    with pytest.raises(WavFormatError, match="unsupported channel count"):
        wav_read(path)


def test_unsupported_encoding(tmp_path):
    path = tmp_path / "int32.wav"
    wavfile.write(path, 16000, np.zeros(10, dtype=np.int32))
    with pytest.raises(WavFormatError, match="encoding"):
        wav_read(path)


def test_not_a_wav(tmp_path):
    path = tmp_path / "junk.wav"
    path.write_bytes(b"definitely not RIFF")
    with pytest.raises(WavFormatError):
        wav_read(path)
