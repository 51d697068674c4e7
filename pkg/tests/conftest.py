import numpy as np
import pytest

from hybridfb.filterbank import Filterbank
from hybridfb.frames import frame_bounds_fft


def dense_analysis(filters, hop, n):
    """Analysis operator as an explicit (frames*J, N) complex matrix.

    Built from the modular sum directly, without FFTs, so it can check the
    fast paths independently. Row ``m*J + j`` holds filter j at frame m.
    """
    filters = np.atleast_2d(np.asarray(filters, dtype=complex))
    num, length = filters.shape
    frames = n // hop
    mat = np.zeros((frames * num, n), dtype=complex)
    for m in range(frames):
        for j in range(num):
            for k in range(length):
                mat[m * num + j, (m * hop - k) % n] += filters[j, k]
    return mat


def fd_kappa_gradient(filters, n, h=1e-6):
    """Central differences of kappa over real and imaginary parts of every entry."""
    def kappa(f):
        s = np.sum(np.abs(np.fft.fft(f, n, axis=1)) ** 2, axis=0)
        return s.max() / s.min()

    grad = np.zeros(filters.shape, dtype=complex)
    for idx in np.ndindex(filters.shape):
        for unit in (1.0, 1j):
            plus, minus = filters.copy(), filters.copy()
            plus[idx] += unit * h
            minus[idx] -= unit * h
            d = (kappa(plus) - kappa(minus)) / (2 * h)
            grad[idx] += d if unit == 1.0 else 1j * d
    return grad


def non_degenerate_banks(count, num_filters, length, n, complex_filters=False, seed=0):
    """Gaussian banks whose extreme spectral values are separated from the rest."""
    r = np.random.default_rng(seed)
    banks = []
    while len(banks) < count:
        filters = r.normal(size=(num_filters, length))
        if complex_filters:
            filters = filters + 1j * r.normal(size=(num_filters, length))
        fb = Filterbank(filters)
        s = np.sort(frame_bounds_fft(fb, n).spectrum)
        # conjugate-symmetric spectra of real filters pair up bins k and N-k,
        # so use the distinct values when checking for ties
        vals = np.unique(np.round(s, 12))
        if (vals[1] - vals[0] > 1e-3 * vals[-1]) and (vals[-1] - vals[-2] > 1e-3 * vals[-1]):
            banks.append(fb)
    return banks


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number])
