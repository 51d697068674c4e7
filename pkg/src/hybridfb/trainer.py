"""Training of trainable filters and the oracle-mask enhancement pipeline.

The condition number is differentiated analytically (`kappa_gradient`); the
loss of the encoder-mask-decoder pipeline is differentiated by central
finite differences, which is affordable for the small banks trained here.
"""

import csv
from dataclasses import dataclass, field
from typing import List, NamedTuple

import numpy as np

from .errors import NotAFrameError, ResourceLimitError, TrainingDivergedError
from .filterbank import compose_hybrid
from .frames import frame_bounds_fft, kappa_gradient
from .objectives import MCSParams, compress
from .optim import make_optimizer
from .signal import Signal, analysis_values, as_samples, synthesis_values

MAX_FD_PARAMETERS = 512


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-4
    steps: int = 100
    optimizer: str = "adaptive_moments"
    weight_decay: float = 0.0
    seed: int = 0
    grad_mode: str = "analytic_kappa_only"
    fd_step: float = 1e-6

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.steps < 1:
            raise ValueError("steps must be a positive integer")
        if self.optimizer not in ("plain_sgd", "adaptive_moments"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.grad_mode not in ("analytic_kappa_only", "finite_difference_full"):
            raise ValueError(f"unknown grad_mode {self.grad_mode!r}")
        if not 0 < self.fd_step < 1e-2:
            raise ValueError("fd_step must be small and positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be nonnegative")


class TraceRow(NamedTuple):
    step: int
    loss: float
    mcs_term: float
    kappa: float
    grad_norm: float


@dataclass
class TrainReport:
    """Per-step trace (initial state included) and the resulting filterbank."""

    trace: List[TraceRow]
    filterbank: object
    converged: bool = False
    best_step: int = field(default=0)

    @property
    def kappas(self):
        return np.array([row.kappa for row in self.trace])

    @property
    def losses(self):
        return np.array([row.loss for row in self.trace])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TraceRow._fields)
            for row in self.trace:
                writer.writerow([row.step] + [repr(float(v)) for v in row[1:]])


class _Parameters:
    """Flat real view of the trainable filters of a bank.

    Real-valued trainable filters are optimized in their real parts only so
    they stay real; complex filters expose real and imaginary parts.
    """

    def __init__(self, fb, trainable_mask=None):
        self.fb = fb
        self.hybrid = fb.parents is not None
        filters = fb.parents[1].filters if self.hybrid else fb.filters
        self.shape = filters.shape
        self.real_only = not np.any(filters.imag)
        mask = (np.ones(self.shape[0], dtype=bool) if trainable_mask is None
                else np.asarray(trainable_mask, dtype=bool))
        if mask.shape != (self.shape[0],):
            raise ValueError(f"trainable_mask needs one flag per filter ({self.shape[0]})")
        self.mask = mask
        entry_mask = np.repeat(mask, self.shape[1])
        self.active = entry_mask if self.real_only else np.concatenate([entry_mask] * 2)
        self.initial = self.pack(filters)

    @property
    def size(self):
        return int(self.active.sum())

    def pack(self, filters):
        flat = filters.ravel()
        if self.real_only:
            return flat.real.copy()
        return np.concatenate([flat.real, flat.imag])

    def unpack(self, vec):
        if self.real_only:
            return vec.reshape(self.shape).astype(np.complex128)
        half = vec.size // 2
        return (vec[:half] + 1j * vec[half:]).reshape(self.shape)

    def build(self, vec):
        filters = self.unpack(vec)
        if self.hybrid:
            return self.fb.with_trainable(filters)
        return self.fb.with_filters(filters)


def _update(optimizer, params, vec, grad):
    new = optimizer.step(vec[params.active], grad[params.active])
    out = vec.copy()
    out[params.active] = new
    return out


def tighten(fb, n, cfg=TrainConfig(), trainable_mask=None, tol=1e-6):
    """Minimize the condition number of ``fb`` over its trainable filters.

    The returned report's filterbank is the iterate with the lowest kappa,
    so it never ends worse than it started. Iteration stops updating once
    ``kappa <= 1 + tol``; the trace still has ``cfg.steps + 1`` rows.

    Raises
    ------
    NotAFrameError
        If the initial bank is not a frame.
    TrainingDivergedError
        If an iterate stops being a frame.
    """
    params = _Parameters(fb, trainable_mask)
    optimizer = make_optimizer(cfg.optimizer, cfg.learning_rate, cfg.weight_decay)
    vec = params.initial.copy()
    current = fb
    trace = []
    best = (np.inf, fb, 0)
    converged = False
    for step in range(cfg.steps + 1):
        try:
            kg = kappa_gradient(current, n, params.mask)
        except NotAFrameError:
            if step == 0:
                raise
            raise TrainingDivergedError(
                f"filterbank left the frame set (A = 0) at step {step}", step
            ) from None
        grad = params.pack(kg.grad)
        trace.append(TraceRow(step, kg.kappa, 0.0, kg.kappa,
                              float(np.linalg.norm(grad[params.active]))))
        if kg.kappa < best[0]:
            best = (kg.kappa, current, step)
        if kg.kappa <= 1 + tol:
            converged = True
            last = trace[-1]
            trace.extend(last._replace(step=s) for s in range(step + 1, cfg.steps + 1))
            break
        if step < cfg.steps:
            vec = _update(optimizer, params, vec, grad)
            current = params.build(vec)
    return TrainReport(trace, best[1], converged, best[2])


def ideal_ratio_mask(clean, noisy, fb, eps=1e-12):
    """``|Phi clean| / max(|Phi noisy|, eps)`` clipped to [0, 1]."""
    clean, noisy = as_samples(clean), as_samples(noisy)
    if clean.shape != noisy.shape:
        raise ValueError(f"length mismatch: {clean.size} vs {noisy.size}")
    num = np.abs(analysis_values(fb.filters, fb.hop, clean))
    den = np.maximum(np.abs(analysis_values(fb.filters, fb.hop, noisy)), eps)
    return np.clip(num / den, 0.0, 1.0)


def _decoder_gain(fb, n):
    bounds = frame_bounds_fft(fb, n)
    if not bounds.is_frame:
        raise NotAFrameError("decoder undefined: not a frame", lower_bound=bounds.A)
    # alias-free part of the decimated frame operator is S / hop
    return fb.hop / bounds.A


def enhance(fb, noisy, mask):
    """Encode, apply a pointwise mask and decode with the scaled transpose."""
    rate = noisy.sample_rate if isinstance(noisy, Signal) else 16000
    noisy = as_samples(noisy)
    coeffs = analysis_values(fb.filters, fb.hop, noisy)
    mask = np.asarray(mask, dtype=np.float64)
    if mask.shape != coeffs.shape:
        raise ValueError(f"mask shape {mask.shape} does not match coefficients {coeffs.shape}")
    gain = _decoder_gain(fb, noisy.size)
    return Signal(gain * synthesis_values(fb.filters, fb.hop, mask * coeffs, noisy.size),
                  rate)


def _pipeline_mcs(fb, noisy, clean, params):
    """Mean MCS between clean signals and their oracle-mask enhancements.

    ``noisy`` and ``clean`` are stacked ``(pairs, N)`` arrays.
    """
    n = noisy.shape[-1]
    gain = _decoder_gain(fb, n)
    c_noisy = analysis_values(fb.filters, fb.hop, noisy)
    c_clean = analysis_values(fb.filters, fb.hop, clean)
    mask = np.clip(np.abs(c_clean) / np.maximum(np.abs(c_noisy), 1e-12), 0.0, 1.0)
    est = gain * synthesis_values(fb.filters, fb.hop, mask * c_noisy, n)
    c_est = analysis_values(fb.filters, fb.hop, est)
    ref_c, est_c = compress(c_clean, params.c), compress(c_est, params.c)
    phase_term = np.sum(np.abs(ref_c - est_c) ** 2, axis=(-2, -1))
    mag_term = np.sum((np.abs(ref_c) - np.abs(est_c)) ** 2, axis=(-2, -1))
    per_pair = params.gamma * phase_term + (1.0 - params.gamma) * mag_term
    return float(np.mean(per_pair))


def central_difference(func, vec, active, step):
    """Central finite-difference gradient of ``func`` over the active coordinates."""
    grad = np.zeros_like(vec)
    for i in np.flatnonzero(active):
        probe = vec.copy()
        probe[i] = vec[i] + step
        f_plus = func(probe)
        probe[i] = vec[i] - step
        f_minus = func(probe)
        grad[i] = (f_plus - f_minus) / (2.0 * step)
    return grad


def fit_hybrid(fixed, trainable, pairs, params=MCSParams(), cfg=None, hop=None):
    """Fit the trainable part of a hybrid bank to minimize MCS plus ``beta * kappa``.

    Each step enhances every noisy signal with the ideal ratio mask computed
    on the current hybrid encoder, scores the result against the clean
    signal, and descends the mean loss. The hybrid is composed circularly at
    the signal length.

    Parameters
    ----------
    fixed, trainable : Filterbank
    pairs : sequence of (noisy, clean)
    params : MCSParams
    cfg : TrainConfig
        Must use ``grad_mode="finite_difference_full"``.
    hop : int, optional
        Hop of the hybrid; defaults to ``fixed.hop``.
    """
    cfg = cfg or TrainConfig(grad_mode="finite_difference_full")
    if cfg.grad_mode != "finite_difference_full":
        raise ValueError("fit_hybrid requires grad_mode='finite_difference_full'")
    if not pairs:
        raise ValueError("need at least one (noisy, clean) pair")
    arrays = [(as_samples(noisy), as_samples(clean)) for noisy, clean in pairs]
    n = arrays[0][0].size
    if any(a.size != n or b.size != n for a, b in arrays):
        raise ValueError("all signals must have equal length")
    noisy = np.stack([a for a, _ in arrays])
    clean = np.stack([b for _, b in arrays])

    fb = compose_hybrid(fixed, trainable, hop=hop, length=n)
    p = _Parameters(fb)
    if p.size > MAX_FD_PARAMETERS:
        raise ResourceLimitError(
            f"{p.size} trainable parameters exceed the finite-difference limit "
            f"{MAX_FD_PARAMETERS}; reduce the number of channels or the filter length"
        )
    optimizer = make_optimizer(cfg.optimizer, cfg.learning_rate, cfg.weight_decay)

    def mcs_of(vec):
        return _pipeline_mcs(p.build(vec), noisy, clean, params)

    vec = p.initial.copy()
    trace = []
    for step in range(cfg.steps + 1):
        try:
            kg = kappa_gradient(fb, n)
        except NotAFrameError:
            if step == 0:
                raise
            raise TrainingDivergedError(
                f"hybrid filterbank left the frame set at step {step}", step
            ) from None
        mcs_term = _pipeline_mcs(fb, noisy, clean, params)
        grad = central_difference(mcs_of, vec, p.active, cfg.fd_step)
        grad = grad + params.beta * p.pack(kg.grad)
        trace.append(TraceRow(step, mcs_term + params.beta * kg.kappa, mcs_term,
                              kg.kappa, float(np.linalg.norm(grad[p.active]))))
        if step < cfg.steps:
            vec = _update(optimizer, p, vec, grad)
            fb = p.build(vec)
    return TrainReport(trace, fb, best_step=int(np.argmin([r.loss for r in trace])))
