"""Convolutional audio encoders with frame-theoretic stability control."""

from .errors import (FilterbankFormatError, NotAFrameError, ResourceLimitError,
                     TrainingDivergedError, WavFormatError)
from .filterbank import (AuditorySpec, Filterbank, canonical_tight, compose_hybrid,
                         load, make_auditory, make_delta, make_random, make_stft,
                         save)
from .frames import (FrameBounds, frame_bounds_exact, frame_bounds_fft, is_tight,
                     kappa_gradient, reconstruct)
from .montecarlo import (TightnessEstimate, verify_hybrid_tightness,
                         verify_random_tightness)
from .objectives import MCSParams, mcs, mcs_beta, recon_snr, si_sdr
from .signal import (Coefficients, Signal, analyze, circular_convolve, dft, idft,
                     synthesize)
from .trainer import (TrainConfig, TrainReport, enhance, fit_hybrid,
                      ideal_ratio_mask, tighten)
from .wavio import wav_read, wav_write

__version__ = "0.1.0"
