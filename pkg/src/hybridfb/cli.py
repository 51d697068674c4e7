"""Command-line front end.

Every subcommand prints exactly one machine-readable payload (JSON, or CSV
for coefficient dumps) on stdout; diagnostics go to stderr. Exit codes:
0 success, 1 usage error, 2 domain/numeric error, 3 I/O error.
"""

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import filterbank as fbm
from .errors import FilterbankFormatError, NotAFrameError, ResourceLimitError
from .frames import frame_bounds_exact, frame_bounds_fft, reconstruct
from .montecarlo import verify_hybrid_tightness, verify_random_tightness
from .objectives import MCSParams, mcs, recon_snr, si_sdr
from .signal import analysis_values
from .trainer import TrainConfig, enhance, ideal_ratio_mask, tighten
from .wavio import wav_read, wav_write

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_IO = 0, 1, 2, 3
LOG_FLOOR = 1e-10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _num(value):
    """JSON-safe float: non-finite values become null."""
    value = float(value)
    return value if math.isfinite(value) else None


def _emit(payload, out):
    json.dump(payload, out, sort_keys=False)
    out.write("\n")


def _require_frame(bounds):
    if not bounds.is_frame:
        raise NotAFrameError(
            f"filterbank is not a frame (measured A = {bounds.A!r})", bounds.A
        )


def _cmd_generate(args, out):
    kind = args.kind
    if kind == "stft":
        fb = fbm.make_stft(args.channels, args.window_length, args.hop, args.sample_rate)
    elif kind == "auditory":
        spec = fbm.AuditorySpec(
            channels=args.channels, sample_rate=args.sample_rate, f_min=args.f_min,
            f_max=args.f_max, filter_length=args.filter_length, hop=args.hop,
            signal_length=args.signal_length,
        )
        fb = fbm.make_auditory(spec)
    elif kind == "random":
        fb = fbm.make_random(args.channels, args.length, args.sigma2, args.hop, args.seed)
    elif kind == "delta":
        fb = fbm.make_delta(args.channels, args.length, args.hop)
    else:
        if args.fixed is None:
            raise UsageError("--kind hybrid requires --fixed")
        fixed = fbm.load(args.fixed)
        if args.trainable is not None:
            trainable = fbm.load(args.trainable)
        else:
            trainable = fbm.make_random(fixed.num_bands, args.length, args.sigma2,
                                        seed=args.seed)
        fb = fbm.compose_hybrid(fixed, trainable, hop=args.hop,
                                length=args.signal_length)
    fbm.save(fb, args.out)
    _emit({"out": args.out, "tag": fb.tag, "filters": fb.num_filters,
           "filter_length": fb.filter_length, "hop": fb.hop}, out)


def _cmd_bounds(args, out):
    fb = fbm.load(args.fb)
    n = args.signal_length
    if args.hop_exact:
        bounds = frame_bounds_exact(fb, n)
    else:
        bounds = frame_bounds_fft(fb, n)
    _emit({"A": bounds.A, "B": bounds.B, "kappa": _num(bounds.kappa),
           "is_frame": bounds.is_frame, "argmin_bin": bounds.argmin_bin,
           "argmax_bin": bounds.argmax_bin,
           "method": "exact" if args.hop_exact else "fft"}, out)


def _write_coefficients(values, log_mag, fh):
    writer = csv.writer(fh)
    frames, channels = values.shape
    n_idx = np.repeat(np.arange(frames), channels)
    j_idx = np.tile(np.arange(channels), frames)
    flat = values.ravel()
    if log_mag:
        writer.writerow(["n", "j", "log_magnitude"])
        mag = 20.0 * np.log10(np.abs(flat) + LOG_FLOOR)
        writer.writerows(zip(n_idx.tolist(), j_idx.tolist(), map(repr, mag.tolist())))
    else:
        writer.writerow(["n", "j", "re", "im"])
        writer.writerows(zip(n_idx.tolist(), j_idx.tolist(),
                             map(repr, flat.real.tolist()), map(repr, flat.imag.tolist())))


def _cmd_analyze(args, out):
    fb = fbm.load(args.fb)
    x = wav_read(args.input)
    values = analysis_values(fb.filters, fb.hop, x.samples)
    if args.out is None:
        _write_coefficients(values, args.log_mag, out)
        return
    with open(args.out, "w", newline="") as fh:
        _write_coefficients(values, args.log_mag, fh)
    _emit({"out": args.out, "frames": values.shape[0], "channels": values.shape[1],
           "hop": fb.hop, "format": "log_magnitude" if args.log_mag else "complex"}, out)


def _fit_to_length(fb, n):
    """Re-tighten a bank made tight at another length (tightness is length-specific)."""
    tight_len = fb.metadata.get("tightened_length")
    if tight_len is None or tight_len == n:
        return fb, None
    return fbm.canonical_tight(fb, n), n


def _cmd_roundtrip(args, out):
    fb = fbm.load(args.fb)
    x = wav_read(args.input)
    fb, retightened = _fit_to_length(fb, len(x))
    _require_frame(frame_bounds_fft(fb, len(x)))
    x_hat, error = reconstruct(fb, x)
    _emit({"recon_error": error, "recon_snr_db": _num(recon_snr(x, x_hat))
           if np.any(x.samples) else None, "retightened_at": retightened}, out)


def _cmd_tighten(args, out):
    fb = fbm.load(args.fb)
    n = args.signal_length or fb.metadata.get("tightened_length") or fb.filter_length
    cfg = TrainConfig(learning_rate=args.lr, steps=args.steps, optimizer=args.optimizer,
                      weight_decay=args.weight_decay)
    report = tighten(fb, n, cfg)
    fbm.save(report.filterbank, args.out)
    if args.trace:
        report.to_csv(args.trace)
    _emit({"initial_kappa": report.trace[0].kappa,
           "final_kappa": report.trace[report.best_step].kappa,
           "best_step": report.best_step, "converged": report.converged,
           "steps": cfg.steps, "signal_length": n, "out": args.out}, out)


def _cmd_mcs(args, out):
    fb = fbm.load(args.fb)
    ref, est = wav_read(args.ref), wav_read(args.est)
    params = MCSParams(c=args.c, gamma=args.gamma, beta=args.beta)
    bounds = frame_bounds_fft(fb, len(ref))
    value = mcs(ref, est, fb, params)
    payload = {"mcs": value, "kappa": _num(bounds.kappa), "mcs_beta": None,
               "c": params.c, "gamma": params.gamma, "beta": params.beta,
               "reduction": "sum"}
    if bounds.is_frame:
        payload["mcs_beta"] = value + params.beta * bounds.kappa
    elif params.beta > 0:
        _require_frame(bounds)
    _emit(payload, out)


def _cmd_enhance(args, out):
    fb = fbm.load(args.fb)
    noisy, clean = wav_read(args.noisy), wav_read(args.clean)
    if len(noisy) != len(clean):
        raise ValueError("noisy and clean files differ in length")
    _require_frame(frame_bounds_fft(fb, len(noisy)))
    mask = ideal_ratio_mask(clean, noisy, fb)
    enhanced = enhance(fb, noisy, mask)
    wav_write(args.out, enhanced)
    _emit({"si_sdr_in": _num(si_sdr(clean, noisy)),
           "si_sdr_out": _num(si_sdr(clean, enhanced)), "out": args.out}, out)


def _cmd_metrics(args, out):
    ref, est = wav_read(args.ref), wav_read(args.est)
    _emit({"si_sdr": _num(si_sdr(ref, est)), "recon_snr_db": _num(recon_snr(ref, est))},
          out)


def _cmd_verify(args, out):
    if args.mode == "random":
        est = verify_random_tightness(args.J, args.T, args.sigma2, args.N,
                                      args.trials, args.seed)
    else:
        if args.fb is not None:
            fixed = fbm.load(args.fb)
        else:
            spec = fbm.AuditorySpec(channels=args.J, sample_rate=args.sample_rate,
                                    filter_length=min(args.filter_length, args.N),
                                    signal_length=args.N)
            fixed = fbm.make_auditory(spec)
        bounds = frame_bounds_fft(fixed, args.N)
        if not bounds.kappa <= 1 + 1e-6:
            raise NotAFrameError(
                f"fixed filterbank is not tight (kappa = {bounds.kappa!r}, "
                f"measured A = {bounds.A!r})", bounds.A)
        est = verify_hybrid_tightness(fixed, args.T, args.sigma2, args.N,
                                      args.trials, args.seed)
    _emit(dict(est.to_dict(), mode=args.mode), out)


def build_parser():
    parser = _Parser(prog="hybridfb", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="construct a filterbank and save it as JSON")
    p.add_argument("--kind", required=True,
                   choices=["stft", "auditory", "random", "hybrid", "delta"])
    p.add_argument("--out", required=True)
    p.add_argument("--channels", "--J", type=int, default=32)
    p.add_argument("--length", "--T", type=int, default=16,
                   help="filter length for random, delta and hybrid-trainable banks")
    p.add_argument("--window-length", type=int, default=64)
    p.add_argument("--hop", type=int, default=None)
    p.add_argument("--sample-rate", type=int, default=16000)
    p.add_argument("--f-min", type=float, default=0.0)
    p.add_argument("--f-max", type=float, default=None)
    p.add_argument("--filter-length", type=int, default=512)
    p.add_argument("--signal-length", type=int, default=None,
                   help="auditory: length at which to tighten; hybrid: circular length")
    p.add_argument("--sigma2", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fixed", help="hybrid: fixed filterbank JSON")
    p.add_argument("--trainable", help="hybrid: trainable filterbank JSON")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("bounds", help="frame bounds and condition number")
    p.add_argument("--fb", required=True)
    p.add_argument("--signal-length", type=int, required=True)
    p.add_argument("--hop-exact", action="store_true",
                   help="dense decimated frame operator instead of the DFT spectrum")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("analyze", help="encode a WAV file, coefficients as CSV")
    p.add_argument("--fb", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.add_argument("--log-mag", action="store_true",
                   help=f"write 20*log10(|c| + {LOG_FLOOR:g}) instead of re, im")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("roundtrip", help="encode and decode with the transpose")
    p.add_argument("--fb", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=_cmd_roundtrip)

    p = sub.add_parser("tighten", help="minimize kappa over the trainable filters")
    p.add_argument("--fb", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trace")
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--optimizer", choices=["adaptive_moments", "plain_sgd"],
                   default="adaptive_moments")
    p.add_argument("--weight-decay", type=float, default=0.0)
    p.add_argument("--signal-length", type=int, default=None)
    p.set_defaults(func=_cmd_tighten)

    p = sub.add_parser("mcs", help="mixed compressed spectral loss between two WAVs")
    p.add_argument("--fb", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--est", required=True)
    p.add_argument("--c", type=float, default=0.3)
    p.add_argument("--gamma", type=float, default=0.3)
    p.add_argument("--beta", type=float, default=1e-5)
    p.set_defaults(func=_cmd_mcs)

    p = sub.add_parser("enhance", help="oracle ideal-ratio-mask enhancement")
    p.add_argument("--fb", required=True)
    p.add_argument("--noisy", required=True)
    p.add_argument("--clean", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_enhance)

    p = sub.add_parser("metrics", help="SI-SDR and reconstruction SNR between two WAVs")
    p.add_argument("--ref", required=True)
    p.add_argument("--est", required=True)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("verify-theorem1",
                       help="Monte Carlo check of tightness in expectation")
    p.add_argument("--mode", choices=["random", "hybrid"], required=True)
    p.add_argument("--J", type=int, default=4)
    p.add_argument("--T", type=int, default=8)
    p.add_argument("--sigma2", type=float, default=1 / 32)
    p.add_argument("--N", type=int, default=64)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fb", help="hybrid: tight fixed filterbank JSON")
    p.add_argument("--sample-rate", type=int, default=16000)
    p.add_argument("--filter-length", type=int, default=64)
    p.set_defaults(func=_cmd_verify)
    return parser


def run(argv=None, out=None):
    """Run the CLI and return its exit code."""
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "hop", 1) is None and args.kind != "hybrid":
            args.hop = args.window_length // 2 if args.kind == "stft" else 1
        args.func(args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    except (FilterbankFormatError, OSError) as exc:
        print(f"hybridfb: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, ResourceLimitError) as exc:
        print(f"hybridfb: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"hybridfb: invalid argument: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main():
    sys.exit(run())
