"""Batch command-line interface.

Subcommands
-----------
generate     synthesize one realization and write its waveform CSV
encode       synthesize + encode one realization into a firing-sequence CSV
quantize     design a codebook (JSON) or quantize an encoded sequence (CSV)
reconstruct  decode a (possibly quantized) sequence CSV into a waveform CSV
sweep        rate-distortion sweep over branches and bit depths
distcheck    empirical-vs-induced interval distribution report

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error.
"""

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .errors import ConfigError, NumericalError
from . import experiments as xp
from .quantizers import quantize_intervals_tracked
from .reconstruction import measurements_from_sequence, reconstruct_tem
from .signals import evaluate, generate_realization


def _parse_bits(text):
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"--bits expects comma-separated integers: {text!r}") from exc


def _load(args):
    config = xp.load_config(args.config) if args.config else xp.ExperimentConfig()
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "gamma", None) is not None:
        overrides["gamma"] = args.gamma
    if getattr(args, "bits", None) is not None:
        overrides["bits"] = _parse_bits(args.bits)
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config


def _output_grid(config):
    import numpy as np
    t_start, t_end = config.support
    n = int(np.floor((t_end - t_start) / config.output_grid_step + 0.5)) + 1
    return t_start + config.output_grid_step * np.arange(n)


def _cmd_generate(args):
    config = _load(args)
    process = generate_realization(config.seed, config.omega0, config.support,
                                   config.amplitude_law, config.c,
                                   normalization_grid_step=config.grid_step)
    grid = _output_grid(config)
    xp.write_waveform_csv(args.out, grid, evaluate(process, grid))
    print(f"wrote waveform ({grid.size} samples) to {args.out}")
    return 0


def _cmd_encode(args):
    config = _load(args)
    _, sequence, _ = xp._synthesize(config, config.seed)
    xp.write_sequence_csv(args.out, sequence)
    print(f"wrote {len(sequence)} intervals to {args.out}")
    return 0


def _cmd_quantize(args):
    config = _load(args)
    bits = config.bits[0] if args.bits is None else _parse_bits(args.bits)[0]
    bank = xp.QuantizerBank(config)
    codebook = bank.interval_codebook(config.tem_quantizer, bits)
    if args.infile is None:
        Path(args.out).write_text(codebook.to_json() + "\n", encoding="utf-8")
        print(f"wrote {codebook.designer} codebook ({bits} bits) to {args.out}")
        return 0
    sequence = xp.read_sequence_csv(args.infile)
    _, levels, _ = quantize_intervals_tracked(codebook, sequence.instants)
    from .encoder import FiringSequence
    xp.write_sequence_csv(args.out, FiringSequence(sequence.first_instant_t1, levels))
    print(f"quantized {levels.size} intervals ({bits} bits) to {args.out}")
    return 0


def _cmd_reconstruct(args):
    config = _load(args)
    if args.infile is None:
        raise ConfigError("reconstruct requires --in <sequence.csv>")
    sequence = xp.read_sequence_csv(args.infile)
    measurements = measurements_from_sequence(sequence, config.tem_params)
    times, values = reconstruct_tem(measurements, config.reconstruction_config,
                                    t_eval=_output_grid(config))
    xp.write_waveform_csv(args.out, times, values)
    print(f"wrote reconstruction ({times.size} samples) to {args.out}")
    return 0


def _cmd_sweep(args):
    config = _load(args)
    if args.gamma_sweep:
        records, best_gamma = xp.run_gamma_sweep(config)
        for (branch, bits), gamma in sorted(best_gamma.items()):
            print(f"best gamma for {branch} at {bits} bits: {gamma}")
    else:
        records = xp.run_sweep(config)
    xp.emit(records, args.out, args.format)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _cmd_distcheck(args):
    config = _load(args)
    report = xp.run_distribution_check(config)
    out = Path(args.out)
    hist_path = out.with_name(out.stem + "_histogram.csv")
    density_path = out.with_name(out.stem + "_density.csv")
    xp.write_histogram_csv(hist_path, report.histogram)
    xp.write_density_csv(density_path, report.density)
    payload = {
        "tv_distance": float(f"{report.tv_distance:.6g}"),
        "normalization_certificate": report.normalization_certificate,
        "n_realizations": report.n_realizations,
        "seed": report.seed,
        "histogram_csv": hist_path.name,
        "density_csv": density_path.name,
    }
    out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                   encoding="utf-8")
    print(f"TV distance {report.tv_distance:.4f}; report written to {out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="temquant",
        description="Time-encoding, quantization and reconstruction experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, infile=False, out_required=True):
        p.add_argument("--config", help="JSON config file (defaults otherwise)")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--gamma", type=float, help="override the compander exponent")
        p.add_argument("--bits", help="override the bits list (comma separated)")
        p.add_argument("--out", required=out_required, help="output file path")
        if infile:
            p.add_argument("--in", dest="infile", help="input sequence CSV")

    p = sub.add_parser("generate", help="write one realization's waveform CSV")
    common(p)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("encode", help="encode one realization into a sequence CSV")
    common(p)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("quantize",
                       help="design a codebook or quantize a sequence CSV")
    common(p, infile=True)
    p.set_defaults(func=_cmd_quantize)

    p = sub.add_parser("reconstruct", help="decode a sequence CSV into a waveform")
    common(p, infile=True)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("sweep", help="rate-distortion sweep")
    common(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--gamma-sweep", action="store_true",
                   help="probe several gamma values and keep the best records")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("distcheck", help="distribution comparison report")
    common(p)
    p.set_defaults(func=_cmd_distcheck)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
