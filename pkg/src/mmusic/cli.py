"""Command line entry point.

::

    mmusic run SCENARIO.yaml --out DIR
    mmusic profile SAMPLES MASK --radar frequency_step=1.875e6,start_frequency=10e9
    mmusic masks gen --pulses 512 --random 300 --seed 7 --out mask.txt
    mmusic masks gen --pulses 512 --block 100:206 --block 350:456

Exit status is 0 on success, 1 for bad configuration or arguments and 2 for
failures inside the estimation pipeline.
"""

import argparse
import sys

from . import __version__
from .estimators import MMusicProfiler, OMPProfiler
from .exceptions import InvalidInputError, MMusicError
from .io import (
    emit_profile_plotdata,
    format_mask,
    format_plotdata,
    format_profile,
    read_mask,
    read_samples,
)
from .scenario import ScenarioError, load_scenario, run_scenario, summarize
from .signal_model import AvailabilityMask, MaskedSamples, make_block_mask, make_random_mask

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

RADAR_KEYS = ("frequency_step", "start_frequency")


class ConfigError(Exception):
    pass


def _parse_radar(text):
    params = {}
    if not text:
        return params
    for item in text.split(","):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in RADAR_KEYS:
            raise ConfigError(
                f"--radar expects key=value pairs with keys {', '.join(RADAR_KEYS)}, got {item!r}"
            )
        try:
            params[key] = float(value)
        except ValueError:
            raise ConfigError(f"--radar {key}: not a number: {value!r}") from None
    return params


def _parse_block(text):
    start, sep, stop = text.partition(":")
    try:
        if not sep:
            raise ValueError
        return int(start), int(stop)
    except ValueError:
        raise argparse.ArgumentTypeError(f"block must be START:STOP, got {text!r}") from None


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_run(args):
    try:
        scenario = load_scenario(args.scenario)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario: {exc}") from None
    result = run_scenario(scenario, args.out, plot_trials=args.plot_trials)
    for method in scenario.methods:
        row = summarize(result, method)
        print(
            f"{method}: trials={row[1]} failed={row[2]} order_correct={row[3]:.2f} "
            f"median_spurious_peaks={row[6]:g}"
        )
    print(f"outputs written to {args.out}")
    return EXIT_OK


def cmd_profile(args):
    radar = _parse_radar(args.radar)
    try:
        samples = read_samples(args.samples)
        mask = read_mask(args.mask)
        if len(mask) != samples.size:
            raise InvalidInputError(
                f"mask has {len(mask)} flags but samples file has {samples.size} pulses"
            )
        data = MaskedSamples(samples, mask)
    except OSError as exc:
        raise ConfigError(str(exc)) from None
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from None

    if args.method == "mmusic":
        est = MMusicProfiler(**radar, order_selector=args.order_selector)
        if args.n_scatterers is not None:
            est.set_params(n_scatterers=args.n_scatterers)
    else:
        est = OMPProfiler(**radar)
        if args.n_scatterers is not None:
            est.set_params(max_atoms=args.n_scatterers)
    est.fit(data)

    if args.plot_resolution is not None:
        config = est._radar(len(data))
        series = emit_profile_plotdata(
            est.profile_, args.plot_resolution, args.plot_span or config.unambiguous_range
        )
        _write(format_plotdata(series), args.out)
    else:
        _write(format_profile(est.profile_), args.out)
    return EXIT_OK


def cmd_masks_gen(args):
    try:
        if args.random is not None:
            mask = make_random_mask(args.pulses, args.random, args.seed)
        elif args.block:
            mask = make_block_mask(args.pulses, args.block)
        else:
            mask = AvailabilityMask.full(args.pulses)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _write(format_mask(mask), args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mmusic",
        description="Range profiling of stepped-frequency radar data with missing pulses.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a Monte Carlo scenario file")
    p.add_argument("scenario")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--plot-trials", type=int, default=1, help="write plot series for the first N trials"
    )
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("profile", help="estimate a range profile from a samples file")
    p.add_argument("samples", help="text file, one 'real,imag' pair per pulse")
    p.add_argument("mask", help="text file, one 0/1 flag per pulse")
    p.add_argument("--radar", default="", help="e.g. frequency_step=1.875e6,start_frequency=10e9")
    p.add_argument("--method", choices=("mmusic", "omp"), default="mmusic")
    p.add_argument("--order-selector", choices=("aic", "threshold"), default="aic")
    p.add_argument("--n-scatterers", type=int, help="fix the model order")
    p.add_argument("--plot-resolution", type=float, help="emit an impulse series with this range step (m)")
    p.add_argument("--plot-span", type=float, help="range span of the impulse series (m)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("masks", help="mask utilities")
    msub = p.add_subparsers(dest="masks_command", required=True)
    g = msub.add_parser("gen", help="write a mask file")
    g.add_argument("--pulses", type=int, required=True)
    kind = g.add_mutually_exclusive_group()
    kind.add_argument("--random", type=int, metavar="VALID", help="number of valid pulses")
    kind.add_argument(
        "--block", type=_parse_block, action="append", metavar="START:STOP",
        help="missing pulse interval (repeatable)",
    )
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="output file (default: stdout)")
    g.set_defaults(func=cmd_masks_gen)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; those are configuration errors here
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MMusicError, ArithmeticError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
