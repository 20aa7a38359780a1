# src/cli.py
"""命令行入口: ``run``, ``eigencheck``, ``compare`` 和 ``spectrum``"""
import argparse
import sys
from typing import Any, Dict, List, Optional

import yaml

from src.control.gains import characteristic_polynomial, eigencheck
from src.core import settings
from src.core.app import run_scenario
from src.core.errors import EXIT_OK, EXIT_USAGE, SpeedEmuError
from src.data.report_manager import write_table
from src.data.telemetry import read_telemetry
from src.services.evaluation_service import COMPARE_CHANNELS, compare_runs
from src.services.spectrum_service import dft_amplitude
from src.utils.sim_utils import log

EXIT_FAILURE = 1


def _parse_overrides(pairs: Optional[List[str]]) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise argparse.ArgumentTypeError(f"--set expects key=value, got '{pair}'")
        # YAML scalars, so 'true', '3.5' and '[1, 2]' keep their types
        overrides[key.strip()] = yaml.safe_load(value)
    return overrides


def cmd_run(args: argparse.Namespace) -> int:
    if args.config_pos and args.config and args.config_pos != args.config:
        raise argparse.ArgumentTypeError("config given both positionally and with --config")
    path = args.config_pos or args.config
    overrides = _parse_overrides(args.set)
    if args.seed is not None:
        overrides["run.seed"] = args.seed
    if args.duration is not None:
        overrides["run.duration_s"] = args.duration
    if args.no_progress:
        overrides["run.progress"] = False
    config = settings.load(path, overrides)
    result = run_scenario(config, out_dir=args.out)
    for line in result.report.lines():
        print(line)
    print(f"telemetry: {result.telemetry_path}")
    print(f"report:    {result.report_path}")
    return EXIT_OK


def cmd_eigencheck(args: argparse.Namespace) -> int:
    config = settings.load(args.config, _parse_overrides(args.set))
    elements = config.gains.matrix_elements(config.vehicle)
    report = eigencheck(elements)
    coeffs = characteristic_polynomial(elements)
    print("characteristic polynomial: " + " ".join(f"{c:+.6g}" for c in coeffs))
    for line in report.lines():
        print(line)
    return EXIT_OK if report.stable else EXIT_FAILURE


def cmd_compare(args: argparse.Namespace) -> int:
    run_a = read_telemetry(args.run_a)
    run_b = read_telemetry(args.run_b)
    differences = compare_runs(run_a, run_b, spacing=args.spacing)
    rows = []
    print(f"{'channel':<10} {'rms':>14} {'max':>14}")
    for channel in COMPARE_CHANNELS:
        diff = differences[channel]
        print(f"{channel:<10} {diff.rms:>14.6g} {diff.max:>14.6g}")
        rows.append((channel, diff.rms, diff.max))
    if args.out:
        write_table(args.out, ("channel", "rms", "max"), rows)
    return EXIT_OK


def cmd_spectrum(args: argparse.Namespace) -> int:
    telemetry = read_telemetry(args.run)
    try:
        samples = telemetry[args.channel]
    except KeyError as e:
        print(f"error: {e.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    spectrum = dft_amplitude(samples, times=telemetry["t"])
    freq, amp = spectrum.band(args.f_max)
    peak_f, peak_a = spectrum.peak(f_min=spectrum.frequency[1], f_max=args.f_max)
    print(f"channel {args.channel}: {spectrum.n_samples} samples, DC {spectrum.amplitude[0]:.6g}")
    print(f"peak: {peak_f:.6g} Hz, amplitude {peak_a:.6g}")
    print("frequency_hz,amplitude")
    for f, a in zip(freq, amp):
        print(f"{f:.6g},{a:.6g}")
    if args.out:
        write_table(args.out, ("frequency_hz", "amplitude"), spectrum.rows())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speedemu",
        description="Desk emulation of a high-speed vehicle on a slower four-wheel-steer test vehicle.",
        epilog=settings.help_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="run one scenario", epilog=settings.help_epilog(),
                           formatter_class=argparse.RawDescriptionHelpFormatter)
    p_run.add_argument("config_pos", nargs="?", metavar="config", help="scenario YAML")
    p_run.add_argument("--config", help="scenario YAML (same as the positional argument)")
    p_run.add_argument("--out", help=f"output directory (default run.output_dir, env {settings.OUTPUT_DIR_ENV})")
    p_run.add_argument("--seed", type=int, help="noise seed (run.seed)")
    p_run.add_argument("--duration", type=float, help="run length in s (run.duration_s), 0 = whole maneuver")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a dotted config key")
    p_run.add_argument("--no-progress", action="store_true", help="hide the progress bar")
    p_run.set_defaults(func=cmd_run)

    p_eig = sub.add_parser("eigencheck", help="eigenvalues of the tracking-error dynamics")
    p_eig.add_argument("config", nargs="?", help="scenario YAML (defaults when omitted)")
    p_eig.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a dotted config key")
    p_eig.set_defaults(func=cmd_eigencheck)

    p_cmp = sub.add_parser("compare", help="differences of two runs over path distance")
    p_cmp.add_argument("run_a", help="telemetry CSV")
    p_cmp.add_argument("run_b", help="telemetry CSV")
    p_cmp.add_argument("--spacing", type=float, default=0.1, help="s-grid spacing [m]")
    p_cmp.add_argument("--out", help="write the differences as CSV")
    p_cmp.set_defaults(func=cmd_compare)

    p_spec = sub.add_parser("spectrum", help="single-sided DFT amplitude spectrum of one channel")
    p_spec.add_argument("run", help="telemetry CSV")
    p_spec.add_argument("--channel", default="ay", help="telemetry column (default ay)")
    p_spec.add_argument("--f-max", type=float, default=2.0, help="highest frequency printed [Hz]")
    p_spec.add_argument("--out", help="write the full spectrum as CSV")
    p_spec.set_defaults(func=cmd_spectrum)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 after --help
        return int(e.code or 0)
    if args.verbose:
        log.setLevel("DEBUG")
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as e:
        parser.print_usage(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SpeedEmuError as e:
        log.critical(f"{e.kind} 错误: {e}")
        return e.exit_code
    except ValueError as e:
        # sampling, evaluation and domain errors of the post-processing commands
        log.error(f"处理失败: {e}")
        return EXIT_FAILURE
