"""
twoboson command line.

  twoboson classify      -g G -l L -u M            region labels and predicted (m, n)
  twoboson spectrum      -g G -l L -u M [--K kx,ky] eigenvalues outside the band
  twoboson sweep         --x NAME --y NAME ...      counts over a coupling plane
  twoboson phase-diagram --sign minus --which tau   boundary curves
  twoboson verify        [--checks a,b]             numerical checks, exit 1 on failure

Exit codes: 0 success, 1 verification failure, 2 bad input or configuration.
"""
import argparse
import logging
import sys
from typing import Optional, Sequence, TextIO

from pydantic import ValidationError

from cli.commands import (
    UsageError,
    cmd_classify,
    cmd_phase_diagram,
    cmd_spectrum,
    cmd_sweep,
    cmd_verify,
)
from cli.settings import RunConfig, load_run_config
from spectrum.errors import SpectrumError
from spectrum.models import CouplingTriple, Quasimomentum, Sign

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return a, b


def _int_pair(text: str) -> tuple[int, int]:
    try:
        parts = [int(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected one or two integers, got {text!r}")
    if len(parts) == 1:
        return parts[0], parts[0]
    if len(parts) == 2:
        return parts[0], parts[1]
    raise argparse.ArgumentTypeError(f"expected one or two integers, got {text!r}")


def _run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid", type=int, help="oracle torus size L (even)")
    parser.add_argument("--tol", type=float, dest="rel_tol", help="quadrature relative tolerance")
    parser.add_argument("--format", choices=["csv", "json"])
    parser.add_argument("--threads", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--config", dest="config_file", help="key = value settings file")
    parser.add_argument("--geometry", choices=["edge", "printed"], help="ea boundary geometry")
    parser.add_argument("--calibrate", action="store_true", default=None,
                        help="relabel components from sampled determinant counts")
    parser.add_argument("--samples", type=int, help="calibration samples per component")


def _coupling_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-g", "--gamma", type=float, required=True)
    parser.add_argument("-l", "--lambda", type=float, required=True, dest="lam")
    parser.add_argument("-u", "--mu", type=float, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twoboson", description="Discrete spectrum of two-boson lattice fibers")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="region labels and predicted counts")
    _coupling_options(p)
    _run_options(p)

    p = sub.add_parser("spectrum", help="eigenvalues outside the essential band")
    _coupling_options(p)
    p.add_argument("--K", type=_pair, default=(0.0, 0.0), help="quasimomentum kx,ky")
    _run_options(p)

    p = sub.add_parser("sweep", help="counts over a plane of couplings")
    p.add_argument("--x", dest="x_name", required=True, choices=["gamma", "lambda", "mu"])
    p.add_argument("--y", dest="y_name", required=True, choices=["gamma", "lambda", "mu"])
    p.add_argument("--x-range", type=_pair, required=True)
    p.add_argument("--y-range", type=_pair, required=True)
    p.add_argument("--resolution", type=_int_pair, default=(50, 50), help="N or NX,NY")
    p.add_argument("--fixed", type=float, default=0.0, help="value of the remaining coupling")
    p.add_argument("--oracle-stride", type=int, default=0, help="oracle counts every N grid points")
    _run_options(p)

    p = sub.add_parser("phase-diagram", help="boundary curves of the region partition")
    p.add_argument("--sign", choices=["minus", "plus"], default="minus")
    p.add_argument("--which", choices=["tau", "gamma_slice", "A_boundary", "S_threshold"], required=True)
    p.add_argument("-u", "--mu", type=float, help="fixed μ for gamma_slice")
    p.add_argument("--span", type=float, default=25.0)
    p.add_argument("--points", type=int, default=200)
    _run_options(p)

    p = sub.add_parser("verify", help="run numerical checks")
    p.add_argument("--checks", type=lambda s: [x for x in s.split(",") if x], help="comma-separated check names")
    p.add_argument("--rank-samples", type=int, default=200)
    _run_options(p)
    return parser


def _load(args: argparse.Namespace) -> RunConfig:
    return load_run_config(
        args.config_file,
        rel_tol=args.rel_tol, grid=args.grid, threads=args.threads, format=args.format,
        seed=args.seed, geometry=args.geometry, calibrate=args.calibrate, samples=args.samples,
    )


def _dispatch(args: argparse.Namespace, run: RunConfig, stream: TextIO) -> int:
    if args.command == "classify":
        return cmd_classify(CouplingTriple.of(args.gamma, args.lam, args.mu), run, stream)
    if args.command == "spectrum":
        K = Quasimomentum(k1=args.K[0], k2=args.K[1])
        return cmd_spectrum(CouplingTriple.of(args.gamma, args.lam, args.mu), K, run, stream)
    if args.command == "sweep":
        return cmd_sweep(args.x_name, args.y_name, args.x_range, args.y_range, args.resolution,
                         args.fixed, run, stream, oracle_stride=args.oracle_stride)
    if args.command == "phase-diagram":
        return cmd_phase_diagram(Sign(args.sign), args.which, run, stream,
                                 span=args.span, points=args.points, mu=args.mu)
    return cmd_verify(run, stream, names=args.checks, rank_samples=args.rank_samples)


def main(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None) -> int:
    stream = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        run = _load(args)
        return _dispatch(args, run, stream)
    except (ValidationError, UsageError, SpectrumError, FileNotFoundError) as e:
        logger.error(f"[x] {e}")
        return EXIT_USAGE
