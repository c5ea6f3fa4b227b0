# -*- coding: utf-8 -*-
# License: MIT
# Project: EK Solitary Waves
#
# Command line front end
#   ekwaves analyze  moment curve and stability verdict
#   ekwaves profile  solitary wave profile
#   ekwaves evolve   instability experiment
#   ekwaves models   built-in model families
#
# Exit codes: 0 ok, 1 error, 2 no solitary wave, 3 evolution aborted, 64 bad command line/config

# Python modules
import argparse
import json
import logging
import os
import sys
from typing import Optional, Sequence

# Numeric modules
import numpy as np

# Our modules
from .errors import ConfigError, EKError, ExpressionError, ModelFileError, NoSolitaryWave
from .model import ModelSpec, WaveParameters, builtin_models
from .moment import Tolerances, export_curve, export_report, moment_curve
from .pipeline import ExperimentConfig, Perturbation, run_instability_experiment
from .profile import Direction, ProfileOptions, reconstruct_profile
from .utils import create_logger, fmt

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_WAVE = 2
EXIT_ABORTED = 3
EXIT_USAGE = 64
DEFAULT_MODEL = 'bona-sachs:q=2'


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def positive(text):
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return x


def speed_grid(text):
    """ `start:stop:count` """
    try:
        start, stop, count = text.split(':')
        return list(np.linspace(float(start), float(stop), int(count)))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:count, got `{text}`") from None


def float_list(text):
    try:
        return [float(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got `{text}`") from None


def add_wave_args(p, several_speeds=False):
    p.add_argument('--model', default=DEFAULT_MODEL,
                   help=f"built-in (e.g. {DEFAULT_MODEL}, gross-pitaevskii:alpha=1,beta=1) or model file")
    p.add_argument('--vstar', type=float, default=0.0, help='base state v*')
    p.add_argument('--ustar', type=float, default=0.0, help='base state u*')
    if several_speeds:
        p.add_argument('--c', type=float, nargs='+', default=None, help='wave speeds')
        p.add_argument('--speeds', type=speed_grid, default=None, help='speed grid start:stop:count')
    else:
        p.add_argument('--c', type=float, default=0.0, help='wave speed')
    p.add_argument('--prefer', choices=[d.value for d in Direction], default=None,
                   help='side of v* when both have a wave (default: the closest turning point)')
    p.add_argument('--tol-root', type=positive, default=1e-12, help='relative tolerance of the turning point')
    p.add_argument('--out', default='run', help='output directory')


def build_parser():
    parser = ArgumentParser(prog='ekwaves', description='Euler-Korteweg solitary waves: profiles, moment of '
                            'instability and instability experiments')
    parser.add_argument('-v', '--verbose', action='store_true', help='debug messages')
    parser.add_argument('-q', '--quiet', action='store_true', help='only warnings and errors')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('analyze', help="m(c), m'(c), m''(c) and the stability verdict")
    add_wave_args(p, several_speeds=True)
    p.add_argument('--tol-quad', type=positive, default=1e-10, help='absolute quadrature tolerance')
    p.add_argument('--workers', type=int, default=1, help='speeds evaluated in parallel')

    p = sub.add_parser('profile', help='solitary wave profile')
    add_wave_args(p)
    p.add_argument('--points', type=int, default=4097, help='grid points')
    p.add_argument('--half-width', type=positive, default=None, help='half width of the xi grid')
    p.add_argument('--tail-cut', type=positive, default=1e-10, help='relative amplitude where the tail starts')

    p = sub.add_parser('evolve', help='instability experiment on a periodic domain')
    add_wave_args(p)
    p.add_argument('--L', type=positive, default=40.0, help='half length of the domain')
    p.add_argument('--n', type=int, default=1024, help='grid points (power of two)')
    p.add_argument('--dt', type=positive, default=None, help='time step (default: from the stability rule)')
    p.add_argument('--T', type=positive, default=20.0, help='time horizon')
    p.add_argument('--delta', type=float, default=0.0, help='perturbation amplitude')
    p.add_argument('--width', type=positive, default=None, help='perturbation width (default L/20)')
    p.add_argument('--center', type=float, default=None, help='perturbation center (default: one width right)')
    p.add_argument('--stride', type=int, default=10, help='steps between diagnostics')
    p.add_argument('--snapshots', type=float_list, default=[], help='snapshot times, comma separated')
    p.add_argument('--cfl', type=positive, default=0.5, help='constant of the time step rule')
    p.add_argument('--growth-factor', type=positive, default=10.0, help='growth threshold over d0')
    p.add_argument('--stop-on-growth', action='store_true', help='stop when the threshold is crossed')
    p.add_argument('--no-progress', action='store_true', help="don't show the progress bar")

    sub.add_parser('models', help='list the built-in models')
    return parser


def _prefer(args):
    return Direction(args.prefer) if args.prefer else None


def cmd_analyze(args):
    model = ModelSpec.from_selector(args.model)
    speeds = list(args.c or []) + list(args.speeds or [])
    if args.c is None and args.speeds is None:
        speeds = [0.0]
    tol = Tolerances(root=args.tol_root, quad=args.tol_quad)
    reports = moment_curve(model, args.vstar, speeds, args.ustar, tol, _prefer(args), args.workers)
    export_curve(os.path.join(args.out, 'moment_curve.csv'), reports)
    export_report(os.path.join(args.out, 'report.json'), reports, model)
    for r in reports:
        print(f"c={fmt(r.c)} m={fmt(r.m)} m_prime={fmt(r.m_prime)} m_second={fmt(r.m_second)} "
              f"verdict={r.verdict.value if r.verdict else '-'} status={r.status}")
    if any(r.status == 'NoSolitaryWave' for r in reports):
        return EXIT_NO_WAVE
    if any(not r.ok for r in reports):
        return EXIT_ERROR
    return EXIT_OK


def cmd_profile(args):
    model = ModelSpec.from_selector(args.model)
    params = WaveParameters(v_star=args.vstar, u_star=args.ustar, c=args.c)
    options = ProfileOptions(points=args.points, half_width=args.half_width, tail_cut=args.tail_cut,
                             prefer=_prefer(args), tol_root=args.tol_root)
    profile = reconstruct_profile(model, params, options)
    profile.export_csv(os.path.join(args.out, 'profile.csv'))
    print(f"v_m = {fmt(profile.turning.v_m)}")
    print(f"direction = {profile.turning.direction.value}")
    print(f"v_m_prime = {fmt(profile.turning.v_m_prime)}")
    print(f"decay_rate = {fmt(profile.decay_rate)}")
    print(f"first_integral_residual = {fmt(profile.first_integral_residual)}")
    return EXIT_OK


def cmd_evolve(args):
    model = ModelSpec.from_selector(args.model)
    params = WaveParameters(v_star=args.vstar, u_star=args.ustar, c=args.c)
    config = ExperimentConfig(model=model, params=params, L=args.L, n=args.n, dt=args.dt, T=args.T,
                              perturbation=Perturbation(args.delta, args.width, args.center),
                              sample_stride=args.stride, snapshot_times=tuple(args.snapshots), cfl=args.cfl,
                              growth_factor=args.growth_factor, stop_on_growth=args.stop_on_growth,
                              profile_options=ProfileOptions(prefer=_prefer(args), tol_root=args.tol_root),
                              progress=not args.no_progress)
    result = run_instability_experiment(config)
    result.save(args.out)
    s = result.summary
    print(f"d0 = {fmt(s['d0'])}")
    print(f"d_max = {fmt(s['d_max'])}")
    print(f"growth: {s['growth']}" + (f" (crossing time {fmt(s['crossing_time'])})" if s['crossing_time'] is not None
                                      else ''))
    if s['aborted']:
        print(f"aborted: {s['abort_reason']}, last good time {fmt(s['last_good_time'])}")
        return EXIT_ABORTED
    return EXIT_OK


def cmd_models(args):
    print(json.dumps(builtin_models(), indent=2, sort_keys=True, ensure_ascii=False))
    return EXIT_OK


COMMANDS = {'analyze': cmd_analyze, 'profile': cmd_profile, 'evolve': cmd_evolve, 'models': cmd_models}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    out = getattr(args, 'out', None)
    try:
        if out is not None:
            os.makedirs(out, exist_ok=True)
        create_logger(out, level)
        return COMMANDS[args.command](args)
    except (ModelFileError, ExpressionError, ConfigError) as e:
        logging.error(str(e))
        return EXIT_USAGE
    except OSError as e:
        logging.error(f"{args.command}: {e}")
        return EXIT_USAGE if out is not None and not os.path.isdir(out) else EXIT_ERROR
    except NoSolitaryWave as e:
        logging.error(str(e))
        return EXIT_NO_WAVE
    except EKError as e:
        logging.error(f"{type(e).__name__}: {e}")
        return EXIT_ERROR


if __name__ == '__main__':
    raise SystemExit(main())
