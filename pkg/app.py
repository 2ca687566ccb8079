"""Command line for the q-exponential Turán certifier.

Three modes share one set of grid flags:

    scan (default)  verdicts over a (q, n, z) box for kind I or E
    --sharpness     deviation from the sharp constant along z -> 0
    --alzer         classical e^x verdicts over an (n, x) box, x read from the z flags

Exit codes: 0 all certified, 1 some point violated, 2 some point
indeterminate, 64 bad arguments, 74 output could not be written.
"""
import argparse
import logging
import sys

from modules.scanner import (CLASSICAL_KIND, EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VIOLATED, GridSpec,
                             emit_csv, emit_sharpness, scan, sharpness_sequence)
from utils.data_exporter import DataExporter
from utils.errors import GridSpecError, QTuranError
from utils.record_filter import RecordFilter
from utils.settings import SHARPNESS_DEFAULTS

logger = logging.getLogger(__name__)


class UsageArgumentParser(argparse.ArgumentParser):
    """argparse that reports bad arguments with exit code 64"""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def build_parser():
    parser = UsageArgumentParser(
        prog='qturan',
        description='Certify Turán-type inequalities for the remainders of the q-exponentials.',
    )
    parser.add_argument('--kind', choices=['I', 'E'], default='I',
                        help='I: remainders of e(q;z); E: remainders of E(q;z)')
    parser.add_argument('--q-min', type=float)
    parser.add_argument('--q-max', type=float)
    parser.add_argument('--q-steps', type=int)
    parser.add_argument('--n-min', type=int)
    parser.add_argument('--n-max', type=int)
    parser.add_argument('--z-min', type=float)
    parser.add_argument('--z-max', type=float)
    parser.add_argument('--z-steps', type=int)
    parser.add_argument('--log-z', action='store_true', default=None, help='geometric z spacing')
    parser.add_argument('--tol', type=float, help='relative tolerance of the series (default 1e-12)')
    parser.add_argument('--out', metavar='PATH', help='CSV destination (default: stdout)')
    parser.add_argument('--excel', metavar='PATH', help='also write an xlsx workbook with a Summary sheet')
    parser.add_argument('--workers', type=int, default=1,
                        help='worker processes for the scan; rows come out in the same order for any count')
    parser.add_argument('--only', choices=['certified', 'violated', 'indeterminate'],
                        help='emit only rows with this outcome; the exit code still covers the whole grid')
    parser.add_argument('--margin-below', type=float, metavar='X',
                        help='emit only rows whose smaller margin lies below X')

    mode = parser.add_mutually_exclusive_group()
    mode.add_argument('--sharpness', action='store_true', help='emit the approach to the sharp constant')
    mode.add_argument('--alzer', action='store_true', help='classical mode over x instead of z')

    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true')
    verbosity.add_argument('--quiet', action='store_true')
    return parser


def configure_logging(args):
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def grid_from_args(args):
    kind = CLASSICAL_KIND if args.alzer else args.kind
    return GridSpec.default(
        kind,
        q_min=args.q_min, q_max=args.q_max, q_steps=args.q_steps,
        n_min=args.n_min, n_max=args.n_max,
        z_min=args.z_min, z_max=args.z_max, z_steps=args.z_steps,
        tol=args.tol, log_z=args.log_z,
    )


def _pick(value, default):
    return default if value is None else value


def run_sharpness_mode(args, target):
    q = _pick(args.q_min, SHARPNESS_DEFAULTS['q'])
    n = _pick(args.n_min, SHARPNESS_DEFAULTS['n'])
    z_sequence = sharpness_sequence(_pick(args.z_max, SHARPNESS_DEFAULTS['z_max']),
                                    _pick(args.z_min, SHARPNESS_DEFAULTS['z_min']),
                                    _pick(args.z_steps, SHARPNESS_DEFAULTS['z_steps']))
    kwargs = {} if args.tol is None else {'tol': args.tol}
    report = emit_sharpness(args.kind, q, n, z_sequence, target, **kwargs)
    logger.info(f"Sharpness sweep: {len(report.points)} point(s), empirical slope {report.slope:.3e}")
    return EXIT_OK if report.monotone else EXIT_VIOLATED


def run_scan_mode(args, target):
    if args.workers < 1:
        raise GridSpecError(f"--workers must be at least 1, got {args.workers}")
    result = scan(grid_from_args(args), workers=args.workers)
    rows = RecordFilter(result.records).filter_by_outcome(args.only).filter_by_margin_below(args.margin_below)
    stats = rows.get_stats()
    if stats['applied_filters']:
        logger.info(f"Emitting {stats['filtered_count']} of {stats['original_count']} rows "
                    f"({', '.join(stats['applied_filters'])})")
    emit_csv(rows.get_results(), target)
    if args.excel:
        DataExporter().export_to_excel(rows.get_results(), result.summary, args.excel)
    return result.summary.exit_code()


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args)

    target = args.out or sys.stdout
    try:
        if args.sharpness:
            return run_sharpness_mode(args, target)
        return run_scan_mode(args, target)

    except GridSpecError as e:
        logger.error(f"Invalid grid: {e}")
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"Could not write output: {e}")
        return EXIT_IO
    except QTuranError as e:
        logger.error(f"Evaluation failed: {e}")
        raise e


if __name__ == "__main__":
    sys.exit(main())
