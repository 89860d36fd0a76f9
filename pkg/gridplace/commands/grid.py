"""
Grid commands: validate, powerflow, spectrum and the synthetic grid generator.
"""

import argparse
import json
import logging

from gridplace.commands.common import grid_parent, non_negative_float, output_parent, positive_float, positive_int
from gridplace.utils.dependencies import CommandContext
from gridplace.utils.exceptions import EXIT_OK
from gridplace.utils.fixtures import TOPOLOGIES, make_grid

logger = logging.getLogger(__name__)


def cmd_validate(args: argparse.Namespace, context: CommandContext) -> int:
    """
    Load, power-flow and eigendecompose a grid; print the diagnostics.

    Any loading or power flow failure propagates and exits with its error code.
    """
    grid = context.load_grid(args)
    if args.homogenize:
        grid = context.analysis.grid_service.homogenize(grid)
    report = context.analysis.validate(grid, kron=args.kron)
    if report.degenerate:
        logger.warning("Spectrum is degenerate: perturbative sensitivities will be refused")
    context.emit_report(report, args.output)
    return EXIT_OK


def cmd_powerflow(args: argparse.Namespace, context: CommandContext) -> int:
    """Angles of the lossless power flow, one row per bus."""
    grid = context.load_grid(args)
    context.emit_frame(context.analysis.power_flow_frame(grid), args.output, args.format)
    return EXIT_OK


def cmd_spectrum(args: argparse.Namespace, context: CommandContext) -> int:
    """Eigenvalues and eigenvectors of L, or of L_M with --weighted."""
    op = context.operating_point(args)
    spectrum = context.analysis.spectrum(op, weighted=args.weighted)
    context.emit_frame(spectrum.to_frame(op.bus_ids), args.output, args.format)
    return EXIT_OK


def cmd_gen(args: argparse.Namespace, context: CommandContext) -> int:
    """Write a seeded synthetic grid."""
    document = make_grid(
        args.kind,
        args.n,
        susceptance=args.susceptance,
        jitter=args.jitter,
        seed=args.seed,
        inertia=args.inertia,
        damping=args.damping,
        power=args.power,
    )
    if args.output:
        context.grids.save(args.output, document)
    else:
        context.stdout.write(json.dumps(document, indent=2) + "\n")
    return EXIT_OK


def register(subparsers: argparse._SubParsersAction) -> None:
    """Add the grid sub-commands."""
    grid = grid_parent()
    output = output_parent()
    table = output_parent("csv")

    parser = subparsers.add_parser("validate", parents=[grid, output], help="Grid diagnostics")
    parser.set_defaults(handler=cmd_validate)

    parser = subparsers.add_parser("powerflow", parents=[grid, table], help="Power flow angles")
    parser.set_defaults(handler=cmd_powerflow)

    parser = subparsers.add_parser("spectrum", parents=[grid, table], help="Laplacian spectrum")
    parser.add_argument("--weighted", action="store_true", help="Spectrum of M^(-1/2) L M^(-1/2)")
    parser.set_defaults(handler=cmd_spectrum)

    parser = subparsers.add_parser("gen", help="Synthetic grid generator")
    parser.add_argument("kind", choices=TOPOLOGIES)
    parser.add_argument("n", type=positive_int, help="Number of buses")
    parser.add_argument("--susceptance", type=positive_float, default=1.0)
    parser.add_argument("--jitter", type=non_negative_float, default=0.0, help="Relative susceptance jitter")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--inertia", type=positive_float, default=1.0)
    parser.add_argument(
        "--damping",
        type=positive_float,
        help="Damping of every bus, inertia * min(1, sqrt(lambda_2)) by default so that all modes are underdamped",
    )
    parser.add_argument("--power", type=non_negative_float, default=0.0, help="Alternating injection amplitude")
    parser.add_argument("--output", "-o", help="Grid file, printed to stdout when omitted")
    parser.set_defaults(handler=cmd_gen)
