"""
Placement commands: optimize a placement and report its effect.
"""

import argparse
import logging

from gridplace.commands.common import amplitude_parent, fault_parent, grid_parent, non_negative_float, positive_float
from gridplace.models.placement import Algorithm, WeightingKind
from gridplace.schemas.report import PlacementDocument
from gridplace.utils.dependencies import CommandContext
from gridplace.utils.exceptions import EXIT_OK

logger = logging.getLogger(__name__)

WEIGHTINGS = tuple(kind.value for kind in WeightingKind)


def cmd_optimize(args: argparse.Namespace, context: CommandContext) -> int:
    """
    Place inertia, damping or both; write the placement JSON and the per-bus CSV.

    Raises:
        MissingThresholdError: For --weighting threshold without --m-thres
    """
    op = context.operating_point(args)
    result, frame = context.analysis.optimize(
        op,
        target=args.target,
        weighting=args.weighting,
        m_thres=args.m_thres,
        mu=args.mu,
        g=args.g,
        gamma=args.gamma,
        delta_p=args.delta_p,
    )
    document = PlacementDocument(**result.to_dict(), bus_ids=list(op.bus_ids))
    context.emit_report(document, args.output)
    if args.csv:
        context.emit_frame(frame, args.csv)
    return EXIT_OK


def cmd_report(args: argparse.Namespace, context: CommandContext) -> int:
    """
    Before/after measures of a placement file, evaluated by the oracle.

    Raises:
        DimensionMismatchError: If the placement does not fit the grid
    """
    op = context.operating_point(args)
    placement = context.reports.load_placement(args.placement)
    report = context.analysis.report_vulnerability(
        op,
        placement,
        mu=args.mu,
        g=args.g,
        gamma=args.gamma,
        delta_p=args.delta_p,
        weighting=args.weighting,
        m_thres=args.m_thres,
        per_fault=args.per_fault,
        dt=args.dt,
    )
    logger.info(
        f"V {report.vulnerability_before:.6e} -> {report.vulnerability_after:.6e} "
        f"({report.reduction_percent:.2f}% reduction)"
    )
    context.emit_report(report, args.output)
    return EXIT_OK


def register(subparsers: argparse._SubParsersAction) -> None:
    """Add the placement sub-commands."""
    grid = grid_parent()
    fault = fault_parent()
    amplitudes = amplitude_parent()

    parser = subparsers.add_parser("optimize", parents=[grid, fault, amplitudes], help="Placement optimization")
    parser.add_argument("--target", choices=tuple(a.value for a in Algorithm), required=True)
    parser.add_argument("--weighting", choices=WEIGHTINGS, default=WeightingKind.UNIFORM.value)
    parser.add_argument("--m-thres", type=non_negative_float, help="Threshold of the threshold weighting")
    parser.add_argument("--output", "-o", help="Placement JSON, printed to stdout when omitted")
    parser.add_argument("--csv", help="Per-bus table for map plots")
    parser.set_defaults(handler=cmd_optimize)

    parser = subparsers.add_parser("report", parents=[grid, fault, amplitudes], help="Vulnerability before and after")
    parser.add_argument("placement", help="Placement JSON written by optimize")
    parser.add_argument("--weighting", choices=WEIGHTINGS, help="Fault weights of V, the placement's by default")
    parser.add_argument("--m-thres", type=non_negative_float)
    parser.add_argument("--per-fault", action="store_true", help="Also place for each fault alone")
    parser.add_argument("--dt", type=positive_float, help="Oracle integrator step")
    parser.add_argument("--output", "-o", help="Report JSON, printed to stdout when omitted")
    parser.set_defaults(handler=cmd_report)
