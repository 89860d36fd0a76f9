"""
Analysis commands: performance measures, susceptibilities and oracle trajectories.
"""

import argparse
import logging
from pathlib import Path

import pandas as pd

from gridplace.commands.common import amplitude_parent, fault_parent, grid_parent, output_parent, positive_float
from gridplace.schemas.report import CSV_COLUMNS
from gridplace.utils.dependencies import CommandContext
from gridplace.utils.exceptions import EXIT_OK

logger = logging.getLogger(__name__)


def cmd_measure(args: argparse.Namespace, context: CommandContext) -> int:
    """
    Per-bus measures sorted ascending, closed form, oracle or both.

    Raises:
        UnknownBusError: If a --bus id is not in the grid
    """
    op = context.operating_point(args)
    report = context.analysis.measure(
        op,
        gamma=args.gamma,
        delta_p=args.delta_p,
        bus_ids=None if args.all else args.bus,
        method=args.method,
        dt=args.dt,
    )
    if args.format == "csv":
        columns = list(CSV_COLUMNS["measure"])
        frame = pd.DataFrame([row.model_dump() for row in report.rows])
        context.emit_frame(frame[[c for c in columns if c in frame.columns]], args.output)
    else:
        context.emit_report(report, args.output)
    return EXIT_OK


def cmd_sensitivities(args: argparse.Namespace, context: CommandContext) -> int:
    """Per-fault susceptibilities plus the aggregate gradient table."""
    op = context.operating_point(args)
    _, per_fault, aggregate = context.analysis.sensitivities(
        op,
        mu=args.mu,
        g=args.g,
        gamma=args.gamma,
        delta_p=args.delta_p,
        bus_ids=args.bus,
        include_zero_mode=False if args.no_zero_mode else None,
    )
    context.emit_frame(per_fault, args.output, args.format)
    if args.aggregate:
        context.emit_frame(aggregate, args.aggregate, args.format)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, context: CommandContext) -> int:
    """
    Oracle trajectory for one fault; the settings sidecar goes next to the CSV.
    """
    op = context.operating_point(args)
    trajectory, sidecar = context.analysis.simulate(
        op,
        args.bus,
        delta_p=args.delta_p,
        gamma=args.gamma,
        dt=args.dt,
        horizon=args.horizon,
    )
    context.emit_frame(trajectory.to_frame(op.bus_ids), args.output)
    if args.output:
        context.reports.save_report(Path(args.output).with_suffix(".json"), sidecar)
    else:
        logger.info(f"M_b = {sidecar.measure:.9e} over {sidecar.samples} samples, tail bound {sidecar.tail_bound:.3e}")

    if args.modal:
        gamma = context.analysis.resolve_gamma(op, args.gamma)
        frame = context.analysis.modal_frame(op, args.bus, gamma, trajectory.times, args.delta_p)
        context.emit_frame(frame, args.modal)
    return EXIT_OK


def register(subparsers: argparse._SubParsersAction) -> None:
    """Add the analysis sub-commands."""
    grid = grid_parent()
    fault = fault_parent()
    amplitudes = amplitude_parent()

    parser = subparsers.add_parser("measure", parents=[grid, fault, output_parent()], help="Performance measures")
    target = parser.add_mutually_exclusive_group()
    target.add_argument("--bus", action="append", help="Fault bus id, repeatable")
    target.add_argument("--all", action="store_true", help="Every generator bus (default)")
    parser.add_argument("--method", choices=("closed", "oracle", "both"), default="closed")
    parser.add_argument("--dt", type=positive_float, help="Oracle integrator step")
    parser.set_defaults(handler=cmd_measure)

    parser = subparsers.add_parser(
        "sensitivities", parents=[grid, fault, amplitudes, output_parent("csv")], help="Susceptibilities"
    )
    parser.add_argument("--bus", action="append", help="Fault bus id, repeatable; every generator by default")
    parser.add_argument("--aggregate", help="File for the aggregate gradient table")
    parser.add_argument("--no-zero-mode", action="store_true", help="Drop the zero-mode terms of alpha")
    parser.set_defaults(handler=cmd_sensitivities)

    parser = subparsers.add_parser("simulate", parents=[grid, fault], help="Oracle trajectory")
    parser.add_argument("--bus", required=True, help="Fault bus id")
    parser.add_argument("--dt", type=positive_float, help="Integrator step")
    parser.add_argument("--horizon", type=positive_float, help="Initial horizon")
    parser.add_argument("--output", "-o", help="Trajectory CSV, printed to stdout when omitted")
    parser.add_argument("--modal", help="File for the closed-form modal velocities")
    parser.set_defaults(handler=cmd_simulate)
