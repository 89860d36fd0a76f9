"""
Argument types and parent parsers shared by the sub-commands.
"""

import argparse


def positive_float(value: str) -> float:
    """argparse type for a float > 0."""
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got '{value}'")
    if not number > 0 or number == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a finite number > 0, got {value}")
    return number


def non_negative_float(value: str) -> float:
    """argparse type for a float >= 0."""
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got '{value}'")
    if not number >= 0 or number == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a finite number >= 0, got {value}")
    return number


def positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{value}'")
    if number <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return number


def grid_parent() -> argparse.ArgumentParser:
    """Grid file plus the preprocessing switches."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("grid", help="Grid JSON file")
    parser.add_argument("--kron", action="store_true", help="Eliminate inertialess buses")
    parser.add_argument("--homogenize", action="store_true", help="Replace inertia and damping by their means")
    return parser


def output_parent(default_format: str = "json") -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--output", "-o", help="Output file, printed to stdout when omitted")
    parser.add_argument("--format", choices=("csv", "json"), default=default_format, help="Output format")
    return parser


def fault_parent() -> argparse.ArgumentParser:
    """Homogeneous damping ratio and loss magnitude."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--gamma", type=positive_float, help="Damping ratio d/m, read from the grid when omitted")
    parser.add_argument("--delta-p", type=positive_float, default=1.0, help="Power loss magnitude")
    return parser


def amplitude_parent() -> argparse.ArgumentParser:
    """Perturbation amplitudes of the inertia and damping shapes."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--mu", type=non_negative_float, default=0.1, help="Inertia amplitude")
    parser.add_argument("--g", type=non_negative_float, default=0.1, help="Damping-ratio amplitude")
    return parser
