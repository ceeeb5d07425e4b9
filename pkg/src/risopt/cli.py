"""Command-line entry point.

Exit codes: 0 success, 2 configuration or usage problems, 3 numerical
failures during a run.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

from .errors import ConvergenceError, GeometryError, NumericalError, ScenarioError, SingularMatrixError
from .harness import ARTIFACT_KINDS, run_all
from .scenario import load_scenario

CONFIG_ERRORS = (ScenarioError, GeometryError, FileNotFoundError, IsADirectoryError, json.JSONDecodeError)
NUMERIC_ERRORS = (NumericalError, ConvergenceError, SingularMatrixError)


def _int_list(text: str):
    try:
        values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return values


def _angle_count(text: str):
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from exc
    if v < 2:
        raise argparse.ArgumentTypeError("at least 2 angle samples are required")
    return v


def _artifact_list(text: str):
    values = tuple(part.strip() for part in text.split(",") if part.strip())
    for v in values:
        if v not in ARTIFACT_KINDS:
            raise argparse.ArgumentTypeError(
                f"unknown artifact {v!r}; choose from {', '.join(ARTIFACT_KINDS)}"
            )
    if not values:
        raise argparse.ArgumentTypeError("at least one artifact kind is required")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risopt",
        description="Sum-rate optimization for surface-assisted MIMO interference networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and write CSV/JSON artifacts")
    run_p.add_argument("--scenario", required=True, help="path to a scenario JSON file")
    run_p.add_argument("--out", required=True, help="output directory for artifacts")
    run_p.add_argument(
        "--artifacts",
        type=_artifact_list,
        default=ARTIFACT_KINDS,
        help="comma-separated subset of: " + ", ".join(ARTIFACT_KINDS),
    )
    run_p.add_argument("--curvature", choices=("re", "im"), default="re")
    run_p.add_argument("--sweep-antennas", type=_int_list, default=(2,))
    run_p.add_argument("--sweep-sides", type=_int_list, default=(2, 4, 8, 16))
    run_p.add_argument("--angles", type=_angle_count, default=721, help="sample count for patterns")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(pathlib.Path(args.scenario))
        meta = run_all(
            sc,
            args.out,
            artifacts=args.artifacts,
            curvature=args.curvature,
            sweep_antennas=args.sweep_antennas,
            sweep_sides=args.sweep_sides,
            n_angles=args.angles,
        )
    except CONFIG_ERRORS as exc:
        print(f"risopt: configuration error: {exc}", file=sys.stderr)
        return 2
    except NUMERIC_ERRORS as exc:
        print(f"risopt: numerical failure: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(meta["summary"], sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
