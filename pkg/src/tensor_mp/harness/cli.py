"""
Command-line interface.

    tensor-mp <experiment> [common flags] [experiment flags]
    tensor-mp schema [--out PATH]

Exit codes: 0 success, 1 other library error, 2 precondition error,
3 resource cap.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from .. import __version__
from ..core.errors import PreconditionError, ResourceCapError, TensorMPError
from .config import build_config, default_log_dir, default_log_level
from .export import Exporter
from .logging import configure_logging
from .registry import ExperimentRegistry, default_registry
from .reports import ExperimentReport
from .runner import execute

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PRECONDITION = 2
EXIT_RESOURCE_CAP = 3

_CLI_ONLY = {"command", "config", "log_level", "log_dir"}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("common options")
    group.add_argument("--seed", type=int, help="64-bit master seed")
    group.add_argument("--reps", type=int, help="replicates / Monte Carlo draws")
    group.add_argument("--out", help="output file (default: stdout)")
    group.add_argument("--format", choices=["json", "csv"])
    group.add_argument("--threads", type=int, help="worker cap")
    group.add_argument("--max-p", dest="max_p", type=int, help="dense matrix cap")
    group.add_argument("--config", type=Path, help="TOML file overriding defaults")
    group.add_argument(
        "--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], type=str.upper
    )
    group.add_argument(
        "--log-dir", dest="log_dir", type=Path, help="also write JSON logs here"
    )
    group.add_argument(
        "--timing",
        action="store_true",
        default=None,
        help="embed wall time in the report (breaks byte-reproducibility)",
    )
    return common


def build_parser(
    registry: Optional[ExperimentRegistry] = None,
) -> argparse.ArgumentParser:
    registry = registry or default_registry()
    parser = argparse.ArgumentParser(
        prog="tensor-mp",
        description="Symmetric random tensor Marchenko-Pastur experiments",
        allow_abbrev=False,
    )
    parser.add_argument(
        "--version", action="version", version=f"tensor-mp {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()

    def experiment(name: str) -> argparse.ArgumentParser:
        info = registry.get_experiment(name)
        return sub.add_parser(
            name, parents=[common], help=info.description, allow_abbrev=False
        )

    mp_esd = experiment("mp-esd")
    mp_esd.add_argument("--n", type=int)
    mp_esd.add_argument("--d", type=int)
    mp_esd.add_argument("--N", dest="N", type=int, help="sample count")
    mp_esd.add_argument("--dist", help="entry law name[:param]")
    mp_esd.add_argument("--bins", type=int)
    mp_esd.add_argument(
        "--zero-tol",
        dest="zero_tol",
        type=float,
        help="eigenvalues within zero-tol * max|lambda| of 0 count as 0",
    )

    qform = experiment("qform-var")
    qform.add_argument("--n", type=int)
    qform.add_argument("--d", type=int)
    qform.add_argument("--dist", help="entry law name[:param]")
    qform.add_argument(
        "--matrix",
        action="append",
        help="identity, zero-diag-signs or projection:<frac>; repeatable",
    )
    qform.add_argument("--batches", type=int)

    lln = experiment("esp-lln")
    lln.add_argument("--z-dist", dest="z_dist", help="one, exp or sq-<entry law>")
    lln.add_argument("--d-rule", dest="d_rule", help="floor(n^a) | const:k | ...")
    lln.add_argument("--n-grid", dest="n_grid", help="comma list of n")

    gamma = experiment("gamma")
    gamma.add_argument("--n-max", dest="n_max", type=int)
    gamma.add_argument("--d-max", dest="d_max", type=int)
    gamma.add_argument("--bound-n-max", dest="bound_n_max", type=int)
    gamma.add_argument("--bound-d-max", dest="bound_d_max", type=int)

    conditions = experiment("conditions")
    conditions.add_argument("--dist", help="entry law name[:param]")
    conditions.add_argument("--z-dist", dest="z_dist", help="nonnegative law")
    conditions.add_argument("--d-rule", dest="d_rule")
    conditions.add_argument("--n-grid", dest="n_grid")
    conditions.add_argument("--method", choices=["analytic", "monte_carlo"])

    schema = sub.add_parser("schema", help="write the report JSON schema")
    schema.add_argument("--out", help="output file (default: stdout)")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    values = {k: v for k, v in vars(args).items() if k not in _CLI_ONLY}
    matrices = values.get("matrix")
    if matrices:
        values["matrix"] = [m for item in matrices for m in item.split(",") if m]
    return values


def report_schema() -> str:
    return json.dumps(ExperimentReport.model_json_schema(), indent=2) + "\n"


def main(argv: Optional[List[str]] = None) -> int:
    registry = default_registry()
    args = build_parser(registry).parse_args(argv)

    if args.command == "schema":
        content = report_schema()
        if args.out:
            Path(args.out).write_text(content, encoding="utf-8")
        else:
            sys.stdout.write(content)
        return EXIT_OK

    try:
        log = configure_logging(
            args.log_level or default_log_level(args.config),
            args.log_dir or default_log_dir(args.config),
        )
        config = build_config(args.command, _overrides(args), args.config)
        info = registry.get_experiment(args.command)
        report = execute(args.command, info.runner, config, log)
        Exporter.write(report, config.out, config.format)
    except ResourceCapError as exc:
        print(f"tensor-mp: resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE_CAP
    except PreconditionError as exc:
        print(f"tensor-mp: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except TensorMPError as exc:
        print(f"tensor-mp: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK
