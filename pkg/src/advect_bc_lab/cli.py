"""Command line entry point ``advect-bc-lab``.

Exit codes: 0 success, 1 configuration error, 2 numerical instability,
3 assumption violation (``analyze --strict``).
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

from .config import ConfigError, load_preset, parse_config, preset_names
from .experiments import cmd_analyze, cmd_converge, cmd_run, format_analysis, format_table
from .grid_solver import InstabilityError
from .oracles import OracleError
from .scheme_core import CFLWarning

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INSTABILITY = 2
EXIT_ASSUMPTION = 3


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="advect-bc-lab",
        description="Finite-difference advection with inverse Lax-Wendroff and extrapolation boundaries.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "single run, per-step error CSV"),
        ("converge", "refinement study with observed orders"),
        ("analyze", "consistency, stability and root analysis of the scheme"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="INI experiment file")
        p.add_argument("--preset", help="built-in experiment (table1, table2, table3, halfline-outflow, halfline-inflow, ...)")
        p.add_argument("--out", type=Path, help="output directory (overrides [output] dir)")
        p.add_argument("--jobs", type=int, default=1, help="parallel runs for converge")
        p.add_argument("--strict", action="store_true", help="exit 3 when an assumption fails")
        if name == "run":
            p.add_argument("--J", type=int, help="cell count, when the config lists several")
    return parser


def _load(args) -> list:
    if args.config is None and args.preset is None:
        raise ConfigError("give --config and/or --preset")
    overlay = ""
    name = "<config>"
    if args.config is not None:
        try:
            overlay = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc}") from None
        name = str(args.config)
    if args.preset is None:
        return [parse_config(overlay, name=name)]
    return [load_preset(p, overlay) for p in preset_names(args.preset)]


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    warnings.simplefilter("default", CFLWarning)
    try:
        configs = _load(args)
    except (ConfigError, OracleError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    status = EXIT_OK
    for cfg in configs:
        try:
            if args.command == "run":
                J = args.J
                if J is not None and J < 1:
                    raise ConfigError("--J must be positive")
                report = cmd_run(cfg, args.out, J=J)
                print(
                    f"{cfg.label} J={report.J} dx={report.dx:.6g} steps={report.steps} "
                    f"linf_nj={report.linf_nj:.3e} sup_l2={report.sup_l2:.3e}"
                )
            elif args.command == "converge":
                table = cmd_converge(cfg, args.out, jobs=args.jobs)
                print(format_table(table))
                if any(row.error and "Instability" in row.error for row in table.rows):
                    status = max(status, EXIT_INSTABILITY)
            else:
                report = cmd_analyze(cfg, args.out)
                print(format_analysis(report))
                if args.strict and report["violations"]:
                    status = max(status, EXIT_ASSUMPTION)
        except InstabilityError as exc:
            print(f"numerical instability: {exc}", file=sys.stderr)
            return EXIT_INSTABILITY
        except (ConfigError, OracleError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except ValueError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    return status


if __name__ == "__main__":
    sys.exit(main())
