"""Command-line entry point: ``python -m squeezedmech <command> [options]``.

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 verification failure (a manifest is still written).
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import ConfigError, SolverError, SqueezedMechError
from .experiments import (ExperimentConfig, defaults_table, load_config,
                          parse_override, preset, run_design, run_g2, run_spectrum,
                          run_verifications, write_manifest)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VERIFY = 0, 2, 3, 4
COMMANDS = ("design", "spectrum", "g2", "verify", "all")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="squeezedmech",
        description="Squeezed-drive electromechanics: analytic design, excitation spectra, "
                    "photon correlations and frame verifications.",
        epilog="Config defaults (override with --set key=value):\n" + defaults_table(),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", metavar="PATH", help="JSON config file")
    p.add_argument("--preset", choices=("fig2", "fig3a", "fig3b"), help="named parameter set")
    p.add_argument("--out", metavar="DIR", help="output directory (default: config 'output')")
    p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                   help="dotted-path override, value parsed as JSON")
    p.add_argument("--threads", type=int, default=1, metavar="N",
                   help="worker processes for spectrum sweeps")
    return p


def resolve_config(args) -> ExperimentConfig:
    if args.config and args.preset:
        raise ConfigError("use either --config or --preset", "config")
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        cfg = ExperimentConfig()
    overrides = dict(parse_override(s) for s in args.set)
    if args.out:
        overrides["output"] = args.out
    return cfg.with_overrides(overrides) if overrides else cfg


def _run_one(name, cfg, out, executor):
    if name == "verify":
        return run_verifications(cfg, out, executor)
    runner = {"design": run_design, "spectrum": run_spectrum, "g2": run_g2}[name]
    return runner(cfg, out, executor)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1", "threads")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory {out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    names = ["design", "spectrum", "g2", "verify"] if args.command == "all" else [args.command]
    executor = ProcessPoolExecutor(args.threads) if args.threads > 1 else None
    code = EXIT_OK
    try:
        for name in names:
            try:
                result = _run_one(name, cfg, out, executor)
            except ConfigError as exc:
                print(f"config error: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            except SolverError as exc:
                print(f"solver failure in {name}: {type(exc).__name__}: {exc}", file=sys.stderr)
                return EXIT_SOLVER
            except SqueezedMechError as exc:
                print(f"error in {name}: {type(exc).__name__}: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            write_manifest(result, out)
            for c in result.checks:
                print(c.line())
            for c in result.comparisons:
                print(c.line().replace("PASS", "MATCH", 1).replace("FAIL", "MISMATCH", 1))
            for w in result.manifest["warnings"]:
                print(f"warning: {w}", file=sys.stderr)
            if not result.ok:
                code = EXIT_VERIFY
    finally:
        if executor is not None:
            executor.shutdown()
    return code


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
