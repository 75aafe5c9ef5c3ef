"""Command-line entry point: ``simulate``, ``emit`` and ``resume``.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import ensemble
from .io import ConfigError, read_config
from .propagator import NumericalError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cavity-sse", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario from a config file")
    sim.add_argument("config", type=Path)
    sim.add_argument("--seed", type=int, default=None, help="override the config seed")
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--out", type=Path, default=None, help="run directory (default runs/<config stem>)")
    sim.add_argument("--stop-after", type=int, default=None, help=argparse.SUPPRESS)

    em = sub.add_parser("emit", help="write figure data tables from completed runs")
    em.add_argument("run_dir", type=Path, nargs="+")
    em.add_argument("--figure", required=True, choices=ensemble.FIGURES)
    em.add_argument("--out", type=Path, default=None)

    rs = sub.add_parser("resume", help="continue an interrupted run")
    rs.add_argument("run_dir", type=Path)
    rs.add_argument("--workers", type=int, default=1)
    return ap


def _fail(code: int, msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "simulate":
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1", "workers")
            spec = ensemble.ScenarioSpec.from_config(read_config(args.config), seed=args.seed)
            out = args.out or Path("runs") / args.config.stem
            summary = ensemble.run_scenario(spec, out, workers=args.workers, stop_after=args.stop_after)
        elif args.command == "resume":
            summary = ensemble.resume(args.run_dir, workers=args.workers)
        else:
            path = ensemble.emit_plot_data(args.run_dir, args.figure, args.out)
            summary = {"figure": args.figure, "file": str(path)}
    except ConfigError as exc:
        key = f" [key: {exc.key}]" if exc.key else ""
        return _fail(EXIT_CONFIG, f"{exc}{key}")
    except (ensemble.EmitError, ensemble.CheckpointError) as exc:
        return _fail(EXIT_CONFIG, str(exc))
    except (NumericalError, FloatingPointError) as exc:
        return _fail(EXIT_NUMERIC, f"numerical failure: {exc}")
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
