"""Command-line entry point: ``sdebye <command> --config <file> --out <dir>``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from . import experiments as ex

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

_HELP = {
    "run": "single simulation with full diagnostics",
    "sweep": "same data across a list of mu values",
    "virial-check": "virial and energy-law residuals at two step sizes",
    "rescale-check": "paired runs at mu and at mu = 1 on rescaled data",
    "gwp-trap": "bootstrap thresholds plus a run checking the gradient trap",
    "blowup-window": "t0 / T0 window and variance-vs-parabola comparison",
    "regions": "local well-posedness region membership",
    "negdata": "negative-energy family energies and the threshold N*",
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sdebye", description="Schrodinger-Debye simulator")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ex.COMMANDS:
        sp = sub.add_parser(name, help=_HELP[name])
        sp.add_argument("--config", required=name != "regions", help="JSON config file")
        sp.add_argument("--out", required=True, help="output directory")
        if name == "regions":
            sp.add_argument("--n", type=int)
            sp.add_argument("--s", type=float)
            sp.add_argument("--kappa", type=float)
    return ap


def _regions_config(args) -> ex.ExperimentConfig:
    inline = [args.n, args.s, args.kappa]
    if any(x is not None for x in inline) and not all(x is not None for x in inline):
        raise ex.ConfigError("--n, --s and --kappa must be given together")
    if args.config:
        cfg = ex.load_config(args.config, "regions")
    else:
        cfg = ex.parse_config({"scenario": "Regions"}, "regions")
    if args.n is not None:
        reg = dict(cfg.raw.get("regions") or {})
        reg["points"] = list(reg.get("points", [])) + [[args.n, args.s, args.kappa]]
        cfg.raw = {**cfg.raw, "regions": reg}
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "regions":
            cfg = _regions_config(args)
        else:
            cfg = ex.load_config(args.config, args.command)
        result = ex.execute(cfg)
        ex.emit(result, cfg, args.out)
    except ex.ConfigError as e:
        print(f"sdebye: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"sdebye: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    if result.refused:
        print(f"sdebye: {result.summary.get('refused', 'scenario refused')}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
