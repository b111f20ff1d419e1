"""Command-line front end: ``cvquotient {point,grid,threshold} --config FILE``.

Exit status: 0 on success, 1 for configuration or I/O problems, 2 when the
numerics fail (unphysical state, singular block, broken bisection bracket).
"""
import argparse
import sys

import numpy as np

from .gaussian import NumericalRankError, PhysicalityError
from .scan import (
    GRID,
    POINT,
    THRESHOLD,
    ConfigError,
    ThresholdError,
    load_config,
    rate_csv,
    run_grid,
    run_point,
    run_threshold_scan,
    threshold_csv,
    with_overrides,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _threads(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("threads must be >= 1")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="cvquotient", description="Key-rate scans for multipartite CV resources.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in ((POINT, "rate at the configured [point]"),
                        (GRID, "rate table over [t_grid] x [eps_grid]"),
                        (THRESHOLD, "maximum tolerable excess noise along [t_grid]")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="INI configuration file")
        sp.add_argument("--out", help="CSV output path (default: [scan] output, else stdout)")
        sp.add_argument("--seed", type=_seed, help="seed for sampled estimators (overrides [scan] seed)")
        sp.add_argument("--threads", type=_threads, default=1, help="worker threads (default 1)")
    return p


def _write(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = with_overrides(cfg, mode=args.command, seed=args.seed, output_path=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == THRESHOLD:
            text = threshold_csv(run_threshold_scan(cfg, args.threads))
        elif args.command == GRID:
            text = rate_csv(run_grid(cfg, args.threads))
        else:
            text = rate_csv(run_point(cfg))
    except (ThresholdError, PhysicalityError, NumericalRankError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    try:
        _write(text, cfg.output_path)
    except OSError as exc:
        print(f"cannot write {cfg.output_path}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
