"""Command-line entry point: ``python -m consensus_filters <command>``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

import numpy as np

from .design import UnsolvableFilter
from .dynamics import AlphaOutOfRange
from .experiment import (ConfigError, load_config, run_convergence, run_design,
                         run_figure1, run_gram_approx, run_moments)
from .graphs import RetriesExhausted
from .gram import InsufficientOrder

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_RETRIES = 0, 2, 3, 4

log = logging.getLogger("consensus_filters")


def _cmd_moments(cfg):
    table = run_moments(cfg)
    print(json.dumps({"order": table.order, "moments": table.moments.tolist()}))


def _cmd_gram_approx(cfg):
    qhat = run_gram_approx(cfg)
    print(qhat.to_csv(), end="")


def _cmd_figure1(cfg):
    res = run_figure1(cfg)
    final = res["curves"][:, -1]
    print(f"alpha={res['alpha']:.6g}  error at M={cfg.gram_samples}: "
          + " ".join(f"{e:.4g}" for e in final))


def _cmd_design(cfg):
    filt, report = run_design(cfg)
    print(json.dumps({"coefficients": filt.a.tolist(), **report}))


def _cmd_convergence(cfg):
    _, filtered, unfiltered = run_convergence(cfg)
    print(f"median terminal error: filtered={np.median(filtered[:, -1]):.4g} "
          f"unfiltered={np.median(unfiltered[:, -1]):.4g}")


COMMANDS = {
    "moments": (_cmd_moments, "estimate spectral moments and write moments.json"),
    "gram-approx": (_cmd_gram_approx, "compute the approximate Gram matrix (qhat.csv)"),
    "figure1": (_cmd_figure1, "approximation error versus sample count (figure1.csv)"),
    "design": (_cmd_design, "design filter coefficients (filter.json)"),
    "convergence": (_cmd_convergence, "paired filtered/unfiltered runs (convergence.csv)"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="consensus-filters", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--threads", type=int, help="worker threads")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        overrides = {k: v for k, v in (("seed", args.seed), ("output_dir", args.out),
                                       ("threads", args.threads)) if v is not None}
        cfg = dataclasses.replace(cfg, **overrides)
        COMMANDS[args.command][0](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RetriesExhausted as exc:
        print(f"retries exhausted: {exc}", file=sys.stderr)
        return EXIT_RETRIES
    except (np.linalg.LinAlgError, UnsolvableFilter, AlphaOutOfRange,
            InsufficientOrder, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
