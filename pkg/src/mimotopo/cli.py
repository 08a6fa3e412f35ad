"""Command-line entry points."""

import argparse
import logging
import sys

from .campaign import FORMATS, CampaignError, run_campaign
from .config import parse_config
from .errors import ConfigurationError, TensorFormatError
from .measured import emit_fixture_tensor


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser():
    p = argparse.ArgumentParser(
        prog="mimotopo",
        description="Monte Carlo downlink spectral efficiency of co-located, semi-distributed "
                    "and fully-distributed MIMO topologies.",
    )
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--output-dir", default="results", help="output directory (default: results)")
    p.add_argument("--format", choices=FORMATS, default="csv", help="table format (default: csv)")
    p.add_argument("--seed", type=int, help="override every campaign seed")
    p.add_argument("--threads", type=_positive_int, default=1,
                   help="worker threads per scenario; never changes results")
    p.add_argument("-q", "--quiet", action="store_true", help="only log warnings and errors")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        config = parse_config(args.config, seed=args.seed)
    except (ConfigurationError, TensorFormatError) as exc:
        print(f"mimotopo: configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        bundle = run_campaign(config, args.output_dir, args.format, args.threads)
    except (CampaignError, ConfigurationError, TensorFormatError) as exc:
        print(f"mimotopo: {exc}", file=sys.stderr)
        return 1
    logging.info("wrote %d scenarios to %s", len(bundle.scenario_dirs), bundle.output_dir)
    return 0


def fixture_main(argv=None):
    p = argparse.ArgumentParser(prog="mimotopo-fixture",
                                description="Write a deterministic pseudo-random measured-tensor file.")
    p.add_argument("path")
    p.add_argument("--frequencies", "-F", type=_positive_int, default=4)
    p.add_argument("--bs-ports", "-B", type=_positive_int, default=64)
    p.add_argument("--ue-ports", "-U", type=_positive_int, default=64)
    p.add_argument("--bs-ports-per-location", type=_positive_int, default=8)
    p.add_argument("--ue-ports-per-location", type=_positive_int, default=8)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    try:
        emit_fixture_tensor(args.path, args.frequencies, args.bs_ports, args.ue_ports, args.seed,
                            args.bs_ports_per_location, args.ue_ports_per_location)
    except (OSError, ValueError) as exc:
        print(f"mimotopo-fixture: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
