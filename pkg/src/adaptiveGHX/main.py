# main file for entry into the adaptiveGHX scenario runner
# Users choose a named scenario (or a YAML config) and either run its four linked
# runs or sweep the uncertainty multiplier

import argparse
import json
import sys

from adaptiveGHX.scenarios.config import PRESETS, resolve_config
from adaptiveGHX.scenarios.run_scenario import run_scenario
from adaptiveGHX.scenarios.sweep import parse_sweep, run_multiplier_sweep
from adaptiveGHX.utils.check import check_output_directory
from adaptiveGHX.utils.errors import AdaptiveGHXError, ConfigError
from adaptiveGHX.utils.logs import setup_logger

EXIT_OK = 0
EXIT_CONFIG = 2


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message, key="arguments")


def build_parser():
    parser = _ArgumentParser(description="Adaptive control lab for the glycol heat exchanger")
    parser.add_argument("--scenario", choices=sorted(PRESETS), help="Named scenario preset")
    parser.add_argument("--config", help="Path to a YAML scenario config")
    parser.add_argument("--out-dir", default="results", help="Directory for CSVs, summaries and logs")
    parser.add_argument("--multiplier", type=float, help="Uncertainty multiplier (>= 1)")
    parser.add_argument("--seed", type=int, help="Seed of the synthetic reference")
    parser.add_argument("--sweep", help="Multiplier sweep a:b:step instead of a single scenario")
    parser.add_argument("--reference-csv", help="Experiment CSV (t,x0,x1) to use as the target")
    parser.add_argument("--workers", type=int, default=1, help="Parallel sweep workers")
    return parser


def fail(err):
    """Machine-readable failure record on stderr; returns the exit code."""
    print(json.dumps(err.to_record()), file=sys.stderr)
    return err.exit_code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        config = resolve_config(
            scenario=args.scenario,
            config_path=args.config,
            overrides={
                "multiplier": args.multiplier,
                "seed": args.seed,
                "reference": args.reference_csv,
            },
        )
        out_dir = check_output_directory(args.out_dir)
        logger, log_path = setup_logger(config.name, out_dir)
    except AdaptiveGHXError as err:
        return fail(err)

    try:
        if args.sweep:
            table = run_multiplier_sweep(
                config, parse_sweep(args.sweep), out_dir=out_dir, workers=args.workers
            )
            logger.info("sweep finished: %d rows", len(table))
        else:
            artifacts = run_scenario(config, out_dir=out_dir, log_path=log_path)
            logger.info("summary: %s", artifacts.summary_path)
    except AdaptiveGHXError as err:
        logger.error("%s failed: %s", config.name, err.message)
        return fail(err)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
