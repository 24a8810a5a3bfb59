#  Copyright 2024 Amazon.com, Inc. or its affiliates.

import argparse
import json
import sys
from typing import Any, Dict, List, Optional

from .errors import ConfigError
from .processors import PROCESSORS
from .utils import RunConfig, logger, set_log_level
from .utils.app_config import DGP_NAMES, MISSPEC_ROWS, SUBCOMMANDS, VARIANT_NAMES
from .utils.logger import AsyncContextFilter


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    Parse command-line arguments. Every flag defaults to None so that only flags given on the command line override
    values from --config and the environment.

    :param argv: Arguments without the program name, sys.argv by default.
    :returns: A namespace object containing the parsed arguments.
    """
    parser = argparse.ArgumentParser(
        prog="auction-quantile",
        description="Estimate, test and use power asymmetry quantile models of ascending auctions.",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS, help="Pipeline to run")
    parser.add_argument("--config", dest="config_path", help="Flat key = value configuration file")
    parser.add_argument("--input", dest="input_path", help="Dataset CSV (or fit JSON for revenue)")
    parser.add_argument("--bidders", dest="bidders_path", help="Bidder table of a full_identity dataset")
    parser.add_argument("--fit", dest="fit_path", help="Fit JSON written by estimate")
    parser.add_argument("--out", help="Output CSV for simulate, output directory otherwise")
    parser.add_argument("--seed", type=int, help="Master seed")
    parser.add_argument("--L", dest="n_auctions", type=int, help="Auctions per simulated dataset")
    parser.add_argument("--N", dest="n_bidders", type=int, help="Bidders per simulated auction")
    parser.add_argument("--B", type=int, help="Bootstrap replicates")
    parser.add_argument("--epsilon", type=float, help="Revenue truncation index")
    parser.add_argument("--v0", type=float, help="Seller value")
    parser.add_argument("--variant", choices=VARIANT_NAMES, help="Asymmetry specification")
    parser.add_argument("--min-cell", dest="min_cell", type=int, help="Minimum (p, q) cell size of the xi test")
    parser.add_argument("--rw-min-cell", dest="rw_min_cell", type=int, help="Cell size threshold of per cell RW tests")
    parser.add_argument("--tau-grid", dest="tau_grid", help='Stage 2 levels, "1..99/100" or "0.1,0.5,0.9"')
    parser.add_argument("--mc-taus", dest="mc_taus", help="Levels reported by the Monte Carlo study")
    parser.add_argument("--threads", type=int, help="Worker threads")
    parser.add_argument("--replications", type=int, help="Monte Carlo replications")
    parser.add_argument("--revenue-grid-size", dest="revenue_grid_size", type=int, help="Reserve level grid points")
    parser.add_argument("--value-grid-size", dest="value_grid_size", type=int, help="Value grid of the RW statistic")
    parser.add_argument("--x", help="Comma separated auction characteristics for revenue")
    parser.add_argument("--counts", help='Type counts for revenue, e.g. "a=1,b=2"')
    parser.add_argument("--rows", choices=MISSPEC_ROWS, help="Misspecification rows")
    parser.add_argument("--dgp", choices=DGP_NAMES, help="Simulation preset")
    parser.add_argument("--lambda-weak", dest="lambda_weak", type=float, help="Weak type exponent of timber_like")
    parser.add_argument("--swap-max-n", dest="swap_max_n", type=int, help="Largest N of the type swap tables")
    parser.add_argument("--max-failure-rate", dest="max_failure_rate", type=float, help="Tolerated failed replicates")
    parser.add_argument("--log-level", dest="log_level", help="Log level, e.g. INFO or DEBUG")
    parser.add_argument(
        "--match-type-counts", dest="match_type_counts", action="store_true", default=None, help="Resample in cells"
    )
    parser.add_argument("--bootstrap", action="store_true", default=None, help="Bootstrap the Stage 1 parameters")
    parser.add_argument("--per-cell", dest="per_cell", action="store_true", default=None, help="Per cell RW tests")

    return parser.parse_args(argv)


def format_summary(subcommand: str, body: Dict[str, Any]) -> str:
    """
    :param subcommand: The pipeline that ran.
    :param body: The decoded body of its response envelope.
    :return: A short human readable summary.
    """
    lines = [f"{subcommand}: {body.get('message', '')}"]
    for key, value in body.items():
        if key in ("message", "stack_trace"):
            continue
        if isinstance(value, list) and key == "files":
            lines.extend(f"  wrote {path}" for path in value)
        else:
            lines.append(f"  {key}: {value}")
    return "\n".join(lines)


def run(config: RunConfig) -> int:
    """
    Dispatch a configured run to its pipeline and report the outcome.

    :param config: A validated configuration.
    :return: The process exit code, 0 on success.
    """
    set_log_level(config.log_level)
    AsyncContextFilter.set_context({"run_id": f"{config.subcommand}-{config.seed}", "subcommand": config.subcommand})
    try:
        response = PROCESSORS[config.subcommand](config).process()
        print(format_summary(config.subcommand, json.loads(response["body"])))
        return response["exitCode"]
    finally:
        AsyncContextFilter.set_context(None)


def main(argv: Optional[List[str]] = None) -> int:
    args = vars(parse_arguments(argv))
    config_path = args.pop("config_path")
    try:
        config = RunConfig.from_sources(args, config_path)
    except ConfigError as error:
        logger.error(f"Invalid configuration: {error}")
        print(f"{args['subcommand']}: invalid configuration: {error}", file=sys.stderr)
        return error.exit_code
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
