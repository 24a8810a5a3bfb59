#  Copyright 2024 Amazon.com, Inc. or its affiliates.

import argparse
import glob
import json
import os
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from .errors import InputError
from .utils import logger

# Reference standard errors of the Monte Carlo design (1000 replications, L=2000, N=5) at τ = 0.3, ..., 0.8
MC_REFERENCE_SE = {
    "a": (0.0022, 0.0143, 0.0288, 0.0526, 0.0574, 0.0460),
    "b": (0.0401, 0.0474, 0.0348, 0.0335, 0.0309, 0.0291),
}
MC_TAUS = (0.3, 0.4, 0.5, 0.6, 0.7, 0.8)
MC_MAX_ABS_BIAS = 0.02
MC_SE_FACTOR = 2.0

RECOVERY_TRUTH = 0.6988
RECOVERY_BAND = (0.60, 0.80)
RECOVERY_MIN_IN_BAND = 0.95
RECOVERY_MIN_COVERAGE = 0.90
RECOVERY_LABEL = "b"
RECOVERY_COVERAGE_KEY = "0.95"

SIZE_LEVEL = 0.05
SIZE_BAND = (0.02, 0.10)


@dataclass(frozen=True)
class AcceptanceCheck:
    """
    Outcome of one statistical acceptance check over a batch of pipeline outputs.
    """

    name: str
    passed: bool
    value: float
    target: str
    n_runs: int


def _read_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as json_file:
            return json.load(json_file)
    except (OSError, ValueError) as err:
        raise InputError(f"Unable to read {path}: {err}") from err


def check_monte_carlo(frame: pd.DataFrame) -> List[AcceptanceCheck]:
    """
    Bias and standard error checks of a Monte Carlo study table.

    :param frame: The mc_study.csv table, one row per level with bias_<label> and se_<label> columns.
    :return: One bias check and one SE check per type.
    """
    missing = [tau for tau in MC_TAUS if not np.isclose(frame["tau"], tau).any()]
    if missing:
        raise InputError(f"Monte Carlo table has no rows for levels {missing}")
    rows = pd.concat([frame[np.isclose(frame["tau"], tau)].head(1) for tau in MC_TAUS])
    checks = []
    for label, reference in MC_REFERENCE_SE.items():
        bias = rows[f"bias_{label}"].abs().to_numpy()
        ratio = rows[f"se_{label}"].to_numpy() / np.asarray(reference)
        worst_ratio = float(max(ratio.max(), 1.0 / ratio.min()))
        checks.append(
            AcceptanceCheck(f"mc_bias_{label}", bool(bias.max() <= MC_MAX_ABS_BIAS), float(bias.max()), "<= 0.02", len(rows))
        )
        checks.append(
            AcceptanceCheck(f"mc_se_{label}", bool(worst_ratio <= MC_SE_FACTOR), worst_ratio, "<= 2x reference", len(rows))
        )
    return checks


def check_recovery(fits: Sequence[Mapping[str, Any]], intervals: Sequence[Mapping[str, Any]]) -> List[AcceptanceCheck]:
    """
    Point estimate and bootstrap coverage checks of repeated Stage 1 fits on timber like data.

    :param fits: The fit.json payloads.
    :param intervals: The lambda_bootstrap.json payloads, in the same order.
    :return: The in-band check and the coverage check.
    """
    if not fits or len(fits) != len(intervals):
        raise InputError(f"Need one bootstrap file per fit, got {len(fits)} fits and {len(intervals)} bootstraps")
    in_band = []
    covered = []
    for fit, ci in zip(fits, intervals):
        k = fit["mle"]["type_labels"].index(RECOVERY_LABEL)
        in_band.append(RECOVERY_BAND[0] <= fit["mle"]["alpha"][k] <= RECOVERY_BAND[1])
        bounds = ci["intervals"][RECOVERY_COVERAGE_KEY]
        covered.append(bounds["low"][k] <= RECOVERY_TRUTH <= bounds["high"][k])
    band_rate = float(np.mean(in_band))
    coverage = float(np.mean(covered))
    return [
        AcceptanceCheck("lambda_in_band", band_rate >= RECOVERY_MIN_IN_BAND, band_rate, ">= 0.95", len(fits)),
        AcceptanceCheck("lambda_ci_coverage", coverage >= RECOVERY_MIN_COVERAGE, coverage, ">= 0.90", len(fits)),
    ]


def check_size(name: str, p_values: Sequence[float]) -> AcceptanceCheck:
    """
    :param name: Name of the specification test.
    :param p_values: Bootstrap p-values over simulations of a correctly specified model.
    :return: Whether the 5% rejection frequency lies in the accepted band.
    """
    if len(p_values) == 0:
        raise InputError(f"No {name} reports to summarize")
    rate = float(np.mean(np.asarray(p_values, dtype=float) < SIZE_LEVEL))
    return AcceptanceCheck(
        f"size_{name}", SIZE_BAND[0] <= rate <= SIZE_BAND[1], rate, "in [0.02, 0.10]", len(p_values)
    )


def summarize(results_dir: str) -> List[AcceptanceCheck]:
    """
    Run every check against the directory layout written by scripts/run_acceptance.sh.

    :param results_dir: The acceptance output directory.
    :return: All checks, passed or not.
    """
    mc_path = os.path.join(results_dir, "mc", "mc_study.csv")
    try:
        mc_frame = pd.read_csv(mc_path, comment="#")
    except (OSError, ValueError) as err:
        raise InputError(f"Unable to read {mc_path}: {err}") from err
    checks = check_monte_carlo(mc_frame)

    fit_dirs = sorted(glob.glob(os.path.join(results_dir, "recovery", "fit_*")))
    fits = [_read_json(os.path.join(fit_dir, "fit.json")) for fit_dir in fit_dirs]
    bootstraps = [_read_json(os.path.join(fit_dir, "lambda_bootstrap.json")) for fit_dir in fit_dirs]
    checks.extend(check_recovery(fits, bootstraps))

    for name, report_file in (("xi", "xi_test.json"), ("rw", "rw_test.json")):
        run_dirs = sorted(glob.glob(os.path.join(results_dir, "size", f"{name}_*")))
        checks.append(check_size(name, [_read_json(os.path.join(d, report_file))["p_value"] for d in run_dirs]))
    return checks


def main(argv: Optional[List[str]] = None) -> int:
    """
    Summarize an acceptance run and report failure through the exit code.

    :param argv: Arguments without the program name.
    :return: 0 when every check passes, 1 when any fails, the error's exit code on unreadable input.
    """
    parser = argparse.ArgumentParser(prog="auction-acceptance", description="Check the outputs of an acceptance run.")
    parser.add_argument("results_dir", help="Directory written by scripts/run_acceptance.sh")
    args = parser.parse_args(argv)
    try:
        checks = summarize(args.results_dir)
    except InputError as err:
        logger.error(f"Acceptance summary failed: {err}")
        return err.exit_code
    for check in checks:
        if check.passed:
            logger.info(f"{check.name} passed with {check.value:.4f} ({check.target})")
        else:
            logger.error(f"{check.name} failed with {check.value:.4f} ({check.target})")
    print(json.dumps([asdict(check) for check in checks], indent=2))
    return 0 if all(check.passed for check in checks) else 1
