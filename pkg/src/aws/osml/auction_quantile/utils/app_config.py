#  Copyright 2024 Amazon.com, Inc. or its affiliates.

import os
import re
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional

import numpy as np

from ..errors import ConfigError

VARIANT_NAMES = ("fixed_effects", "type_fixed", "linear", "linear_fixed", "exp_linear_fixed")
SUBCOMMANDS = ("simulate", "estimate", "revenue", "misspec", "test-xi", "test-rw", "mc")
DGP_NAMES = ("monte_carlo", "symmetric_uniform", "timber_like", "fixed_effects")
MISSPEC_ROWS = ("table1", "table2", "all")

_RANGE_PATTERN = re.compile(r"^\s*(\d+)\s*\.\.\s*(\d+)\s*/\s*(\d+)\s*$")


@dataclass
class ServiceConfig:
    """
    ServiceConfig is a dataclass meant to house the process level settings that are provided through ENV variables.
    They form the lowest precedence layer of every RunConfig.

    The data schema is defined as follows:
    threads:  (int) The number of worker threads used for independent fits and bootstrap replicates.
    log_level: (str) The level of the toolkit logger.
    bootstrap_max_failure: (float) The share of failed bootstrap replicates that aborts a run.
    """

    threads: int = field(default_factory=lambda: int(os.getenv("AUCTION_THREADS", 1)))
    log_level: str = field(default_factory=lambda: os.getenv("AUCTION_LOG_LEVEL", "INFO"))
    bootstrap_max_failure: float = field(default_factory=lambda: float(os.getenv("AUCTION_BOOTSTRAP_MAX_FAILURE", 0.05)))


@dataclass
class RunConfig:
    """
    RunConfig holds every knob of a single command line run. Values are layered: dataclass defaults, then the
    environment (ServiceConfig), then a flat key = value config file, then explicit command line flags.

    The data schema is defined as follows:
    subcommand: (str) One of simulate, estimate, revenue, misspec, test-xi, test-rw, mc.
    input_path: (str) Dataset CSV (or fit JSON for revenue) to read.
    bidders_path: (str) Companion long table for full_identity datasets.
    fit_path: (str) Fit JSON produced by estimate, reused by revenue and test-rw.
    out: (str) Output file (simulate) or output directory (every other subcommand).
    config_path: (str) The key = value file the run was configured from.
    seed: (int) Master seed for simulation and bootstrap streams.
    n_auctions: (int) L, auctions per simulated dataset.
    n_bidders: (int) N, bidders per simulated auction.
    B: (int) Bootstrap replicates.
    epsilon: (float) Revenue truncation index.
    v0: (float) Seller value.
    variant: (str) Asymmetry specification variant.
    min_cell: (int) Minimum (p, q) cell size entering the xi statistics.
    rw_min_cell: (int) A (p, q) cell needs more auctions than this to get its own per cell RW test.
    tau_grid: (str) Stage 2 quantile grid, "1..99/100" or a comma separated list.
    mc_taus: (str) Levels reported by the Monte Carlo study.
    threads: (int) Worker threads.
    replications: (int) Monte Carlo replications.
    revenue_grid_size: (int) Reserve level grid points.
    value_grid_size: (int) Value grid points of the winning bid rearrangement.
    x: (str) Comma separated covariates (without intercept) of the revenue auction; defaults to sample medians.
    counts: (str) Type counts of the revenue auction, e.g. "a=1,b=2".
    rows: (str) Misspecification rows, table1, table2 or all.
    dgp: (str) Simulation preset, monte_carlo, symmetric_uniform, timber_like or fixed_effects.
    lambda_weak: (float) Weak type exponent of the timber_like preset.
    match_type_counts: (bool) Resample within (p, q) cells in the RW bootstrap.
    bootstrap: (bool) Add a bootstrap CI of the Stage 1 parameters to estimate.
    per_cell: (bool) Add the per cell RW tests to test-rw.
    swap_max_n: (int) Largest N of the type swap tables, 0 disables them.
    max_failure_rate: (float) Failed replicate share that aborts a bootstrap.
    log_level: (str) Toolkit log level.
    """

    subcommand: str = "simulate"
    input_path: Optional[str] = None
    bidders_path: Optional[str] = None
    fit_path: Optional[str] = None
    out: Optional[str] = None
    config_path: Optional[str] = None
    seed: int = 0
    n_auctions: int = 2000
    n_bidders: int = 5
    B: int = 10000
    epsilon: float = 0.1
    v0: float = 0.0
    variant: str = "type_fixed"
    min_cell: int = 30
    rw_min_cell: int = 100
    tau_grid: str = "1..99/100"
    mc_taus: str = "1..9/10"
    threads: int = field(default_factory=lambda: ServiceConfig().threads)
    replications: int = 200
    revenue_grid_size: int = 981
    value_grid_size: int = 100
    x: Optional[str] = None
    counts: Optional[str] = None
    rows: str = "table1"
    dgp: str = "monte_carlo"
    lambda_weak: float = 0.6988
    match_type_counts: bool = False
    bootstrap: bool = False
    per_cell: bool = False
    swap_max_n: int = 0
    max_failure_rate: float = field(default_factory=lambda: ServiceConfig().bootstrap_max_failure)
    log_level: str = field(default_factory=lambda: ServiceConfig().log_level)

    @classmethod
    def from_sources(cls, overrides: Dict[str, Any], config_path: Optional[str] = None) -> "RunConfig":
        """
        Build a configuration from a config file and explicit overrides. Overrides set to None are ignored so that
        unset command line flags never mask file values.

        :param overrides: Values coming from the command line.
        :param config_path: Optional path of a flat key = value file.
        :return: The validated configuration.
        """
        values: Dict[str, Any] = {}
        if config_path:
            values.update(read_config_file(config_path))
        values.update({key: value for key, value in overrides.items() if value is not None})

        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(values) - set(known))
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {', '.join(unknown)}")

        values["config_path"] = config_path
        config = cls(**{name: _coerce(known[name].type, name, value) for name, value in values.items()})
        config.validate()
        return config

    def validate(self) -> None:
        """
        Check every numeric knob against its documented range.

        :return: None
        """
        checks = [
            (self.subcommand in SUBCOMMANDS, f"subcommand must be one of {SUBCOMMANDS}"),
            (self.seed >= 0, "seed must be non-negative"),
            (self.n_auctions >= 1, "n_auctions must be at least 1"),
            (self.n_bidders >= 2, "n_bidders must be at least 2"),
            (self.B >= 1, "B must be at least 1"),
            (0.0 <= self.epsilon < 0.5, "epsilon must lie in [0, 0.5)"),
            (self.variant in VARIANT_NAMES, f"variant must be one of {VARIANT_NAMES}"),
            (self.min_cell >= 0, "min_cell must be non-negative"),
            (self.rw_min_cell >= 0, "rw_min_cell must be non-negative"),
            (self.threads >= 1, "threads must be at least 1"),
            (self.replications >= 1, "replications must be at least 1"),
            (self.revenue_grid_size >= 2, "revenue_grid_size must be at least 2"),
            (self.value_grid_size >= 2, "value_grid_size must be at least 2"),
            (self.rows in MISSPEC_ROWS, f"rows must be one of {MISSPEC_ROWS}"),
            (self.dgp in DGP_NAMES, f"dgp must be one of {DGP_NAMES}"),
            (self.lambda_weak > 0.0, "lambda_weak must be positive"),
            (self.swap_max_n >= 0, "swap_max_n must be non-negative"),
            (0.0 <= self.max_failure_rate < 1.0, "max_failure_rate must lie in [0, 1)"),
        ]
        for passed, message in checks:
            if not passed:
                raise ConfigError(message)
        parse_tau_grid(self.tau_grid)
        parse_tau_grid(self.mc_taus)

    def as_metadata(self) -> Dict[str, Any]:
        """
        :return: The configuration as a plain dictionary for provenance headers.
        """
        return asdict(self)


def _coerce(kind: Any, name: str, value: Any) -> Any:
    if isinstance(value, str):
        value = value.strip()
    try:
        if kind is bool:
            if isinstance(value, bool):
                return value
            return str(value).lower() in ("1", "true", "yes", "on")
        if kind is int:
            return int(value)
        if kind is float:
            return float(value)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"Invalid value {value!r} for {name}") from err
    return value


def read_config_file(path: str) -> Dict[str, str]:
    """
    Read a flat key = value configuration file. Blank lines and lines starting with # are skipped and dashes in
    keys are accepted as underscores.

    :param path: The file to read.
    :return: The raw string values keyed by configuration name.
    """
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as config_file:
            for line_number, line in enumerate(config_file, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                if "=" not in stripped:
                    raise ConfigError(f"{path}:{line_number}: expected key = value")
                key, value = stripped.split("=", 1)
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as err:
        raise ConfigError(f"Unable to read config file {path}: {err}") from err
    return values


def parse_tau_grid(text: str) -> np.ndarray:
    """
    Parse a quantile level grid written either as "a..b/c" (levels a/c, ..., b/c) or as a comma separated list.

    :param text: The grid description.
    :return: Strictly increasing levels in (0, 1).
    """
    match = _RANGE_PATTERN.match(text)
    try:
        if match:
            start, stop, denominator = (int(group) for group in match.groups())
            grid = np.arange(start, stop + 1, dtype=float) / denominator
        else:
            grid = np.array([float(token) for token in text.split(",") if token.strip()], dtype=float)
    except ValueError as err:
        raise ConfigError(f"Invalid tau grid {text!r}") from err
    if grid.size == 0 or np.any(grid <= 0.0) or np.any(grid >= 1.0) or np.any(np.diff(grid) <= 0.0):
        raise ConfigError(f"Tau grid {text!r} must be strictly increasing inside (0, 1)")
    return grid


def parse_float_list(text: str) -> List[float]:
    """
    :param text: Comma separated numbers.
    :return: The parsed numbers.
    """
    try:
        return [float(token) for token in text.split(",") if token.strip()]
    except ValueError as err:
        raise ConfigError(f"Invalid number list {text!r}") from err


def parse_counts(text: str) -> Dict[str, int]:
    """
    Parse type counts written as "a=1,b=2".

    :param text: The counts description.
    :return: Counts keyed by type label, in the written order.
    """
    counts = {}
    for token in text.split(","):
        if not token.strip():
            continue
        if "=" not in token:
            raise ConfigError(f"Invalid type count {token!r}, expected label=count")
        label, count = token.split("=", 1)
        try:
            counts[label.strip()] = int(count)
        except ValueError as err:
            raise ConfigError(f"Invalid type count {token!r}") from err
        if counts[label.strip()] < 0:
            raise ConfigError(f"Type count for {label.strip()} must be non-negative")
    return counts
