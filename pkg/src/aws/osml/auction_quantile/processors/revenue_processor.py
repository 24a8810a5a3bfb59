#  Copyright 2024 Amazon.com, Inc. or its affiliates.

from typing import Any, Dict

import numpy as np

from ..core_model import AsymmetrySpec, AsymmetryVariant, BidderRoster, CovariateVector
from ..errors import ConfigError
from ..managers import DatasetManager, LoadedFit, load_fit
from ..processor_base import ProcessorBase
from ..revenue import (
    expected_revenue,
    revenue_curve,
    selling_probability,
    symmetric_optimal_reserve,
    type_swap_frame,
    type_swap_summary,
    type_swap_table,
)
from ..utils import parse_counts, parse_float_list


def _is_fit(path: str) -> bool:
    return path.lower().endswith(".json")


class RevenueProcessor(ProcessorBase):
    """
    Expected revenue and optimal reserve of one auction under a fitted model. Auction characteristics default to the
    sample medians of the dataset passed with --input.
    """

    def load_fit(self) -> LoadedFit:
        config = self.config
        if config.fit_path:
            return load_fit(config.fit_path)
        if config.input_path and _is_fit(config.input_path):
            return load_fit(config.input_path)
        raise ConfigError("revenue needs a fit JSON, pass --fit")

    def covariates(self) -> CovariateVector:
        config = self.config
        if config.x is not None:
            return CovariateVector.from_characteristics(parse_float_list(config.x))
        if config.input_path and not _is_fit(config.input_path):
            records = DatasetManager().load(config.input_path, config.bidders_path)
            characteristics = np.array([record.x.characteristics for record in records])
            return CovariateVector.from_characteristics(np.median(characteristics, axis=0))
        raise ConfigError("revenue needs --x or a dataset in --input to take covariate medians from")

    def roster(self, spec: AsymmetrySpec) -> BidderRoster:
        config = self.config
        if spec.variant is AsymmetryVariant.TYPE_FIXED_EFFECTS:
            counts = parse_counts(config.counts) if config.counts else {label: 1 for label in spec.type_labels}
            return BidderRoster.from_type_counts(counts)
        if spec.variant is AsymmetryVariant.FIXED_EFFECTS:
            return BidderRoster.from_identities(config.n_bidders)
        raise ConfigError(f"revenue supports type_fixed and fixed_effects fits, not {spec.variant.value}")

    def process(self) -> Dict[str, Any]:
        try:
            config = self.config
            fit = self.load_fit()
            x = self.covariates()
            roster = self.roster(fit.spec)

            curve = revenue_curve(x, roster, fit.spec, fit.curve, config.v0, config.epsilon, config.revenue_grid_size)
            solution = curve.optimum()
            symmetric = symmetric_optimal_reserve(
                x, roster.n, fit.curve, config.v0, config.epsilon, config.revenue_grid_size
            )
            nonstrategic = expected_revenue(config.epsilon, x, roster, fit.spec, fit.curve, config.v0, config.epsilon)

            artifacts = self.artifacts()
            artifacts.stage_json(
                "revenue.json",
                {
                    "x": x.characteristics.tolist(),
                    "n_bidders": roster.n,
                    "type_counts": roster.type_counts,
                    "asymmetric": solution.to_dict(),
                    "symmetric": symmetric.to_dict(),
                    "pi_nonstrategic": nonstrategic,
                    "selling_probability": selling_probability(solution.r_star, roster, fit.spec),
                },
            )
            artifacts.stage_csv("revenue_curve.csv", curve.to_frame())
            if config.swap_max_n >= 2:
                rows = type_swap_table(
                    x,
                    range(2, config.swap_max_n + 1),
                    fit.spec,
                    fit.curve,
                    config.v0,
                    config.epsilon,
                    config.revenue_grid_size,
                    threads=config.threads,
                )
                artifacts.stage_csv("type_swap.csv", type_swap_frame(rows))
                artifacts.stage_csv("type_swap_summary.csv", type_swap_summary(rows))

            return self.success_message(
                {
                    "message": f"Optimal reserve level {solution.r_star:.4f} for {roster.n} bidders",
                    "r_star": solution.r_star,
                    "reserve_price": solution.reserve_price,
                    "pi_star": solution.pi_star,
                    "pi_nonstrategic": nonstrategic,
                    "symmetric_reserve_price": symmetric.reserve_price,
                    "files": artifacts.commit(),
                }
            )
        except Exception as error:
            return self.failure_message(error)
