#  Copyright 2024 Amazon.com, Inc. or its affiliates.

from typing import Any, Dict

from ..processor_base import ProcessorBase
from ..simulator import run_mc_study
from ..utils import parse_tau_grid
from .simulate_processor import preset_config


class MonteCarloProcessor(ProcessorBase):
    """
    Repeats simulation and estimation and reports bias and SE of the bidder type quantiles.
    """

    def process(self) -> Dict[str, Any]:
        try:
            config = self.config
            report = run_mc_study(
                preset_config(config), config.replications, parse_tau_grid(config.mc_taus), threads=config.threads
            )
            artifacts = self.artifacts()
            artifacts.stage_csv("mc_study.csv", report.to_frame())
            artifacts.stage_json("mc_study.json", report.to_dict())
            return self.success_message(
                {
                    "message": f"Monte Carlo study over {report.n_replications} replications",
                    "n_failed": report.n_failed,
                    "max_abs_bias": float(abs(report.bias).max()),
                    "lambda_hat_mean": report.lambda_hat_mean,
                    "files": artifacts.commit(),
                }
            )
        except Exception as error:
            return self.failure_message(error)
