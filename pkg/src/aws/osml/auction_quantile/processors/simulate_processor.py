#  Copyright 2024 Amazon.com, Inc. or its affiliates.

import os
from typing import Any, Dict

from ..managers import ArtifactManager, DatasetManager
from ..processor_base import ProcessorBase
from ..simulator import SimConfig, simulate_dataset
from ..utils import RunConfig, logger


def preset_config(config: RunConfig) -> SimConfig:
    """
    :param config: The run configuration naming a preset in dgp.
    :return: The data generating process of the preset, seeded with the run seed.
    """
    if config.dgp == "timber_like":
        return SimConfig.timber_like_preset(config.seed, config.n_auctions, config.lambda_weak)
    if config.dgp == "symmetric_uniform":
        return SimConfig.symmetric_uniform_preset(config.seed, config.n_auctions, config.n_bidders)
    if config.dgp == "fixed_effects":
        return SimConfig.fixed_effects_preset(config.seed, config.n_auctions, config.n_bidders)
    return SimConfig.monte_carlo_preset(config.seed, config.n_auctions, config.n_bidders)


class SimulateProcessor(ProcessorBase):
    """
    Draws a dataset from a simulation preset and writes it as CSV, with a bidder table for identity data.
    """

    def process(self) -> Dict[str, Any]:
        try:
            out = self.require("out", "--out")
            cfg = preset_config(self.config)
            logger.info(f"Simulating {cfg.n_auctions} auctions from the {cfg.description} preset")
            records = simulate_dataset(cfg)

            auctions, bidders = DatasetManager.to_frames(records)
            artifacts = ArtifactManager(os.path.dirname(out) or ".", self.config.as_metadata())
            artifacts.stage_csv(os.path.basename(out), auctions)
            if bidders is not None:
                artifacts.stage_csv(os.path.basename(DatasetManager.bidders_path_for(out)), bidders)
            written = artifacts.commit()

            return self.success_message(
                {
                    "message": f"Simulated {len(records)} auctions",
                    "dgp": cfg.description,
                    "n_auctions": len(records),
                    "mean_winning_bid": float(auctions["winning_bid"].mean()),
                    "files": written,
                }
            )
        except Exception as error:
            return self.failure_message(error)
