#  Copyright 2024 Amazon.com, Inc. or its affiliates.

from typing import Any, Dict

from ..processor_base import ProcessorBase
from ..revenue import misspec_table


class MisspecProcessor(ProcessorBase):
    """
    Revenue lost by a seller who sets the reserve of a symmetric model on asymmetric two bidder auctions.
    """

    def process(self) -> Dict[str, Any]:
        try:
            table = misspec_table(self.config.rows, threads=self.config.threads)
            artifacts = self.artifacts()
            artifacts.stage_csv("misspec.csv", table)
            return self.success_message(
                {
                    "message": f"Computed {len(table)} misspecification rows ({self.config.rows})",
                    "max_loss_percent": float(table["loss_percent"].max()),
                    "files": artifacts.commit(),
                }
            )
        except Exception as error:
            return self.failure_message(error)
