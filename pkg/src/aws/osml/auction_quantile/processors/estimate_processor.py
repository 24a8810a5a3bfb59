#  Copyright 2024 Amazon.com, Inc. or its affiliates.

from typing import Any, Dict

from ..core_model import AsymmetryVariant
from ..estimator import estimate_lambda_ci, mle_fit, qr_curve
from ..managers import type_labels
from ..processor_base import ProcessorBase
from ..utils import parse_tau_grid


class EstimateProcessor(ProcessorBase):
    """
    Runs both estimation stages and writes fit.json, plus lambda_bootstrap.json when a bootstrap is requested.
    """

    def process(self) -> Dict[str, Any]:
        try:
            config = self.config
            records = self.load_records()
            variant = AsymmetryVariant(config.variant)
            labels = type_labels(records) if variant is AsymmetryVariant.TYPE_FIXED_EFFECTS else None

            mle = mle_fit(records, variant, type_labels=labels, seed=config.seed)
            curve = qr_curve(records, parse_tau_grid(config.tau_grid), mle.spec, threads=config.threads)

            artifacts = self.artifacts()
            artifacts.stage_json("fit.json", {"mle": mle.to_dict(), "curve": curve.to_dict()})
            body: Dict[str, Any] = {
                "message": f"Estimated {variant.value} on {len(records)} auctions",
                "params": mle.spec.params.tolist(),
                "loglik": mle.loglik,
                "converged": mle.converged,
                "n_levels": int(curve.grid.size),
                "failed_levels": list(curve.failed_levels),
            }
            if config.bootstrap:
                ci = estimate_lambda_ci(
                    records,
                    config.B,
                    config.seed,
                    variant,
                    labels,
                    threads=config.threads,
                    max_failure_rate=config.max_failure_rate,
                )
                artifacts.stage_json("lambda_bootstrap.json", ci.to_dict())
                body["ci_low"] = ci.ci_low.tolist()
                body["ci_high"] = ci.ci_high.tolist()
            body["files"] = artifacts.commit()
            return self.success_message(body)
        except Exception as error:
            return self.failure_message(error)
