#  Copyright 2024 Amazon.com, Inc. or its affiliates.

from typing import Any, Dict, List, Tuple

import pandas as pd

from ..core_model import AsymmetrySpec, AsymmetryVariant, ParentQuantileCurve
from ..estimator import mle_fit, qr_curve
from ..managers import load_fit, type_labels
from ..processor_base import ProcessorBase
from ..simulator import AuctionRecord
from ..spec_tests import max_xi_test, rw_bootstrap_pvalue, rw_cell_frame, rw_cell_tests, xi_cell_frame
from ..utils import parse_tau_grid


class XiTestProcessor(ProcessorBase):
    """
    The max |ξ| bootstrap test of the winner type shares, written to xi_test.json, xi_cells.csv and
    xi_pvalue_cdf.csv.
    """

    def process(self) -> Dict[str, Any]:
        try:
            config = self.config
            records = self.load_records()
            report = max_xi_test(
                records,
                config.B,
                config.seed,
                min_cell=config.min_cell,
                type_labels=type_labels(records),
                threads=config.threads,
                max_failure_rate=config.max_failure_rate,
            )
            artifacts = self.artifacts()
            artifacts.stage_json("xi_test.json", report.to_dict())
            artifacts.stage_csv("xi_cells.csv", xi_cell_frame(report))
            artifacts.stage_csv("xi_pvalue_cdf.csv", pd.DataFrame(report.extras["pvalue_cdf"], columns=["p_value", "ecdf"]))
            return self.success_message(
                {
                    "message": f"max |xi| = {report.statistic:.4f} with p-value {report.p_value:.4f}",
                    "statistic": report.statistic,
                    "p_value": report.p_value,
                    "n_cells": report.extras["n_cells"],
                    "n_failed": report.n_failed,
                    "files": artifacts.commit(),
                }
            )
        except Exception as error:
            return self.failure_message(error)


class RwTestProcessor(ProcessorBase):
    """
    The RW bootstrap test of the whole model, using the fit in --fit or estimating one in place.
    """

    def fitted(self, records: List[AuctionRecord]) -> Tuple[AsymmetrySpec, ParentQuantileCurve]:
        config = self.config
        if config.fit_path:
            fit = load_fit(config.fit_path)
            return fit.spec, fit.curve
        variant = AsymmetryVariant(config.variant)
        labels = type_labels(records) if variant is AsymmetryVariant.TYPE_FIXED_EFFECTS else None
        spec = mle_fit(records, variant, type_labels=labels, seed=config.seed).spec
        return spec, qr_curve(records, parse_tau_grid(config.tau_grid), spec, threads=config.threads)

    def process(self) -> Dict[str, Any]:
        try:
            config = self.config
            records = self.load_records()
            spec, curve = self.fitted(records)
            report = rw_bootstrap_pvalue(
                records,
                curve,
                spec,
                config.B,
                config.seed,
                match_type_counts=config.match_type_counts,
                threads=config.threads,
                max_failure_rate=config.max_failure_rate,
                value_grid_size=config.value_grid_size,
            )
            artifacts = self.artifacts()
            artifacts.stage_json("rw_test.json", report.to_dict())
            body: Dict[str, Any] = {
                "message": f"RW = {report.statistic:.6f} with p-value {report.p_value:.4f}",
                "statistic": report.statistic,
                "p_value": report.p_value,
                "n_failed": report.n_failed,
            }
            if config.per_cell:
                cells = rw_cell_tests(
                    records,
                    curve,
                    spec,
                    config.B,
                    config.seed,
                    min_cell=config.rw_min_cell,
                    threads=config.threads,
                    max_failure_rate=config.max_failure_rate,
                )
                artifacts.stage_csv("rw_cells.csv", rw_cell_frame(cells))
                body["n_cell_tests"] = len(cells)
            body["files"] = artifacts.commit()
            return self.success_message(body)
        except Exception as error:
            return self.failure_message(error)
