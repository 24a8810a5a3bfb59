#  Copyright 2024 Amazon.com, Inc. or its affiliates.

# Telling flake8 to not flag errors in this file. It is normal that these classes are imported but not used in an
# __init__.py file.
# flake8: noqa
from .estimate_processor import EstimateProcessor
from .mc_processor import MonteCarloProcessor
from .misspec_processor import MisspecProcessor
from .revenue_processor import RevenueProcessor
from .simulate_processor import SimulateProcessor, preset_config
from .spec_test_processors import RwTestProcessor, XiTestProcessor

PROCESSORS = {
    "simulate": SimulateProcessor,
    "estimate": EstimateProcessor,
    "revenue": RevenueProcessor,
    "misspec": MisspecProcessor,
    "test-xi": XiTestProcessor,
    "test-rw": RwTestProcessor,
    "mc": MonteCarloProcessor,
}
