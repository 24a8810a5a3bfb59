#  Copyright 2023-2024 Amazon.com, Inc. or its affiliates.

# Telling flake8 to not flag errors in this file. It is normal that these classes are imported but not used in an
# __init__.py file.
# flake8: noqa
from .app_config import RunConfig, ServiceConfig, parse_counts, parse_float_list, parse_tau_grid, read_config_file
from .logger import AsyncContextFilter, configure_logger, logger, set_log_level
from .workers import map_ordered
