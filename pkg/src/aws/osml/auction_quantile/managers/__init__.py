#  Copyright 2024 Amazon.com, Inc. or its affiliates.

# Telling flake8 to not flag errors in this file. It is normal that these classes are imported but not used in an
# __init__.py file.
# flake8: noqa
from .artifact_manager import ArtifactManager, metadata_header, to_builtin
from .dataset_manager import DatasetManager, DatasetSchema, LoadedFit, SchemaMode, load_fit, type_labels
