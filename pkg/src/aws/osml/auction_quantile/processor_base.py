#  Copyright 2024 Amazon.com, Inc. or its affiliates.

import json
import traceback
from abc import ABC, abstractmethod
from typing import Any, Dict, List

from .errors import ConfigError, exit_code_for
from .managers import ArtifactManager, DatasetManager
from .managers.artifact_manager import to_builtin
from .simulator import AuctionRecord
from .utils import RunConfig, logger


class ProcessorBase(ABC):
    """
    A base class providing common success and failure message handling for the pipelines behind each subcommand.

    :param config: The validated run configuration.
    """

    def __init__(self, config: RunConfig) -> None:
        self.config = config

    @staticmethod
    def success_message(body: Dict[str, Any]) -> Dict[str, Any]:
        """
        Returns a success envelope for the command line.

        :param body: The run summary, including a human readable 'message'.
        :returns: A dictionary with 'exitCode' set to 0 and a 'body' containing the JSON summary.
        """
        logger.info(body.get("message", "Run finished"))
        return {"exitCode": 0, "body": json.dumps(body, default=to_builtin)}

    @staticmethod
    def failure_message(e: Exception) -> Dict[str, Any]:
        """
        Returns an error envelope, including a stack trace, for the command line.

        :param e: The exception that triggered the failure.
        :returns: A dictionary with 'exitCode' set to the code of the error class and a 'body' containing the error
            message and stack trace.
        """
        stack_trace = traceback.format_exc()
        logger.error(f"Run failed with {type(e).__name__}: {e}\nStack trace: {stack_trace}")

        error_response = {"message": str(e), "error": type(e).__name__, "stack_trace": stack_trace.splitlines()}
        return {"exitCode": exit_code_for(e), "body": json.dumps(error_response)}

    @abstractmethod
    def process(self) -> Dict[str, Any]:
        """
        Run the pipeline. This method must be implemented by all subclasses.

        :returns: A response envelope indicating the status of the run.
        """
        pass

    def require(self, name: str, flag: str) -> Any:
        value = getattr(self.config, name)
        if value is None:
            raise ConfigError(f"{self.config.subcommand} needs {flag}")
        return value

    def load_records(self) -> List[AuctionRecord]:
        return DatasetManager().load(self.require("input_path", "--input"), self.config.bidders_path)

    def artifacts(self) -> ArtifactManager:
        """
        :return: An artifact manager for the output directory, tagging every file with the configuration.
        """
        return ArtifactManager(self.config.out or ".", self.config.as_metadata())
