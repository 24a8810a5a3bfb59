#  Copyright 2024 Amazon.com, Inc. or its affiliates.

import json
import os
import tempfile
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..utils import logger

METADATA_PREFIX = "# "


def to_builtin(value: Any) -> Any:
    """
    JSON fallback for numpy scalars and arrays.

    :param value: The object json could not encode.
    :return: A plain Python equivalent.
    """
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def metadata_header(metadata: Optional[Dict[str, Any]]) -> str:
    """
    :param metadata: Provenance to record, typically the run configuration and seed.
    :return: Comment lines to put in front of a CSV table, empty without metadata.
    """
    if not metadata:
        return ""
    return f"{METADATA_PREFIX}osml-auction-quantile {json.dumps(metadata, sort_keys=True, default=to_builtin)}\n"


class ArtifactManager:
    """
    Collects the files a pipeline produces and writes them only once the pipeline has succeeded. The whole set is
    committed together: either every staged file is replaced or none is, so readers never see a partial run.

    :param output_dir: Directory that receives the artifacts.
    :param metadata: Provenance written into every artifact.
    """

    def __init__(self, output_dir: str, metadata: Optional[Dict[str, Any]] = None) -> None:
        self.output_dir = output_dir or "."
        self.metadata = metadata or {}
        self.staged: List[Tuple[str, str]] = []

    def path_for(self, name: str) -> str:
        return os.path.join(self.output_dir, name)

    def stage_text(self, name: str, content: str) -> str:
        """
        Stage raw text content.

        :param name: File name inside the output directory.
        :param content: The full file content.
        :return: The path the file will be written to.
        """
        self.staged.append((name, content))
        return self.path_for(name)

    def stage_json(self, name: str, payload: Dict[str, Any]) -> str:
        body = {"metadata": self.metadata, **payload} if self.metadata else payload
        return self.stage_text(name, json.dumps(body, indent=2, sort_keys=True, default=to_builtin) + "\n")

    def stage_csv(self, name: str, frame: pd.DataFrame) -> str:
        return self.stage_text(name, metadata_header(self.metadata) + frame.to_csv(index=False, lineterminator="\n"))

    def commit(self) -> List[str]:
        """
        Write every staged artifact as one unit. All contents land in temporary files next to their targets before
        any target is touched; only then are the temporary files renamed into place. If a write fails nothing is
        renamed, and if a rename fails the targets renamed so far are put back the way they were.

        :return: The written paths, in staging order.
        """
        os.makedirs(self.output_dir, exist_ok=True)
        pending: List[Tuple[str, str]] = []
        try:
            for name, content in self.staged:
                handle, temp_path = tempfile.mkstemp(prefix=f".{name}.", dir=self.output_dir)
                pending.append((temp_path, self.path_for(name)))
                with os.fdopen(handle, "w", encoding="utf-8", newline="") as temp_file:
                    temp_file.write(content)
            self._swap_in(pending)
        finally:
            for temp_path, _ in pending:
                if os.path.exists(temp_path):
                    os.remove(temp_path)
        written = [target for _, target in pending]
        for target in written:
            logger.info(f"Wrote {target}")
        self.staged = []
        return written

    @staticmethod
    def _swap_in(pending: List[Tuple[str, str]]) -> None:
        # (target, backup or None) for every target already replaced
        replaced: List[Tuple[str, Optional[str]]] = []
        try:
            for temp_path, target in pending:
                backup = None
                if os.path.exists(target):
                    backup = f"{temp_path}.previous"
                    os.link(target, backup)
                replaced.append((target, backup))
                os.replace(temp_path, target)
        except OSError:
            logger.warning("Artifact commit failed, restoring the files it had already replaced")
            for target, backup in reversed(replaced):
                if backup is not None and os.path.exists(backup):
                    os.replace(backup, target)
                elif backup is None and os.path.exists(target):
                    os.remove(target)
            raise
        finally:
            for target, backup in replaced:
                if backup is not None and os.path.exists(backup):
                    os.remove(backup)
