"""
File operation utilities.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Protocol

import yaml


class Transcribable(Protocol):
    def to_dict(self) -> Dict[str, Any]: ...

    def to_text(self) -> str: ...


class FileOperations:
    """Reads configurations, grammars and decompositions; writes game transcripts."""

    JSON_SUFFIXES = (".json",)

    def __init__(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    def read_yaml(self, file_path: Path) -> Optional[Dict[str, Any]]:
        """
        Read a YAML configuration file.

        Args:
            file_path: Path to YAML file

        Returns:
            The top-level mapping ({} for an empty file), or None when the file
            cannot be loaded as a mapping
        """
        try:
            with open(file_path, "r") as f:
                data = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            self.logger.error(f"Error reading YAML file {file_path}: {str(e)}")
            return None
        if data is None:
            return {}
        if not isinstance(data, dict):
            self.logger.error(f"YAML file {file_path} must hold a mapping, found {type(data).__name__}")
            return None
        return data

    def read_text(self, file_path: Path) -> str:
        """
        Read a grammar or decomposition file.

        Raises:
            OSError: If the file cannot be read
        """
        self.logger.debug(f"Reading {file_path}")
        return Path(file_path).read_text(encoding="utf-8")

    def write_transcript(self, file_path: Path, transcript: Transcribable) -> bool:
        """
        Write a game transcript, as JSON for a `.json` path and as text otherwise.

        Returns:
            True if successful
        """
        if file_path.suffix.lower() in self.JSON_SUFFIXES:
            content = json.dumps(transcript.to_dict(), indent=2, sort_keys=True) + "\n"
        else:
            content = transcript.to_text()
        try:
            file_path.parent.mkdir(parents=True, exist_ok=True)
            file_path.write_text(content, encoding="utf-8")
        except OSError as e:
            self.logger.error(f"Error writing transcript {file_path}: {str(e)}")
            return False
        self.logger.info(f"Transcript written to {file_path}")
        return True
