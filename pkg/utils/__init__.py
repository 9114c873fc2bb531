"""
Utility modules for the bpa command line.
"""

from .file_operations import FileOperations
from .logger import setup_logging

__all__ = ["FileOperations", "setup_logging"]
