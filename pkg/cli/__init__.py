"""
Command-line package for the PSFM toolkit
"""

from cli.commands import build_parser, run
from cli.config import RunConfig

__all__ = [
    'build_parser',
    'run',
    'RunConfig',
]
