"""
PSFM Toolkit
Positive sesquilinear form measures: dilation, pointwise decomposition and
generalized eigenvectors
Features:
- Naimark dilation with uniqueness and minimality checks
- Pointwise decomposition, direct-integral model and trace-one densities
- Weighted shifts on the circle, generalized eigenvector expansions
- Counterexample: a generalized eigenvalue outside the spectrum
"""

# Version information
__version__ = "1.0.0"

import logging
import os
import sys
from datetime import datetime
from typing import Optional

# Add project root to path
sys.path.insert(0, os.path.dirname(__file__))

from cli.commands import run

# Logs go to stderr so stdout carries only the JSON report
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s [%(levelname)s] %(name)s: %(message)s',
    handlers=[
        logging.StreamHandler(sys.stderr)
    ]
)
logger = logging.getLogger(__name__)
log_filename = None  # Set when --log-file is given


def enable_file_logging(path: Optional[str] = None) -> str:
    """Enable file logging for this run"""
    global log_filename
    if log_filename is None:  # Only create once per session
        log_filename = path or f"psfm_{datetime.now().strftime('%d%m%Y_%H%M%S')}.log"
        file_handler = logging.FileHandler(log_filename, encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter('%(asctime)s [%(levelname)s] %(name)s: %(message)s'))
        logging.getLogger().addHandler(file_handler)
        logger.info("="*60)
        logger.info(f"PSFM Toolkit v{__version__} - Run Log")
        logger.info(f"Log file: {log_filename}")
        logger.info("="*60)
    return log_filename


def main() -> int:
    """Entry point for the application"""
    logger.debug(f"Starting PSFM Toolkit v{__version__}")
    return run(sys.argv[1:], file_logging=enable_file_logging)


if __name__ == "__main__":
    sys.exit(main())
