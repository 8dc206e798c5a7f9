#!/usr/bin/env python3
"""
Run every experiment suite and write its reports
"""

import sys
import logging

from cli import main as cli_main
from suites import SUITES

logger = logging.getLogger(__name__)

def main():
    """
    Runs each suite in turn with `run`, passing the remaining command line through
    """
    logger.info("Starting the full experiment sweep...")
    failed = []
    for suite in SUITES:
        try:
            if cli_main(['run', suite] + sys.argv[1:]) != 0:
                failed.append(suite)
        except Exception as e:
            logger.error(f"Error running suite {suite}: {str(e)}")
            failed.append(suite)

    if failed:
        logger.error(f"Suites with failures: {', '.join(failed)}")
        sys.exit(1)
    logger.info("All suites passed")

if __name__ == "__main__":
    main()
