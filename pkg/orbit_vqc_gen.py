"""
Orbit VQC Dataset Generation Script

Thin wrapper around ``orbitvqc gen``: builds the labeled dataset of one
experiment row and writes it in the line-oriented dataset format.

Usage:
    python orbit_vqc_gen.py --experiment table3-graph --class 6 --m 2000 --seed 7
"""

import logging
import sys
import time

from orbitvqc.cli import main as cli_main
from orbitvqc.logger import log_execution_time


@log_execution_time
def main() -> int:
    """Generate one dataset from the command-line flags."""
    try:
        return cli_main(["gen", *sys.argv[1:]])
    except Exception as e:
        logging.error(f"Dataset generation failed: {e}", exc_info=True)
        raise


if __name__ == "__main__":
    start_time = time.time()
    exit_code = main()
    end_time = time.time()
    logging.info(f"Total script execution time: {end_time - start_time:.2f} seconds")
    sys.exit(exit_code)
