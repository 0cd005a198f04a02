"""
Orbit VQC Reproduction Script

Runs every row of one experiment (gen + split + train + evaluate per row),
prints the accuracy table and appends the records to the metrics file.
Add --check to fail with exit code 3 when a row misses its threshold.

Usage:
    python orbit_vqc_reproduce.py table3-graph --seed 7 --check
    python orbit_vqc_reproduce.py table1 --dry-run
"""

import logging
import sys
import time

from orbitvqc.cli import main as cli_main
from orbitvqc.logger import log_execution_time


@log_execution_time
def main() -> int:
    """Reproduce the experiment named on the command line."""
    try:
        return cli_main(["reproduce", *sys.argv[1:]])
    except Exception as e:
        logging.error(f"Reproduction failed: {e}", exc_info=True)
        raise


if __name__ == "__main__":
    start_time = time.time()
    exit_code = main()
    end_time = time.time()
    logging.info(f"Total script execution time: {end_time - start_time:.2f} seconds")
    sys.exit(exit_code)
