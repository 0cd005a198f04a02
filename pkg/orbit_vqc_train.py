"""
Orbit VQC Training Script

Thin wrapper around ``orbitvqc train``: trains a hybrid model on a dataset
file, saves the model and appends the metrics record to the results file.

Usage:
    python orbit_vqc_train.py --data data/table3-graph-6-seed7.txt --epochs 150
"""

import logging
import sys
import time

from orbitvqc.cli import main as cli_main
from orbitvqc.logger import log_execution_time


@log_execution_time
def main() -> int:
    """Train on the dataset named by the command-line flags."""
    try:
        return cli_main(["train", *sys.argv[1:]])
    except Exception as e:
        logging.error(f"Training failed: {e}", exc_info=True)
        raise


if __name__ == "__main__":
    start_time = time.time()
    exit_code = main()
    end_time = time.time()
    logging.info(f"Total script execution time: {end_time - start_time:.2f} seconds")
    sys.exit(exit_code)
