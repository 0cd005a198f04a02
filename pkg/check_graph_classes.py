#!/usr/bin/env python3
"""
Sanity check of the four-qubit graph-state classification.

Enumerates the 64 labeled four-vertex graphs, groups them under local
complementation and vertex permutation, and verifies the class sizes
against the reference table before printing it.
"""

import logging
import sys
import time

from orbitvqc.config import Config
from orbitvqc.logger import log_execution_time, setup_logging
from orbitvqc.stategen import enumerate_four_qubit_classes, graph_state, lu_equivalent_state
from orbitvqc.statevec import single_qubit_purity


@log_execution_time
def main() -> int:
    """Enumerate the classes and log one line per class."""
    setup_logging()
    try:
        table = enumerate_four_qubit_classes()
    except RuntimeError as e:
        logging.error(f"❌ Graph class enumeration failed: {e}", exc_info=True)
        return 1

    logging.info("📊 Four-qubit graph-state classes:")
    for class_id, graph_class in sorted(table.classes.items()):
        purities = [single_qubit_purity(graph_state(graph_class.representative), q) for q in range(1, 5)]
        lu_purities = [single_qubit_purity(lu_equivalent_state(class_id), q) for q in range(1, 5)]
        logging.info(f"   class {class_id}: f_G = {graph_class.representative.polynomial():<22} "
                     f"{graph_class.count:>2} graphs, single-qubit purities "
                     f"{[round(p, 3) for p in purities]} (LU form {[round(p, 3) for p in lu_purities]})")

    logging.info(f"✅ {sum(table.counts)} graphs, class sizes {table.counts} "
                 f"match {list(Config.GRAPH_CLASS_COUNTS)}")
    return 0


if __name__ == "__main__":
    start_time = time.time()
    exit_code = main()
    end_time = time.time()
    logging.info(f"Total script execution time: {end_time - start_time:.2f} seconds")
    sys.exit(exit_code)
