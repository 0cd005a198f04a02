"""
Configuration module for the orbitvqc toolkit.

This module centralizes all configuration settings including numerical
tolerances, optimizer hyperparameters, training defaults, the experiment
grid and the acceptance thresholds each grid row is checked against.
"""

import math
import os
from typing import Dict, List, Optional, Tuple


class Config:
    """Configuration class for the orbitvqc toolkit."""

    # Numerical tolerances
    NORM_TOL = 1e-10
    UNITARY_TOL = 1e-10

    # Adam hyperparameters
    ADAM_BETA1 = 0.9
    ADAM_BETA2 = 0.999
    ADAM_EPS = 1e-8

    # Training defaults (versioned: change together with ACCEPTANCE)
    DEFAULT_LAYERS = 4
    DEFAULT_HIDDEN: Tuple[int, ...] = (8,)
    DEFAULT_LR = 0.005
    DEFAULT_EPOCHS = 150
    DEFAULT_BATCH_SIZE = 32
    DEFAULT_M = 2000
    DEFAULT_SEED = 7
    DEFAULT_ENTANGLER = "ring-cnot"
    ENTANGLERS = ("ring-cnot", "linear-cnot", "ring-cz")
    # Initial circuit angles are drawn uniformly from [-scale, scale)
    DEFAULT_INIT_SCALE = math.pi

    # Per-experiment training defaults, layered over the DEFAULT_* values above.
    # Explicit overrides (CLI flags, keyword arguments) win over both.
    EXPERIMENT_DEFAULTS: Dict[str, Dict[str, object]] = {
        "fig2": {},
        "table1": {
            "n_layers": 1, "entangler": "ring-cz", "hidden": (8,), "learning_rate": 0.01,
            "init_scale": math.pi / 4,
        },
        "table2-3q": {
            "n_layers": 2, "entangler": "ring-cz", "hidden": (16,), "learning_rate": 0.01,
            "epochs": 200, "init_scale": math.pi / 4,
        },
        "table3-graph": {},
        "table4-stab": {
            "n_layers": 2, "entangler": "ring-cz", "hidden": (16, 8), "learning_rate": 0.01,
            "epochs": 300, "init_scale": math.pi / 4,
        },
        "table5-lu": {
            "n_layers": 2, "entangler": "ring-cz", "hidden": (16, 8), "learning_rate": 0.01,
            "epochs": 300, "init_scale": math.pi / 4,
        },
        "table6-lu-hilbert": {
            "n_layers": 2, "entangler": "ring-cz", "hidden": (16, 8), "learning_rate": 0.01,
            "epochs": 300, "init_scale": math.pi / 4,
        },
    }

    # Early stopping: stop when the training cost moved less than TOL over PATIENCE epochs
    EARLY_STOP_TOL = 1e-6
    EARLY_STOP_PATIENCE = 10
    LOG_EVERY = 10

    # Synthetic two-dimensional task
    SYNTHETIC_RADIUS = 0.6
    SYNTHETIC_PAD = (0.0, 0.25)

    # Four-qubit graph-state classes, ordered by class id 1..6
    GRAPH_CLASS_COUNTS = (1, 6, 3, 16, 33, 5)
    GRAPH_CLASS_REPRESENTATIVES: Dict[int, Tuple[Tuple[int, int], ...]] = {
        1: (),
        2: ((0, 1),),
        3: ((0, 1), (2, 3)),
        4: ((0, 1), (0, 2)),
        5: ((0, 1), (1, 2), (2, 3)),
        6: ((0, 1), (0, 2), (0, 3)),
    }
    CLASS_IDS = (1, 2, 3, 4, 5, 6)

    # Four-qubit states LU-equivalent to each class: basis indices carrying equal amplitude
    LU_EQUIVALENT_STATES: Dict[int, Tuple[int, ...]] = {
        1: (0,),                # |0000>
        2: (0, 12),             # EPR (x) |00>
        3: (0, 3, 12, 15),      # EPR (x) EPR
        4: (0, 14),             # GHZ_3 (x) |0>
        5: (0, 7, 11, 12),      # (|0000>+|0111>+|1011>+|1100>)/2
        6: (0, 15),             # GHZ_4
    }

    # Named three-qubit states: basis indices carrying equal amplitude
    NAMED_STATES: Dict[str, Tuple[int, ...]] = {
        "separable": (0,),
        "bisep-AB-C": (0, 6),
        "bisep-A-BC": (0, 3),
        "bisep-B-AC": (0, 5),
        "W": (1, 2, 4),
        "GHZ": (0, 7),
    }

    OPPOSITIONS = ("other-orbits", "full-hilbert")

    # File formats
    DATASET_FORMAT = "orbitvqc-dataset v1"
    MODEL_FORMAT = "orbitvqc-model v1"

    # Processing configuration
    MAX_WORKERS = int(os.getenv("ORBITVQC_MAX_WORKERS", "4"))
    RESULTS_PATH = os.getenv("ORBITVQC_RESULTS_PATH", "results/metrics.csv")

    # Experiment grid. Each row: (row label, target, opposition, n_qubits).
    # Targets are class ids for four-qubit tasks and state names for three-qubit ones.
    EXPERIMENTS: Dict[str, List[Tuple[str, str, Optional[str], int]]] = {
        "fig2": [
            ("hybrid", "annulus", None, 2),
            ("quantum-only", "annulus", None, 2),
        ],
        "table1": [
            (name, "GHZ", name, 3)
            for name in ("separable", "bisep-AB-C", "bisep-A-BC", "bisep-B-AC", "W")
        ],
        "table2-3q": [
            (name, name, "full-hilbert", 3)
            for name in ("separable", "bisep-AB-C", "bisep-A-BC", "bisep-B-AC", "W", "GHZ")
        ],
        "table3-graph": [(str(c), str(c), None, 4) for c in (1, 2, 3, 4, 5, 6)],
        "table4-stab": [(str(c), str(c), None, 4) for c in (1, 2, 3, 4, 5, 6)],
        "table5-lu": [(str(c), str(c), "other-orbits", 4) for c in (1, 2, 3, 4, 5, 6)],
        "table6-lu-hilbert": [(str(c), str(c), "full-hilbert", 4) for c in (1, 2, 3, 4, 5, 6)],
    }

    # Acceptance thresholds on test accuracy: per-row lower bound, optional
    # per-row upper bound (keyed by row label) and lower bound on the row mean.
    ACCEPTANCE: Dict[str, Dict[str, object]] = {
        "fig2": {"row_min": {"hybrid": 0.98}, "row_max": {"quantum-only": 0.90}},
        "table1": {"row_min": 0.95},
        "table2-3q": {"row_min": 0.78, "mean_min": 0.85},
        "table3-graph": {"row_min": 0.95},
        "table4-stab": {"row_min": 0.85},
        "table5-lu": {"row_min": 0.82},
        "table6-lu-hilbert": {"row_min": 0.85},
    }

    @classmethod
    def experiment_ids(cls) -> List[str]:
        """Return the valid experiment ids in grid order."""
        return list(cls.EXPERIMENTS)

    @classmethod
    def get_experiment_rows(cls, experiment: str) -> List[Tuple[str, str, Optional[str], int]]:
        """Get the grid rows of an experiment, rejecting unknown ids."""
        if experiment not in cls.EXPERIMENTS:
            raise ValueError(
                f"Unknown experiment id '{experiment}'. Valid ids: {', '.join(cls.experiment_ids())}"
            )
        return cls.EXPERIMENTS[experiment]

    @classmethod
    def n_qubits_for(cls, experiment: str) -> int:
        """Number of qubits every row of an experiment works with."""
        return cls.get_experiment_rows(experiment)[0][3]

    @classmethod
    def training_defaults(cls, experiment: str) -> Dict[str, object]:
        """Training fields an experiment's rows use unless overridden."""
        cls.get_experiment_rows(experiment)
        return dict(cls.EXPERIMENT_DEFAULTS.get(experiment, {}))

    @classmethod
    def validate_learning_rate(cls, learning_rate: float) -> bool:
        """Validate that a learning rate lies in the open interval (0, 1)."""
        return 0.0 < learning_rate < 1.0
