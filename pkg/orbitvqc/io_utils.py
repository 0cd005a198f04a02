"""
Input/Output utilities for orbitvqc.

This module handles model files (JSON with an architecture header and a flat
parameter list) and the append-only metrics file of experiment records.
"""

import json
import logging
import os
from dataclasses import asdict, is_dataclass
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd

from .ansatz import AnsatzConfig, CircuitParams
from .config import Config
from .hybridmodel import HybridModel
from .logger import log_execution_time
from .neuralnet import DenseLayer, Mlp


class ModelStore:
    """Serializes trained hybrid models."""

    @staticmethod
    def to_document(model: HybridModel) -> Dict[str, Any]:
        """
        Architecture header plus flat parameters (circuit angles, then W row-major and b per layer).

        Args:
            model: Model to describe

        Returns:
            JSON-ready dictionary
        """
        head = model.head
        return {
            "format": Config.MODEL_FORMAT,
            "n_qubits": model.cfg.n_qubits,
            "n_layers": model.cfg.n_layers,
            "entangler": model.cfg.entangler,
            "pad": list(model.cfg.pad),
            "head_sizes": head.sizes if head is not None else None,
            "activations": [layer.activation for layer in head.layers] if head is not None else [],
            "params": model.flat_params().tolist(),
        }

    @staticmethod
    def from_document(doc: Dict[str, Any]) -> HybridModel:
        """Rebuild a model from ``to_document`` output, validating the header."""
        if doc.get("format") != Config.MODEL_FORMAT:
            raise ValueError(f"Expected model format '{Config.MODEL_FORMAT}', got '{doc.get('format')}'")
        cfg = AnsatzConfig(int(doc["n_qubits"]), int(doc["n_layers"]), doc["entangler"], tuple(doc["pad"]))
        head = None
        sizes = doc.get("head_sizes")
        if sizes is not None:
            activations = doc["activations"]
            if len(activations) != len(sizes) - 1:
                raise ValueError(f"{len(activations)} activations for {len(sizes) - 1} layers")
            head = Mlp([
                DenseLayer(np.zeros((width, fan_in)), np.zeros(width), act)
                for fan_in, width, act in zip(sizes[:-1], sizes[1:], activations)
            ])
        model = HybridModel(cfg, CircuitParams.zeros(cfg), head)
        model.set_flat_params(np.array(doc["params"], dtype=float))
        return model

    @log_execution_time
    def save(self, model: HybridModel, path: str) -> None:
        """
        Write a model to a JSON file.

        Args:
            model: Trained model
            path: Output path; parent directories are created
        """
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_document(model), f, indent=2)
        logging.info(f"Saved model with {model.n_params} parameters to {path}")

    @log_execution_time
    def load(self, path: str) -> HybridModel:
        """
        Read a model file.

        Raises:
            ValueError: unknown format or inconsistent architecture
        """
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
        model = self.from_document(doc)
        logging.info(f"Loaded model ({model.cfg.n_qubits} qubits, {model.cfg.n_layers} layers) from {path}")
        return model


def records_frame(records: Sequence[Any]) -> pd.DataFrame:
    """DataFrame with one row per dataclass record."""
    return pd.DataFrame([asdict(r) if is_dataclass(r) else dict(r) for r in records])


class ResultsStore:
    """Append-only comma-separated file of metrics records."""

    def __init__(self, path: str = Config.RESULTS_PATH):
        self.path = path

    def _existing_columns(self) -> List[str]:
        with open(self.path, "r", encoding="utf-8") as f:
            return f.readline().strip().split(",")

    @log_execution_time
    def append(self, records: Sequence[Any]) -> None:
        """
        Append records; the header is written only when the file is new.

        Raises:
            ValueError: the file exists with a different column layout
        """
        if not records:
            return
        df = records_frame(records)
        df.columns = df.columns.str.lower()
        is_new = not os.path.exists(self.path) or os.path.getsize(self.path) == 0
        if not is_new and self._existing_columns() != list(df.columns):
            raise ValueError(
                f"Results file {self.path} has columns {self._existing_columns()}, "
                f"records have {list(df.columns)}"
            )
        os.makedirs(os.path.dirname(os.path.abspath(self.path)), exist_ok=True)
        df.to_csv(self.path, mode="a", header=is_new, index=False)
        logging.info(f"Appended {len(df)} records to {self.path}")

    def read(self) -> pd.DataFrame:
        """All records written so far (empty frame when the file does not exist)."""
        if not os.path.exists(self.path):
            return pd.DataFrame()
        return pd.read_csv(self.path)


def format_table(records: Sequence[Any], columns: Sequence[str] = ()) -> str:
    """Aligned text table of records, optionally restricted to ``columns``."""
    df = records_frame(records)
    if df.empty:
        return "(no records)"
    if columns:
        df = df[list(columns)]
    return df.to_string(index=False, float_format=lambda v: f"{v:.4f}")
