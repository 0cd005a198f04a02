import json
import os

import numpy as np
import pytest

from orbitvqc.ansatz import AnsatzConfig
from orbitvqc.experiments import MetricsRecord
from orbitvqc.hybridmodel import HybridModel, predict_batch
from orbitvqc.io_utils import ModelStore, ResultsStore, format_table


def record(class_id: str = "1", test_accuracy: float = 0.97) -> MetricsRecord:
    return MetricsRecord("table3-graph", class_id, 7, 0.99, test_accuracy, 0.0421, 150, 12.5)


class TestModelStore:
    def test_round_trip_preserves_predictions(self, tmp_path, rng):
        model = HybridModel.build(AnsatzConfig(2, 3, "ring-cz", pad=(0.0, 0.25)), (5, 3), seed=4)
        path = str(tmp_path / "models" / "m.json")
        ModelStore().save(model, path)
        loaded = ModelStore().load(path)
        features = rng.uniform(-1, 1, size=(6, 2))
        np.testing.assert_array_equal(loaded.flat_params(), model.flat_params())
        np.testing.assert_array_equal(predict_batch(loaded, features), predict_batch(model, features))
        assert loaded.cfg == model.cfg

    def test_quantum_only_model(self, tmp_path):
        model = HybridModel.build(AnsatzConfig(2, 1), None, seed=0)
        path = str(tmp_path / "q.json")
        ModelStore().save(model, path)
        assert ModelStore().load(path).head is None

    def test_header_fields(self, tmp_path):
        model = HybridModel.build(AnsatzConfig(4, 2), (8,), seed=0)
        path = tmp_path / "h.json"
        ModelStore().save(model, str(path))
        doc = json.loads(path.read_text())
        assert doc["format"] == "orbitvqc-model v1"
        assert doc["head_sizes"] == [4, 8, 1]
        assert len(doc["params"]) == model.n_params

    def test_rejects_unknown_format(self):
        with pytest.raises(ValueError, match="model format"):
            ModelStore.from_document({"format": "something"})

    def test_rejects_parameter_count_mismatch(self):
        doc = ModelStore.to_document(HybridModel.build(AnsatzConfig(2, 1), (2,), seed=0))
        doc["params"] = doc["params"][:-1]
        with pytest.raises(ValueError):
            ModelStore.from_document(doc)


class TestResultsStore:
    def test_append_writes_header_once(self, results_path):
        store = ResultsStore(results_path)
        store.append([record("1")])
        store.append([record("2"), record("3")])
        with open(results_path) as f:
            lines = f.read().splitlines()
        assert lines[0].startswith("experiment,class_id,seed")
        assert len(lines) == 4
        df = store.read()
        assert df["class_id"].astype(str).tolist() == ["1", "2", "3"]

    def test_prior_records_untouched(self, results_path):
        store = ResultsStore(results_path)
        store.append([record("1")])
        with open(results_path) as f:
            before = f.read()
        store.append([record("2")])
        with open(results_path) as f:
            assert f.read().startswith(before)

    def test_column_mismatch_rejected(self, results_path):
        os.makedirs(os.path.dirname(results_path), exist_ok=True)
        with open(results_path, "w") as f:
            f.write("a,b\n1,2\n")
        with pytest.raises(ValueError, match="columns"):
            ResultsStore(results_path).append([record()])

    def test_read_missing_file(self, tmp_path):
        assert ResultsStore(str(tmp_path / "none.csv")).read().empty


class TestFormatTable:
    def test_contains_rows_and_columns(self):
        text = format_table([record("1", 0.97), record("2", 0.955)])
        assert "test_accuracy" in text
        assert "0.9700" in text and "0.9550" in text

    def test_empty(self):
        assert format_table([]) == "(no records)"
