"""
Labeled datasets for every experiment, the even train/test split and the
line-oriented dataset file format.

Balanced builders put the m/2 target-orbit samples (label -1) first and the
m/2 opposition samples (label +1) after them. Sample ``i`` is generated from
its own child generator ``rng.child(i)``, so the output does not depend on
how the thread pool schedules the work.
"""

import logging
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .config import Config
from .logger import log_execution_time
from .stategen import (
    Graph,
    Rng,
    all_graphs,
    enumerate_four_qubit_classes,
    graph_state,
    named_three_qubit_state,
    random_local_clifford,
    random_local_haar,
    random_pure_state,
    single_qubit_clifford_group,
)
from .statevec import Gate1Q, StateVector, apply_local_operator

# (state, provenance) for one generated sample
Draw = Tuple[StateVector, str]


class DatasetFormatError(ValueError):
    """Malformed dataset file; ``line`` is the 1-based line number when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class Sample:
    """Feature vector with a +-1 label and an optional provenance string."""

    features: np.ndarray
    label: int
    provenance: str = ""

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=complex).reshape(-1)
        if self.label not in (-1, 1):
            raise ValueError(f"Label must be -1 or +1, got {self.label}")
        self.label = int(self.label)
        if not np.all(np.isfinite(self.features)):
            raise ValueError("Sample features must be finite")


@dataclass(frozen=True)
class TaskDescriptor:
    """What a dataset was built for: experiment id, target and opposition pool."""

    experiment: str
    target: str
    opposition: Optional[str] = None

    def __str__(self) -> str:
        parts = [self.experiment, self.target]
        if self.opposition is not None:
            parts.append(self.opposition)
        return "/".join(parts)

    @classmethod
    def parse(cls, text: str) -> "TaskDescriptor":
        parts = text.split("/")
        if len(parts) not in (2, 3) or not all(parts):
            raise ValueError(f"Task must look like 'experiment/target[/opposition]', got '{text}'")
        return cls(parts[0], parts[1], parts[2] if len(parts) == 3 else None)


@dataclass
class Dataset:
    """Samples plus the task, seed, width and encoding padding they were built with."""

    samples: List[Sample]
    task: TaskDescriptor
    seed: int
    n_qubits: int
    pad: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        self.samples = list(self.samples)
        self.pad = tuple(float(v) for v in self.pad)
        width = 2 ** self.n_qubits - len(self.pad)
        for i, sample in enumerate(self.samples):
            if sample.features.shape[0] != width:
                raise ValueError(
                    f"Sample {i} has {sample.features.shape[0]} features, expected {width} "
                    f"for {self.n_qubits} qubits and {len(self.pad)} padding amplitudes"
                )
            if not self.pad and abs(np.linalg.norm(sample.features) - 1.0) > Config.NORM_TOL:
                raise ValueError(f"Sample {i} is not normalized (norm {np.linalg.norm(sample.features):.12f})")

    def __len__(self) -> int:
        return len(self.samples)

    def features_matrix(self) -> np.ndarray:
        width = 2 ** self.n_qubits - len(self.pad)
        if not self.samples:
            return np.zeros((0, width), dtype=complex)
        return np.stack([s.features for s in self.samples])

    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=int)

    def label_counts(self) -> Tuple[int, int]:
        """(number of -1 labels, number of +1 labels)."""
        labels = self.labels()
        return int(np.sum(labels == -1)), int(np.sum(labels == 1))

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return Dataset([self.samples[i] for i in indices], self.task, self.seed, self.n_qubits, self.pad)


def _check_m(m: int) -> None:
    if m < 2 or m % 2:
        raise ValueError(f"Sample count m must be a positive even number, got {m}")


def _check_class_id(class_id: int) -> None:
    if class_id not in Config.CLASS_IDS:
        raise ValueError(f"Invalid class id {class_id}; expected one of {list(Config.CLASS_IDS)}")


def _format_matrix(matrix: np.ndarray) -> str:
    return ",".join(repr(float(v)) for entry in matrix.ravel() for v in (entry.real, entry.imag))


def _parse_matrix(text: str) -> np.ndarray:
    values = [float(v) for v in text.split(",")]
    if len(values) != 8:
        raise ValueError(f"A 2x2 complex matrix needs 8 values, got {len(values)}")
    pairs = np.array(values).reshape(4, 2)
    return (pairs[:, 0] + 1j * pairs[:, 1]).reshape(2, 2)


def _balanced(m: int, rng: Rng, negative: Callable[[np.random.Generator], Draw],
              positive: Callable[[np.random.Generator], Draw],
              task: TaskDescriptor, n_qubits: int) -> Dataset:
    _check_m(m)
    half = m // 2

    def make(index: int) -> Sample:
        gen = rng.child(index)
        if index < half:
            state, provenance = negative(gen)
            return Sample(state.amps, -1, provenance)
        state, provenance = positive(gen)
        return Sample(state.amps, 1, provenance)

    with ThreadPoolExecutor(max_workers=Config.MAX_WORKERS) as executor:
        samples = list(executor.map(make, range(m)))

    logging.info(f"Built {m} samples for task {task} (seed {rng.seed})")
    return Dataset(samples, task, rng.seed, n_qubits)


def _draw_graph(class_ids: Sequence[int], gen: np.random.Generator) -> Tuple[int, Graph]:
    # class first, then member, each uniform
    table = enumerate_four_qubit_classes()
    class_id = class_ids[int(gen.integers(len(class_ids)))]
    members = table.members(class_id)
    return class_id, members[int(gen.integers(len(members)))]


def _others(class_id: int) -> List[int]:
    return [c for c in Config.CLASS_IDS if c != class_id]


def _graph_draw(class_ids: Sequence[int]) -> Callable[[np.random.Generator], Draw]:
    def draw(gen: np.random.Generator) -> Draw:
        class_id, g = _draw_graph(class_ids, gen)
        return graph_state(g), f"kind=graph|class={class_id}|graph={g.bitmask()}"
    return draw


def _clifford_draw(class_ids: Sequence[int]) -> Callable[[np.random.Generator], Draw]:
    def draw(gen: np.random.Generator) -> Draw:
        class_id, g = _draw_graph(class_ids, gen)
        ops = random_local_clifford(g.n_vertices, gen)
        state = apply_local_operator(graph_state(g), ops)
        names = ",".join(op.name[1:] for op in ops)
        return state, f"kind=lc|class={class_id}|graph={g.bitmask()}|ops={names}"
    return draw


def _format_unitaries(ops: Sequence[Gate1Q]) -> str:
    return "|".join(f"U{q}={_format_matrix(op.matrix)}" for q, op in enumerate(ops, start=1))


def _lu_graph_draw(class_ids: Sequence[int]) -> Callable[[np.random.Generator], Draw]:
    def draw(gen: np.random.Generator) -> Draw:
        class_id, g = _draw_graph(class_ids, gen)
        ops = random_local_haar(g.n_vertices, gen)
        state = apply_local_operator(graph_state(g), ops)
        return state, f"kind=lu|class={class_id}|graph={g.bitmask()}|{_format_unitaries(ops)}"
    return draw


def _lu_named_draw(name: str) -> Callable[[np.random.Generator], Draw]:
    base = named_three_qubit_state(name)

    def draw(gen: np.random.Generator) -> Draw:
        ops = random_local_haar(base.n_qubits, gen)
        return apply_local_operator(base, ops), f"kind=lu|state={name}|{_format_unitaries(ops)}"
    return draw


def _random_state_draw(n_qubits: int) -> Callable[[np.random.Generator], Draw]:
    def draw(gen: np.random.Generator) -> Draw:
        return random_pure_state(n_qubits, gen), "kind=random-state"
    return draw


@log_execution_time
def build_graph_class_dataset(class_id: int, m: int, rng: Rng) -> Dataset:
    """
    Graph states of ``class_id`` (label -1) against the other five classes (label +1).

    Members are drawn with repetition: class uniformly among the pool, then
    graph uniformly within the class.
    """
    _check_class_id(class_id)
    return _balanced(m, rng, _graph_draw([class_id]), _graph_draw(_others(class_id)),
                     TaskDescriptor("table3-graph", str(class_id)), 4)


@log_execution_time
def build_stabilizer_dataset(class_id: int, m: int, rng: Rng) -> Dataset:
    """Graph states with a fresh uniform local Clifford applied, class ``class_id`` against the rest."""
    _check_class_id(class_id)
    return _balanced(m, rng, _clifford_draw([class_id]), _clifford_draw(_others(class_id)),
                     TaskDescriptor("table4-stab", str(class_id)), 4)


@log_execution_time
def build_lu_orbit_dataset(class_id: int, m: int, opposition: str, rng: Rng) -> Dataset:
    """
    LU orbit of a graph-state class against the other orbits or against random states.

    Args:
        class_id: Target class 1..6
        m: Even sample count
        opposition: 'other-orbits' or 'full-hilbert'
        rng: Seeded generator source

    Returns:
        Balanced dataset; negatives are U_1 (x) ... (x) U_4 |psi_G> with Haar U_q
    """
    _check_class_id(class_id)
    if opposition == "other-orbits":
        positive, experiment = _lu_graph_draw(_others(class_id)), "table5-lu"
    elif opposition == "full-hilbert":
        positive, experiment = _random_state_draw(4), "table6-lu-hilbert"
    else:
        raise ValueError(f"Invalid opposition '{opposition}'. Valid: {', '.join(Config.OPPOSITIONS)}")
    return _balanced(m, rng, _lu_graph_draw([class_id]), positive,
                     TaskDescriptor(experiment, str(class_id), opposition), 4)


@log_execution_time
def build_three_qubit_dataset(target: str, opposition: str, m: int, rng: Rng) -> Dataset:
    """
    LU orbit of a named three-qubit state against another named orbit or random states.

    ``opposition`` is a state name or 'full-hilbert'.
    """
    negative = _lu_named_draw(target)
    if opposition == "full-hilbert":
        positive, experiment = _random_state_draw(3), "table2-3q"
    else:
        positive, experiment = _lu_named_draw(opposition), "table1"
    return _balanced(m, rng, negative, positive, TaskDescriptor(experiment, target, opposition), 3)


def annulus_label(x: float, y: float, radius: float = Config.SYNTHETIC_RADIUS) -> int:
    """-1 strictly inside the disc of ``radius``, +1 elsewhere."""
    return -1 if x * x + y * y < radius * radius else 1


@log_execution_time
def build_synthetic2d(m: int, rng: Rng) -> Dataset:
    """
    Concentric-disc task on [-1, 1]^2, balanced by rejection sampling.

    The dataset carries the free amplitudes Config.SYNTHETIC_PAD that the
    two-qubit circuit appends to (x, y) before normalizing.
    """
    _check_m(m)
    gen = rng.generator()
    half = m // 2
    inside: List[Sample] = []
    outside: List[Sample] = []
    draws = 0
    while len(inside) < half or len(outside) < half:
        x, y = gen.uniform(-1.0, 1.0, size=2)
        draws += 1
        label = annulus_label(x, y)
        bucket = inside if label == -1 else outside
        if len(bucket) < half:
            bucket.append(Sample(np.array([x, y]), label))
    logging.info(f"Synthetic task: kept {m} of {draws} uniform draws")
    return Dataset(inside + outside, TaskDescriptor("fig2", "annulus"), rng.seed, 2, Config.SYNTHETIC_PAD)


def split_even(ds: Dataset, rng: Rng) -> Tuple[Dataset, Dataset]:
    """
    Random 50/50 split stratified by label.

    Train receives floor(negatives / 2) negatives and is filled up to half the
    samples with positives; both halves keep the original sample order.
    """
    if len(ds) % 2:
        raise ValueError(f"Cannot split {len(ds)} samples evenly")
    gen = rng.generator()
    labels = ds.labels()
    negatives = gen.permutation(np.flatnonzero(labels == -1))
    positives = gen.permutation(np.flatnonzero(labels == 1))
    n_train_neg = len(negatives) // 2
    n_train_pos = len(ds) // 2 - n_train_neg
    train_idx = np.sort(np.concatenate([negatives[:n_train_neg], positives[:n_train_pos]]))
    test_idx = np.sort(np.concatenate([negatives[n_train_neg:], positives[n_train_pos:]]))
    return ds.subset(train_idx.tolist()), ds.subset(test_idx.tolist())


def replay_provenance(provenance: str) -> StateVector:
    """
    Rebuild a sample from its logged graph, Cliffords or unitaries.

    Raises:
        ValueError: the provenance does not describe a replayable sample
    """
    fields = dict(part.split("=", 1) for part in provenance.split("|") if "=" in part)
    kind = fields.get("kind")
    if kind == "graph":
        return graph_state(all_graphs(4)[int(fields["graph"])])
    if kind == "lc":
        group = single_qubit_clifford_group()
        ops = [group[int(k)] for k in fields["ops"].split(",")]
        return apply_local_operator(graph_state(all_graphs(4)[int(fields["graph"])]), ops)
    if kind == "lu":
        base = (named_three_qubit_state(fields["state"]) if "state" in fields
                else graph_state(all_graphs(4)[int(fields["graph"])]))
        ops = [Gate1Q(_parse_matrix(fields[f"U{q}"]), "U") for q in range(1, base.n_qubits + 1)]
        return apply_local_operator(base, ops)
    raise ValueError(f"Provenance '{provenance}' is not replayable")


def _header(ds: Dataset) -> str:
    parts = [Config.DATASET_FORMAT, f"n_qubits={ds.n_qubits}", f"task={ds.task}",
             f"seed={ds.seed}", f"m={len(ds)}"]
    if ds.pad:
        parts.append("pad=" + ",".join(repr(v) for v in ds.pad))
    return "; ".join(parts)


def _format_sample(sample: Sample) -> str:
    if any(ch in sample.provenance for ch in ";\n\r"):
        raise ValueError(f"Provenance may not contain ';' or line breaks: '{sample.provenance}'")
    values = ",".join(repr(float(v)) for a in sample.features for v in (a.real, a.imag))
    line = f"{sample.label};{values}"
    return f"{line};{sample.provenance}" if sample.provenance else line


@log_execution_time
def save_dataset(ds: Dataset, path: str) -> None:
    """Write ``ds`` atomically: a temporary file in the target directory is renamed over ``path``."""
    lines = [_header(ds)] + [_format_sample(s) for s in ds.samples]
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".orbitvqc-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write("\n".join(lines) + "\n")
        os.replace(tmp_path, path)
    except OSError:
        logging.error(f"Failed to write dataset to {path}", exc_info=True)
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logging.info(f"Saved {len(ds)} samples to {path}")


def _parse_header(line: str) -> dict:
    parts = [p.strip() for p in line.split(";")]
    if parts[0] != Config.DATASET_FORMAT:
        raise DatasetFormatError(f"Expected header '{Config.DATASET_FORMAT}', got '{parts[0]}'", 1)
    header = {}
    for part in parts[1:]:
        if "=" not in part:
            raise DatasetFormatError(f"Malformed header field '{part}'", 1)
        key, value = part.split("=", 1)
        header[key] = value
    missing = {"n_qubits", "task", "seed", "m"} - set(header)
    if missing:
        raise DatasetFormatError(f"Header is missing {', '.join(sorted(missing))}", 1)
    return header


def _parse_sample(line: str, lineno: int, width: int) -> Sample:
    parts = line.split(";", 2)
    if len(parts) < 2:
        raise DatasetFormatError("Expected 'label;values[;provenance]'", lineno)
    if parts[0] not in ("1", "-1"):
        raise DatasetFormatError(f"Label must be -1 or 1, got '{parts[0]}'", lineno)
    try:
        values = [float(v) for v in parts[1].split(",")]
    except ValueError as e:
        raise DatasetFormatError(f"Unparseable amplitude: {e}", lineno) from e
    if len(values) != 2 * width:
        raise DatasetFormatError(f"Expected {2 * width} values ({width} complex amplitudes), got {len(values)}", lineno)
    pairs = np.array(values).reshape(-1, 2)
    return Sample(pairs[:, 0] + 1j * pairs[:, 1], int(parts[0]), parts[2] if len(parts) == 3 else "")


@log_execution_time
def load_dataset(path: str) -> Dataset:
    """
    Read a dataset file, validating every line.

    Raises:
        DatasetFormatError: malformed header or sample line, wrong dimensions,
            labels outside {-1, +1}, unnormalized samples or a sample count
            differing from the header's m
    """
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines:
        raise DatasetFormatError("Empty dataset file", 1)

    header = _parse_header(lines[0])
    try:
        n_qubits = int(header["n_qubits"])
        seed = int(header["seed"])
        m = int(header["m"])
        task = TaskDescriptor.parse(header["task"])
        pad = tuple(float(v) for v in header["pad"].split(",")) if "pad" in header else ()
    except ValueError as e:
        raise DatasetFormatError(f"Invalid header value: {e}", 1) from e
    if n_qubits < 1:
        raise DatasetFormatError(f"n_qubits must be at least 1, got {n_qubits}", 1)
    width = 2 ** n_qubits - len(pad)
    if width < 1:
        raise DatasetFormatError(f"Padding of {len(pad)} leaves no room on {n_qubits} qubits", 1)

    samples = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            samples.append(_parse_sample(line, lineno, width))
        except DatasetFormatError:
            raise
        except ValueError as e:
            raise DatasetFormatError(str(e), lineno) from e
        if not pad and abs(np.linalg.norm(samples[-1].features) - 1.0) > Config.NORM_TOL:
            raise DatasetFormatError("Sample is not normalized", lineno)
    if len(samples) != m:
        raise DatasetFormatError(f"Header declares m={m} but the file holds {len(samples)} samples",
                                 len(lines))

    logging.info(f"Loaded {m} samples for task {task} from {path}")
    return Dataset(samples, task, seed, n_qubits, pad)
