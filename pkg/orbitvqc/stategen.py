"""
Generators for every state family the experiments use.

Graph states and the six-class partition of the 64 four-qubit graphs, the
named three-qubit states, random local Cliffords, Haar local unitaries and
random pure states. All random generators take a numpy Generator; ``Rng``
hands out independent child generators per sample index.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, permutations
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple

import networkx as nx
import numpy as np

from .config import Config
from .statevec import Gate1Q, Gate2Q, StateVector, apply_2q


@dataclass(frozen=True)
class Rng:
    """Seeded source of reproducible generators, splittable by sample index."""

    seed: int

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed))

    def child(self, index: int) -> np.random.Generator:
        """Generator owned by sample ``index``; independent of every other index."""
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(index,)))

    def derive(self, *keys: int) -> "Rng":
        """New Rng whose seed is a deterministic function of this seed and ``keys``."""
        state = np.random.SeedSequence(self.seed, spawn_key=tuple(keys)).generate_state(1)
        return Rng(int(state[0]))


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..n-1."""

    n_vertices: int
    edges: FrozenSet[Tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        normalized = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"Self-loop on vertex {a}")
            if not (0 <= a < self.n_vertices and 0 <= b < self.n_vertices):
                raise ValueError(f"Edge ({a}, {b}) outside vertices 0..{self.n_vertices - 1}")
            normalized.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(normalized))

    @classmethod
    def from_edges(cls, n_vertices: int, edges: Iterable[Tuple[int, int]]) -> "Graph":
        return cls(n_vertices, frozenset(tuple(e) for e in edges))

    @classmethod
    def from_networkx(cls, g: nx.Graph, n_vertices: int) -> "Graph":
        return cls(n_vertices, frozenset(g.edges()))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_vertices))
        g.add_edges_from(self.edges)
        return g

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Image under the vertex map v -> perm[v]."""
        return Graph(self.n_vertices, frozenset((perm[a], perm[b]) for a, b in self.edges))

    def bitmask(self) -> int:
        """Edge subset as an integer over the pairs in ``combinations(range(n), 2)`` order."""
        pairs = list(combinations(range(self.n_vertices), 2))
        return sum(1 << pairs.index(e) for e in self.edges)

    def f_g(self, bits: Sequence[int]) -> int:
        """Quadratic form sum over edges of x_i x_j, mod 2."""
        return sum(bits[a] * bits[b] for a, b in self.edges) % 2

    def polynomial(self) -> str:
        """f_G written with 1-based variables, e.g. 'x1x2+x2x3'; '0' for the empty graph."""
        if not self.edges:
            return "0"
        return "+".join(f"x{a + 1}x{b + 1}" for a, b in sorted(self.edges))

    def __str__(self) -> str:
        return "{" + ",".join(f"{a}{b}" for a, b in sorted(self.edges)) + "}"


def all_graphs(n_vertices: int) -> List[Graph]:
    """Every simple graph on n labeled vertices, ordered by ``Graph.bitmask``."""
    pairs = list(combinations(range(n_vertices), 2))
    return [
        Graph(n_vertices, frozenset(p for i, p in enumerate(pairs) if mask >> i & 1))
        for mask in range(2 ** len(pairs))
    ]


@lru_cache(maxsize=None)
def graph_state(g: Graph) -> StateVector:
    """
    |psi_G> = prod_{e in E} CZ_e |+>^n, vertex v living on qubit v + 1.

    Amplitudes equal (-1)^{f_G(x)} / 2^{n/2}.
    """
    state = StateVector.plus(g.n_vertices)
    for a, b in sorted(g.edges):
        state = apply_2q(state, Gate2Q("CZ", a + 1, b + 1))
    return state


def local_complement(g: Graph, v: int) -> Graph:
    """Toggle every edge between neighbours of ``v``."""
    if not (0 <= v < g.n_vertices):
        raise ValueError(f"Vertex {v} not in graph on {g.n_vertices} vertices")
    nxg = g.to_networkx()
    for a, b in combinations(sorted(nxg.neighbors(v)), 2):
        if nxg.has_edge(a, b):
            nxg.remove_edge(a, b)
        else:
            nxg.add_edge(a, b)
    return Graph.from_networkx(nxg, g.n_vertices)


@dataclass(frozen=True)
class GraphClass:
    """One entanglement class of four-qubit graph states."""

    class_id: int
    representative: Graph
    members: Tuple[Graph, ...]

    @property
    def count(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class GraphClassTable:
    """Partition of all four-vertex graphs into classes 1..6."""

    classes: Dict[int, GraphClass]
    assignment: Dict[Graph, int]

    @property
    def counts(self) -> List[int]:
        return [self.classes[c].count for c in sorted(self.classes)]

    def class_of(self, g: Graph) -> int:
        if g not in self.assignment:
            raise ValueError(f"Graph {g} is not a four-vertex graph")
        return self.assignment[g]

    def members(self, class_id: int) -> Tuple[Graph, ...]:
        if class_id not in self.classes:
            raise ValueError(f"Invalid class id {class_id}; expected one of {sorted(self.classes)}")
        return self.classes[class_id].members


def _orbit(start: Graph) -> set:
    """Closure of ``start`` under local complementation and vertex permutation."""
    perms = list(permutations(range(start.n_vertices)))
    seen = {start}
    frontier = [start]
    while frontier:
        g = frontier.pop()
        moves = [local_complement(g, v) for v in range(g.n_vertices)]
        moves.extend(g.relabel(p) for p in perms)
        for h in moves:
            if h not in seen:
                seen.add(h)
                frontier.append(h)
    return seen


def class_representative(class_id: int) -> Graph:
    """Normal-form graph of a class (class 5 uses the path 0-1-2-3)."""
    if class_id not in Config.GRAPH_CLASS_REPRESENTATIVES:
        raise ValueError(f"Invalid class id {class_id}; expected one of {list(Config.CLASS_IDS)}")
    return Graph.from_edges(4, Config.GRAPH_CLASS_REPRESENTATIVES[class_id])


@lru_cache(maxsize=None)
def enumerate_four_qubit_classes() -> GraphClassTable:
    """
    Assign each of the 64 four-vertex graphs to its class.

    Classes are grown from the representatives by closing under local
    complementation and vertex permutation, then checked against
    Config.GRAPH_CLASS_COUNTS.

    Returns:
        The class table

    Raises:
        RuntimeError: a graph is claimed twice, left unassigned, or counts differ
    """
    assignment: Dict[Graph, int] = {}
    classes: Dict[int, GraphClass] = {}
    for class_id in Config.CLASS_IDS:
        representative = class_representative(class_id)
        orbit = _orbit(representative)
        for g in orbit:
            if g in assignment:
                raise RuntimeError(
                    f"Graph {g} reached from classes {assignment[g]} and {class_id}"
                )
            assignment[g] = class_id
        members = tuple(sorted(orbit, key=Graph.bitmask))
        classes[class_id] = GraphClass(class_id, representative, members)

    universe = all_graphs(4)
    missing = [g for g in universe if g not in assignment]
    if missing:
        raise RuntimeError(f"{len(missing)} graphs left unassigned, e.g. {missing[0]}")
    table = GraphClassTable(classes, assignment)
    if tuple(table.counts) != Config.GRAPH_CLASS_COUNTS:
        raise RuntimeError(f"Class sizes {table.counts} differ from {list(Config.GRAPH_CLASS_COUNTS)}")
    logging.debug(f"Four-qubit graph classes: {table.counts}")
    return table


def lu_equivalent_state(class_id: int) -> StateVector:
    """Simple four-qubit state LU-equivalent to the graph states of a class (|0000>, EPR (x) |00>, ...)."""
    if class_id not in Config.LU_EQUIVALENT_STATES:
        raise ValueError(f"Invalid class id {class_id}; expected one of {list(Config.CLASS_IDS)}")
    amps = np.zeros(16, dtype=complex)
    amps[list(Config.LU_EQUIVALENT_STATES[class_id])] = 1.0
    return StateVector.from_amplitudes(amps)


def _phase_key(matrix: np.ndarray) -> Tuple[float, ...]:
    flat = matrix.ravel()
    pivot = flat[np.argmax(np.abs(flat) > 1e-9)]
    canonical = flat * (abs(pivot) / pivot)
    return tuple(np.round(np.concatenate([canonical.real, canonical.imag]), 8) + 0.0)


@lru_cache(maxsize=None)
def single_qubit_clifford_group() -> Tuple[Gate1Q, ...]:
    """
    The 24 single-qubit Cliffords modulo global phase.

    Built by closing {H, S} under multiplication and dropping duplicates up to
    phase; element k is named 'C<k>'.
    """
    generators = [Gate1Q.named("H").matrix, Gate1Q.named("S").matrix]
    identity = np.eye(2, dtype=complex)
    elements = {_phase_key(identity): identity}
    frontier = [identity]
    while frontier:
        current = frontier.pop(0)
        for gen in generators:
            product = gen @ current
            key = _phase_key(product)
            if key not in elements:
                elements[key] = product
                frontier.append(product)
    return tuple(Gate1Q(m, f"C{k}") for k, m in enumerate(elements.values()))


def random_single_qubit_clifford(rng: np.random.Generator) -> Gate1Q:
    """Uniform draw from the 24 phase classes of single-qubit Cliffords."""
    group = single_qubit_clifford_group()
    return group[int(rng.integers(len(group)))]


def random_local_clifford(n: int, rng: np.random.Generator) -> List[Gate1Q]:
    """C_1 (x) ... (x) C_n with independent uniform factors."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return [random_single_qubit_clifford(rng) for _ in range(n)]


def random_haar_u2(rng: np.random.Generator) -> Gate1Q:
    """
    Haar-random 2x2 unitary.

    QR of a complex Ginibre matrix with the phases of R's diagonal moved onto Q.
    """
    while True:
        z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2)
        q, r = np.linalg.qr(z)
        d = np.diag(r)
        if np.min(np.abs(d)) > 1e-12:
            return Gate1Q(q * (d / np.abs(d)), "HAAR")
        logging.debug("Near-singular Ginibre draw, redrawing")


def random_local_haar(n: int, rng: np.random.Generator) -> List[Gate1Q]:
    """U_1 (x) ... (x) U_n with independent Haar factors."""
    return [random_haar_u2(rng) for _ in range(n)]


def random_pure_state(n: int, rng: np.random.Generator) -> StateVector:
    """Normalized vector of 2^n i.i.d. standard complex Gaussian amplitudes."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    dim = 2 ** n
    amps = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector.from_amplitudes(amps)


def named_three_qubit_state(name: str) -> StateVector:
    """
    One of: separable |000>, bisep-AB-C |EPR>|0>, bisep-A-BC |0>|EPR>,
    bisep-B-AC (|000>+|101>)/sqrt2, W, GHZ.
    """
    if name not in Config.NAMED_STATES:
        raise ValueError(f"Unknown state name '{name}'. Valid: {', '.join(Config.NAMED_STATES)}")
    amps = np.zeros(8, dtype=complex)
    amps[list(Config.NAMED_STATES[name])] = 1.0
    return StateVector.from_amplitudes(amps)
