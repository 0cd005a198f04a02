"""Shared pytest configuration and fixtures for the orbitvqc test suite."""

import numpy as np
import pytest


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="Run full-scale training checks marked slow")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-scale training run (minutes); needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def results_path(tmp_path):
    return str(tmp_path / "results" / "metrics.csv")


# Dense reference circuit; qubit 1 is the leftmost Kronecker factor
def _rx(t):
    return np.array([[np.cos(t / 2), -1j * np.sin(t / 2)], [-1j * np.sin(t / 2), np.cos(t / 2)]])


def _ry(t):
    return np.array([[np.cos(t / 2), -np.sin(t / 2)], [np.sin(t / 2), np.cos(t / 2)]])


def _rz(t):
    return np.diag([np.exp(-1j * t / 2), np.exp(1j * t / 2)])


def _embed(n, ops):
    out = np.array([[1.0 + 0j]])
    for q in range(1, n + 1):
        out = np.kron(out, ops.get(q, np.eye(2)))
    return out


def _two_qubit(n, kind, a, b):
    p0, p1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    other = np.array([[0, 1], [1, 0]]) if kind == "CNOT" else np.diag([1.0, -1.0])
    return _embed(n, {a: p0}) + _embed(n, {a: p1, b: other})


@pytest.fixture
def dense_readout():
    """Per-qubit <Z> of the layered circuit, computed with full 2^n x 2^n matrices."""
    def readout(cfg, values, amps):
        n = cfg.n_qubits
        unitary = np.eye(2 ** n, dtype=complex)
        for layer in values:
            rotations = {q + 1: _rz(g) @ _ry(b) @ _rx(a) for q, (a, b, g) in enumerate(layer)}
            unitary = _embed(n, rotations) @ unitary
            for gate in cfg.entangling_gates():
                unitary = _two_qubit(n, gate.kind, gate.qubit_a, gate.qubit_b) @ unitary
        psi = unitary @ np.asarray(amps)
        return np.array([np.real(np.vdot(psi, _embed(n, {q: np.diag([1.0, -1.0])}) @ psi))
                         for q in range(1, n + 1)])
    return readout
