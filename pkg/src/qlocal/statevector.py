"""Exact dense statevector engine.

Gate set: H, S, CNOT, CZ, CS, and S_POWER (S raised to a classical bit).
Qubit q corresponds to axis q of the amplitude tensor reshaped to [2]*n,
i.e. bit q of a basis index read in big-endian order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .distributions import OutcomeDistribution
from .errors import ResourceLimitError
from .topology import Topology

DEFAULT_MAX_QUBITS = 26

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) * _INV_SQRT2
S_MATRIX = np.array([[1, 0], [0, 1j]], dtype=complex)
CNOT_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
CZ_MATRIX = np.diag([1, 1, 1, -1]).astype(complex)
CS_MATRIX = np.diag([1, 1, 1, 1j]).astype(complex)

GATE_ARITY = {"H": 1, "S": 1, "S_POWER": 1, "CNOT": 2, "CZ": 2, "CS": 2}


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple
    exponent: int = 1

    def __post_init__(self):
        if self.kind not in GATE_ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        targets = tuple(self.targets)
        object.__setattr__(self, "targets", targets)
        if len(targets) != GATE_ARITY[self.kind]:
            raise ValueError(f"{self.kind} expects {GATE_ARITY[self.kind]} targets")
        if len(set(targets)) != len(targets):
            raise ValueError(f"duplicate targets in {self.kind}")
        if self.kind == "S_POWER" and self.exponent not in (0, 1):
            raise ValueError("S_POWER exponent must be a bit")


def h(q) -> Gate:
    return Gate("H", (q,))


def s(q) -> Gate:
    return Gate("S", (q,))


def s_power(bit, q) -> Gate:
    return Gate("S_POWER", (q,), exponent=bit)


def cnot(control, target) -> Gate:
    return Gate("CNOT", (control, target))


def cz(a, b) -> Gate:
    return Gate("CZ", (a, b))


def cs(a, b) -> Gate:
    return Gate("CS", (a, b))


def gate_matrix(gate: Gate) -> np.ndarray:
    """The unitary matrix of a gate (2x2 or 4x4)."""
    if gate.kind == "H":
        return H_MATRIX
    if gate.kind == "S":
        return S_MATRIX
    if gate.kind == "S_POWER":
        return S_MATRIX if gate.exponent else np.eye(2, dtype=complex)
    if gate.kind == "CNOT":
        return CNOT_MATRIX
    if gate.kind == "CZ":
        return CZ_MATRIX
    return CS_MATRIX


class Bitstring(NamedTuple):
    bits: tuple
    qubit_order: tuple


@dataclass
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def new_state(n: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    """The all-zeros basis state on n qubits."""
    if n < 0:
        raise ValueError("qubit count must be nonnegative")
    if n > max_qubits:
        raise ResourceLimitError(
            f"{n} qubits exceeds the configured maximum of {max_qubits}"
        )
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1.0
    return StateVector(n, amps)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    n = state.num_qubits
    for q in gate.targets:
        if not (0 <= q < n):
            raise ValueError(f"target {q} out of range for {n} qubits")
    amps = state.amplitudes.reshape([2] * n) if n else state.amplitudes
    kind = gate.kind
    if kind in ("H", "S", "S_POWER"):
        (q,) = gate.targets
        if kind == "S_POWER" and gate.exponent == 0:
            return StateVector(n, state.amplitudes.copy())
        m = gate_matrix(gate)
        moved = np.moveaxis(amps, q, -1)
        out = np.moveaxis(moved @ m.T, -1, q)
        return StateVector(n, np.ascontiguousarray(out).reshape(-1))
    a, b = gate.targets
    out = amps.copy()
    if kind == "CNOT":
        sel1 = [slice(None)] * n
        sel1[a], sel1[b] = 1, 0
        sel2 = [slice(None)] * n
        sel2[a], sel2[b] = 1, 1
        out[tuple(sel1)], out[tuple(sel2)] = amps[tuple(sel2)], amps[tuple(sel1)]
    else:
        phase = -1.0 if kind == "CZ" else 1j
        sel = [slice(None)] * n
        sel[a], sel[b] = 1, 1
        out[tuple(sel)] = amps[tuple(sel)] * phase
    return StateVector(n, out.reshape(-1))


def build_graph_state(topology: Topology, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    """H on every node's qubit, then CZ across every edge.

    Qubit q holds the q-th node in ascending identifier order.
    """
    if topology.num_nodes < 1:
        raise ValueError("graph state needs at least one node")
    index = {u: q for q, u in enumerate(topology.nodes)}
    state = new_state(topology.num_nodes, max_qubits=max_qubits)
    for q in range(topology.num_nodes):
        state = apply_gate(state, h(q))
    for e in sorted(tuple(sorted(e)) for e in topology.edges):
        state = apply_gate(state, cz(index[e[0]], index[e[1]]))
    return state


def _index_bits(index: int, n: int) -> tuple:
    return tuple((index >> (n - 1 - q)) & 1 for q in range(n))


def measure_all(state: StateVector, rng: np.random.Generator) -> Bitstring:
    """Sample a full computational-basis measurement (Born rule)."""
    n = state.num_qubits
    probs = np.abs(state.amplitudes) ** 2
    probs = probs / probs.sum()
    index = int(rng.choice(len(probs), p=probs))
    return Bitstring(_index_bits(index, n), tuple(range(n)))


def exact_distribution(state: StateVector) -> OutcomeDistribution:
    """The exact measurement law of the state, keyed by bit tuples."""
    n = state.num_qubits
    probs = np.abs(state.amplitudes) ** 2
    nz = np.nonzero(probs > 0)[0]
    entries = {_index_bits(int(i), n): float(probs[i]) for i in nz}
    return OutcomeDistribution(entries, space=("bits", n))


def support(state: StateVector, tol: float = 1e-9) -> frozenset:
    """All outcome bitstrings with probability above `tol`."""
    if not (0 < tol < 1):
        raise ValueError("tol must be in (0, 1)")
    n = state.num_qubits
    probs = np.abs(state.amplitudes) ** 2
    nz = np.nonzero(probs > tol)[0]
    return frozenset(_index_bits(int(i), n) for i in nz)


def fidelity(a: StateVector, b: StateVector) -> float:
    if a.num_qubits != b.num_qubits:
        raise ValueError(
            f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits"
        )
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def kron(a: StateVector, b: StateVector) -> StateVector:
    """Tensor product; qubits of `a` come first."""
    return StateVector(
        a.num_qubits + b.num_qubits, np.kron(a.amplitudes, b.amplitudes)
    )
