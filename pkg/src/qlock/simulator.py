"""Dense statevector simulation with seeded shot sampling.

Qubit ordering is little-endian throughout: qubit 0 is the least-significant
bit of a basis index, and outcome strings print the highest measured qubit
first (qubit 0 rightmost). Distributions serialize as
``{"shots": N, "bits": b, "counts": {...}}`` with those outcome strings.

Noise, when enabled, is a parametric depolarizing model unravelled as quantum
trajectories: after each gate, with probability ``p1`` (single-qubit gates)
or ``p2`` (multi-qubit gates), a Pauli drawn uniformly from {X, Y, Z} is
applied to each of the gate's qubits. Trajectory streams are derived per shot
from the run seed, so serial and parallel execution agree.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuit import Circuit, Gate
from .rng import derive_rng

_NORM_TOL = 1e-10
_UNITARY_QUBIT_LIMIT = 10


@dataclass(frozen=True)
class NoiseConfig:
    enabled: bool = False
    p1: float = 0.001
    p2: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p1 <= 1.0 or not 0.0 <= self.p2 <= 1.0:
            raise ValueError("depolarizing probabilities must lie in [0, 1]")


@dataclass(frozen=True)
class Distribution:
    counts: dict[str, int]
    shots: int
    bits: int

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be positive")
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to shot count")
        for key in self.counts:
            if len(key) != self.bits or set(key) - {"0", "1"}:
                raise ValueError(f"malformed outcome key {key!r}")

    def to_json(self) -> str:
        return json.dumps(
            {"shots": self.shots, "bits": self.bits, "counts": dict(sorted(self.counts.items()))},
            indent=2,
        ) + "\n"

    @staticmethod
    def from_json(text: str) -> "Distribution":
        data = json.loads(text)
        return Distribution(
            counts={str(k): int(v) for k, v in data["counts"].items()},
            shots=int(data["shots"]),
            bits=int(data["bits"]),
        )


# --- gate matrices -------------------------------------------------------------

_SQ2 = 1.0 / math.sqrt(2.0)
_H = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _phase(angle: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * angle)]], dtype=complex)


def _rz(angle: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * angle), 0], [0, np.exp(0.5j * angle)]], dtype=complex
    )


def _u3(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ],
        dtype=complex,
    )


def _controlled(u: np.ndarray) -> np.ndarray:
    """Control on the first (most-significant) qubit of the block."""
    k = u.shape[0]
    out = np.eye(2 * k, dtype=complex)
    out[k:, k:] = u
    return out


@lru_cache(maxsize=None)
def _fixed_matrix(kind: str) -> np.ndarray:
    if kind in _PAULI:
        return _PAULI[kind]
    if kind == "h":
        return _H
    if kind == "s":
        return _phase(math.pi / 2)
    if kind == "sdg":
        return _phase(-math.pi / 2)
    if kind == "t":
        return _phase(math.pi / 4)
    if kind == "tdg":
        return _phase(-math.pi / 4)
    if kind in ("cx", "cy", "cz", "ch"):
        return _controlled(_fixed_matrix(kind[1:]))
    if kind == "ccx":
        return _controlled(_controlled(_PAULI["x"]))
    raise KeyError(kind)


def gate_matrix(gate: Gate) -> np.ndarray:
    """Unitary of a gate on its own qubits, first listed qubit most significant."""
    if gate.kind == "rz":
        return _rz(gate.params[0])
    if gate.kind == "p":
        return _phase(gate.params[0])
    if gate.kind == "u3":
        return _u3(*gate.params)
    return _fixed_matrix(gate.kind)


# --- statevector evolution -----------------------------------------------------

def zero_state(num_qubits: int) -> np.ndarray:
    state = np.zeros(2**num_qubits, dtype=complex)
    state[0] = 1.0
    return state


def _apply_matrix(tensor: np.ndarray, mat: np.ndarray, qubits: tuple[int, ...], n: int):
    """Apply ``mat`` to the given qubits of a state (or stacked-state) tensor.

    ``tensor`` has n leading axes of size 2 (axis i holds qubit n-1-i, keeping
    qubit 0 least significant) plus optional trailing axes.
    """
    k = len(qubits)
    axes = [n - 1 - q for q in qubits]
    moved = np.moveaxis(tensor, axes, range(k))
    shape = moved.shape
    out = mat @ moved.reshape(2**k, -1)
    return np.moveaxis(out.reshape(shape), range(k), axes)


def apply_gate(state: np.ndarray, gate: Gate) -> np.ndarray:
    """Apply one gate to a statevector, checking norm preservation."""
    n = _qubit_count(state)
    for q in gate.qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit index {q} out of range for {n}-qubit state")
    tensor = state.reshape((2,) * n)
    out = _apply_matrix(tensor, gate_matrix(gate), gate.qubits, n).reshape(-1)
    norm = np.linalg.norm(out)
    if abs(norm - 1.0) > _NORM_TOL:
        raise ArithmeticError(f"statevector norm drifted to {norm}")
    return out


def _qubit_count(state: np.ndarray) -> int:
    n = int(round(math.log2(state.size)))
    if 2**n != state.size:
        raise ValueError("statevector length is not a power of two")
    return n


def statevector(circuit: Circuit, initial: np.ndarray | None = None) -> np.ndarray:
    """Noiseless evolution through all gates; barriers and measurements skipped."""
    state = zero_state(circuit.num_qubits) if initial is None else np.asarray(initial, dtype=complex)
    if state.size != 2**circuit.num_qubits:
        raise ValueError("initial state has wrong dimension")
    for op in circuit.ops:
        if isinstance(op, Gate):
            state = apply_gate(state, op)
    return state


def _trajectory(circuit: Circuit, initial, noise: NoiseConfig, rng) -> np.ndarray:
    state = zero_state(circuit.num_qubits) if initial is None else np.asarray(initial, dtype=complex)
    paulis = ("x", "y", "z")
    for op in circuit.ops:
        if not isinstance(op, Gate):
            continue
        state = apply_gate(state, op)
        p = noise.p1 if len(op.qubits) == 1 else noise.p2
        # one uniform draw per gate keeps paired runs on common random numbers
        if rng.random() < p:
            for q in op.qubits:
                kind = paulis[rng.integers(3)]
                state = apply_gate(state, Gate(kind, (), (q,)))
    return state


def _outcome_key(index: int, measured: tuple[int, ...]) -> str:
    return "".join(str((index >> q) & 1) for q in sorted(measured, reverse=True))


def _marginal_probs(state: np.ndarray, measured: tuple[int, ...], n: int) -> np.ndarray:
    """Probabilities over measured qubits (ascending order = bit significance)."""
    probs = np.abs(state) ** 2
    tensor = probs.reshape((2,) * n)
    drop = tuple(n - 1 - q for q in range(n) if q not in measured)
    if drop:
        tensor = tensor.sum(axis=drop)
    flat = tensor.reshape(-1)
    return flat / flat.sum()


def run(
    circuit: Circuit,
    shots: int,
    initial: np.ndarray | None = None,
    noise: NoiseConfig | None = None,
    seed: int = 0,
) -> Distribution:
    """Simulate and sample ``shots`` outcomes over the measured qubits.

    Qubits without measurements are traced out; if the circuit has no measure
    operations at all, every qubit is measured implicitly.
    """
    if shots < 1:
        raise ValueError("shots must be positive")
    measured = circuit.measured_qubits()
    b = len(measured)
    counts: dict[str, int] = {}
    if noise is None or not noise.enabled:
        state = statevector(circuit, initial)
        # marginal axes run from the highest measured qubit down, so the flat
        # index prints directly as the little-endian outcome string
        probs = _marginal_probs(state, measured, circuit.num_qubits)
        rng = derive_rng(seed, "sample")
        sampled = rng.multinomial(shots, probs)
        for flat_index, count in enumerate(sampled):
            if count:
                counts[format(flat_index, f"0{b}b")] = int(count)
    else:
        full_probs_cache = None
        for shot in range(shots):
            rng = derive_rng(seed, "traj", noise.seed, shot)
            state = _trajectory(circuit, initial, noise, rng)
            probs = np.abs(state) ** 2
            probs = probs / probs.sum()
            if full_probs_cache is None:
                full_probs_cache = np.empty_like(probs)
            np.cumsum(probs, out=full_probs_cache)
            index = int(np.searchsorted(full_probs_cache, rng.random(), side="right"))
            index = min(index, probs.size - 1)
            key = _outcome_key(index, measured)
            counts[key] = counts.get(key, 0) + 1
    return Distribution(counts=counts, shots=shots, bits=b)


def unitary_of(circuit: Circuit) -> np.ndarray:
    """Full unitary as the ordered product of gate unitaries.

    Measurements are stripped, barriers ignored; circuits beyond 10 qubits are
    rejected to bound memory.
    """
    n = circuit.num_qubits
    if n > _UNITARY_QUBIT_LIMIT:
        raise ValueError(f"unitary_of supports at most {_UNITARY_QUBIT_LIMIT} qubits")
    dim = 2**n
    tensor = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for op in circuit.ops:
        if isinstance(op, Gate):
            tensor = _apply_matrix(tensor, gate_matrix(op), op.qubits, n)
    return tensor.reshape(dim, dim)
