"""Key application and cleanup for locked circuits.

A candidate key (correct or not) is applied in three steps: the ancilla's
Hadamards are removed and Pauli-X toggles inserted so the ancilla carries each
logic bit through its key section; locked rotation angles are reset to
kappa * pi/4 as decoded from the phase bits; and an optional simplification
resolves gates controlled by the now-classical ancilla (|1> -> uncontrolled
form, |0> -> deleted), removes the ancilla, and drops zero-angle phase gates.

Wrong keys follow the same path and always yield a well-formed circuit; the
ancilla stays classical no matter which bits are supplied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .circuit import Barrier, Circuit, Gate, Measure, phase_angle_of
from .locking import ANCILLA_REGISTER, KAPPA_STEP, Key, KeyEntry, UNCONTROLLED_FORM

_ZERO_ANGLE_TOL = 1e-9


@dataclass(frozen=True)
class UnlockResult:
    restored_circuit: Circuit
    applied_key: Key
    simplified: bool


def find_ancilla(circuit: Circuit) -> int | None:
    """Locate the key ancilla by its register label."""
    for q, label in enumerate(circuit.qubit_labels):
        if label.startswith(f"{ANCILLA_REGISTER}["):
            return q
    return None


def _is_ancilla_control(gate: Gate, ancilla: int) -> bool:
    return len(gate.qubits) > 1 and ancilla in gate.qubits


def insert_key_toggles(locked: Circuit, logic_bits: Iterable[int], ancilla: int) -> Circuit:
    """Strip the ancilla's Hadamards and toggle it with X gates so that it
    holds |bit_i> during key section i.

    The number of inserted X gates is bit_0 plus the count of adjacent bit
    changes.
    """
    bits = [int(b) for b in logic_bits]
    if any(b not in (0, 1) for b in bits):
        raise ValueError("logic bits must be 0 or 1")
    ops: list = []
    prev = 0
    section = 0
    removed_h = 0
    for op in locked.ops:
        if isinstance(op, Gate) and ancilla in op.qubits:
            if len(op.qubits) == 1:
                if op.kind != "h":
                    raise ValueError(f"unexpected {op.kind} gate on the key ancilla")
                removed_h += 1
                continue
            if op.qubits[0] != ancilla:
                raise ValueError("key ancilla must be the control of its section gate")
            if section >= len(bits):
                raise ValueError(
                    f"{section + 1} key sections but only {len(bits)} logic bits"
                )
            bit = bits[section]
            if bit != prev:
                ops.append(Gate("x", (), (ancilla,), origin="inserted"))
                prev = bit
            section += 1
            ops.append(op)
        else:
            ops.append(op)
    if section != len(bits):
        raise ValueError(f"{section} key sections but {len(bits)} logic bits")
    if removed_h != section:
        raise ValueError(f"{removed_h} ancilla Hadamards for {section} key sections")
    return Circuit(
        num_qubits=locked.num_qubits,
        num_clbits=locked.num_clbits,
        ops=tuple(ops),
        qubit_labels=locked.qubit_labels,
        clbit_labels=locked.clbit_labels,
    )


def apply_phase_key(locked: Circuit, assignments: Iterable[tuple[KeyEntry, int]]) -> Circuit:
    """Set each addressed locked phase gate's angle to kappa * pi/4.

    Sites address the locked circuit by barrier-delimited block index and
    qubit; every assignment must land on an ``rz`` gate.
    """
    targets: dict[tuple[int, int], int] = {}
    for entry, kappa in assignments:
        if not 0 <= kappa <= 7:
            raise ValueError(f"kappa {kappa} outside 0..7")
        targets[(entry.layer, entry.qubit)] = kappa
    ops: list = []
    block = 0
    found: set[tuple[int, int]] = set()
    for op in locked.ops:
        if isinstance(op, Barrier):
            block += 1
            ops.append(op)
            continue
        if isinstance(op, Gate) and op.kind == "rz" and (block, op.qubits[0]) in targets:
            key = (block, op.qubits[0])
            ops.append(Gate("rz", (targets[key] * KAPPA_STEP,), op.qubits, origin=op.origin))
            found.add(key)
        else:
            ops.append(op)
    missing = set(targets) - found
    if missing:
        raise ValueError(f"phase key sites not found in locked circuit: {sorted(missing)}")
    return Circuit(
        num_qubits=locked.num_qubits,
        num_clbits=locked.num_clbits,
        ops=tuple(ops),
        qubit_labels=locked.qubit_labels,
        clbit_labels=locked.clbit_labels,
    )


def _zero_angle(gate: Gate) -> bool:
    if not gate.is_phase:
        return False
    reduced = math.fmod(phase_angle_of(gate), 2.0 * math.pi)
    if reduced < 0.0:
        reduced += 2.0 * math.pi
    return reduced < _ZERO_ANGLE_TOL or 2.0 * math.pi - reduced < _ZERO_ANGLE_TOL


def _simplify_impl(
    circuit: Circuit, logic_bits: Iterable[int] | None, ancilla: int | None
) -> Circuit:
    bits = None if logic_bits is None else [int(b) for b in logic_bits]
    ops: list = []
    state = 0
    section = 0
    for op in circuit.ops:
        if isinstance(op, Gate):
            if ancilla is not None and ancilla in op.qubits:
                if len(op.qubits) == 1:
                    if op.kind == "x":
                        state ^= 1
                        continue
                    raise ValueError(
                        f"cannot simplify: ancilla evolution is not classical ({op.kind} present)"
                    )
                if op.qubits[0] != ancilla:
                    raise ValueError("key ancilla must be the control of its section gate")
                if bits is not None:
                    if section >= len(bits) or bits[section] != state:
                        raise ValueError("ancilla state disagrees with the supplied logic bits")
                section += 1
                if state == 1:
                    ops.append(
                        Gate(UNCONTROLLED_FORM[op.kind], op.params, op.qubits[1:], origin=op.origin)
                    )
                continue
            if _zero_angle(op):
                continue
            ops.append(op)
        elif isinstance(op, Barrier):
            span = tuple(q for q in op.qubits if q != ancilla)
            if span:
                ops.append(Barrier(span))
        else:
            if op.qubit == ancilla:
                raise ValueError("key ancilla must not be measured")
            ops.append(op)
    if ancilla is None:
        return Circuit(
            num_qubits=circuit.num_qubits,
            num_clbits=circuit.num_clbits,
            ops=tuple(ops),
            qubit_labels=circuit.qubit_labels,
            clbit_labels=circuit.clbit_labels,
        )

    def remap(q: int) -> int:
        return q if q < ancilla else q - 1

    remapped: list = []
    for op in ops:
        if isinstance(op, Gate):
            remapped.append(Gate(op.kind, op.params, tuple(remap(q) for q in op.qubits), op.origin))
        elif isinstance(op, Barrier):
            remapped.append(Barrier(tuple(remap(q) for q in op.qubits)))
        else:
            remapped.append(Measure(remap(op.qubit), op.clbit))
    labels = tuple(l for i, l in enumerate(circuit.qubit_labels) if i != ancilla)
    return Circuit(
        num_qubits=circuit.num_qubits - 1,
        num_clbits=circuit.num_clbits,
        ops=tuple(remapped),
        qubit_labels=labels,
        clbit_labels=circuit.clbit_labels,
    )


def simplify(
    circuit: Circuit, logic_bits: Iterable[int] | None = None, ancilla: int | None = None
) -> Circuit:
    """Resolve key sections against the ancilla's classical state and drop it.

    Requires every remaining single-qubit ancilla gate to be an X (a surviving
    Hadamard means the circuit was not toggled first, and simplification is
    refused). Zero-angle phase gates are removed; barriers are retained with
    the ancilla stripped from their span.
    """
    return _simplify_impl(circuit, logic_bits, ancilla)


def unlock(
    locked: Circuit,
    key: Key,
    candidate_bits: str | None = None,
    simplify: bool = True,
) -> UnlockResult:
    """Apply a key to a locked circuit.

    ``candidate_bits`` overrides the key's own bits (same length) for
    wrong-key experiments. With the locking key and ``simplify`` on, the
    result is unitarily equivalent to the original circuit up to global
    phase.
    """
    applied = key if candidate_bits is None else key.with_bits(candidate_bits)
    logic_bits = applied.logic_bits()
    ancilla = find_ancilla(locked)
    if logic_bits and ancilla is None:
        raise ValueError("key has logic bits but the circuit has no key ancilla register")
    current = locked
    if logic_bits:
        current = insert_key_toggles(current, logic_bits, ancilla)
    current = apply_phase_key(current, applied.phase_assignments())
    if simplify:
        current = _simplify_impl(current, logic_bits if logic_bits else None, ancilla)
    return UnlockResult(restored_circuit=current, applied_key=applied, simplified=simplify)
