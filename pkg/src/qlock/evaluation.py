"""Obfuscation-strength evaluation: TVD between outcome distributions under
sampled input states.

Input sampling prepends an independent Haar-random ``u3`` to every original
qubit (theta = 2*arccos(sqrt(u)), phi and lambda uniform), so results reflect
the whole input space rather than the all-zeros state. For each sampled
input, the original circuit is the golden reference and each requested mode
is compared against it:

- ``combined``: the locked circuit exactly as compiled (ancilla Hadamards in
  place, randomized angles);
- ``logic_only``: locked circuit with the phase key resolved correctly,
  isolating logic corruption;
- ``phase_only``: logic key resolved correctly, randomized angles kept;
- ``restored``: full correct-key unlock with simplification.

Runs are compared either as physically separate executions (independent
sampling streams, the default: TVD then carries the protocol's shot-noise
floor, roughly sqrt(2^b/(pi*shots)) for identical circuits) or with paired
streams (common random numbers) that cancel shot noise and expose small
circuit-level residuals.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Barrier, Circuit, Gate
from .locking import ObfuscationRecord
from .rng import derive_rng
from .simulator import Distribution, NoiseConfig, run, unitary_of
from .unlocking import apply_phase_key, find_ancilla, insert_key_toggles, simplify, unlock

MODES = ("logic_only", "phase_only", "combined", "restored")


def _arm_seed(seed: int, input_index: int, arm: str, sampling: str) -> int:
    """Sampling stream for one run: per (input, arm) when independent, shared
    across arms per input when paired."""
    if sampling == "paired":
        arm = "common"
    return int(derive_rng(seed, "eval-arm", input_index, arm).integers(2**63))


def tvd(a: Distribution, b: Distribution) -> float:
    """Total variation distance: sum |count_a - count_b| over outcomes / (2N)."""
    if a.shots != b.shots:
        raise ValueError(f"shot counts differ: {a.shots} vs {b.shots}")
    if a.bits != b.bits:
        raise ValueError(f"outcome widths differ: {a.bits} vs {b.bits}")
    keys = set(a.counts) | set(b.counts)
    total = sum(abs(a.counts.get(k, 0) - b.counts.get(k, 0)) for k in keys)
    return total / (2.0 * a.shots)


def random_input_layer(num_qubits: int, seed: int = 0) -> tuple[Gate, ...]:
    """One Haar-random single-qubit ``u3`` per qubit, deterministic in seed."""
    rng = derive_rng(seed, "input-layer")
    gates = []
    for q in range(num_qubits):
        theta = 2.0 * math.acos(math.sqrt(float(rng.uniform(0.0, 1.0))))
        phi = float(rng.uniform(0.0, 2.0 * math.pi))
        lam = float(rng.uniform(0.0, 2.0 * math.pi))
        gates.append(Gate("u3", (theta, phi, lam), (q,), origin="inserted"))
    return tuple(gates)


def with_input_layer(circuit: Circuit, layer: tuple[Gate, ...]) -> Circuit:
    """Prepend input-state gates (indices must fit the circuit) plus a barrier."""
    ops = tuple(layer) + (Barrier(tuple(range(circuit.num_qubits))),) + circuit.ops
    return Circuit(
        num_qubits=circuit.num_qubits,
        num_clbits=circuit.num_clbits,
        ops=ops,
        qubit_labels=circuit.qubit_labels,
        clbit_labels=circuit.clbit_labels,
    )


def unitaries_equivalent(ua: np.ndarray, ub: np.ndarray, tol: float = 1e-9) -> bool:
    """Elementwise equality after aligning global phase on the largest entry."""
    if ua.shape != ub.shape:
        raise ValueError(f"dimension mismatch: {ua.shape} vs {ub.shape}")
    idx = int(np.argmax(np.abs(ua)))
    ref = ua.flat[idx]
    other = ub.flat[idx]
    if abs(other) < tol:
        return False
    factor = ref / other
    if abs(abs(factor) - 1.0) > tol:
        return False
    return bool(np.max(np.abs(ua - factor * ub)) <= tol)


def equivalent_up_to_global_phase(a: Circuit, b: Circuit, tol: float = 1e-9) -> bool:
    """True iff the circuits' unitaries differ only by a global phase factor."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(
            f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits"
        )
    return unitaries_equivalent(unitary_of(a), unitary_of(b), tol)


@dataclass(frozen=True)
class EvalConfig:
    """Evaluation protocol: 10 inputs x 100 shots by default.

    ``sampling`` selects the comparison instrument. ``independent`` draws a
    fresh stream per run, like physically separate executions, so every TVD
    carries the protocol's shot-noise floor (roughly sqrt(2^b/(pi*shots)) for
    identical circuits). ``paired`` reuses one stream per input across the
    reference and every mode (common random numbers), canceling shot noise so
    the TVD isolates the circuit-level difference; use it to resolve small
    residuals, e.g. the restored circuit under noise.
    """

    n_inputs: int = 10
    shots: int = 100
    seed: int = 0
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    modes: tuple[str, ...] = MODES
    sampling: str = "independent"

    def __post_init__(self):
        if self.n_inputs < 1 or self.shots < 1:
            raise ValueError("n_inputs and shots must be positive")
        for mode in self.modes:
            if mode not in MODES:
                raise ValueError(f"unknown mode {mode!r}")
        if self.sampling not in ("independent", "paired"):
            raise ValueError(f"unknown sampling scheme {self.sampling!r}")


@dataclass(frozen=True)
class TvdReport:
    modes: tuple[str, ...]
    per_input: dict[str, tuple[float, ...]]
    mean: dict[str, float]
    min: dict[str, float]
    max: dict[str, float]
    n_inputs: int
    shots: int
    seed: int
    noise_enabled: bool
    sampling: str = "independent"


def mode_circuits(record: ObfuscationRecord, modes: tuple[str, ...]) -> dict[str, Circuit]:
    """Build the circuit each mode simulates; raises if the record cannot
    express a requested mode (e.g. phase_only with zero phase sites)."""
    key = record.key
    n_logic = sum(1 for e in key.schedule if e.kind == "logic")
    n_phase = sum(1 for e in key.schedule if e.kind == "phase")
    locked = record.locked_circuit
    out: dict[str, Circuit] = {}
    for mode in modes:
        if mode == "combined":
            out[mode] = locked
        elif mode == "restored":
            out[mode] = unlock(locked, key, simplify=True).restored_circuit
        elif mode == "logic_only":
            if n_logic == 0:
                raise ValueError("record has no logic sites; logic_only mode is undefined")
            out[mode] = apply_phase_key(locked, key.phase_assignments())
        elif mode == "phase_only":
            if n_phase == 0:
                raise ValueError("record has no phase sites; phase_only mode is undefined")
            resolved = locked
            ancilla = find_ancilla(locked)
            bits = key.logic_bits()
            if bits:
                resolved = insert_key_toggles(resolved, bits, ancilla)
                resolved = simplify(resolved, bits, ancilla)
            out[mode] = resolved
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return out


def evaluate(original: Circuit, record: ObfuscationRecord, config: EvalConfig) -> TvdReport:
    """TVD of each requested mode against the original, over sampled inputs."""
    circuits = mode_circuits(record, config.modes)
    per_input: dict[str, list[float]] = {mode: [] for mode in config.modes}
    for i in range(config.n_inputs):
        layer_seed = int(derive_rng(config.seed, "eval-input", i).integers(2**63))
        layer = random_input_layer(original.num_qubits, layer_seed)
        reference = run(
            with_input_layer(original, layer),
            config.shots,
            noise=config.noise,
            seed=_arm_seed(config.seed, i, "reference", config.sampling),
        )
        for mode in config.modes:
            dist = run(
                with_input_layer(circuits[mode], layer),
                config.shots,
                noise=config.noise,
                seed=_arm_seed(config.seed, i, mode, config.sampling),
            )
            per_input[mode].append(tvd(reference, dist))
    return TvdReport(
        modes=config.modes,
        per_input={m: tuple(v) for m, v in per_input.items()},
        mean={m: sum(v) / len(v) for m, v in per_input.items()},
        min={m: min(v) for m, v in per_input.items()},
        max={m: max(v) for m, v in per_input.items()},
        n_inputs=config.n_inputs,
        shots=config.shots,
        seed=config.seed,
        noise_enabled=config.noise.enabled,
        sampling=config.sampling,
    )


def wrong_key_sweep(
    original: Circuit,
    record: ObfuscationRecord,
    config: EvalConfig,
    n_keys: int,
) -> dict:
    """Mean TVD of ``n_keys`` uniformly random concrete keys pushed through a
    full unlock, plus a 10-bin histogram of those means."""
    rng = derive_rng(config.seed, "wrong-keys")
    key_len = len(record.key.bits)
    tvds: list[float] = []
    layers = []
    for i in range(config.n_inputs):
        layer_seed = int(derive_rng(config.seed, "eval-input", i).integers(2**63))
        layers.append(random_input_layer(original.num_qubits, layer_seed))
    references = [
        run(
            with_input_layer(original, layers[i]),
            config.shots,
            noise=config.noise,
            seed=_arm_seed(config.seed, i, "reference", config.sampling),
        )
        for i in range(config.n_inputs)
    ]
    for k in range(n_keys):
        bits = "".join(str(int(rng.integers(2))) for _ in range(key_len))
        restored = unlock(record.locked_circuit, record.key, candidate_bits=bits).restored_circuit
        values = []
        for i in range(config.n_inputs):
            dist = run(
                with_input_layer(restored, layers[i]),
                config.shots,
                noise=config.noise,
                seed=_arm_seed(config.seed, i, f"wrong-key-{k}", config.sampling),
            )
            values.append(tvd(references[i], dist))
        tvds.append(sum(values) / len(values))
    histogram = {f"{b / 10:.1f}-{(b + 1) / 10:.1f}": 0 for b in range(10)}
    for value in tvds:
        bucket = min(int(value * 10), 9)
        histogram[f"{bucket / 10:.1f}-{(bucket + 1) / 10:.1f}"] += 1
    return {"n_keys": n_keys, "tvds": tvds, "histogram": histogram}


# --- reporting -----------------------------------------------------------------

def report_row(circuit_name: str, record: ObfuscationRecord, rep: TvdReport) -> dict:
    depth, gates = record.original_metrics
    depth_obf, gates_obf = record.locked_metrics
    row = {
        "circuit": circuit_name,
        "depth": depth,
        "depth_obf": depth_obf,
        "gates": gates,
        "gates_obf": gates_obf,
        "logic_key_bits": sum(e.span for e in record.key.schedule if e.kind == "logic"),
        "phase_key_bits": sum(e.span for e in record.key.schedule if e.kind == "phase"),
    }
    for mode in rep.modes:
        row[f"tvd_{mode}"] = rep.mean[mode]
    return row


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def rows_from_csv(text: str) -> list[dict]:
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        row: dict = {}
        for k, v in raw.items():
            if k == "circuit":
                row[k] = v
            elif k.startswith("tvd_"):
                row[k] = float(v)
            else:
                row[k] = int(v)
        rows.append(row)
    return rows


def report_json(rows: list[dict], extra: dict | None = None) -> str:
    payload: dict = {"rows": rows}
    if extra:
        payload.update(extra)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
