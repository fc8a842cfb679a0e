"""Key-based circuit locking: logic sites on an ancilla qubit, phase sites on
randomized rotation angles.

Logic locking adds one ancilla qubit ``qk`` (emitted as its own register so it
stays identifiable in files). Every logic site becomes a key section on the
ancilla: a Hadamard followed by exactly one gate controlled by ``qk`` — the
controlled form of an existing gate (key bit 1) or an inserted dummy (key bit
0). Sections are serialized in layer-major, qubit-minor site order, one per
key bit.

Phase locking rewrites each selected phase gate as ``rz`` with a fresh uniform
angle, recording the true angle as kappa = angle / (pi/4) in three key bits;
empty phase slots gain a dummy ``rz`` with kappa 0. Dummy phase gates occupy
their own phase blocks at layer boundaries, so circuits without any phase
gates still accept phase keys.

The locked circuit materializes layer boundaries as barriers. Key-schedule
coordinates address the locked circuit: ``layer`` is the barrier-delimited
block index and ``qubit`` pins the gate inside it, which survives a round
trip through QASM text.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .circuit import (
    Barrier,
    Circuit,
    Gate,
    LayeredCircuit,
    flatten,
    layerize,
    light_cone_rank,
    metrics,
    phase_angle_of,
)
from .rng import derive_rng

ANCILLA_REGISTER = "qk"

# gates with a controlled form inside the closed alphabet; anything whose
# controlled form would leave it (ccx, ch, cy, cz, u3) is not logic-lockable
CONTROLLED_FORM = {"x": "cx", "y": "cy", "z": "cz", "h": "ch", "cx": "ccx"}
UNCONTROLLED_FORM = {v: k for k, v in CONTROLLED_FORM.items()}

DUMMY_KINDS = ("cx", "cy", "cz", "ch")

KAPPA_STEP = math.pi / 4
_KAPPA_TOL = 1e-9
_ANGLE_GUARD = 1e-6  # randomized angles keep this distance from the kappa grid


class PlanError(ValueError):
    """A requested plan cannot be realized against the circuit."""


@dataclass(frozen=True)
class Site:
    """One obfuscation location in the layered circuit.

    ``gate`` is the existing gate at the site, or None for an empty slot. For
    phase slots, ``layer`` names the boundary the dummy block is inserted at
    (0 = before the first layer, num_layers = after the last).
    """

    layer: int
    qubit: int
    gate: Gate | None = None


@dataclass(frozen=True)
class ObfuscationPlan:
    logic_sites: tuple[Site, ...]
    phase_sites: tuple[Site, ...]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, "logic_sites", tuple(sorted(self.logic_sites, key=lambda s: (s.layer, s.qubit)))
        )
        object.__setattr__(
            self,
            "phase_sites",
            tuple(sorted(self.phase_sites, key=lambda s: (s.layer, s.gate is not None, s.qubit))),
        )


@dataclass(frozen=True)
class KeyEntry:
    kind: str  # "logic" | "phase"
    layer: int  # barrier-delimited block index in the locked circuit
    qubit: int
    span: int
    kappa: int | None = None

    def __post_init__(self):
        if self.kind not in ("logic", "phase"):
            raise ValueError(f"bad key entry kind {self.kind!r}")
        if self.span != (1 if self.kind == "logic" else 3):
            raise ValueError(f"{self.kind} entry must span {1 if self.kind == 'logic' else 3} bits")


@dataclass(frozen=True)
class Key:
    bits: str
    schedule: tuple[KeyEntry, ...]

    def __post_init__(self):
        if set(self.bits) - {"0", "1"}:
            raise ValueError("key bits must be a 0/1 string")
        if sum(e.span for e in self.schedule) != len(self.bits):
            raise ValueError("key bit length does not match schedule spans")

    def logic_bits(self) -> tuple[int, ...]:
        out, pos = [], 0
        for entry in self.schedule:
            if entry.kind == "logic":
                out.append(int(self.bits[pos]))
            pos += entry.span
        return tuple(out)

    def phase_assignments(self) -> tuple[tuple[KeyEntry, int], ...]:
        """(entry, kappa decoded from this key's bits, most-significant first)."""
        out, pos = [], 0
        for entry in self.schedule:
            if entry.kind == "phase":
                out.append((entry, int(self.bits[pos : pos + 3], 2)))
            pos += entry.span
        return tuple(out)

    def with_bits(self, bits: str) -> "Key":
        return Key(bits=bits, schedule=self.schedule)


@dataclass(frozen=True)
class ObfuscationRecord:
    locked_circuit: Circuit
    ancilla_index: int | None
    key: Key
    plan: ObfuscationPlan | None  # None when reconstructed from files
    original_metrics: tuple[int, int]
    locked_metrics: tuple[int, int]


def normalize_phase_angle(angle: float) -> int | None:
    """Reduce to [0, 2pi) and snap to the pi/4 grid; None when off-grid."""
    reduced = math.fmod(angle, 2.0 * math.pi)
    if reduced < 0.0:
        reduced += 2.0 * math.pi
    kappa = round(reduced / KAPPA_STEP)
    if abs(reduced - kappa * KAPPA_STEP) > _KAPPA_TOL:
        return None
    return kappa % 8


def _logic_gate_candidates(layered: LayeredCircuit) -> list[Site]:
    sites = []
    for i, layer in enumerate(layered.layers):
        if layer.kind != "nonphase":
            continue
        for g in layer.gates:
            if g.kind in CONTROLLED_FORM:
                sites.append(Site(i, min(g.qubits), gate=g))
    return sites


def _logic_slot_candidates(layered: LayeredCircuit) -> list[Site]:
    sites = []
    for i, layer in enumerate(layered.layers):
        if layer.kind != "nonphase":
            continue
        touched = layer.touched()
        sites.extend(Site(i, q) for q in range(layered.num_qubits) if q not in touched)
    return sites


def _phase_gate_candidates(layered: LayeredCircuit) -> list[Site]:
    sites = []
    for i, layer in enumerate(layered.layers):
        if layer.kind != "phase":
            continue
        for g in layer.gates:
            if normalize_phase_angle(phase_angle_of(g)) is not None:
                sites.append(Site(i, g.qubits[0], gate=g))
    return sites


def _phase_slot_candidates(layered: LayeredCircuit) -> list[Site]:
    m = len(layered.layers)
    return [Site(b, q) for b in range(m + 1) for q in range(layered.num_qubits)]


def _site_score(rank, layered: LayeredCircuit, site: Site, phase: bool) -> int:
    if site.gate is not None:
        return rank.gate_score(site.layer, site.gate.qubits)
    if phase:
        return rank.boundary_score(site.layer, site.qubit)
    return rank.slot_score(site.layer, site.qubit)


def _pick(
    candidates: list[Site],
    count: int,
    strategy: str,
    rng,
    rank,
    layered: LayeredCircuit,
    phase: bool,
    label: str,
) -> list[Site]:
    if count > len(candidates):
        raise PlanError(
            f"requested {count} {label} sites but only {len(candidates)} are available"
        )
    if count == 0:
        return []
    if strategy == "random":
        idx = rng.choice(len(candidates), size=count, replace=False)
        return [candidates[i] for i in sorted(idx)]
    if strategy == "lightcone":
        ranked = sorted(
            candidates,
            key=lambda s: (-_site_score(rank, layered, s, phase), s.layer, s.qubit),
        )
        return ranked[:count]
    raise ValueError(f"unknown strategy {strategy!r}")


def select_sites(
    circuit: Circuit | LayeredCircuit,
    n_logic: int,
    n_phase: int,
    strategy: str = "lightcone",
    seed: int = 0,
) -> ObfuscationPlan:
    """Choose ``n_logic`` logic and ``n_phase`` phase sites.

    ``random`` samples uniformly without replacement from all candidates;
    ``lightcone`` takes the top-scoring candidates (ties: earlier layer, then
    lower qubit).
    """
    if isinstance(circuit, LayeredCircuit):
        layered = circuit
        circuit = flatten(layered)
    else:
        layered = layerize(circuit)
    rank = light_cone_rank(circuit)
    rng = derive_rng(seed, "select")
    logic_pool = _logic_gate_candidates(layered) + _logic_slot_candidates(layered)
    phase_pool = _phase_gate_candidates(layered) + _phase_slot_candidates(layered)
    logic = _pick(logic_pool, n_logic, strategy, rng, rank, layered, False, "logic")
    phase = _pick(phase_pool, n_phase, strategy, rng, rank, layered, True, "phase")
    return ObfuscationPlan(tuple(logic), tuple(phase), seed=seed)


def dense_plan(
    circuit: Circuit,
    strategy: str = "lightcone",
    seed: int = 0,
    logic_cap: int | None = None,
    phase_cap: int | None = None,
) -> ObfuscationPlan:
    """Default plan: every eligible existing gate plus one empty slot per layer.

    Logic slots land on a free qubit of each non-phase layer; each layer also
    contributes one phase slot at the boundary just before it. Caps truncate
    each list after ranking (lightcone) or a seeded subsample (random).
    """
    layered = layerize(circuit)
    rank = light_cone_rank(circuit)
    rng = derive_rng(seed, "dense")
    logic = _logic_gate_candidates(layered)
    phase = _phase_gate_candidates(layered)
    for i, layer in enumerate(layered.layers):
        if layer.kind == "nonphase":
            free = [q for q in range(layered.num_qubits) if q not in layer.touched()]
            if free:
                if strategy == "lightcone":
                    q = max(free, key=lambda q: (rank.slot_score(i, q), -q))
                else:
                    q = int(rng.choice(free))
                logic.append(Site(i, q))
        # the slot sits before its layer: a dummy rotation after the final
        # layer would be diagonal right before measurement and do nothing
        boundary = i
        qubits = list(range(layered.num_qubits))
        if strategy == "lightcone":
            q = max(qubits, key=lambda q: (rank.boundary_score(boundary, q), -q))
        else:
            q = int(rng.choice(qubits))
        phase.append(Site(boundary, q))

    def cap(sites: list[Site], limit: int | None, phase_kind: bool) -> list[Site]:
        if limit is None or limit >= len(sites):
            return sites
        if strategy == "lightcone":
            ranked = sorted(
                sites, key=lambda s: (-_site_score(rank, layered, s, phase_kind), s.layer, s.qubit)
            )
            return ranked[:limit]
        idx = rng.choice(len(sites), size=limit, replace=False)
        return [sites[i] for i in sorted(idx)]

    return ObfuscationPlan(
        tuple(cap(logic, logic_cap, False)), tuple(cap(phase, phase_cap, True)), seed=seed
    )


def _validate_plan(layered: LayeredCircuit, plan: ObfuscationPlan) -> None:
    m = len(layered.layers)
    seen: set[tuple] = set()
    for site in plan.logic_sites:
        if not 0 <= site.layer < m:
            raise PlanError(f"logic site layer {site.layer} out of range")
        layer = layered.layers[site.layer]
        if layer.kind != "nonphase":
            raise PlanError(f"logic site in phase layer {site.layer}")
        if site.gate is not None:
            if site.gate not in layer.gates:
                raise PlanError(f"logic site gate not found in layer {site.layer}")
            if site.gate.kind not in CONTROLLED_FORM:
                raise PlanError(f"gate {site.gate.kind} has no supported controlled form")
            tag = ("logic", site.layer, site.gate)
        else:
            if not 0 <= site.qubit < layered.num_qubits:
                raise PlanError(f"logic slot qubit {site.qubit} out of range")
            if site.qubit in layer.touched():
                raise PlanError(
                    f"logic slot qubit {site.qubit} is occupied in layer {site.layer}"
                )
            tag = ("logic", site.layer, site.qubit)
        if tag in seen:
            raise PlanError("plan sites are not disjoint")
        seen.add(tag)
    for site in plan.phase_sites:
        if site.gate is not None:
            if not 0 <= site.layer < m:
                raise PlanError(f"phase site layer {site.layer} out of range")
            layer = layered.layers[site.layer]
            if layer.kind != "phase":
                raise PlanError(f"phase site in non-phase layer {site.layer}")
            if site.gate not in layer.gates:
                raise PlanError(f"phase site gate not found in layer {site.layer}")
            if normalize_phase_angle(phase_angle_of(site.gate)) is None:
                raise PlanError(
                    f"phase angle {phase_angle_of(site.gate)} is not a pi/4 multiple"
                )
            tag = ("phase", site.layer, site.gate)
        else:
            if not 0 <= site.layer <= m:
                raise PlanError(f"phase slot boundary {site.layer} out of range")
            if not 0 <= site.qubit < layered.num_qubits:
                raise PlanError(f"phase slot qubit {site.qubit} out of range")
            tag = ("phase-slot", site.layer, site.qubit)
        if tag in seen:
            raise PlanError("plan sites are not disjoint")
        seen.add(tag)


def _random_angle(rng) -> float:
    """Uniform angle in [0, 2pi), kept clear of the kappa grid."""
    while True:
        angle = float(rng.uniform(0.0, 2.0 * math.pi))
        steps = angle / KAPPA_STEP
        if abs(steps - round(steps)) * KAPPA_STEP > _ANGLE_GUARD:
            return angle


def _controlled_gate(gate: Gate, ancilla: int) -> Gate:
    return Gate(CONTROLLED_FORM[gate.kind], gate.params, (ancilla,) + gate.qubits, origin="converted")


def obfuscate(
    circuit: Circuit,
    plan: ObfuscationPlan,
    seed: int = 0,
    dummy_gates: str = "cx",
) -> ObfuscationRecord:
    """Apply a plan: ancilla key sections for logic sites, randomized ``rz``
    angles for phase sites, barriers at every block boundary.

    ``dummy_gates`` picks the inserted dummy's kind: the default ``"cx"``
    makes dummies indistinguishable from converted x gates; ``"random"`` draws
    among the controlled single-qubit non-phase forms.
    """
    layered = layerize(circuit)
    _validate_plan(layered, plan)
    if dummy_gates not in ("cx", "random"):
        raise ValueError(f"dummy_gates must be 'cx' or 'random', got {dummy_gates!r}")
    rng = derive_rng(seed, "obfuscate")
    n = circuit.num_qubits
    has_logic = bool(plan.logic_sites)
    ancilla = n if has_logic else None
    nq = n + (1 if has_logic else 0)
    all_qubits = tuple(range(nq))

    logic_by_layer: dict[int, list[Site]] = {}
    for site in plan.logic_sites:
        logic_by_layer.setdefault(site.layer, []).append(site)
    phase_slots_by_boundary: dict[int, list[Site]] = {}
    phase_gates_by_layer: dict[int, dict[Gate, Site]] = {}
    for site in plan.phase_sites:
        if site.gate is None:
            phase_slots_by_boundary.setdefault(site.layer, []).append(site)
        else:
            phase_gates_by_layer.setdefault(site.layer, {})[site.gate] = site

    ops: list = []
    block = -1
    logic_bits: list[str] = []
    logic_entries: list[KeyEntry] = []
    phase_bits: list[str] = []
    phase_entries: list[KeyEntry] = []

    def open_block() -> int:
        nonlocal block
        if ops:
            ops.append(Barrier(all_qubits))
        block += 1
        return block

    for b in range(len(layered.layers) + 1):
        slots = phase_slots_by_boundary.get(b)
        if slots:
            here = open_block()
            for site in sorted(slots, key=lambda s: s.qubit):
                ops.append(Gate("rz", (_random_angle(rng),), (site.qubit,), origin="dummy"))
                phase_bits.append("000")
                phase_entries.append(KeyEntry("phase", here, site.qubit, 3, kappa=0))
        if b == len(layered.layers):
            break
        layer = layered.layers[b]
        here = open_block()
        section_sites = sorted(logic_by_layer.get(b, ()), key=lambda s: s.qubit)
        section_gates = {s.gate for s in section_sites if s.gate is not None}
        keyed_phase = phase_gates_by_layer.get(b, {})
        converted: list[tuple[int, int]] = []  # (qubit, kappa), key bits go qubit-minor
        for g in layer.gates:
            if g in section_gates:
                continue  # re-emitted inside its key section below
            if g in keyed_phase:
                kappa = normalize_phase_angle(phase_angle_of(g))
                assert kappa is not None
                ops.append(Gate("rz", (_random_angle(rng),), g.qubits, origin="converted"))
                converted.append((g.qubits[0], kappa))
            else:
                ops.append(g)
        for qubit, kappa in sorted(converted):
            phase_bits.append(format(kappa, "03b"))
            phase_entries.append(KeyEntry("phase", here, qubit, 3, kappa=kappa))
        for site in section_sites:
            ops.append(Gate("h", (), (ancilla,), origin="inserted"))
            if site.gate is not None:
                ops.append(_controlled_gate(site.gate, ancilla))
                logic_bits.append("1")
            else:
                kind = (
                    "cx" if dummy_gates == "cx" else DUMMY_KINDS[int(rng.integers(len(DUMMY_KINDS)))]
                )
                ops.append(Gate(kind, (), (ancilla, site.qubit), origin="dummy"))
                logic_bits.append("0")
            logic_entries.append(KeyEntry("logic", here, site.qubit, 1))

    if layered.measurements:
        if ops:
            ops.append(Barrier(all_qubits))
        ops.extend(layered.measurements)

    labels = circuit.qubit_labels + ((f"{ANCILLA_REGISTER}[0]",) if has_logic else ())
    locked = Circuit(
        num_qubits=nq,
        num_clbits=circuit.num_clbits,
        ops=tuple(ops),
        qubit_labels=labels,
        clbit_labels=circuit.clbit_labels,
    )
    key = Key(
        bits="".join(logic_bits) + "".join(phase_bits),
        schedule=tuple(logic_entries) + tuple(phase_entries),
    )
    return ObfuscationRecord(
        locked_circuit=locked,
        ancilla_index=ancilla,
        key=key,
        plan=plan,
        original_metrics=metrics(circuit),
        locked_metrics=metrics(locked),
    )


# --- key files -----------------------------------------------------------------

def export_key(key: Key) -> str:
    entries = [
        {"kind": e.kind, "layer": e.layer, "qubit": e.qubit, "span": e.span}
        for e in key.schedule
    ]
    return json.dumps({"bits": key.bits, "schedule": entries}, indent=2) + "\n"


def import_key(text: str) -> Key:
    try:
        data = json.loads(text)
        bits = data["bits"]
        raw = data["schedule"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValueError(f"malformed key file: {exc}") from exc
    if not isinstance(bits, str):
        raise ValueError("malformed key file: bits must be a string")
    entries: list[KeyEntry] = []
    pos = 0
    for item in raw:
        try:
            kind, layer, qubit, span = item["kind"], item["layer"], item["qubit"], item["span"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed key schedule entry: {item!r}") from exc
        if not (isinstance(layer, int) and isinstance(qubit, int) and layer >= 0 and qubit >= 0):
            raise ValueError(f"malformed key schedule entry: {item!r}")
        kappa = None
        if kind == "phase":
            chunk = bits[pos : pos + 3]
            kappa = int(chunk, 2) if len(chunk) == 3 else None
        entries.append(KeyEntry(kind, layer, qubit, span, kappa=kappa))
        pos += span
    return Key(bits=bits, schedule=tuple(entries))
