import numpy as np
import pytest

from qlock import benchmarks, parse_circuit
from qlock.circuit import Circuit
from qlock.simulator import run, statevector


def _basis_map(circuit: Circuit, index: int) -> int | None:
    """Image of a basis state, or None if the output is in superposition."""
    init = np.zeros(2**circuit.num_qubits, dtype=complex)
    init[index] = 1.0
    out = statevector(circuit, init)
    support = np.flatnonzero(np.abs(out) > 1e-9)
    return int(support[0]) if len(support) == 1 else None


def test_benchmark_names_and_sizes(bench_circuits):
    assert set(bench_circuits) == set(benchmarks.NAMES)
    for circuit in bench_circuits.values():
        assert circuit.num_qubits <= 6
        assert circuit.measured_qubits() == tuple(range(circuit.num_qubits))


def test_unknown_benchmark_rejected():
    with pytest.raises(KeyError, match="unknown benchmark"):
        benchmarks.load("ghz_n3")


def test_adder_truth_table(bench_circuits):
    body = tuple(bench_circuits["adder_n4"].gates()[2:])  # drop the input preps
    circuit = Circuit(4, 0, body)
    for a in (0, 1):
        for b in (0, 1):
            for cin in (0, 1):
                image = _basis_map(circuit, a | (b << 1) | (cin << 2))
                assert image is not None
                s = a ^ b ^ cin
                cout = (a & b) | (cin & (a ^ b))
                assert image == a | (b << 1) | (s << 2) | (cout << 3)


def test_adder_prepared_input_output(bench_circuits):
    # a=1, b=1, cin=0: sum 0, carry 1
    assert run(bench_circuits["adder_n4"], 100, seed=0).counts == {"1011": 100}


def test_fredkin_truth_table(bench_circuits):
    body = tuple(bench_circuits["fredkin_n3"].gates()[2:])
    circuit = Circuit(3, 0, body)
    for c in (0, 1):
        for t1 in (0, 1):
            for t2 in (0, 1):
                image = _basis_map(circuit, c | (t1 << 1) | (t2 << 2))
                assert image is not None
                u1, u2 = (t2, t1) if c else (t1, t2)
                assert image == c | (u1 << 1) | (u2 << 2)


def test_wstate_uniform_one_hot(bench_circuits):
    counts = run(bench_circuits["wstate_n3"], 3000, seed=2).counts
    assert set(counts) == {"001", "010", "100"}
    for value in counts.values():
        assert abs(value - 1000) < 150  # ~5 sigma for p=1/3


def test_basis_change_has_both_site_kinds(bench_circuits):
    from qlock.locking import dense_plan

    plan = dense_plan(bench_circuits["basis_change_n3"])
    assert sum(1 for s in plan.logic_sites if s.gate is not None) > 10
    assert sum(1 for s in plan.phase_sites if s.gate is not None) > 8
