#!/usr/bin/env python3
"""Sweep random wrong keys against a locked benchmark.

Locks one bundled benchmark densely, then pushes N uniformly random candidate
keys through the full unlock path, recording the mean TVD of each resulting
circuit against the original. Writes a JSON report with the per-key TVDs and
a 10-bin histogram; the correct key's TVD is included for contrast.
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from qlock import benchmarks, evaluation, locking, qasm
from qlock.rng import derive_rng


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("benchmark", choices=benchmarks.NAMES)
    parser.add_argument("--keys", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--inputs", type=int, default=10)
    parser.add_argument("--shots", type=int, default=100)
    parser.add_argument("-o", "--output", default="wrong_key_sweep.json")
    args = parser.parse_args()

    circuit = qasm.parse_circuit(benchmarks.load(args.benchmark))
    seed = int(derive_rng(args.seed, "sweep", args.benchmark).integers(2**63))
    plan = locking.dense_plan(circuit, seed=seed)
    record = locking.obfuscate(circuit, plan, seed=seed)
    config = evaluation.EvalConfig(n_inputs=args.inputs, shots=args.shots, seed=seed)

    sweep = evaluation.wrong_key_sweep(circuit, record, config, args.keys)
    correct = evaluation.evaluate(circuit, record, config)
    payload = {
        "benchmark": args.benchmark,
        "seed": args.seed,
        "key_bits": len(record.key.bits),
        "correct_key_tvd": correct.mean["restored"],
        **sweep,
    }
    Path(args.output).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    tvds = sweep["tvds"]
    print(
        f"{args.benchmark}: {args.keys} wrong keys, tvd min={min(tvds):.4f} "
        f"mean={sum(tvds) / len(tvds):.4f} max={max(tvds):.4f}; "
        f"correct key {correct.mean['restored']:.4f}"
    )
    print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
