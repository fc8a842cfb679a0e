"""Bundled small benchmark circuits (3-4 qubits).

Variants of the classic small QASM benchmark circuits, normalized by hand to
the toolkit's closed gate alphabet (e.g. ``ry`` rewritten as ``u3``) so they
parse, simulate, and lock without a rewriting pass. Gate and depth counts can
therefore differ slightly from other catalogs of the same names, which also
differ among themselves on whether measurements count.
"""

from __future__ import annotations

from importlib import resources

NAMES = ("adder_n4", "basis_change_n3", "fredkin_n3", "wstate_n3")

# display names used in consolidated reports
DISPLAY = {
    "adder_n4": "Adder",
    "basis_change_n3": "Basis Change",
    "fredkin_n3": "Fredkin",
    "wstate_n3": "Wstate",
}


def load(name: str) -> str:
    """QASM source text of a bundled benchmark."""
    if name not in NAMES:
        raise KeyError(f"unknown benchmark {name!r}; available: {', '.join(NAMES)}")
    return resources.files(__package__).joinpath(f"{name}.qasm").read_text(encoding="utf-8")
