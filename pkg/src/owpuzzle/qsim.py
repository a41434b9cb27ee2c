"""Dense statevector simulator for measured circuits over a Clifford+T gate set.

Qubit 0 is the most significant bit of the measured string, so a basis
index read in binary is the output bit string directly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dist import BitString, FiniteDistribution, SeededRng

MAX_QUBITS = 12
NORM_TOL = 1e-9
CLAMP = 1e-12

GATE_KINDS = ("H", "X", "Z", "T", "S", "CNOT", "CZ")
TWO_QUBIT = {"CNOT", "CZ"}

_S2 = 1 / np.sqrt(2)
_ONE_QUBIT = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
}


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        want = 2 if self.kind in TWO_QUBIT else 1
        if len(self.targets) != want:
            raise ValueError(f"{self.kind} takes {want} target(s), got {len(self.targets)}")
        if want == 2 and self.targets[0] == self.targets[1]:
            raise ValueError(f"{self.kind} targets must be distinct")


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        gates = tuple(g if isinstance(g, Gate) else Gate(*g) for g in self.gates)
        object.__setattr__(self, "gates", gates)
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits={self.n_qubits} outside [1, {MAX_QUBITS}]")
        for g in gates:
            for q in g.targets:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"gate {g.kind} target {q} out of range for {self.n_qubits} qubits")

    def to_json(self) -> dict:
        return {"n_qubits": self.n_qubits,
                "gates": [{"kind": g.kind, "targets": list(g.targets)} for g in self.gates]}

    @classmethod
    def from_json(cls, obj) -> "Circuit":
        try:
            gates = tuple(Gate(g["kind"], tuple(g["targets"])) for g in obj.get("gates", []))
            return cls(int(obj["n_qubits"]), gates)
        except (KeyError, TypeError) as e:
            raise ValueError(f"malformed circuit JSON: {e}") from None


def load_circuit(path: "str | Path") -> Circuit:
    with open(path) as fh:
        return Circuit.from_json(json.load(fh))


def _apply(state: np.ndarray, g: Gate, nq: int) -> np.ndarray:
    psi = state.reshape((2,) * nq)
    if g.kind in _ONE_QUBIT:
        q = g.targets[0]
        psi = np.moveaxis(np.tensordot(_ONE_QUBIT[g.kind], psi, axes=([1], [q])), 0, q)
    else:
        c, t = g.targets
        psi = psi.copy()
        sel = [slice(None)] * nq
        sel[c] = 1
        sub = psi[tuple(sel)]
        taxis = t if t < c else t - 1
        if g.kind == "CNOT":
            sub = np.flip(sub, axis=taxis)
        else:
            sub = sub.copy()
            idx = [slice(None)] * (nq - 1)
            idx[taxis] = 1
            sub[tuple(idx)] *= -1
        psi[tuple(sel)] = sub
    return psi.reshape(-1)


def run(c: Circuit) -> np.ndarray:
    """Statevector after applying the gates in order to ``|0...0>``."""
    state = np.zeros(1 << c.n_qubits, dtype=complex)
    state[0] = 1.0
    for g in c.gates:
        state = _apply(state, g, c.n_qubits)
    return state


def output_distribution(c: Circuit) -> FiniteDistribution:
    """Born-rule distribution of a full computational-basis measurement."""
    probs = np.abs(run(c)) ** 2
    return FiniteDistribution.from_array(c.n_qubits, probs, clamp=CLAMP)


def measure(c: Circuit, rng: SeededRng, shots: int) -> list[BitString]:
    probs = np.abs(run(c)) ** 2
    cdf = np.cumsum(probs)
    idx = np.searchsorted(cdf, rng.random(shots) * cdf[-1], side="right")
    idx = np.minimum(idx, len(probs) - 1)
    return [BitString(c.n_qubits, int(i)) for i in idx]


# small builders used by fixtures and tests

def bell() -> Circuit:
    return Circuit(2, (Gate("H", (0,)), Gate("CNOT", (0, 1))))


def ghz(n: int) -> Circuit:
    return Circuit(n, (Gate("H", (0,)),) + tuple(Gate("CNOT", (0, i)) for i in range(1, n)))


def hadamard_layer(n: int, qubits: Sequence[int] | None = None) -> Circuit:
    qs = range(n) if qubits is None else qubits
    return Circuit(n, tuple(Gate("H", (q,)) for q in qs))
