"""A small prefix-free machine over bit strings.

Programs are read left to right as a sequence of self-delimiting
instructions that append to an output string. A program is valid when it
ends with HALT exactly on its last bit. Instructions (``g(v)`` is the Elias
gamma code of ``v >= 1``)::

    00                      HALT
    01 b                    PUSH      append bit b
    10 g(b) g(r)            REPEAT    append the last b output bits r times
    110 g(L) <L bits>       LITERAL   append L literal bits
    1110 g(j)               DUP       append the first j output bits
    1111 <circuit> <rank>   SAMPLE    append the rank-th most likely outcome

REPEAT and DUP crash when they reach past the current output. SAMPLE reads
a circuit as ``g(nq) g(g+1)`` followed by ``g`` gates, each a 3-bit kind
(H X Z T S CNOT CZ = 0..6, 7 crashes) and its targets in
``(nq-1).bit_length()`` bits each; then a rank as ``g(l+1)`` and ``l``
bits. Outcomes are ordered by decreasing probability, ties by value.

Because the only machine state is the output written so far, shortest
programs can be found by a shortest-path search over outputs; see
:mod:`owpuzzle.kolmo.enumerate`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from ..qsim import GATE_KINDS, MAX_QUBITS, TWO_QUBIT, Circuit, Gate, run

STEP_CAP = 10**6
HALT = "00"
PUSH = "01"
REPEAT = "10"
LITERAL = "110"
DUP = "1110"
SAMPLE = "1111"


class Crash(Exception):
    """Raised when a program does not describe a valid halting computation."""


def gamma(v: int) -> str:
    if v < 1:
        raise ValueError("gamma code needs v >= 1")
    b = format(v, "b")
    return "0" * (len(b) - 1) + b


def gamma_len(v: int) -> int:
    return 2 * (v.bit_length() - 1) + 1


def literal_cost(m: int) -> int:
    """Length of the LITERAL-then-HALT program for an ``m``-bit string."""
    if m == 0:
        return len(HALT)
    return len(LITERAL) + gamma_len(m) + m + len(HALT)


def calibration(m: int) -> int:
    """Additive constant separating the literal program from ``m``: ``6 + 2 floor(log2 m)``."""
    return literal_cost(m) - m if m else 0


def rank_code(r: int) -> str:
    bits = format(r, "b") if r else ""
    return gamma(len(bits) + 1) + bits


def rank_cost(r: int) -> int:
    ell = r.bit_length()
    return gamma_len(ell + 1) + ell


def target_width(nq: int) -> int:
    return (nq - 1).bit_length()


def encode_circuit(c: Circuit) -> str:
    w = target_width(c.n_qubits)
    out = [gamma(c.n_qubits), gamma(len(c.gates) + 1)]
    for g in c.gates:
        out.append(format(GATE_KINDS.index(g.kind), "03b"))
        for q in g.targets:
            out.append(format(q, f"0{w}b") if w else "")
    return "".join(out)


@lru_cache(maxsize=None)
def ranked_support(c: Circuit) -> tuple[str, ...]:
    """Outcomes with nonzero probability, most likely first, ties by value."""
    probs = abs(run(c)) ** 2
    nq = c.n_qubits
    items = [(-round(float(p), 12), v) for v, p in enumerate(probs) if p > 1e-12]
    items.sort()
    return tuple(format(v, f"0{nq}b") for _, v in items)


class _Reader:
    __slots__ = ("bits", "pos")

    def __init__(self, bits: str):
        self.bits = bits
        self.pos = 0

    def take(self, k: int) -> str:
        if self.pos + k > len(self.bits):
            raise Crash("ran off the end of the program")
        s = self.bits[self.pos:self.pos + k]
        self.pos += k
        return s

    def gamma(self) -> int:
        z = 0
        while True:
            b = self.take(1)
            if b == "1":
                break
            z += 1
        return int("1" + self.take(z), 2) if z else 1

    def circuit(self) -> Circuit:
        nq = self.gamma()
        if nq > MAX_QUBITS:
            raise Crash(f"circuit with {nq} qubits")
        ngates = self.gamma() - 1
        w = target_width(nq)
        gates = []
        for _ in range(ngates):
            kind = int(self.take(3), 2)
            if kind >= len(GATE_KINDS):
                raise Crash("bad gate kind")
            name = GATE_KINDS[kind]
            arity = 2 if name in TWO_QUBIT else 1
            ts = tuple(int(self.take(w), 2) if w else 0 for _ in range(arity))
            if any(q >= nq for q in ts) or (arity == 2 and ts[0] == ts[1]):
                raise Crash("bad gate target")
            gates.append(Gate(name, ts))
        return Circuit(nq, tuple(gates))


def run_program(bits: str, max_out: int | None = None, step_cap: int = STEP_CAP) -> str:
    """Execute a program; return its output or raise :class:`Crash`.

    ``max_out`` aborts as soon as the output grows past that many bits,
    which is sound for searches over short outputs because no instruction
    ever shortens the output.
    """
    rd = _Reader(bits)
    out = ""
    steps = 0
    while True:
        steps += 1
        if steps > step_cap:
            raise Crash("step cap exceeded")
        if rd.take(1) == "0":
            if rd.take(1) == "0":
                if rd.pos != len(bits):
                    raise Crash("trailing bits after HALT")
                return out
            out += rd.take(1)
        elif rd.take(1) == "0":
            b, r = rd.gamma(), rd.gamma()
            if b > len(out):
                raise Crash("REPEAT reaches past the output")
            out += out[-b:] * r
        elif rd.take(1) == "0":
            L = rd.gamma()
            out += rd.take(L)
        elif rd.take(1) == "0":
            j = rd.gamma()
            if j > len(out):
                raise Crash("DUP reaches past the output")
            out += out[:j]
        else:
            circ = rd.circuit()
            ell = rd.gamma() - 1
            r = int(rd.take(ell), 2) if ell else 0
            support = ranked_support(circ)
            if r >= len(support):
                raise Crash("rank beyond the support")
            out += support[r]
        if max_out is not None and len(out) > max_out:
            raise Crash("output cap exceeded")


def literal_program(x: str) -> str:
    if not x:
        return HALT
    return LITERAL + gamma(len(x)) + x + HALT


def sample_program(c: Circuit, r: int) -> str:
    return SAMPLE + encode_circuit(c) + rank_code(r) + HALT


@dataclass(frozen=True)
class Program:
    bits: str

    @property
    def hex(self) -> str:
        """Hex with a leading sentinel bit so leading zeros survive."""
        return format(int("1" + self.bits, 2), "x")

    @classmethod
    def from_hex(cls, h: str) -> "Program":
        return cls(format(int(h, 16), "b")[1:])

    def __len__(self) -> int:
        return len(self.bits)

    def run(self, max_out: int | None = None) -> str:
        return run_program(self.bits, max_out)
