"""Two independent ways of finding shortest programs.

``shortest_by_search`` runs Dijkstra over machine outputs: every
instruction maps the current output to a longer one at a fixed bit cost, so
the cheapest instruction sequence ending in a given output, plus the two
HALT bits, is that output's complexity.

``shortest_by_brute_force`` feeds every bit string up to the length cap
through the interpreter and keeps the shortest valid program per output.
"""
from __future__ import annotations

import heapq
import itertools

from ..qsim import GATE_KINDS, MAX_QUBITS, TWO_QUBIT, Circuit, Gate
from .machine import (DUP, HALT, LITERAL, PUSH, REPEAT, SAMPLE, Crash, gamma_len, rank_cost,
                      ranked_support, run_program, target_width)


def iter_circuits(budget: int):
    """Yield ``(circuit, code_length)`` for every circuit code of at most ``budget`` bits."""
    nq = 1
    while gamma_len(nq) <= budget and nq <= MAX_QUBITS:
        w = target_width(nq)
        singles = [Gate(k, (q,)) for k in GATE_KINDS if k not in TWO_QUBIT for q in range(nq)]
        doubles = [Gate(k, (a, b)) for k in GATE_KINDS if k in TWO_QUBIT
                   for a in range(nq) for b in range(nq) if a != b]
        options = [(g, 3 + w) for g in singles] + [(g, 3 + 2 * w) for g in doubles]
        head = gamma_len(nq)

        def extend(prefix, used, ngates):
            if ngates == 0:
                return [prefix] if used <= budget else []
            out = []
            for g, cost in options:
                if used + cost <= budget:
                    out.extend(extend(prefix + (g,), used + cost, ngates - 1))
            return out

        g = 0
        while head + gamma_len(g + 1) + g * (3 + w) <= budget:
            used = head + gamma_len(g + 1)
            for gates in extend((), used, g):
                clen = used + sum(3 + w * len(x.targets) for x in gates)
                yield Circuit(nq, gates), clen
            g += 1
        nq += 1


def append_costs(L: int, max_out: int) -> dict[str, int]:
    """Cheapest state-independent instruction appending each fixed string.

    Covers PUSH, LITERAL and SAMPLE; only costs that leave room for HALT
    within ``L`` bits are kept.
    """
    budget = L - len(HALT)
    best: dict[str, int] = {}

    def offer(s, cost):
        if cost <= budget and len(s) <= max_out and cost < best.get(s, budget + 1):
            best[s] = cost

    for b in "01":
        offer(b, len(PUSH) + 1)
    for m in range(1, max_out + 1):
        cost = len(LITERAL) + gamma_len(m) + m
        if cost > budget:
            break
        for v in range(1 << m):
            offer(format(v, f"0{m}b"), cost)
    circ_budget = budget - len(SAMPLE) - rank_cost(0)
    if circ_budget > 0:
        for c, clen in iter_circuits(circ_budget):
            if c.n_qubits > max_out:
                continue
            for r, s in enumerate(ranked_support(c)):
                cost = len(SAMPLE) + clen + rank_cost(r)
                if cost > budget:
                    break
                offer(s, cost)
    return best


def shortest_by_search(L: int, max_out: int) -> dict[str, int]:
    """Exact complexity of every output of length ``<= max_out`` that has a program of ``<= L`` bits."""
    budget = L - len(HALT)
    consts = sorted(append_costs(L, max_out).items(), key=lambda kv: kv[1])
    dist = {"": 0}
    heap = [(0, "")]
    while heap:
        d, out = heapq.heappop(heap)
        if d > dist.get(out, budget + 1):
            continue
        n = len(out)
        room = max_out - n

        def relax(new, cost):
            nd = d + cost
            if nd <= budget and nd < dist.get(new, budget + 1):
                dist[new] = nd
                heapq.heappush(heap, (nd, new))

        for s, cost in consts:
            if d + cost > budget:
                break
            if len(s) <= room:
                relax(out + s, cost)
        base = len(REPEAT)
        for b in range(1, min(n, room) + 1):
            gb = gamma_len(b)
            for r in range(1, room // b + 1):
                cost = base + gb + gamma_len(r)
                if d + cost > budget:
                    break
                relax(out + out[-b:] * r, cost)
        for j in range(1, min(n, room) + 1):
            cost = len(DUP) + gamma_len(j)
            if d + cost > budget:
                break
            relax(out + out[:j], cost)
    return {s: d + len(HALT) for s, d in dist.items()}


def shortest_by_brute_force(L: int, max_out: int) -> dict[str, int]:
    """Same table as :func:`shortest_by_search`, by running every program of ``<= L`` bits."""
    best: dict[str, int] = {}
    for ell in range(L + 1):
        for bits in itertools.product("01", repeat=ell):
            prog = "".join(bits)
            try:
                out = run_program(prog, max_out)
            except Crash:
                continue
            if out not in best:
                best[out] = ell
    return best


def shortest_program(x: str, L: int, max_out: int | None = None) -> str | None:
    """A shortest program for ``x`` among those of ``<= L`` bits, found by brute force."""
    cap = len(x) if max_out is None else max_out
    for ell in range(L + 1):
        for bits in itertools.product("01", repeat=ell):
            prog = "".join(bits)
            try:
                if run_program(prog, cap) == x:
                    return prog
            except Crash:
                continue
    return None
