"""Exact complexity oracle, counting, and the GapK promise problem.

Complexities are relative to the machine in :mod:`owpuzzle.kolmo.machine`.
Thresholds on this machine are stated in *calibrated* units,
``K_cal(x) = K(x) - calibration(|x|)``, which removes the fixed overhead of
the literal program so that ``K_cal(x) <= |x|`` for every ``x``.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

from ..dist import BitString, as_bitstring
from .enumerate import shortest_by_brute_force, shortest_by_search
from .machine import calibration, literal_cost

MAX_CAP = 24
MACHINE_VERSION = 1


def cache_dir() -> Path:
    root = os.environ.get("OWPUZZLE_CACHE")
    return Path(root) if root else Path.home() / ".cache" / "owpuzzle"


class KolmogorovOracle:
    """Shortest-program lengths for every output of ``<= max_out`` bits with ``K <= L``.

    ``k_complexity`` returns ``None`` for strings above the cap. The table is
    computed once, then cached on disk keyed by ``(L, max_out)``.
    """

    def __init__(self, L: int = 22, max_out: int = 12, use_cache: bool = True):
        if not 0 <= L <= MAX_CAP:
            raise ValueError(f"enumeration cap L={L} outside [0, {MAX_CAP}]")
        if not 0 <= max_out <= MAX_CAP:
            raise ValueError(f"output cap {max_out} outside [0, {MAX_CAP}]")
        self.L = L
        self.max_out = max_out
        self.table = self._load(use_cache)

    def __repr__(self):
        return f"KolmogorovOracle(L={self.L}, max_out={self.max_out}, entries={len(self.table)})"

    def _cache_path(self) -> Path:
        return cache_dir() / f"k_v{MACHINE_VERSION}_L{self.L}_out{self.max_out}.json"

    def _load(self, use_cache: bool) -> dict[str, int]:
        path = self._cache_path()
        if use_cache and path.exists():
            try:
                with open(path) as fh:
                    blob = json.load(fh)
                if blob.get("digest") == _digest(blob["table"]):
                    return blob["table"]
            except (OSError, ValueError, KeyError):
                pass
        table = shortest_by_search(self.L, self.max_out)
        if use_cache:
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                tmp = path.with_suffix(f".{os.getpid()}.tmp")
                with open(tmp, "w") as fh:
                    json.dump({"table": table, "digest": _digest(table)}, fh, sort_keys=True)
                os.replace(tmp, path)
            except OSError:
                pass
        return table

    def _key(self, x) -> str:
        x = as_bitstring(x) if not isinstance(x, str) else BitString.from_str(x)
        if x.n > self.max_out:
            raise ValueError(f"|x|={x.n} exceeds the oracle's output cap {self.max_out}")
        return str(x)

    def k_complexity(self, x) -> int | None:
        """Exact ``K(x)``, or ``None`` when ``K(x) > L``."""
        return self.table.get(self._key(x))

    def k_exact(self, x) -> int | None:
        """Exact ``K(x)`` whenever it is determined: found, or pinned by the literal program."""
        key = self._key(x)
        k = self.table.get(key)
        if k is not None:
            return k
        lit = literal_cost(len(key))
        return lit if lit == self.L + 1 else None

    def k_cal(self, x) -> int | None:
        k = self.k_exact(x)
        return None if k is None else k - calibration(len(self._key(x)))

    def count_low_k(self, n: int, t: int) -> int:
        """Number of ``n``-bit strings with ``K <= t``."""
        if t > self.L:
            raise ValueError(f"t={t} exceeds the enumeration cap L={self.L}")
        if n > self.max_out:
            raise ValueError(f"n={n} exceeds the output cap {self.max_out}")
        return sum(1 for s, k in self.table.items() if len(s) == n and k <= t)

    def cross_check(self, L: int | None = None) -> list[tuple[str, int | None, int | None]]:
        """Disagreements between the search table and brute force over programs of ``<= L`` bits."""
        L = min(self.L, 16) if L is None else L
        brute = shortest_by_brute_force(L, self.max_out)
        mine = {s: k for s, k in self.table.items() if k <= L}
        keys = sorted(set(brute) | set(mine), key=lambda s: (len(s), s))
        return [(s, mine.get(s), brute.get(s)) for s in keys if mine.get(s) != brute.get(s)]


def _digest(table: dict) -> str:
    return hashlib.sha256(json.dumps(table, sort_keys=True).encode()).hexdigest()


def k_complexity(oracle: KolmogorovOracle, x) -> int | None:
    return oracle.k_complexity(x)


def count_low_k(oracle: KolmogorovOracle, n: int, t: int) -> int:
    return oracle.count_low_k(n, t)


def oracle_for(n: int, L: int) -> KolmogorovOracle:
    """Oracle able to settle exact complexities of ``n``-bit strings up to ``L``."""
    return KolmogorovOracle(L=L, max_out=n)


@dataclass(frozen=True)
class GapKInstance:
    """``YES`` when ``K <= s1``, ``NO`` when ``K >= s2``; anything else violates the promise."""

    x: BitString
    s1: float
    s2: float

    def __post_init__(self):
        object.__setattr__(self, "x", as_bitstring(self.x))
        if not 0 < self.s1 < self.s2 < self.x.n:
            raise ValueError(f"need 0 < s1 < s2 < |x|, got s1={self.s1}, s2={self.s2}, |x|={self.x.n}")

    def classify(self, k: float) -> str:
        if k <= self.s1:
            return "YES"
        if k >= self.s2:
            return "NO"
        return "PROMISE_VIOLATION"


def verify_counting(oracle: KolmogorovOracle, n_max: int, t_max: int, cross_L: int | None = None):
    """``#{x in {0,1}^n : K(x) <= t} <= 2^(t+1) - 1`` for every ``n <= n_max``, ``t <= t_max``.

    Counts come from the search table; ``cross_L`` additionally compares
    that table against brute force over programs of at most ``cross_L`` bits.
    """
    from ..lemmas import BoundCheckReport, Check

    if t_max > oracle.L or n_max > oracle.max_out:
        raise ValueError(f"counting range (n<={n_max}, t<={t_max}) exceeds {oracle!r}")
    rep = BoundCheckReport("counting", stats={"L": oracle.L, "n_max": n_max, "t_max": t_max})
    for n in range(1, n_max + 1):
        for t in range(t_max + 1):
            cnt = oracle.count_low_k(n, t)
            rep.checks.append(Check(f"n={n} t={t}", cnt, 2 ** (t + 1) - 1, 0,
                                    params={"n": n, "t": t}))
    if cross_L is not None:
        diff = oracle.cross_check(cross_L)
        rep.stats["cross_check_L"] = cross_L
        rep.stats["cross_check_disagreements"] = len(diff)
        rep.checks.append(Check("enumerators disagree", len(diff), 0, 0,
                                params={"examples": [list(map(str, r)) for r in diff[:5]]}))
    return rep
