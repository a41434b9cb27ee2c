"""Fixed irreducible moduli for GF(2^n), 1 <= n <= 24.

Each entry includes the ``x^n`` term, e.g. ``0b1011`` is ``x^3 + x + 1``.
The table is part of the hash serialization contract: changing an entry
changes the meaning of every serialized hash function of that width.
"""

MODULI = {
    1: 0b11,                    # x + 1
    2: 0b111,                   # x^2 + x + 1
    3: 0b1011,                  # x^3 + x + 1
    4: 0b10011,                 # x^4 + x + 1
    5: 0b100101,                # x^5 + x^2 + 1
    6: 0b1000011,               # x^6 + x + 1
    7: 0b10000011,              # x^7 + x + 1
    8: 0b100011011,             # x^8 + x^4 + x^3 + x + 1
    9: 0x211,                   # x^9 + x^4 + 1
    10: 0x409,                  # x^10 + x^3 + 1
    11: 0x805,                  # x^11 + x^2 + 1
    12: 0x1009,                 # x^12 + x^3 + 1
    13: 0x201B,                 # x^13 + x^4 + x^3 + x + 1
    14: 0x4021,                 # x^14 + x^5 + 1
    15: 0x8003,                 # x^15 + x + 1
    16: 0x1002B,                # x^16 + x^5 + x^3 + x + 1
    17: 0x20009,                # x^17 + x^3 + 1
    18: 0x40081,                # x^18 + x^7 + 1
    19: 0x80027,                # x^19 + x^5 + x^2 + x + 1
    20: 0x100009,               # x^20 + x^3 + 1
    21: 0x200005,               # x^21 + x^2 + 1
    22: 0x400003,               # x^22 + x + 1
    23: 0x800021,               # x^23 + x^5 + 1
    24: 0x100001B,              # x^24 + x^4 + x^3 + x + 1
}


def poly_mod(a: int, m: int) -> int:
    """Remainder of carry-less division of ``a`` by ``m``."""
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def is_irreducible(m: int) -> bool:
    """Trial division by every polynomial of degree <= deg(m)/2."""
    deg = m.bit_length() - 1
    if deg <= 0:
        return False
    for d in range(2, 1 << (deg // 2 + 1)):
        if poly_mod(m, d) == 0:
            return False
    return True
