"""Closed-form irrep multiplicities, kept independent of the numerical basis code."""
from fractions import Fraction
from math import comb


def _c(n, k):
    return comb(n, k) if 0 <= k <= n else 0


def xxx_multiplicity(L: int, S) -> int:
    """Copies of total spin S in L spin-1/2 sites: C(L, L/2 - S) - C(L, L/2 - S - 1)."""
    S = Fraction(S)
    k = Fraction(L, 2) - S
    if k.denominator != 1 or k < 0:
        return 0
    k = int(k)
    return _c(L, k) - _c(L, k - 1)


def xxz_multiplicity(L: int, absm, parity: int | None = None) -> int:
    """Copies of the XXZ irrep with |S_z| = absm.

    Doublets (absm > 0) come once per pair of opposite magnetizations,
    C(L, L/2 - absm). At absm = 0 the C(L, L/2) states split evenly between
    the two Pi_x parities.
    """
    absm = Fraction(absm)
    k = Fraction(L, 2) - absm
    if k.denominator != 1 or k < 0:
        return 0
    n = _c(L, int(k))
    if absm == 0:
        if parity not in (1, -1):
            raise ValueError("the |m| = 0 sector needs a parity of +1 or -1")
        return n // 2
    return n


def xxx_sectors(L: int) -> list:
    """Allowed total spins, descending."""
    top = Fraction(L, 2)
    return [top - k for k in range(L // 2 + 1)]


def xxz_sectors(L: int) -> list:
    """(absm, parity) pairs, descending |m|, parity +1 before -1."""
    out = [(Fraction(L, 2) - k, None) for k in range((L + 1) // 2)]
    if L % 2 == 0:
        out += [(Fraction(0), 1), (Fraction(0), -1)]
    return out
