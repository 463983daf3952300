"""Precision-tagged decimal rendering for reports."""
from __future__ import annotations

from fractions import Fraction

import mpmath

from .exactalg import rational_to_str


def digits_for(bits: int) -> int:
    return max(15, int(bits * 0.30103))


def scalar(x, bits: int) -> dict:
    """A location or coefficient as {"re", "im", "bits"} or {"exact": "p/q"}."""
    if isinstance(x, Fraction):
        return {"exact": rational_to_str(x)}
    if isinstance(x, int):
        return {"exact": f"{x}/1"}
    d = digits_for(bits)
    with mpmath.workprec(bits + 16):
        x = mpmath.mpc(x)
        return {"re": mpmath.nstr(x.real, d), "im": mpmath.nstr(x.imag, d), "bits": bits}


def magnitude(x, sig: int = 12) -> str:
    if isinstance(x, Fraction):
        return rational_to_str(abs(x)) if x.denominator != 1 else str(abs(x.numerator))
    with mpmath.workprec(max(mpmath.mp.prec, 4 * sig)):
        return mpmath.nstr(abs(x), sig)


def tolerance(bits: int):
    """Pass threshold 10^(-bits/4) tied to the working precision."""
    return mpmath.mpf(10) ** (-mpmath.mpf(bits) / 4)


def is_negligible(x, bits: int) -> bool:
    """Exact values must vanish; numeric values must fall below the tolerance."""
    if isinstance(x, (Fraction, int)):
        return x == 0
    return abs(x) < tolerance(bits)
