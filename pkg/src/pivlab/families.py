"""Hermite polynomials, Adler-Moser polynomials and their Wronskians."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import ArityError, DomainError
from .exactalg import ExpPoly, Poly, Z, as_rational, wronskian


@dataclass(frozen=True)
class HermiteSequence:
    """Distinct positive Hermite indices, stored ascending."""

    ks: tuple[int, ...]

    def __init__(self, ks: Iterable[int]):
        ks = tuple(sorted(int(k) for k in ks))
        if any(k < 1 for k in ks):
            raise DomainError(f"Hermite indices must be positive, got {ks}")
        if len(set(ks)) != len(ks):
            raise DomainError(f"Hermite indices must be distinct, got {ks}")
        object.__setattr__(self, "ks", ks)

    def __len__(self):
        return len(self.ks)

    def __iter__(self):
        return iter(self.ks)

    def with_index(self, k: int) -> "HermiteSequence":
        if k in self.ks:
            raise DomainError(f"index {k} already present in {self.ks}")
        return HermiteSequence(self.ks + (k,))


@dataclass(frozen=True)
class TauVector:
    taus: tuple[Fraction, ...]

    def __init__(self, taus: Iterable = ()):
        object.__setattr__(self, "taus", tuple(as_rational(t) for t in taus))

    def __len__(self):
        return len(self.taus)

    def prefix(self, k: int) -> "TauVector":
        return TauVector(self.taus[:k])


def _taus(taus) -> TauVector:
    return taus if isinstance(taus, TauVector) else TauVector(taus)


@lru_cache(maxsize=None)
def hermite(n: int) -> Poly:
    """Physicists' Hermite polynomial H_n via H_{n+1} = 2z H_n - 2n H_{n-1}."""
    if n < 0:
        raise DomainError("Hermite index must be nonnegative")
    if n == 0:
        return Poly.const(1)
    prev, cur = Poly.const(1), Z * 2
    for k in range(1, n):
        prev, cur = cur, Z * 2 * cur - prev * (2 * k)
    return cur


def adler_moser(n: int, taus=()) -> Poly:
    """P_n with P_1 = z and P_k'' = P_{k-1}.

    Each double integration adds no linear term and the constant tau_{k-1},
    so P_2 = z^3/6 + tau_1 and P_3 = z^5/120 + tau_1 z^2/2 + tau_2.
    """
    taus = _taus(taus)
    if n < 1:
        raise DomainError("Adler-Moser index must be positive")
    if len(taus) != n - 1:
        raise ArityError(f"P_{n} needs {n - 1} tau parameters, got {len(taus)}")
    p = Z
    for k in range(2, n + 1):
        p = p.integrate().integrate(taus.taus[k - 2])
    return p


def adler_moser_wronskian(n: int, taus=()) -> Poly:
    """W_n = W(P_1, ..., P_n); W_0 = 1."""
    taus = _taus(taus)
    if n == 0:
        return Poly.const(1)
    if len(taus) != n - 1:
        raise ArityError(f"W_{n} needs {n - 1} tau parameters, got {len(taus)}")
    ps = [adler_moser(k, taus.prefix(k - 1)) for k in range(1, n + 1)]
    return wronskian(ps)


def hermite_wronskian(ks) -> Poly:
    """W(H_{k_1}, ..., H_{k_n}) with ascending indices; the empty Wronskian is 1."""
    ks = ks if isinstance(ks, HermiteSequence) else HermiteSequence(ks)
    if not ks.ks:
        return Poly.const(1)
    return _hermite_wronskian_cached(ks.ks)


@lru_cache(maxsize=512)
def _hermite_wronskian_cached(ks: tuple[int, ...]) -> Poly:
    return wronskian([hermite(k) for k in ks])


def hermite_wronskian_degree(ks: Sequence[int]) -> int:
    n = len(ks)
    return sum(ks) - n * (n - 1) // 2


def exp_augmented_wronskian(n: int, taus, nu) -> ExpPoly:
    """W(P_1, ..., P_n, e^{nu z}) as e^{nu z} Q(z)."""
    nu = as_rational(nu)
    if nu == 0:
        raise DomainError("nu = 0 makes the exponential column polynomial; use adler_moser_wronskian")
    taus = _taus(taus)
    if len(taus) != max(n - 1, 0):
        raise ArityError(f"n = {n} needs {max(n - 1, 0)} tau parameters, got {len(taus)}")
    cols = [adler_moser(k, taus.prefix(k - 1)) for k in range(1, n + 1)]
    return wronskian(cols + [ExpPoly(nu, Poly.const(1))])
