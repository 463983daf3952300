"""
Multiprecision complex roots of squarefree rational polynomials.

Simultaneous Aberth-Ehrlich iteration gives all roots at a modest precision,
then each root is polished by Newton's method with precision doubling.  Every
returned root carries an inclusion radius n*|p(x)/p'(x)|: the closed disk of
that radius about x contains a root of p.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import DomainError, PrecisionError
from .exactalg import Poly

GUARD_BITS = 32
_ABERTH_PREC = 96


@dataclass(frozen=True)
class Root:
    value: object  # mpc, or Fraction when the root is rational and confirmed exactly
    radius: object  # mpf inclusion radius (0 for exact roots)
    bits: int

    @property
    def is_exact(self) -> bool:
        return isinstance(self.value, Fraction)

    def as_mpc(self):
        if isinstance(self.value, Fraction):
            return mpmath.mpc(mpmath.mpf(self.value.numerator) / self.value.denominator)
        return self.value


def _mp_coeffs(p: Poly):
    return [mpmath.mpf(c.numerator) / c.denominator for c in p.coeffs]


def _horner2(cs, x):
    """p(x), p'(x) for coefficient list cs (low to high)."""
    v, d = mpmath.mpc(0), mpmath.mpc(0)
    for c in reversed(cs):
        d = d * x + v
        v = v * x + c
    return v, d


def _aberth(cs, n, max_iter=800):
    # initial guesses on a circle of the Fujiwara radius scale, rotated off symmetry axes
    lc = abs(cs[-1])
    radius = mpmath.mpf(0)
    for k in range(n):
        radius = max(radius, (abs(cs[k]) / lc) ** (mpmath.mpf(1) / (n - k)))
    radius = max(radius, mpmath.mpf("1e-3"))
    zs = [radius * mpmath.expj(2 * mpmath.pi * k / n + mpmath.mpf("0.4")) for k in range(n)]
    tol = mpmath.mpf(2) ** (-(mpmath.mp.prec - 12))
    for _ in range(max_iter):
        moved = mpmath.mpf(0)
        for k in range(n):
            v, d = _horner2(cs, zs[k])
            if v == 0:
                continue
            ratio = v / d if d != 0 else mpmath.mpc(1e-3)
            s = mpmath.mpc(0)
            for j in range(n):
                if j != k:
                    diff = zs[k] - zs[j]
                    if diff != 0:
                        s += 1 / diff
            denom = 1 - ratio * s
            step = ratio / denom if denom != 0 else ratio
            zs[k] -= step
            moved = max(moved, abs(step) / max(1, abs(zs[k])))
        if moved < tol:
            break
    return zs


def _newton_polish(p: Poly, x, bits: int, max_steps=200):
    """Refine one simple root to ``bits`` with precision doubling."""
    prec = _ABERTH_PREC
    steps = 0
    while True:
        prec = min(2 * prec, bits)
        with mpmath.workprec(prec):
            cs = _mp_coeffs(p)
            x = mpmath.mpc(x)
            converged = False
            for _ in range(8):
                v, d = _horner2(cs, x)
                steps += 1
                if d == 0:
                    raise PrecisionError("vanishing derivative during Newton refinement")
                dx = v / d
                x -= dx
                if abs(dx) <= mpmath.mpf(2) ** (-(prec - 4)) * max(1, abs(x)):
                    converged = True
                    break
                if steps > max_steps:
                    break
        if prec >= bits:
            # rounding noise in p(x) may stall the steps inside the guard bits
            if not converged and abs(dx) > mpmath.mpf(2) ** (-(prec - GUARD_BITS)) * max(1, abs(x)):
                raise PrecisionError(f"Newton refinement did not converge near {mpmath.nstr(x, 15)}")
            return x


def _exact_rational_root(p: Poly, x) -> Fraction | None:
    """If x is numerically close to a rational root of p, return it exactly."""
    if abs(mpmath.im(x)) > mpmath.mpf(2) ** -20 * max(1, abs(x)):
        return None
    ints = p.integer_primitive()
    lead = abs(ints[-1])
    cand = Fraction(int(mpmath.nint(mpmath.re(x) * lead)), lead)
    if p(cand) == 0:
        return cand
    return None


def polynomial_roots(p: Poly, bits: int = 256) -> list[Root]:
    """All roots of a squarefree polynomial to ``bits`` of precision.

    Raises PrecisionError when the iteration fails or two roots are not
    separated (closer than 2^(-bits/2) or overlapping inclusion disks), which
    is also how a non-squarefree input shows up.
    """
    n = p.degree
    if n < 1:
        return []
    wp = bits + GUARD_BITS
    if n == 1:
        r = -p.coeffs[0] / p.coeffs[1]
        return [Root(r, mpmath.mpf(0), bits)]
    with mpmath.workprec(_ABERTH_PREC):
        approx = _aberth(_mp_coeffs(p), n)
    roots = []
    with mpmath.workprec(wp):
        cs = _mp_coeffs(p)
        for x0 in approx:
            x = _newton_polish(p, x0, wp)
            v, d = _horner2(cs, x)
            radius = n * abs(v / d) if d != 0 else mpmath.inf
            exact = _exact_rational_root(p, x)
            if exact is not None:
                roots.append(Root(exact, mpmath.mpf(0), bits))
            else:
                roots.append(Root(x, radius, bits))
        sep = mpmath.mpf(2) ** (-bits / 2)
        for i in range(n):
            for j in range(i + 1, n):
                dist = abs(roots[i].as_mpc() - roots[j].as_mpc())
                if dist < sep or dist <= roots[i].radius + roots[j].radius:
                    raise PrecisionError(
                        f"roots {i} and {j} not separated at {bits} bits "
                        f"(distance {mpmath.nstr(dist, 5)}); input may not be squarefree")
    return sorted(roots, key=_root_key)


def _root_key(r: Root):
    x = r.as_mpc()
    return (float(mpmath.re(x)), float(mpmath.im(x)))


def roots_with_multiplicity(p: Poly, bits: int = 256) -> list[tuple[Root, int]]:
    """Roots of an arbitrary polynomial, multiplicities from an exact squarefree decomposition."""
    from .exactalg import squarefree_decomposition

    if p.is_zero():
        raise DomainError("roots of the zero polynomial")
    out = []
    for factor, mult in squarefree_decomposition(p):
        out.extend((r, mult) for r in polynomial_roots(factor, bits))
    return out
