"""
Poles, Laurent windows and the local trivial-monodromy test for -psi'' + u psi = lambda psi.

At a pole z0 of u the Frobenius exponents solve e(e + 1) = c_{-2}, so
c_{-2} = m(m+1) with integer m >= 0 is necessary; logarithms are absent for
every lambda iff in addition c_{2k-1} = 0 for k = 0..m.

Two routes are provided.  The numeric route locates poles in multiprecision
and expands there.  The exact route expands at a *generic* root x of a
squarefree denominator factor q, i.e. in the ring Q[x]/(q): a coefficient
vanishes at every root of q iff its representative is divisible by q.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import mpmath

from .errors import PrecisionError
from .exactalg import Poly, RatFunc, gcd, inverse_mod, squarefree_decomposition, taylor_shift
from .numfmt import is_negligible, magnitude, scalar, tolerance
from .roots import GUARD_BITS, polynomial_roots


@dataclass
class PoleDatum:
    location: object  # Fraction (exact) or mpc
    order: int
    factor: Poly  # squarefree factor of the denominator that vanishes here
    bits: int = 256
    radius: object = 0
    laurent: dict = field(default_factory=dict)
    residue_m: int | None = None

    @property
    def is_exact(self) -> bool:
        return isinstance(self.location, Fraction)

    def location_mpc(self):
        if self.is_exact:
            return mpmath.mpc(mpmath.mpf(self.location.numerator) / self.location.denominator)
        return self.location


def find_poles(f: RatFunc, bits: int = 256) -> list[PoleDatum]:
    """All poles of f with orders; multiplicities come from the exact squarefree decomposition."""
    poles = []
    for factor, mult in squarefree_decomposition(f.den):
        for r in polynomial_roots(factor, bits):
            poles.append(PoleDatum(r.value, mult, factor, bits, r.radius))
    return poles


# --- series helpers -----------------------------------------------------------

def _series_div(num: list, den: list, count: int, mul: Callable, inv0) -> list:
    """First ``count`` coefficients of num/den given inv0 = 1/den[0]."""
    out = []
    for j in range(count):
        acc = num[j] if j < len(num) else 0
        for i in range(1, min(j, len(den) - 1) + 1):
            acc = acc - mul(den[i], out[j - i])
        out.append(mul(acc, inv0))
    return out


def laurent_window(f: RatFunc, pole: PoleDatum, lo: int, hi: int) -> dict:
    """Coefficients c_lo..c_hi of f at the pole: exact at rational poles, multiprecision otherwise."""
    k = pole.order
    count = hi + k + 1
    if count <= 0:
        return {j: 0 for j in range(lo, hi + 1)}
    if pole.is_exact:
        ns = taylor_shift(f.num, pole.location)
        ds = taylor_shift(f.den, pole.location)[k:]
        if any(ds_ for ds_ in taylor_shift(f.den, pole.location)[:k]) or not ds or ds[0] == 0:
            raise PrecisionError("pole order does not match the denominator expansion")
        s = _series_div(list(ns), list(ds), count, lambda a, b: a * b, 1 / ds[0])
        zero = Fraction(0)
    else:
        wp = pole.bits + GUARD_BITS
        with mpmath.workprec(wp):
            full = taylor_shift(f.den, pole.location, wp)
            ns = taylor_shift(f.num, pole.location, wp)
            ds = full[k:]
            scale = max(abs(c) for c in full)
            if not ds or abs(ds[0]) <= scale * mpmath.mpf(2) ** (-wp / 2):
                raise PrecisionError("leading deflated denominator coefficient lost in rounding")
            s = _series_div(list(ns), list(ds), count, lambda a, b: a * b, 1 / ds[0])
        zero = mpmath.mpc(0)
    out = {}
    for j in range(lo, hi + 1):
        idx = j + k
        out[j] = s[idx] if idx >= 0 else zero
    pole.laurent.update(out)
    return out


def _taylor_mod(p: Poly, q: Poly, count: int) -> list[Poly]:
    """p(x + t) = sum_j a_j(x) t^j with a_j = p^{(j)}(x)/j! reduced mod q."""
    out, d, fact = [], p, 1
    for j in range(count):
        if j:
            d = d.deriv()
            fact *= j
        out.append((d / fact) % q if not d.is_zero() else Poly())
    return out


def algebraic_laurent_window(f: RatFunc, factor: Poly, order: int, lo: int, hi: int) -> dict:
    """Laurent coefficients of f at a generic root x of ``factor`` as elements of Q[x]/(factor).

    ``factor`` must be squarefree with every root a pole of exactly ``order``.
    """
    count = hi + order + 1
    if count <= 0:
        return {j: Poly() for j in range(lo, hi + 1)}
    ns = _taylor_mod(f.num, factor, count)
    dfull = _taylor_mod(f.den, factor, count + order)
    if any(not c.is_zero() for c in dfull[:order]):
        raise PrecisionError("factor does not vanish to the stated order in the denominator")
    ds = dfull[order:]
    inv0 = inverse_mod(ds[0], factor)
    s = _series_div(ns, ds, count, lambda a, b: (a * b) % factor, inv0)
    return {j: (s[j + order] if j + order >= 0 else Poly()) for j in range(lo, hi + 1)}


def exact_pole_factors(f: RatFunc) -> list[tuple[Poly, int]]:
    return squarefree_decomposition(f.den)


def split_by_integer_value(element: Poly, factor: Poly, candidates, transform=lambda m: m):
    """Split ``factor`` into gcd(factor, element - transform(m)) over integer candidates m.

    Returns (parts, leftover) where leftover collects roots at which element is
    not transform(m) for any candidate.
    """
    parts, rest = [], factor
    for m in sorted(set(candidates)):
        g = gcd(rest, element - Poly.const(transform(m)))
        if g.degree > 0:
            parts.append((m, g))
            rest = rest.exact_div(g)
    return parts, rest


def candidate_integers(element: Poly, factor: Poly, solve: Callable, bits: int = 128) -> list[int]:
    """Integers suggested by evaluating ``element`` numerically at each root of ``factor``."""
    out = set()
    with mpmath.workprec(bits + GUARD_BITS):
        for r in polynomial_roots(factor, bits):
            val = element.eval_mp(r.as_mpc())
            cand = solve(val)
            if cand is not None:
                out.add(cand)
    return sorted(out)


# --- trivial monodromy ----------------------------------------------------------

def _infer_m(c_minus2):
    """Nonnegative integer m nearest to a solution of m(m+1) = c_{-2}."""
    disc = 1 + 4 * (mpmath.mpc(c_minus2) if not isinstance(c_minus2, Fraction) else
                    mpmath.mpf(c_minus2.numerator) / c_minus2.denominator)
    root = (-1 + mpmath.sqrt(disc)) / 2
    m = int(mpmath.nint(mpmath.re(root)))
    return max(m, 0)


@dataclass
class PoleVerdict:
    location: dict
    order: int
    c_minus2: str
    m: int | None
    odd_coefficients: list[str]
    indicial_exponents: tuple[int, int] | None
    passed: bool
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "location": self.location,
            "order": self.order,
            "c_minus2": self.c_minus2,
            "m": self.m,
            "odd_coefficients": self.odd_coefficients,
            "indicial_exponents": list(self.indicial_exponents) if self.indicial_exponents else None,
            "verdict": "pass" if self.passed else "fail",
            "reason": self.reason,
        }


@dataclass
class MonodromyReport:
    poles: list[PoleVerdict]
    passed: bool
    precision_bits: int
    exact: bool = False

    def to_dict(self) -> dict:
        return {
            "relation": "trivial_monodromy",
            "exact": self.exact,
            "precision_bits": self.precision_bits,
            "verdict": "pass" if self.passed else "fail",
            "poles": [p.to_dict() for p in self.poles],
        }


def trivial_monodromy_report(u: RatFunc, bits: int = 256) -> MonodromyReport:
    """Check c_{-2} = m(m+1) and c_{2k-1} = 0 (k = 0..m) at every pole of u numerically."""
    verdicts = []
    for pole in find_poles(u, bits):
        loc = scalar(pole.location, bits)
        if pole.order > 2:
            verdicts.append(PoleVerdict(loc, pole.order, "", None, [], None, False,
                                        f"pole of order {pole.order} > 2"))
            continue
        c = laurent_window(u, pole, -2, -2)[-2]
        m = _infer_m(c)
        if not is_negligible(c - m * (m + 1), bits):
            verdicts.append(PoleVerdict(loc, pole.order, magnitude(c), None, [], None, False,
                                        f"c_-2 = {mpmath.nstr(c, 12) if not isinstance(c, Fraction) else c} "
                                        f"is not m(m+1) for an integer m >= 0"))
            continue
        window = laurent_window(u, pole, -2, 2 * m - 1)
        odd = [window[2 * k - 1] for k in range(m + 1)]
        ok = all(is_negligible(x, bits) for x in odd)
        bad = [2 * k - 1 for k, x in enumerate(odd) if not is_negligible(x, bits)]
        pole.residue_m = m
        verdicts.append(PoleVerdict(loc, pole.order, magnitude(c), m, [magnitude(x) for x in odd],
                                    (-m, m + 1), ok,
                                    "" if ok else f"nonzero c_{bad[0]}"))
    return MonodromyReport(verdicts, all(v.passed for v in verdicts), bits)


def _c2_candidate(val):
    m = _infer_m(val)
    return m


def trivial_monodromy_exact(u: RatFunc, bits: int = 128) -> MonodromyReport:
    """Exact version: conditions certified in Q[x]/(q) for each squarefree denominator factor q.

    Numerics only propose the integer m at each root; the split of q by m and
    every vanishing condition are decided by exact polynomial division.
    """
    verdicts = []
    for factor, order in exact_pole_factors(u):
        label = {"factor": str(factor), "degree": factor.degree}
        if order > 2:
            verdicts.append(PoleVerdict(label, order, "", None, [], None, False,
                                        f"pole of order {order} > 2"))
            continue
        c2 = algebraic_laurent_window(u, factor, order, -2, -2)[-2]
        cands = candidate_integers(c2, factor, _c2_candidate, bits)
        parts, rest = split_by_integer_value(c2, factor, cands, lambda m: m * (m + 1))
        if rest.degree > 0:
            verdicts.append(PoleVerdict({"factor": str(rest), "degree": rest.degree}, order, str(c2 % rest),
                                        None, [], None, False, "c_-2 is not m(m+1) for an integer m >= 0"))
        for m, q in parts:
            window = algebraic_laurent_window(u, q, order, -2, 2 * m - 1)
            odd = [window[2 * k - 1] for k in range(m + 1)]
            bad = [2 * k - 1 for k, x in enumerate(odd) if not x.is_zero()]
            verdicts.append(PoleVerdict({"factor": str(q), "degree": q.degree}, order, str(m * (m + 1)), m,
                                        ["0" if x.is_zero() else str(x) for x in odd], (-m, m + 1),
                                        not bad, "" if not bad else f"nonzero c_{bad[0]}"))
    return MonodromyReport(verdicts, all(v.passed for v in verdicts), bits, exact=True)


def potential_from_wronskian(w: Poly, harmonic: bool = False) -> RatFunc:
    """-2 (log w)'' (+ z^2 when ``harmonic``)."""
    logd = RatFunc(w.deriv(), w)
    u = logd.deriv() * -2
    if harmonic:
        u = u + RatFunc(Poly((0, 0, 1)))
    return u


def residues_vanish_exact(g: RatFunc) -> bool:
    """True iff every residue of g is zero, decided exactly."""
    for factor, order in exact_pole_factors(g):
        if not algebraic_laurent_window(g, factor, order, -1, -1)[-1].is_zero():
            return False
    return True


def tolerance_for(bits: int):
    return tolerance(bits)
