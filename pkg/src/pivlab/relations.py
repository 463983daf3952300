"""
Stieltjes, charged-particle and Calogero relations, and the residue conditions
Res f^2 = ... = Res f^{2|m|} = 0 at a pole of residue m.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .errors import DomainError, NotInClassError, PreconditionError, UnsupportedInputError
from .exactalg import Poly, RatFunc, Z, as_rational, divides, gcd, is_squarefree
from .monodromy import (
    algebraic_laurent_window,
    candidate_integers,
    exact_pole_factors,
    find_poles,
    laurent_window,
    residues_vanish_exact,
    split_by_integer_value,
)
from .numfmt import is_negligible, magnitude, scalar
from .roots import GUARD_BITS, polynomial_roots
from .solutions import RESIDUE_TOL, class_poles


def _mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpmathify(x)


@dataclass
class ChargeConfig:
    """Points z_k with integer charges m_k in the field nu - mu z."""

    points: list
    charges: list
    nu: object = 0
    mu: object = 1
    bits: int = 256

    def __post_init__(self):
        if len(self.points) != len(self.charges):
            raise DomainError("points and charges differ in length")
        if any(int(m) != m or m == 0 for m in self.charges):
            raise DomainError("charges must be nonzero integers")
        with mpmath.workprec(self.bits + GUARD_BITS):
            self.points = [mpmath.mpc(_mp(p)) for p in self.points]
            for i in range(len(self.points)):
                for j in range(i + 1, len(self.points)):
                    if self.points[i] == self.points[j]:
                        raise DomainError(f"points {i} and {j} coincide")

    @classmethod
    def unit(cls, points, nu=0, mu=1, bits=256):
        return cls(list(points), [1] * len(points), nu, mu, bits)


def config_from_poly(p: Poly, bits: int = 256, charge: int = 1, nu=0, mu=1) -> ChargeConfig:
    """Zeros of a squarefree polynomial as a configuration of equal charges."""
    pts = [r.as_mpc() for r in polynomial_roots(p, bits)]
    return ChargeConfig(pts, [charge] * len(pts), nu, mu, bits)


def stieltjes_residual(cfg: ChargeConfig) -> list:
    """sum_{j != k} m_j/(z_k - z_j) + nu - mu z_k for every k."""
    with mpmath.workprec(cfg.bits + GUARD_BITS):
        nu, mu = _mp(cfg.nu), _mp(cfg.mu)
        out = []
        for k, zk in enumerate(cfg.points):
            acc = nu - mu * zk
            for j, zj in enumerate(cfg.points):
                if j != k:
                    acc += cfg.charges[j] / (zk - zj)
            out.append(acc)
        return out


def calogero_residual(cfg: ChargeConfig) -> list:
    """2 sum_{j != k} (z_k - z_j)^{-3} - z_k for unit charges, mu = 1, nu = 0."""
    if any(m != 1 for m in cfg.charges):
        raise UnsupportedInputError("Calogero relations are stated for unit charges only")
    if _mp(cfg.mu) != 1 or _mp(cfg.nu) != 0:
        raise UnsupportedInputError("Calogero relations are stated for mu = 1, nu = 0")
    with mpmath.workprec(cfg.bits + GUARD_BITS):
        out = []
        for k, zk in enumerate(cfg.points):
            acc = -zk
            for j, zj in enumerate(cfg.points):
                if j != k:
                    acc += 2 / (zk - zj) ** 3
            out.append(acc)
        return out


def max_norm(values: Sequence, bits: int = 256):
    with mpmath.workprec(bits + GUARD_BITS):
        return max((abs(v) for v in values), default=mpmath.mpf(0))


def stieltjes_exact_simple(A: Poly, B: Poly, nu=0, mu=1) -> bool:
    """Exact Res f^2 = 0 test for f = A'/A - B'/B + nu - mu z with simple zeros.

    At a simple root of A the constant Laurent term of f is
    A''/(2A') - B'/B + nu - mu z; at a simple root of B it is
    A'/A - B''/(2B') + nu - mu z.  Clearing denominators turns both into
    divisibility statements.
    """
    nu, mu = as_rational(nu), as_rational(mu)
    for name, p in (("A", A), ("B", B)):
        if p.is_zero():
            raise PreconditionError(f"{name} is the zero polynomial")
        if not is_squarefree(p):
            raise PreconditionError(
                f"{name} has repeated roots; use generalized_stieltjes_exact for higher residues")
    if gcd(A, B).degree > 0:
        raise PreconditionError("A and B share a root")
    field_ = Poly((nu, -mu)) * 2
    dA, dB = A.deriv(), B.deriv()
    cond_a = A.deriv(2) * B - dA * dB * 2 + field_ * dA * B
    cond_b = dA * dB * 2 - A * B.deriv(2) + field_ * A * dB
    return (A.degree < 1 or divides(A, cond_a)) and (B.degree < 1 or divides(B, cond_b))


@dataclass
class RelationReport:
    relation: str
    residuals: list
    passed: bool
    precision_bits: int
    exact_verdict: bool | None = None
    details: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "relation": self.relation,
            "residuals": self.residuals,
            "verdict": "pass" if self.passed else "fail",
            "precision_bits": self.precision_bits,
        }
        if self.exact_verdict is not None:
            out["exact_verdict"] = "pass" if self.exact_verdict else "fail"
        if self.details:
            out["details"] = self.details
        return out


def _series_mul(a, b, n, mul=lambda x, y: x * y, reduce=lambda x: x):
    out = []
    for k in range(n):
        acc = 0
        for i in range(max(0, k - len(b) + 1), min(k, len(a) - 1) + 1):
            acc = acc + mul(a[i], b[k - i])
        out.append(reduce(acc) if not isinstance(acc, int) else acc)
    return out


def even_power_residues(m, alphas, kmax, mul=lambda x, y: x * y, reduce=lambda x: x, one=1):
    """Res f^{2k}, k = 1..kmax, for f = m/t + alpha_0 + alpha_1 t + ...

    With g = t f = m + alpha_0 t + ..., Res f^{2k} is the t^{2k-1} coefficient of g^{2k}.
    """
    g = [m] + list(alphas)
    out = []
    power = [one]
    n = 2 * kmax
    for k in range(1, kmax + 1):
        power = _series_mul(power, g, n, mul, reduce)
        power = _series_mul(power, g, n, mul, reduce)
        out.append(power[2 * k - 1])
    return out


def generalized_stieltjes_check(f: RatFunc, bits: int = 256) -> RelationReport:
    """Res f^{2k} = 0 for k = 1..|m| at every pole (residue m) of f, from numeric Laurent windows."""
    poles = class_poles(f, bits)
    residuals, details, ok = [], [], True
    for pole, m in poles:
        km = abs(m)
        window = laurent_window(f, pole, -1, max(2 * km - 2, 0))
        alphas = [window[j] for j in range(0, 2 * km - 1)]
        with mpmath.workprec(bits + GUARD_BITS):
            res = even_power_residues(m, alphas, km)
        good = all(is_negligible(r, bits) for r in res)
        ok &= good
        residuals.extend(magnitude(r) for r in res)
        details.append({"location": scalar(pole.location, bits), "residue": m,
                        "even_power_residues": [magnitude(r) for r in res],
                        "verdict": "pass" if good else "fail"})
    return RelationReport("generalized_stieltjes", residuals, ok, bits, details=details)


def _int_candidate(val):
    m = int(mpmath.nint(mpmath.re(val)))
    return m if abs(val - m) < RESIDUE_TOL else None


def generalized_stieltjes_exact(f: RatFunc, bits: int = 128) -> RelationReport:
    """Exact form of :func:`generalized_stieltjes_check`, decided in Q[x]/(q) per denominator factor."""
    poly = f.polynomial_part()
    if poly.degree > 1:
        raise NotInClassError(f"polynomial part {poly} has degree > 1")
    details, ok = [], True
    for factor, order in exact_pole_factors(f):
        if order != 1:
            raise NotInClassError(f"pole of order {order}; the class admits only simple poles")
        residue = algebraic_laurent_window(f, factor, 1, -1, -1)[-1]
        cands = candidate_integers(residue, factor, _int_candidate, bits)
        parts, rest = split_by_integer_value(residue, factor, cands)
        if rest.degree > 0:
            raise NotInClassError(f"non-integer residues at the roots of {rest}")
        for m, q in parts:
            km = abs(m)
            window = algebraic_laurent_window(f, q, 1, -1, max(2 * km - 2, 0))
            alphas = [window[j] for j in range(0, 2 * km - 1)]
            res = even_power_residues(Poly.const(m), alphas, km,
                                      mul=lambda a, b: a * b, reduce=lambda a: a % q, one=Poly.const(1))
            res = [r % q for r in res]
            good = all(r.is_zero() for r in res)
            ok &= good
            details.append({"factor": str(q), "degree": q.degree, "residue": m,
                            "even_power_residues": ["0" if r.is_zero() else str(r) for r in res],
                            "verdict": "pass" if good else "fail"})
    return RelationReport("generalized_stieltjes", [d["verdict"] for d in details], ok, 0,
                          exact_verdict=ok, details=details)


def theorem1_check(w: RatFunc, bits: int = 256) -> RelationReport:
    """Res (z + w)^2 = 0 at every pole of w: numeric residues plus an exact verdict."""
    g = (RatFunc.z() + w) ** 2
    residuals, details, ok = [], [], True
    for pole in find_poles(g, bits):
        r = laurent_window(g, pole, -1, -1)[-1]
        good = is_negligible(r, bits)
        ok &= good
        residuals.append(magnitude(r))
        details.append({"location": scalar(pole.location, bits), "residue": scalar(r, bits),
                        "verdict": "pass" if good else "fail"})
    exact = residues_vanish_exact(g)
    return RelationReport("theorem1", residuals, ok, bits, exact_verdict=exact, details=details)


def residual_report(relation: str, cfg: ChargeConfig, values: list) -> RelationReport:
    ok = all(is_negligible(v, cfg.bits) for v in values)
    details = [{"location": scalar(z, cfg.bits), "residual": magnitude(v)} for z, v in zip(cfg.points, values)]
    return RelationReport(relation, [magnitude(v) for v in values], ok, cfg.bits, details=details)
