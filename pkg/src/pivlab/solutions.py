"""Rational solutions f of the PIV hierarchy, w = -(z + f) and u = f' + f^2."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .errors import DegenerateFamilyError, DomainError, NotInClassError
from .exactalg import Poly, RatFunc, Z, as_rational, log_derivative, rational_to_str
from .families import (
    HermiteSequence,
    TauVector,
    adler_moser_wronskian,
    exp_augmented_wronskian,
    hermite_wronskian,
)
from .monodromy import find_poles
from .numfmt import scalar
from .roots import GUARD_BITS

MODES = ("adler_moser", "exp", "hermite")


@dataclass(frozen=True)
class SolutionSpec:
    """One of the three closed-form families.

    adler_moser: f = (log W_{n+d}/W_n)' with direction d = +-1
    exp:         f = (log W(P_1..P_n, e^{nu z})/W_n)'
    hermite:     f = (log W(ks + k_extra)/W(ks))' - z
    """

    mode: str
    n: int = 0
    direction: int = 1
    nu: Fraction = Fraction(0)
    taus: TauVector = field(default_factory=TauVector)
    ks: HermiteSequence = field(default_factory=lambda: HermiteSequence(()))
    k_extra: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not isinstance(self.taus, TauVector):
            object.__setattr__(self, "taus", TauVector(self.taus))
        if not isinstance(self.ks, HermiteSequence):
            object.__setattr__(self, "ks", HermiteSequence(self.ks))
        object.__setattr__(self, "nu", as_rational(self.nu))
        if self.mode == "adler_moser" and self.direction not in (1, -1):
            raise DomainError("direction must be +1 or -1")
        if self.mode == "hermite":
            if self.k_extra < 1:
                raise DomainError("k_extra must be a positive integer")
            if self.k_extra in self.ks.ks:
                raise DomainError(f"k_extra = {self.k_extra} already in ks = {self.ks.ks}")

    @classmethod
    def adler_moser_step(cls, n: int, direction: int, taus=()):
        return cls("adler_moser", n=n, direction=direction, taus=TauVector(taus))

    @classmethod
    def exp_mode(cls, n: int, nu, taus=()):
        return cls("exp", n=n, nu=as_rational(nu), taus=TauVector(taus))

    @classmethod
    def hermite_mode(cls, ks, k_extra: int):
        return cls("hermite", ks=HermiteSequence(ks), k_extra=k_extra)

    def to_json(self) -> dict:
        if self.mode == "hermite":
            return {"mode": "hermite", "ks": list(self.ks.ks), "k_extra": self.k_extra}
        out = {"mode": self.mode, "n": self.n, "taus": [rational_to_str(t) for t in self.taus.taus]}
        if self.mode == "adler_moser":
            out["direction"] = self.direction
        else:
            out["nu"] = rational_to_str(self.nu)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "SolutionSpec":
        mode = data.get("mode")
        if mode == "hermite":
            return cls.hermite_mode(data.get("ks", []), int(data["k_extra"]))
        if mode == "adler_moser":
            return cls.adler_moser_step(int(data["n"]), int(data.get("direction", 1)), data.get("taus", []))
        if mode == "exp":
            return cls.exp_mode(int(data["n"]), data["nu"], data.get("taus", []))
        raise DomainError(f"unknown mode {mode!r}")


def _nonzero(w: Poly, what: str) -> Poly:
    if w.is_zero():
        raise DegenerateFamilyError(f"{what} vanishes identically")
    return w


def build_f(spec: SolutionSpec) -> RatFunc:
    if spec.mode == "adler_moser":
        hi = spec.n + spec.direction
        if hi < 0:
            raise DomainError("W_{n-1} with n = 0 is undefined")
        need = max(spec.n, hi) - 1
        taus = spec.taus
        if len(taus) < need:
            raise DomainError(f"mode needs {need} tau parameters, got {len(taus)}")
        w_n = _nonzero(adler_moser_wronskian(spec.n, taus.prefix(max(spec.n - 1, 0))), f"W_{spec.n}")
        w_next = _nonzero(adler_moser_wronskian(hi, taus.prefix(max(hi - 1, 0))), f"W_{hi}")
        return log_derivative(w_next) - log_derivative(w_n)
    if spec.mode == "exp":
        w_n = _nonzero(adler_moser_wronskian(spec.n, spec.taus.prefix(max(spec.n - 1, 0))), f"W_{spec.n}")
        q = _nonzero(exp_augmented_wronskian(spec.n, spec.taus.prefix(max(spec.n - 1, 0)), spec.nu).poly,
                     "augmented Wronskian")
        return RatFunc.const(spec.nu) + log_derivative(q) - log_derivative(w_n)
    upper = hermite_wronskian(spec.ks.with_index(spec.k_extra))
    lower = hermite_wronskian(spec.ks)
    return log_derivative(upper) - log_derivative(lower) - RatFunc.z()


def piv_w_from_f(f: RatFunc) -> RatFunc:
    return -(RatFunc.z() + f)


def potential_from_f(f: RatFunc) -> RatFunc:
    return f.deriv() + f * f


def partner_potential(f: RatFunc) -> RatFunc:
    """f^2 - f', the potential after one Darboux step."""
    return f * f - f.deriv()


@dataclass
class PartialFractionData:
    """f = sum m_i/(z - z_i) + nu - mu z."""

    poles: list  # (location, m) with location Fraction or mpc
    nu: Fraction
    mu: Fraction
    bits: int = 256

    def to_json(self) -> dict:
        return {
            "poles": [{"location": scalar(loc, self.bits), "residue": m} for loc, m in self.poles],
            "nu": rational_to_str(self.nu),
            "mu": rational_to_str(self.mu),
            "precision_bits": self.bits,
        }

    def rebuild(self) -> RatFunc:
        """Exact reconstruction; every pole location must be rational."""
        out = RatFunc(Poly((self.nu, -self.mu)))
        for loc, m in self.poles:
            if not isinstance(loc, Fraction):
                raise DomainError("exact rebuild needs rational pole locations")
            out = out + RatFunc(Poly.const(m), Poly((-loc, 1)))
        return out

    def evaluate(self, z):
        """Numeric value of the partial-fraction form at z."""
        acc = mpmath.mpf(self.nu.numerator) / self.nu.denominator
        acc -= mpmath.mpf(self.mu.numerator) / self.mu.denominator * z
        for loc, m in self.poles:
            loc = mpmath.mpf(loc.numerator) / loc.denominator if isinstance(loc, Fraction) else loc
            acc += m / (z - loc)
        return acc


RESIDUE_TOL = mpmath.mpf("1e-10")


def class_poles(f: RatFunc, bits: int = 256) -> list:
    """Poles of f paired with their integer residues; NotInClassError outside the class."""
    poly = f.polynomial_part()
    if poly.degree > 1:
        raise NotInClassError(f"polynomial part {poly} has degree > 1")
    out = []
    for pole in find_poles(f, bits):
        if pole.order != 1:
            raise NotInClassError(f"pole of order {pole.order}; the class admits only simple poles")
        if pole.is_exact:
            x = pole.location
            res = f.num(x) / f.den.deriv()(x)
            if res.denominator != 1:
                raise NotInClassError(f"residue {res} at {x} is not an integer")
            m = int(res)
        else:
            with mpmath.workprec(bits + GUARD_BITS):
                x = pole.location
                res = f.num.eval_mp(x) / f.den.deriv().eval_mp(x)
                m = int(mpmath.nint(mpmath.re(res)))
                if abs(res - m) > RESIDUE_TOL:
                    raise NotInClassError(f"residue {mpmath.nstr(res, 15)} is not an integer")
        pole.residue_m = m
        out.append((pole, m))
    return out


def partial_fractions(f: RatFunc, bits: int = 256) -> PartialFractionData:
    """Decompose f in the class sum m_i/(z - z_i) + nu - mu z, or raise NotInClassError."""
    poly = f.polynomial_part()
    if poly.degree > 1:
        raise NotInClassError(f"polynomial part {poly} has degree > 1")
    nu, mu = poly.coeff(0), -poly.coeff(1)
    poles = [(pole.location, m) for pole, m in class_poles(f, bits)]
    return PartialFractionData(poles, nu, mu, bits)
