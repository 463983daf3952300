"""
Exact univariate algebra over the rationals.

Polynomials are dense tuples of :class:`fractions.Fraction` (index = power of z),
rational functions are kept reduced with a monic denominator, and the single
exponential column needed by the augmented Wronskians is carried by
:class:`ExpPoly`.  Every value is immutable.
"""
from __future__ import annotations

import ast
from fractions import Fraction
from math import comb, gcd as igcd
from typing import Iterable, Sequence, Union

import mpmath

from .errors import DomainError, UnsupportedInputError

Rational = Fraction
Scalar = Union[int, Fraction]


def as_rational(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def rational_to_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


class Poly:
    """Dense polynomial in z with Fraction coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [as_rational(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    # constructors
    @classmethod
    def const(cls, c) -> "Poly":
        return cls((c,))

    @classmethod
    def z(cls) -> "Poly":
        return cls((0, 1))

    @classmethod
    def monomial(cls, k: int, c=1) -> "Poly":
        return cls([0] * k + [c])

    @classmethod
    def from_roots(cls, roots: Iterable) -> "Poly":
        p = cls.const(1)
        for r in roots:
            p = p * cls((-as_rational(r), 1))
        return p

    # basic properties
    @property
    def degree(self) -> int:
        """Degree; the zero polynomial has degree -1."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coeff(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        lc = self.lc
        return Poly(c / lc for c in self.coeffs)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(("Poly", self.coeffs))

    def __bool__(self):
        return bool(self.coeffs)

    # ring operations
    @staticmethod
    def _lift(x) -> "Poly":
        if isinstance(x, Poly):
            return x
        if isinstance(x, (int, Fraction)):
            return Poly.const(x)
        return NotImplemented

    def __add__(self, other):
        other = Poly._lift(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return Poly([x + (b[i] if i < len(b) else 0) for i, x in enumerate(a)])

    __radd__ = __add__

    def __neg__(self):
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other):
        other = Poly._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Poly(c * other for c in self.coeffs)
        if not isinstance(other, Poly):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise DomainError("negative power of a polynomial")
        out, base = Poly.const(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __truediv__(self, c):
        c = as_rational(c)
        if c == 0:
            raise DomainError("division by zero scalar")
        return Poly(x / c for x in self.coeffs)

    def __divmod__(self, d: "Poly"):
        d = Poly._lift(d)
        if d.is_zero():
            raise DomainError("polynomial division by zero")
        r = list(self.coeffs)
        dd, lc = d.degree, d.lc
        if len(r) - 1 < dd:
            return Poly(), self
        q = [Fraction(0)] * (len(r) - dd)
        for k in range(len(r) - 1 - dd, -1, -1):
            c = r[k + dd] / lc
            q[k] = c
            if c:
                for i, x in enumerate(d.coeffs):
                    r[k + i] -= c * x
        return Poly(q), Poly(r[:dd])

    def __floordiv__(self, d):
        return divmod(self, d)[0]

    def __mod__(self, d):
        return divmod(self, d)[1]

    def exact_div(self, d: "Poly") -> "Poly":
        q, r = divmod(self, d)
        if not r.is_zero():
            raise ArithmeticError("inexact polynomial division")
        return q

    # calculus
    def deriv(self, k: int = 1) -> "Poly":
        cs = self.coeffs
        for _ in range(k):
            cs = tuple(i * c for i, c in enumerate(cs))[1:]
        return Poly(cs)

    def integrate(self, constant=0) -> "Poly":
        return Poly([as_rational(constant)] + [c / (i + 1) for i, c in enumerate(self.coeffs)])

    def __call__(self, x):
        acc = 0 if not isinstance(x, Fraction) else Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_mp(self, x):
        """Horner evaluation in the current mpmath context."""
        acc = mpmath.mpf(0)
        for c in reversed(self.coeffs):
            acc = acc * x + _mp_rational(c)
        return acc

    # integer views
    def integer_primitive(self) -> list[int]:
        """Coefficients scaled to coprime integers with positive leading coefficient."""
        if self.is_zero():
            return []
        den = 1
        for c in self.coeffs:
            den = den * c.denominator // igcd(den, c.denominator)
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for v in ints:
            g = igcd(g, v)
        ints = [v // g for v in ints]
        if ints[-1] < 0:
            ints = [-v for v in ints]
        return ints

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        if self.is_zero():
            return "0"
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            mag = abs(c)
            if k == 0:
                body = str(mag)
            else:
                zpart = "z" if k == 1 else f"z**{k}"
                body = zpart if mag == 1 else f"{mag}*{zpart}"
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


def _mp_rational(c: Fraction):
    if c.denominator == 1:
        return mpmath.mpf(c.numerator)
    return mpmath.mpf(c.numerator) / c.denominator


Z = Poly.z()
ONE = Poly.const(1)


# --- gcd machinery -----------------------------------------------------------

def _prem(a: list[int], b: list[int]) -> list[int]:
    """Integer pseudo-remainder of a by b."""
    r = a[:]
    db, lb = len(b) - 1, b[-1]
    while r and len(r) - 1 >= db:
        lr, shift = r[-1], len(r) - 1 - db
        r = [c * lb for c in r]
        for i, c in enumerate(b):
            r[i + shift] -= lr * c
        while r and r[-1] == 0:
            r.pop()
    return r


def _primitive(a: list[int]) -> list[int]:
    g = 0
    for v in a:
        g = igcd(g, v)
    return [v // g for v in a] if g > 1 else a


def gcd(p: Poly, q: Poly) -> Poly:
    """Monic gcd over Q (primitive remainder sequence on integer images)."""
    if p.is_zero():
        return q.monic()
    if q.is_zero():
        return p.monic()
    a, b = p.integer_primitive(), q.integer_primitive()
    if len(a) < len(b):
        a, b = b, a
    while b:
        r = _prem(a, b)
        a, b = b, (_primitive(r) if r else r)
    return Poly(a).monic()


def ext_gcd(a: Poly, b: Poly) -> tuple[Poly, Poly, Poly]:
    """Return (g, s, t) with s*a + t*b = g, g monic."""
    r0, r1 = a, b
    s0, s1 = ONE, Poly()
    t0, t1 = Poly(), ONE
    while not r1.is_zero():
        q, r = divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    lc = r0.lc
    if lc == 0:
        return Poly(), Poly(), Poly()
    return r0 / lc, s0 / lc, t0 / lc


def inverse_mod(a: Poly, m: Poly) -> Poly:
    """Inverse of a modulo m; DomainError when gcd(a, m) is nontrivial."""
    g, s, _ = ext_gcd(a % m, m)
    if g.degree != 0:
        raise DomainError("element is not invertible modulo the given polynomial")
    return s % m


def squarefree_decomposition(p: Poly) -> list[tuple[Poly, int]]:
    """Yun's algorithm: monic pairwise-coprime squarefree factors with multiplicities."""
    if p.degree <= 0:
        return []
    f = p.monic()
    c = gcd(f, f.deriv())
    w = f.exact_div(c)
    out, i = [], 1
    while c.degree > 0:
        y = gcd(w, c)
        zf = w.exact_div(y)
        if zf.degree > 0:
            out.append((zf, i))
        i += 1
        w, c = y, c.exact_div(y)
    if w.degree > 0:
        out.append((w, i))
    return out


def squarefree_part(p: Poly) -> Poly:
    if p.degree <= 0:
        return p.monic() if not p.is_zero() else p
    return p.monic().exact_div(gcd(p, p.deriv()))


def is_squarefree(p: Poly) -> bool:
    return p.degree <= 0 or gcd(p, p.deriv()).degree == 0


def divides(d: Poly, p: Poly) -> bool:
    """True iff d | p in Q[z]."""
    if d.is_zero():
        raise DomainError("divisor is the zero polynomial")
    return (p % d).is_zero()


# --- Taylor recentering --------------------------------------------------------

def taylor_shift(p: Poly, a, bits: int | None = None) -> tuple:
    """Coefficients of p(z + a).

    Exact for rational ``a``.  For mpmath/complex ``a`` the synthetic-division
    scheme runs at ``bits`` (default: the ambient mpmath precision); the
    result is a tuple of mpc values.
    """
    if isinstance(a, (int, Fraction)):
        a = Fraction(a)
        c = list(p.coeffs)
        n = len(c) - 1
        for i in range(n):
            for j in range(n - 1, i - 1, -1):
                c[j] += a * c[j + 1]
        return tuple(c)
    prec = bits if bits is not None else mpmath.mp.prec
    with mpmath.workprec(prec):
        a = mpmath.mpmathify(a)
        c = [_mp_rational(x) for x in p.coeffs]
        n = len(c) - 1
        for i in range(n):
            for j in range(n - 1, i - 1, -1):
                c[j] += a * c[j + 1]
        return tuple(mpmath.mpc(x) for x in c)


# --- rational functions ----------------------------------------------------------

class RatFunc:
    """Reduced quotient num/den with monic den."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=ONE):
        num = Poly._lift(num) if not isinstance(num, Poly) else num
        den = Poly._lift(den) if not isinstance(den, Poly) else den
        if den.is_zero():
            raise DomainError("rational function with zero denominator")
        if num.is_zero():
            self.num, self.den = Poly(), ONE
            return
        if den.degree > 0:
            g = gcd(num, den)
            if g.degree > 0:
                num, den = num.exact_div(g), den.exact_div(g)
        lc = den.lc
        if lc != 1:
            num, den = num / lc, den / lc
        self.num, self.den = num, den

    @classmethod
    def const(cls, c) -> "RatFunc":
        return cls(Poly.const(c))

    @classmethod
    def z(cls) -> "RatFunc":
        return cls(Z)

    @staticmethod
    def _lift(x):
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, Poly):
            return RatFunc(x)
        if isinstance(x, (int, Fraction)):
            return RatFunc.const(x)
        return NotImplemented

    def __eq__(self, other):
        other = RatFunc._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash(("RatFunc", self.num, self.den))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.den.degree == 0 and self.num.degree <= 0

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise DomainError("rational function is not constant")
        return self.num.coeff(0)

    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def __add__(self, other):
        other = RatFunc._lift(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        out = RatFunc.__new__(RatFunc)
        out.num, out.den = -self.num, self.den
        return out

    def __sub__(self, other):
        other = RatFunc._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = RatFunc._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RatFunc._lift(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise DomainError("division by the zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return RatFunc._lift(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return RatFunc.const(1) / (self ** (-k))
        out = RatFunc(self.num ** k, self.den ** k)
        return out

    def deriv(self) -> "RatFunc":
        n, d = self.num, self.den
        return RatFunc(n.deriv() * d - n * d.deriv(), d * d)

    def polynomial_part(self) -> Poly:
        return self.num // self.den

    def proper_part(self) -> "RatFunc":
        return RatFunc(self.num % self.den, self.den)

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def eval_mp(self, x):
        return self.num.eval_mp(x) / self.den.eval_mp(x)

    def __repr__(self):
        return f"RatFunc({self})"

    def __str__(self):
        if self.den.degree == 0:
            return str(self.num)
        return f"({self.num})/({self.den})"


def ratfunc_normalize(num: Poly, den: Poly) -> RatFunc:
    return RatFunc(num, den)


def log_derivative(p: Poly) -> RatFunc:
    """p'/p."""
    if p.is_zero():
        raise DomainError("logarithmic derivative of the zero polynomial")
    return RatFunc(p.deriv(), p)


# --- exponential-polynomial columns -------------------------------------------------

class ExpPoly:
    """e^{rate*z} * poly(z)."""

    __slots__ = ("rate", "poly")

    def __init__(self, rate, poly: Poly):
        self.rate = as_rational(rate)
        self.poly = poly

    def deriv(self, k: int = 1) -> "ExpPoly":
        # Leibniz: (e^{nu z} q)^{(k)} = e^{nu z} sum_i C(k, i) nu^{k-i} q^{(i)}
        nu, q = self.rate, self.poly
        acc = Poly()
        for i in range(k + 1):
            acc = acc + q.deriv(i) * (comb(k, i) * nu ** (k - i))
        return ExpPoly(nu, acc)

    def __eq__(self, other):
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self.rate == other.rate and self.poly == other.poly

    def __hash__(self):
        return hash(("ExpPoly", self.rate, self.poly))

    def __repr__(self):
        return f"ExpPoly(exp({self.rate}*z) * ({self.poly}))"


def bareiss_det(matrix: Sequence[Sequence[Poly]]) -> Poly:
    """Fraction-free determinant of a square matrix of polynomials."""
    m = [list(row) for row in matrix]
    n = len(m)
    if n == 0:
        return ONE
    sign, prev = 1, ONE
    for k in range(n - 1):
        if m[k][k].is_zero():
            for i in range(k + 1, n):
                if not m[i][k].is_zero():
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return Poly()
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]).exact_div(prev)
        prev = pivot
    return m[n - 1][n - 1] * sign


def wronskian(fs: Sequence[Union[Poly, ExpPoly]]) -> Union[Poly, ExpPoly]:
    """Wronskian det[f_c^{(r)}] of polynomials and at most one exponential column.

    The factor e^{nu z} of an exponential column is pulled out of the
    determinant, so the result is an ExpPoly carrying the same rate.
    """
    if not fs:
        raise DomainError("Wronskian of an empty list")
    exp_cols = [i for i, f in enumerate(fs) if isinstance(f, ExpPoly)]
    if len(exp_cols) > 1:
        raise UnsupportedInputError("at most one exponential column is supported")
    n = len(fs)
    cols = []
    for f in fs:
        if isinstance(f, ExpPoly):
            cols.append([f.deriv(r).poly for r in range(n)])
        elif isinstance(f, Poly):
            cols.append([f.deriv(r) for r in range(n)])
        else:
            raise UnsupportedInputError(f"unsupported Wronskian entry {f!r}")
    det = bareiss_det([[cols[c][r] for c in range(n)] for r in range(n)])
    if exp_cols:
        return ExpPoly(fs[exp_cols[0]].rate, det)
    return det


# --- serialization ------------------------------------------------------------

def poly_to_json(p: Poly) -> list[str]:
    return [rational_to_str(c) for c in p.coeffs]


def poly_from_json(data) -> Poly:
    if not isinstance(data, list):
        raise ValueError("polynomial must be a JSON array of coefficient strings")
    return Poly(as_rational(c) for c in data)


def ratfunc_to_json(f: RatFunc) -> dict:
    return {"num": poly_to_json(f.num), "den": poly_to_json(f.den)}


def ratfunc_from_json(data) -> RatFunc:
    if not isinstance(data, dict) or "num" not in data or "den" not in data:
        raise ValueError("rational function must be an object with 'num' and 'den'")
    return RatFunc(poly_from_json(data["num"]), poly_from_json(data["den"]))


def exppoly_to_json(e: ExpPoly) -> dict:
    return {"rate": rational_to_str(e.rate), "poly": poly_to_json(e.poly)}


def exppoly_from_json(data) -> ExpPoly:
    return ExpPoly(as_rational(data["rate"]), poly_from_json(data["poly"]))


# --- expression parsing -----------------------------------------------------------

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
}


def parse_ratfunc(text: str, var: str = "z") -> RatFunc:
    """Parse an arithmetic expression in ``z`` (``^`` or ``**`` for powers) into a RatFunc.

    >>> str(parse_ratfunc("-1/z"))
    '(-1)/(z)'
    """
    try:
        tree = ast.parse(text.strip().replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse expression {text!r}: {exc.msg}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            if isinstance(node.value, float):
                return RatFunc.const(Fraction(str(node.value)))
            return RatFunc.const(node.value)
        if isinstance(node, ast.Name) and node.id == var:
            return RatFunc.z()
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                exp = ev(node.right)
                if not exp.is_constant() or exp.constant_value().denominator != 1:
                    raise ValueError("exponents must be integer constants")
                return ev(node.left) ** int(exp.constant_value())
            op = _BINOPS.get(type(node.op))
            if op is not None:
                return op(ev(node.left), ev(node.right))
        raise ValueError(f"unsupported syntax in expression {text!r}")

    return ev(tree)
