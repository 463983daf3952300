"""
Dressing chains (f_i + f_{i+1})' = f_i^2 - f_{i+1}^2 + alpha_i of odd period,
their reduction to PIV, and the residue cycles allowed at a common pole.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import mpmath

from .errors import ConstructionError, DomainError
from .exactalg import Poly, RatFunc, as_rational, log_derivative, rational_to_str, ratfunc_to_json
from .families import HermiteSequence, hermite_wronskian
from .monodromy import algebraic_laurent_window, exact_pole_factors, find_poles, laurent_window
from .numfmt import scalar
from .roots import GUARD_BITS
from .solutions import SolutionSpec, build_f


# --- verification ---------------------------------------------------------------

class ChainCheck(NamedTuple):
    passed: bool
    alphas: list  # Fraction per link, None where the link defect is not constant
    failed_index: int | None  # 1-based


def chain_defect(f: RatFunc, g: RatFunc) -> RatFunc:
    """(f + g)' - f^2 + g^2."""
    return (f + g).deriv() - f * f + g * g


def verify_chain(fs: Sequence[RatFunc]) -> ChainCheck:
    n = len(fs)
    if n % 2 == 0 or n < 1:
        raise DomainError(f"dressing chains have odd period, got N = {n}")
    alphas, failed = [], None
    for i in range(n):
        d = chain_defect(fs[i], fs[(i + 1) % n])
        if d.is_constant():
            alphas.append(d.constant_value())
        else:
            alphas.append(None)
            if failed is None:
                failed = i + 1
    return ChainCheck(failed is None, alphas, failed)


@dataclass
class DressingChain:
    fs: list
    alphas: list = field(default_factory=list)
    signs: tuple = ()

    @property
    def N(self) -> int:
        return len(self.fs)

    def to_json(self) -> dict:
        return {"N": self.N, "fs": [ratfunc_to_json(f) for f in self.fs],
                "alphas": [rational_to_str(a) for a in self.alphas]}


# --- construction from a Hermite flag ----------------------------------------------

def parse_flag(text: str) -> list[HermiteSequence]:
    """``"[]<[1]<[1,2]"`` -> [(), (1,), (1, 2)]."""
    import json

    parts = [p.strip() for p in text.split("<")]
    try:
        return [HermiteSequence(json.loads(p)) for p in parts]
    except (ValueError, TypeError) as exc:
        raise ValueError(f"malformed flag {text!r}: {exc}") from None


def _validate_flag(flag: Sequence[HermiteSequence]) -> list[int]:
    if not flag or flag[0].ks:
        raise DomainError("a flag must start from the empty sequence")
    added = []
    for lower, upper in zip(flag, flag[1:]):
        new = set(upper.ks) - set(lower.ks)
        if not set(lower.ks) <= set(upper.ks) or len(new) != 1 or len(upper.ks) != len(lower.ks) + 1:
            raise DomainError(f"{lower.ks} -> {upper.ks} is not a one-index step")
        added.append(new.pop())
    if not added:
        raise DomainError("a flag needs at least one step")
    return added


def _scale_poly_arg(p: Poly, beta: Fraction) -> Poly:
    return Poly(c * beta ** k for k, c in enumerate(p.coeffs))


def rescale(f: RatFunc, beta) -> RatFunc:
    """beta * f(beta z); multiplies every chain parameter by beta^2."""
    beta = as_rational(beta)
    return RatFunc(_scale_poly_arg(f.num, beta), _scale_poly_arg(f.den, beta)) * beta


def _rational_sqrt(x: Fraction) -> Fraction | None:
    from math import isqrt

    if x < 0:
        return None
    n, d = isqrt(x.numerator), isqrt(x.denominator)
    if n * n == x.numerator and d * d == x.denominator:
        return Fraction(n, d)
    return None


def _step_logs(flag: Sequence[HermiteSequence]) -> list[RatFunc]:
    ws = [hermite_wronskian(s) for s in flag]
    return [log_derivative(hi) - log_derivative(lo) for lo, hi in zip(ws, ws[1:])]


def _layouts(h: int):
    """Position plan after f_1: (step index or None for the trivial step, sign of the log part)."""
    down = [(j, -1) for j in range(h - 1, -1, -1)]
    up = [(j, +1) for j in range(0, h - 1)]
    yield "down-up", down + [(None, 0)] + up
    yield "flipped", [(j, -s) for j, s in down] + [(None, 0)] + [(j, -s) for j, s in up]


def build_chain(flag: Sequence[HermiteSequence], mu=1) -> DressingChain:
    """Closed rational dressing chain of period 2h + 1 whose f_1 is the top step of the flag.

    Candidates are eps*mu*z +- (log W(S_j)/W(S_{j-1}))' for each flag step
    plus the trivial step; the z-signs eps are searched exhaustively (lexicographic,
    depth-first with link-by-link pruning) and every accepted chain is certified
    by :func:`verify_chain`.
    """
    mu = as_rational(mu)
    scale = _rational_sqrt(mu)
    if scale is None or scale == 0:
        raise DomainError(f"mu = {mu} must be the square of a nonzero rational")
    flag = [s if isinstance(s, HermiteSequence) else HermiteSequence(s) for s in flag]
    added = _validate_flag(flag)
    h = len(added)
    logs = _step_logs(flag)
    zf = RatFunc.z()
    target = build_f(SolutionSpec.hermite_mode(flag[-2].ks, added[-1]))
    f1 = logs[h - 1] - zf
    assert f1 == target
    diagnostics = []
    for name, plan in _layouts(h):
        parts = [(logs[j] * s if j is not None else RatFunc.const(0)) for j, s in plan]
        found = _sign_search(f1, parts, zf)
        if found is not None:
            fs, signs = found
            if scale != 1:
                fs = [rescale(f, scale) for f in fs]
            check = verify_chain(fs)
            if not check.passed:
                raise ConstructionError("sign search accepted a chain that fails verification")
            return DressingChain(fs, check.alphas, signs)
        diagnostics.append({"layout": name, "candidates": 2 ** len(parts), "passing": 0})
    raise ConstructionError(f"no sign assignment closes the chain for flag {[s.ks for s in flag]}",
                            diagnostics)


def _sign_search(f1, parts, zf):
    n = len(parts) + 1

    def rec(prefix, signs):
        if len(prefix) == n:
            return (list(prefix), tuple(signs)) if chain_defect(prefix[-1], prefix[0]).is_constant() else None
        part = parts[len(prefix) - 1]
        for eps in (-1, 1):
            cand = part + zf * eps
            if chain_defect(prefix[-1], cand).is_constant():
                got = rec(prefix + [cand], signs + [eps])
                if got is not None:
                    return got
        return None

    return rec([f1], [-1])


# --- PIV ------------------------------------------------------------------------------

@dataclass
class PIVSolution:
    w: RatFunc
    a: Fraction | None
    b: Fraction | None


def piv_defect(w: RatFunc, a, b) -> RatFunc:
    """2ww'' - w'^2 - 3w^4 - 8zw^3 - 4(z^2 - a)w^2 - 2b."""
    a, b = as_rational(a), as_rational(b)
    z = RatFunc.z()
    w1 = w.deriv()
    w2 = w1.deriv()
    ww = w * w
    return (w * w2 * 2 - w1 * w1 - ww * ww * 3 - z * ww * w * 8
            - (z * z - a) * ww * 4 - RatFunc.const(2 * b))


def verify_piv(sol: PIVSolution) -> bool:
    if sol.a is None or sol.b is None:
        raise DomainError("both PIV parameters must be set to verify")
    return piv_defect(sol.w, sol.a, sol.b).is_zero()


def solve_piv_params(w: RatFunc):
    """Exact (a, b) making w solve PIV, None if no pair works.

    The defect is E0 + 4a w^2 - 2b; after multiplying by den(w)^4 every term is
    a polynomial and each power of z gives one linear equation.  A parameter
    that the equations leave undetermined is returned as None.
    """
    d4 = w.den ** 4
    e0 = piv_defect(w, 0, 0) * RatFunc(d4)
    assert e0.is_polynomial()
    p0 = e0.num
    pa = w.num * w.num * w.den * w.den * 4
    pb = d4 * -2
    deg = max(p0.degree, pa.degree, pb.degree, 0)
    rows = [[pa.coeff(k), pb.coeff(k), -p0.coeff(k)] for k in range(deg + 1)]
    sol = _solve_two(rows)
    return sol


def _solve_two(rows):
    """Least-structure exact solve of rows [x, y | rhs]; returns (a, b) with None for free unknowns."""
    rows = [r[:] for r in rows if any(r)]
    pivots = []
    r = 0
    for col in range(2):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][col]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                c = rows[i][col]
                rows[i] = [x - c * y for x, y in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    for row in rows[r:]:
        if row[2] != 0:
            return None
    out = [None, None]
    for i, col in enumerate(pivots):
        other = 1 - col
        if other in pivots or rows[i][other] == 0:
            out[col] = rows[i][2]
    return tuple(out)


@dataclass
class ChainPIVResult:
    solution: PIVSolution
    sum_alpha: Fraction
    map_a: Fraction
    map_b: Fraction
    map_matches: bool
    normalized: bool
    rescaled_by: Fraction | None
    note: str

    def to_json(self) -> dict:
        fmt = lambda x: None if x is None else rational_to_str(x)
        return {"w": ratfunc_to_json(self.solution.w), "a": fmt(self.solution.a), "b": fmt(self.solution.b),
                "sum_alpha": fmt(self.sum_alpha), "map_a": fmt(self.map_a), "map_b": fmt(self.map_b),
                "map_matches": self.map_matches, "normalized": self.normalized,
                "rescaled_by": fmt(self.rescaled_by), "note": self.note}


def chain_to_piv(chain: DressingChain) -> ChainPIVResult:
    """w = -(z + f_1) with exactly solved (a, b), compared against the alpha-map of the chain."""
    if chain.N != 3:
        raise DomainError("the PIV reduction needs a period-3 chain")
    fs = list(chain.fs)
    check = verify_chain(fs)
    if not check.passed:
        raise DomainError(f"not a dressing chain (link {check.failed_index} fails)")
    alphas = check.alphas
    total = sum(alphas)
    beta, notes = None, []
    if total != -2:
        ratio = Fraction(-2) / total if total != 0 else None
        beta = _rational_sqrt(ratio) if ratio is not None else None
        if beta is not None:
            fs = [rescale(f, beta) for f in fs]
            alphas = verify_chain(fs).alphas
            total = sum(alphas)
            notes.append(f"rescaled by beta = {beta} to reach sum(alpha) = -2")
        else:
            notes.append(f"sum(alpha) = {total} != -2 and no rational rescaling normalizes it")
    w = -(RatFunc.z() + fs[0])
    params = solve_piv_params(w)
    if params is None:
        raise ConstructionError("w = -(z + f_1) solves PIV for no parameters")
    a, b = params
    map_a = (alphas[2] - alphas[0]) / 2
    map_b = -alphas[1] ** 2 / 2
    matches = (a is None or a == map_a) and (b is None or b == map_b)
    if not matches:
        notes.append(f"exact (a, b) = ({a}, {b}) differs from the alpha-map ({map_a}, {map_b})")
    return ChainPIVResult(PIVSolution(w, a, b), total, map_a, map_b, matches, total == -2, beta,
                          "; ".join(notes))


@dataclass
class PoleExpansionReport:
    passed: bool
    poles: list
    exact_verdict: bool

    def to_dict(self) -> dict:
        return {"relation": "piv_pole_expansion", "verdict": "pass" if self.passed else "fail",
                "exact_verdict": "pass" if self.exact_verdict else "fail", "poles": self.poles}


def piv_pole_expansion_check(w: RatFunc, bits: int = 256) -> PoleExpansionReport:
    """Residue +-1 and Laurent constant term -z0 at every pole z0 of w.

    Decided exactly per squarefree denominator factor q: with x a generic root,
    (c_{-1} - 1)(c_{-1} + 1) and c_0 + x must vanish in Q[x]/(q).
    """
    exact_ok = True
    for factor, order in exact_pole_factors(w):
        if order != 1:
            exact_ok = False
            continue
        win = algebraic_laurent_window(w, factor, 1, -1, 0)
        r, c0 = win[-1], win[0]
        if not ((r - 1) * (r + 1) % factor).is_zero() or not ((c0 + Poly.z()) % factor).is_zero():
            exact_ok = False
    poles = []
    for pole in find_poles(w, bits):
        entry = {"location": scalar(pole.location, bits), "order": pole.order}
        if pole.order == 1:
            win = laurent_window(w, pole, -1, 0)
            with mpmath.workprec(bits + GUARD_BITS):
                res, c0 = win[-1], win[0]
                entry["residue"] = scalar(res, bits)
                entry["constant_term_plus_z0"] = mpmath.nstr(abs(c0 + pole.location_mpc()), 8) \
                    if not pole.is_exact else str(c0 + pole.location)
        poles.append(entry)
    return PoleExpansionReport(exact_ok, poles, exact_ok)


# --- residue cycles -------------------------------------------------------------------

NEG, INC = "NEG", "INC"


@dataclass(frozen=True)
class ResidueCycle:
    values: tuple
    branch_word: tuple

    def to_json(self) -> dict:
        return {"values": list(self.values), "branch_word": list(self.branch_word)}


def step_ok(x, y) -> bool:
    return (x + y) * (x - y + 1) == 0


def _canonical_rotation(values, word):
    n = len(values)
    rots = [(tuple(values[i:] + values[:i]), tuple(word[i:] + word[:i])) for i in range(n)]
    with_zero = [r for r in rots if r[0][0] == 0] or rots
    return min(with_zero)


def enumerate_residue_cycles(N: int, bound: int | None = None) -> list[ResidueCycle]:
    """Integer periodic trajectories of (x + y)(x - y + 1) = 0 of period N, up to rotation.

    Each branch word composes x -> -x (NEG) and x -> x + 1 (INC) into
    x -> s x + l; periodic points solve x = s x + l exactly.
    """
    if N % 2 == 0 or N < 1:
        raise DomainError(f"period must be odd, got {N}")
    p = (N - 1) // 2
    bound = p if bound is None else bound
    if bound < p:
        raise DomainError(f"bound must be at least (N-1)/2 = {p}")
    seen = {}
    for word in itertools.product((NEG, INC), repeat=N):
        s, l = 1, Fraction(0)
        for step in word:
            s, l = (-s, -l) if step == NEG else (s, l + 1)
        if s == 1:
            if l != 0:
                continue
            raise AssertionError("identity composition cannot occur for odd N")
        x = l / 2
        if x.denominator != 1:
            continue
        values, cur = [], x
        for step in word:
            values.append(int(cur))
            cur = -cur if step == NEG else cur + 1
        assert cur == x
        if max(abs(v) for v in values) > bound:
            continue
        key = _canonical_rotation(values, list(word))
        seen[key[0]] = ResidueCycle(*key)
    return [seen[k] for k in sorted(seen)]


def same_up_to_rotation(a: Sequence[int], b: Sequence[int]) -> bool:
    a, b = tuple(a), tuple(b)
    return len(a) == len(b) and any(a == b[i:] + b[:i] for i in range(len(b)))


def chain_residue_tuples(fs: Sequence[RatFunc], bits: int = 128) -> list[tuple]:
    """Residues (a_1, ..., a_N) of the chain functions at every point where some f_i has a pole."""
    locs = []
    with mpmath.workprec(bits + GUARD_BITS):
        tol = mpmath.mpf(2) ** (-bits // 2)
        for f in fs:
            for pole in find_poles(f, bits):
                x = pole.location_mpc()
                if all(abs(x - y) > tol for y in locs):
                    locs.append(x)
        out = []
        for x in locs:
            row = []
            for f in fs:
                if abs(f.den.eval_mp(x)) < tol:
                    r = f.num.eval_mp(x) / f.den.deriv().eval_mp(x)
                    row.append(int(mpmath.nint(mpmath.re(r))))
                else:
                    row.append(0)
            out.append(tuple(row))
    return out
