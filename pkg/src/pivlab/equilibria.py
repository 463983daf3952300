"""
Equilibria of the log-gas systems: charged particles in the field nu - mu z
(Stieltjes for unit charges, mu = 1, nu = 0) and the Calogero relations.

Equilibria are found by damped Newton iteration on the residual system
rather than by minimizing a potential, since complex equilibria are saddles.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .errors import DomainError, UnsupportedInputError
from .exactalg import Poly
from .numfmt import scalar
from .roots import GUARD_BITS, roots_with_multiplicity

SYSTEMS = ("stieltjes", "calogero")


def _mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpmathify(x)


@dataclass
class EquilibriumProblem:
    system: str
    initial: list
    charges: list | None = None
    nu: object = 0
    mu: object = 1
    bits: int = 256
    max_iterations: int = 200
    min_damping: float = 2.0 ** -30
    seed: int | None = None

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise DomainError(f"unknown system {self.system!r}; expected one of {SYSTEMS}")
        if not self.initial:
            raise DomainError("empty initial configuration")
        if self.charges is None:
            self.charges = [1] * len(self.initial)
        if len(self.charges) != len(self.initial):
            raise DomainError("charges and initial configuration differ in length")
        if any(int(m) != m or m == 0 for m in self.charges):
            raise DomainError("charges must be nonzero integers")
        if self.system == "calogero" and (any(m != 1 for m in self.charges)
                                          or _mp(self.mu) != 1 or _mp(self.nu) != 0):
            raise UnsupportedInputError("the Calogero system is defined for unit charges, mu = 1, nu = 0")

    @property
    def n(self) -> int:
        return len(self.initial)


@dataclass
class EquilibriumResult:
    config: list
    residual: object
    iterations: int
    converged: bool
    bits: int
    seed: int | None = None
    restarts: int = 0
    matched: str | None = None
    distances: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {
            "config": [scalar(z, self.bits) for z in self.config],
            "residual": mpmath.nstr(self.residual, 8),
            "iterations": self.iterations,
            "converged": self.converged,
            "precision_bits": self.bits,
            "seed": self.seed,
            "restarts": self.restarts,
        }
        if self.matched is not None:
            out["matched"] = self.matched
            out["distances"] = [mpmath.nstr(d, 8) for d in self.distances]
        return out

    def rows(self, residuals=None) -> list[dict]:
        """One CSV row per point: index, re, im, residual."""
        digits = max(15, int(self.bits * 0.30103))
        out = []
        for i, z in enumerate(self.config):
            r = residuals[i] if residuals is not None else self.residual
            out.append({"index": i, "re": mpmath.nstr(mpmath.re(z), digits),
                        "im": mpmath.nstr(mpmath.im(z), digits), "residual": mpmath.nstr(abs(r), 8)})
        return out


# --- residuals, Jacobians, potentials ------------------------------------------------------

def _check_distinct(zs):
    for i in range(len(zs)):
        for j in range(i + 1, len(zs)):
            if zs[i] == zs[j]:
                raise DomainError(f"points {i} and {j} coincide")


def residual_vector(problem: EquilibriumProblem, zs) -> list:
    n = len(zs)
    if problem.system == "calogero":
        return [sum((2 / (zs[k] - zs[j]) ** 3 for j in range(n) if j != k), mpmath.mpc(0)) - zs[k]
                for k in range(n)]
    nu, mu, m = _mp(problem.nu), _mp(problem.mu), problem.charges
    return [sum((m[j] / (zs[k] - zs[j]) for j in range(n) if j != k), mpmath.mpc(0)) + nu - mu * zs[k]
            for k in range(n)]


def jacobian(problem: EquilibriumProblem, zs):
    n = len(zs)
    J = mpmath.matrix(n, n)
    if problem.system == "calogero":
        for k in range(n):
            diag = mpmath.mpc(-1)
            for j in range(n):
                if j != k:
                    t = 6 / (zs[k] - zs[j]) ** 4
                    J[k, j] = t
                    diag -= t
            J[k, k] = diag
        return J
    mu, m = _mp(problem.mu), problem.charges
    for k in range(n):
        diag = -mu
        for j in range(n):
            if j != k:
                t = m[j] / (zs[k] - zs[j]) ** 2
                J[k, j] = t
                diag -= t
        J[k, k] = diag
    return J


def potential_and_gradient(problem: EquilibriumProblem, zs):
    """Value and complex gradient of the potential whose critical points are the equilibria.

    charged:  V = mu sum m_j (z_j - nu/mu)^2 - sum_{j<k} m_j m_k ln (z_j - z_k)^2
              (mu = 0: -2 nu sum m_j z_j); grad_k = -2 m_k * residual_k
    calogero: V_CM = sum z_j^2 + 2 sum_{j<k} (z_j - z_k)^-2; grad_k = -2 * residual_k
    """
    with mpmath.workprec(problem.bits + GUARD_BITS):
        zs = [mpmath.mpc(_mp(z)) for z in zs]
        _check_distinct(zs)
        n = len(zs)
        pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
        res = residual_vector(problem, zs)
        if problem.system == "calogero":
            value = sum(z * z for z in zs) + sum(2 / (zs[j] - zs[k]) ** 2 for j, k in pairs)
            return value, [-2 * r for r in res]
        nu, mu, m = _mp(problem.nu), _mp(problem.mu), problem.charges
        if mu != 0:
            value = mu * sum(m[j] * (zs[j] - nu / mu) ** 2 for j in range(n))
        else:
            value = -2 * nu * sum(m[j] * zs[j] for j in range(n))
        value -= sum(m[j] * m[k] * mpmath.log((zs[j] - zs[k]) ** 2) for j, k in pairs)
        return value, [-2 * m[k] * res[k] for k in range(n)]


# --- deflation ----------------------------------------------------------------------------

def _elementary(zs):
    e = [mpmath.mpc(1)]
    for z in zs:
        e = [e[0]] + [e[i] + z * e[i - 1] for i in range(1, len(e))] + [z * e[-1]]
    return e[1:]


def _elementary_grad(zs):
    """d e_i / d z_k = e_{i-1}(z without z_k)."""
    n = len(zs)
    rows = []
    for k in range(n):
        rest = _elementary(zs[:k] + zs[k + 1:])
        rows.append([mpmath.mpc(1)] + rest)
    return rows  # rows[k][i-1] = d e_i / d z_k


def _deflation(zs, found):
    """Multiplier M = prod (1 + 1/D_s) and grad(M)/M, with D_s = sum_i (e_i(z) - e_i(s))^2."""
    if not found:
        return 1, None
    e = _elementary(zs)
    de = _elementary_grad(zs)
    n = len(zs)
    M, glog = mpmath.mpf(1), [mpmath.mpc(0)] * n
    for es in found:
        diff = [a - b for a, b in zip(e, es)]
        D = sum(d * d for d in diff)
        if D == 0:
            return mpmath.inf, None
        factor = 1 + 1 / D
        M *= factor
        for k in range(n):
            dD = sum(2 * diff[i] * de[k][i] for i in range(n))
            glog[k] += (-dD / D ** 2) / factor
    return M, glog


# --- solver -------------------------------------------------------------------------------

def _min_distance(zs):
    n = len(zs)
    return min((abs(zs[i] - zs[j]) for i in range(n) for j in range(i + 1, n)), default=mpmath.inf)


def _norm(v):
    return max(abs(x) for x in v)


def _polish(problem, zs, rn, steps: int = 2):
    """Undamped Newton steps past the convergence threshold, kept only while they help."""
    for _ in range(steps):
        try:
            delta = mpmath.lu_solve(jacobian(problem, zs), mpmath.matrix([-x for x in residual_vector(problem, zs)]))
        except ZeroDivisionError:
            break
        trial = [z + delta[i] for i, z in enumerate(zs)]
        rt = _norm(residual_vector(problem, trial))
        if rt >= rn:
            break
        zs, rn = trial, rt
    return zs, rn


def solve_equilibrium(problem: EquilibriumProblem, deflate_from=(), max_restarts: int = 3,
                      rng: random.Random | None = None) -> EquilibriumResult:
    """Damped Newton on the residual system; converged iff max |residual| < 2^(-bits/2).

    ``deflate_from`` lists known equilibria (as point lists) to steer away from.
    A singular Jacobian restarts from a jittered configuration; an exhausted
    iteration budget returns a non-converged result.
    """
    rng = rng or random.Random(problem.seed)
    bits = problem.bits
    with mpmath.workprec(bits + GUARD_BITS):
        target = mpmath.mpf(2) ** (-bits / 2)
        guard = mpmath.mpf(2) ** (-bits / 4)
        found = [_elementary([mpmath.mpc(_mp(z)) for z in s]) for s in deflate_from]
        zs = [mpmath.mpc(_mp(z)) for z in problem.initial]
        _check_distinct(zs)
        iterations, restarts = 0, 0
        r = residual_vector(problem, zs)
        while iterations < problem.max_iterations:
            rn = _norm(r)
            if rn < target:
                zs, rn = _polish(problem, zs, rn)
                return EquilibriumResult(zs, rn, iterations, True, bits, problem.seed, restarts)
            iterations += 1
            try:
                delta = mpmath.lu_solve(jacobian(problem, zs), mpmath.matrix([-x for x in r]))
            except ZeroDivisionError:
                if restarts >= max_restarts:
                    break
                restarts += 1
                zs = [z + mpmath.mpc(rng.gauss(0, 0.1), rng.gauss(0, 0.1)) for z in zs]
                r = residual_vector(problem, zs)
                continue
            delta = [delta[i] for i in range(len(zs))]
            M, glog = _deflation(zs, found)
            if glog is not None:
                denom = 1 - sum(g * d for g, d in zip(glog, delta))
                if denom != 0:
                    delta = [d / denom for d in delta]
            lam = mpmath.mpf(1)
            while True:
                trial = [z + lam * d for z, d in zip(zs, delta)]
                ok = _min_distance(trial) >= guard
                if ok:
                    rt = residual_vector(problem, trial)
                    if _norm(rt) < rn or lam <= problem.min_damping:
                        break
                elif lam <= problem.min_damping:
                    rt = None
                    break
                lam /= 2
            if rt is None:
                break
            zs, r = trial, rt
        rn = _norm(r)
        return EquilibriumResult(zs, rn, iterations, rn < target, bits, problem.seed, restarts)


def default_start(n: int, rng: random.Random, scale=None, jitter: float = 0.1) -> list:
    """Roots of unity on a circle of radius ~sqrt(n/2), randomly rotated, plus complex jitter."""
    r = (scale if scale is not None else max(n / 2, 0.5) ** 0.5) * rng.uniform(0.6, 1.4)
    theta = rng.uniform(0, 6.283185307179586)
    import cmath

    return [r * cmath.exp(1j * (theta + 6.283185307179586 * k / n))
            + complex(rng.gauss(0, jitter), rng.gauss(0, jitter)) for k in range(n)]


def multistart(system: str, n: int, starts: int, seed: int, bits: int = 256, deflate: bool = False,
               max_iterations: int = 200, **kwargs) -> list[EquilibriumResult]:
    """Solve from ``starts`` seeded random initializations; results in start order.

    With ``deflate`` every converged equilibrium is deflated out of later
    solves, so repeated starts look for new solutions.
    """
    rng = random.Random(seed)
    results, found = [], []
    for i in range(starts):
        init = default_start(n, rng)
        problem = EquilibriumProblem(system, init, bits=bits, max_iterations=max_iterations, seed=seed, **kwargs)
        res = solve_equilibrium(problem, deflate_from=found if deflate else (), rng=rng)
        if res.converged and deflate:
            found.append(res.config)
        results.append(res)
    return results


def distinct_equilibria(results, bits: int = 256) -> list[list]:
    """Converged configurations up to permutation (compared through elementary symmetric functions)."""
    out, keys = [], []
    with mpmath.workprec(bits + GUARD_BITS):
        tol = mpmath.mpf(2) ** (-bits / 4)
        for res in results:
            if not res.converged:
                continue
            e = _elementary(res.config)
            if all(max(abs(a - b) for a, b in zip(e, k)) > tol for k in keys):
                keys.append(e)
                out.append(res.config)
    return out


# --- matching -----------------------------------------------------------------------------

@dataclass
class MatchResult:
    matched: bool
    pairing: list  # pairing[i] = index of the root matched to config[i]
    distances: list
    max_distance: object


def match_to_roots(config, p: Poly, tol, bits: int = 256) -> MatchResult:
    """Nearest bipartite matching of config against the zeros of p (with multiplicity).

    Greedy by increasing distance, then pairwise swaps while they lower the
    larger of the two distances involved.
    """
    roots = [r.as_mpc() for r, mult in roots_with_multiplicity(p, bits) for _ in range(mult)]
    if len(roots) != len(config):
        raise DomainError(f"degree {p.degree} does not match {len(config)} points")
    n = len(roots)
    with mpmath.workprec(bits + GUARD_BITS):
        pts = [mpmath.mpc(_mp(z)) for z in config]
        dist = [[abs(pts[i] - roots[j]) for j in range(n)] for i in range(n)]
        order = sorted((dist[i][j], i, j) for i in range(n) for j in range(n))
        pairing, used = [None] * n, set()
        for d, i, j in order:
            if pairing[i] is None and j not in used:
                pairing[i] = j
                used.add(j)
        improved = True
        while improved:
            improved = False
            for a in range(n):
                for b in range(a + 1, n):
                    ja, jb = pairing[a], pairing[b]
                    if max(dist[a][jb], dist[b][ja]) < max(dist[a][ja], dist[b][jb]):
                        pairing[a], pairing[b] = jb, ja
                        improved = True
        distances = [dist[i][pairing[i]] for i in range(n)]
        worst = max(distances, default=mpmath.mpf(0))
        return MatchResult(bool(worst < _mp(tol)), pairing, distances, worst)
