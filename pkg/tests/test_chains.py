from fractions import Fraction as F
import itertools

import pytest
import sympy

import pivlab.chains as chains
from pivlab.chains import (
    DressingChain,
    build_chain,
    chain_residue_tuples,
    chain_to_piv,
    enumerate_residue_cycles,
    parse_flag,
    piv_defect,
    piv_pole_expansion_check,
    rescale,
    same_up_to_rotation,
    solve_piv_params,
    step_ok,
    verify_chain,
    PIVSolution,
    verify_piv,
)
from pivlab.errors import ConstructionError, DomainError
from pivlab.exactalg import RatFunc, log_derivative, parse_ratfunc
from pivlab.families import hermite, hermite_wronskian
from pivlab.relations import theorem1_check

R = parse_ratfunc
Z = RatFunc.z()


def test_verify_chain_examples():
    check = verify_chain([R("-z")] * 3)
    assert check.passed and check.alphas == [-2, -2, -2]
    check = verify_chain([R("1/z - z"), R("-1/z - z"), R("-z")])
    assert check.passed and check.alphas == [2, -4, -4]
    check = verify_chain([R("z^2"), R("0"), R("0")])
    assert not check.passed and check.failed_index == 1 and check.alphas[1] == 0


def test_verify_chain_needs_odd_period():
    with pytest.raises(DomainError):
        verify_chain([R("z"), R("z")])


def test_parse_flag():
    assert [s.ks for s in parse_flag("[]<[1]<[1,2]")] == [(), (1,), (1, 2)]
    with pytest.raises(ValueError):
        parse_flag("[]<[1")


def test_build_chain_height_one():
    chain = build_chain(parse_flag("[]<[1]"))
    assert chain.N == 3 and chain.fs[0] == R("1/z - z")
    assert verify_chain(chain.fs).passed
    assert chain.fs == [R("1/z - z"), R("-1/z - z"), R("-z")]


def test_build_chain_h2():
    chain = build_chain(parse_flag("[]<[2]"))
    assert chain.fs[0] == log_derivative(hermite(2)) - Z
    assert verify_chain(chain.fs).passed


def test_build_chain_height_two():
    chain = build_chain(parse_flag("[]<[1]<[1,2]"))
    assert chain.N == 5
    assert chain.fs[0] == log_derivative(hermite_wronskian([1, 2])) - log_derivative(hermite(1)) - Z
    assert verify_chain(chain.fs).passed


def _brute_force_first(flag):
    """Unpruned enumeration of every z-sign assignment in lexicographic order."""
    added = chains._validate_flag(flag)
    h = len(added)
    logs = chains._step_logs(flag)
    for _, plan in chains._layouts(h):
        parts = [(logs[j] * s if j is not None else RatFunc.const(0)) for j, s in plan]
        for signs in itertools.product((-1, 1), repeat=len(parts)):
            fs = [logs[h - 1] - Z] + [p + Z * e for p, e in zip(parts, signs)]
            if verify_chain(fs).passed:
                return fs
    return None


@pytest.mark.parametrize("flag", ["[]<[1]", "[]<[3]", "[]<[2]<[2,3]", "[]<[1]<[1,4]"])
def test_pruned_search_matches_brute_force(flag):
    fl = parse_flag(flag)
    assert build_chain(fl).fs == _brute_force_first(fl)


def test_build_chain_mu_square():
    base = build_chain(parse_flag("[]<[1]"))
    chain = build_chain(parse_flag("[]<[1]"), mu=4)
    assert chain.fs == [rescale(f, 2) for f in base.fs]
    assert chain.alphas == [4 * a for a in base.alphas]
    with pytest.raises(DomainError):
        build_chain(parse_flag("[]<[1]"), mu=2)


def test_build_chain_bad_flags():
    with pytest.raises(DomainError):
        build_chain(parse_flag("[1]<[1,2]"))
    with pytest.raises(DomainError):
        build_chain(parse_flag("[]<[1,2]"))
    with pytest.raises(DomainError):
        build_chain(parse_flag("[]"))


def test_construction_error_carries_diagnostics(monkeypatch):
    monkeypatch.setattr(chains, "_layouts", lambda h: iter([("wrong", [(0, 1), (None, 0)])]))
    with pytest.raises(ConstructionError) as info:
        build_chain(parse_flag("[]<[1]"))
    assert info.value.diagnostics == [{"layout": "wrong", "candidates": 4, "passing": 0}]


def test_chain_json():
    data = build_chain(parse_flag("[]<[1]")).to_json()
    assert data["N"] == 3 and data["alphas"] == ["2/1", "-4/1", "-4/1"]


# --- PIV ---

def _sympy_piv(w, a, b):
    z = sympy.Symbol("z")
    num = sum(sympy.Rational(str(c)) * z ** k for k, c in enumerate(w.num.coeffs))
    den = sum(sympy.Rational(str(c)) * z ** k for k, c in enumerate(w.den.coeffs))
    W = num / den
    expr = (sympy.diff(W, z, 2) - sympy.diff(W, z) ** 2 / (2 * W) - sympy.Rational(3, 2) * W ** 3
            - 4 * z * W ** 2 - 2 * (z ** 2 - a) * W - b / W)
    return sympy.simplify(expr) == 0


def test_solve_piv_params_examples():
    assert solve_piv_params(R("-1/z")) == (-2, -2)
    assert solve_piv_params(RatFunc.const(0)) == (None, 0)
    assert solve_piv_params(R("z^2")) is None


def test_piv_identity_against_sympy():
    w = R("-1/z")
    assert verify_piv(PIVSolution(w, -2, -2)) and _sympy_piv(w, -2, -2)
    assert not verify_piv(PIVSolution(w, 2, 2)) and not _sympy_piv(w, 2, 2)
    assert not piv_defect(w, 2, 2).is_zero()


@pytest.mark.parametrize("flag", ["[]<[1]", "[]<[2]", "[]<[3]", "[]<[4]"])
def test_chain_to_piv(flag):
    res = chain_to_piv(build_chain(parse_flag(flag)))
    sol = res.solution
    assert verify_piv(sol)
    assert _sympy_piv(sol.w, sol.a, sol.b)
    assert theorem1_check(sol.w).passed
    assert not theorem1_check(sol.w + 1).passed
    assert piv_pole_expansion_check(sol.w).passed


def test_chain_to_piv_hermite_one():
    res = chain_to_piv(build_chain(parse_flag("[]<[1]")))
    assert res.solution.w == R("-1/z") and (res.solution.a, res.solution.b) == (-2, -2)
    assert res.sum_alpha == -6 and not res.normalized and not res.map_matches


def test_chain_to_piv_trivial_chain():
    res = chain_to_piv(DressingChain([R("-z")] * 3))
    assert res.solution.w == RatFunc.const(0)
    assert res.solution.a is None and res.solution.b == 0
    assert res.sum_alpha == -6 and "-6" in res.note


def test_chain_to_piv_rescales():
    base = build_chain(parse_flag("[]<[2]"))
    assert sum(base.alphas) == -2
    scaled = DressingChain([rescale(f, 2) for f in base.fs])
    assert sum(verify_chain(scaled.fs).alphas) == -8
    res = chain_to_piv(scaled)
    assert res.rescaled_by == F(1, 2) and res.normalized and res.map_matches
    assert res.solution.w == -(Z + base.fs[0])


def test_chain_to_piv_needs_period_three():
    with pytest.raises(DomainError):
        chain_to_piv(DressingChain([R("-z")] * 5))


@pytest.mark.parametrize("text,ok", [("-1/z", True), ("-2/z", False), ("1/(z-1) - z", True),
                                     ("1/(z-1)", False), ("1/z^2", False)])
def test_pole_expansion(text, ok):
    assert piv_pole_expansion_check(R(text)).passed is ok


# --- residue cycles ---

def _brute_cycles(n, bound):
    found = set()
    for xs in itertools.product(range(-bound, bound + 1), repeat=n):
        if all(step_ok(xs[i], xs[(i + 1) % n]) for i in range(n)):
            rots = [xs[i:] + xs[:i] for i in range(n)]
            found.add(min(r for r in rots if r[0] == 0) if 0 in xs else min(rots))
    return found


@pytest.mark.parametrize("n", [1, 3, 5, 7])
def test_cycles_match_brute_force(n):
    bound = (n - 1) // 2 + 1
    got = {c.values for c in enumerate_residue_cycles(n, bound)}
    assert got == _brute_cycles(n, bound)


def test_cycles_n3():
    assert [c.values for c in enumerate_residue_cycles(3)] == [(0, 0, 0), (0, 1, -1)]


@pytest.mark.parametrize("n", [3, 5, 7, 9])
def test_cycle_properties(n):
    for c in enumerate_residue_cycles(n, n):
        assert 0 in c.values and max(map(abs, c.values)) <= (n - 1) // 2
        assert all(step_ok(c.values[i], c.values[(i + 1) % n]) for i in range(n))


def test_cycles_n5_contains_example():
    assert any(same_up_to_rotation(c.values, (1, -1, 0, 0, 0)) for c in enumerate_residue_cycles(5))


def test_cycles_even_rejected():
    with pytest.raises(DomainError):
        enumerate_residue_cycles(4)


@pytest.mark.parametrize("flag", ["[]<[1]", "[]<[2]", "[]<[1]<[1,2]", "[]<[3]<[1,3]", "[]<[2]<[2,5]"])
def test_chain_residues_are_cycles(flag):
    chain = build_chain(parse_flag(flag))
    cycles = [c.values for c in enumerate_residue_cycles(chain.N)]
    for t in chain_residue_tuples(chain.fs):
        assert any(same_up_to_rotation(t, c) for c in cycles)
