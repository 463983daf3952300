"""Command-line entry point: ``pivlab <group> <command> [options]``.

Exit codes: 0 pass/success, 1 verification failure (report still written),
2 usage error or malformed input.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

import mpmath

from . import __version__
from .chains import (
    build_chain,
    chain_residue_tuples,
    chain_to_piv,
    enumerate_residue_cycles,
    parse_flag,
    piv_defect,
    piv_pole_expansion_check,
    verify_chain,
)
from .equilibria import EquilibriumProblem, distinct_equilibria, match_to_roots, multistart, residual_vector
from .errors import ConstructionError, PivlabError
from .exactalg import (
    parse_ratfunc,
    poly_to_json,
    ratfunc_from_json,
    ratfunc_to_json,
    rational_to_str,
)
from .families import adler_moser, adler_moser_wronskian, hermite, hermite_wronskian
from .monodromy import potential_from_wronskian, trivial_monodromy_exact, trivial_monodromy_report
from .relations import (
    calogero_residual,
    config_from_poly,
    generalized_stieltjes_check,
    generalized_stieltjes_exact,
    max_norm,
    residual_report,
    stieltjes_residual,
    theorem1_check,
)
from .solutions import SolutionSpec, build_f, partial_fractions, piv_w_from_f, potential_from_f


class InputError(Exception):
    """Malformed user input; ``field`` names the offending option or key."""

    def __init__(self, field_, message):
        super().__init__(f"{field_}: {message}")
        self.field = field_


@dataclass
class RunManifest:
    argv: list
    bits: int
    seed: int | None
    version: str = __version__
    timestamp: str | None = None
    config_hash: str = field(init=False)

    def __post_init__(self):
        payload = json.dumps({"argv": self.argv, "bits": self.bits, "seed": self.seed}, sort_keys=True)
        self.config_hash = hashlib.sha256(payload.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        out = {"command_line": " ".join(self.argv), "config_hash": self.config_hash,
               "precision_bits": self.bits, "seed": self.seed, "tool_version": self.version}
        if self.timestamp is not None:
            out["timestamp"] = self.timestamp
        return out


def emit_report(report: dict, fmt: str = "json", rows: list | None = None, manifest: RunManifest | None = None) -> str:
    """Deterministic serialization: sorted JSON, or CSV (index, re, im, residual) for point sets."""
    if fmt == "csv":
        buf = io.StringIO()
        if manifest is not None:
            for k, v in manifest.to_dict().items():
                buf.write(f"# {k}: {v}\n")
        writer = csv.DictWriter(buf, fieldnames=["index", "re", "im", "residual"], lineterminator="\n")
        writer.writeheader()
        for row in rows or []:
            writer.writerow(row)
        return buf.getvalue()
    body = dict(report)
    if manifest is not None:
        body["manifest"] = manifest.to_dict()
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


# --- input helpers -------------------------------------------------------------------

def _ratfunc(text, name):
    if text is None:
        raise InputError(name, "required")
    try:
        return parse_ratfunc(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(name, str(exc)) from None


def _ints(text, name):
    if not text:
        return []
    try:
        return [int(x) for x in text.replace("[", "").replace("]", "").split(",") if x.strip()]
    except ValueError:
        raise InputError(name, f"expected comma-separated integers, got {text!r}") from None


def _rationals(text, name):
    from fractions import Fraction

    if not text:
        return []
    try:
        return [Fraction(x.strip()) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(name, f"expected comma-separated rationals, got {text!r}") from None


def _load_json(path, name):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(name, str(exc)) from None


def _points_rows(points, residuals, bits):
    digits = max(15, int(bits * 0.30103))
    return [{"index": i, "re": mpmath.nstr(mpmath.re(z), digits), "im": mpmath.nstr(mpmath.im(z), digits),
             "residual": mpmath.nstr(abs(r), 8)} for i, (z, r) in enumerate(zip(points, residuals))]


def _poly_arg(args):
    if getattr(args, "hermite", None) is not None:
        return hermite(args.hermite), f"H_{args.hermite}"
    if getattr(args, "ks", None):
        ks = _ints(args.ks, "--ks")
        return hermite_wronskian(ks), f"W(H_k, k in {ks})"
    if getattr(args, "poly", None):
        f = _ratfunc(args.poly, "--poly")
        if not f.is_polynomial():
            raise InputError("--poly", "not a polynomial")
        return f.num, args.poly
    raise InputError("--hermite/--ks/--poly", "one point-set source is required")


# --- commands ----------------------------------------------------------------------------

def cmd_families_gen(args):
    if args.kind == "hermite":
        p = hermite(args.n)
    elif args.kind == "adler-moser":
        p = adler_moser(args.n, _rationals(args.taus, "--taus"))
    elif args.kind == "adler-moser-wronskian":
        p = adler_moser_wronskian(args.n, _rationals(args.taus, "--taus"))
    else:
        p = hermite_wronskian(_ints(args.ks, "--ks"))
    return True, {"kind": args.kind, "poly": poly_to_json(p), "text": str(p)}, None


def _spec_from_args(args):
    if args.spec:
        try:
            return SolutionSpec.from_json(_load_json(args.spec, "--spec"))
        except (KeyError, TypeError) as exc:
            raise InputError(f"--spec[{exc}]", "missing or malformed field") from None
    if args.mode == "hermite":
        return SolutionSpec.hermite_mode(_ints(args.ks, "--ks"), args.k_extra)
    if args.mode == "adler_moser":
        return SolutionSpec.adler_moser_step(args.n, args.direction, _rationals(args.taus, "--taus"))
    nu = _rationals(args.nu, "--nu")
    if len(nu) != 1:
        raise InputError("--nu", "exactly one rational is required")
    return SolutionSpec.exp_mode(args.n, nu[0], _rationals(args.taus, "--taus"))


def cmd_solutions_build(args):
    spec = _spec_from_args(args)
    f = build_f(spec)
    out = {"spec": spec.to_json(), "f": ratfunc_to_json(f), "f_text": str(f),
           "w": ratfunc_to_json(piv_w_from_f(f)), "u": ratfunc_to_json(potential_from_f(f))}
    out["partial_fractions"] = partial_fractions(f, args.bits).to_json()
    return True, out, None


def cmd_verify_stieltjes(args):
    if args.f:
        f = _ratfunc(args.f, "--f")
        rep = generalized_stieltjes_check(f, args.bits)
        exact = generalized_stieltjes_exact(f)
        rep.exact_verdict = exact.exact_verdict
        return rep.passed and exact.passed, rep.to_dict(), None
    p, label = _poly_arg(args)
    cfg = config_from_poly(p, args.bits)
    values = stieltjes_residual(cfg)
    rep = residual_report("stieltjes", cfg, values)
    out = rep.to_dict()
    out["source"] = label
    out["max_residual"] = mpmath.nstr(max_norm(values, args.bits), 8)
    return rep.passed, out, _points_rows(cfg.points, values, args.bits)


def cmd_verify_calogero(args):
    p, label = _poly_arg(args)
    cfg = config_from_poly(p, args.bits)
    values = calogero_residual(cfg)
    rep = residual_report("calogero", cfg, values)
    out = rep.to_dict()
    out["source"] = label
    out["max_residual"] = mpmath.nstr(max_norm(values, args.bits), 8)
    return rep.passed, out, _points_rows(cfg.points, values, args.bits)


def cmd_verify_monodromy(args):
    if args.u:
        u = _ratfunc(args.u, "--u")
    elif args.potential:
        try:
            u = ratfunc_from_json(_load_json(args.potential, "--potential"))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"--potential ({exc})", "expected {\"num\": [...], \"den\": [...]}") from None
    elif args.ks is not None:
        u = potential_from_wronskian(hermite_wronskian(_ints(args.ks, "--ks")), harmonic=True)
    elif args.adler_moser is not None:
        u = potential_from_wronskian(adler_moser_wronskian(args.adler_moser, _rationals(args.taus, "--taus")))
    else:
        raise InputError("--u/--potential/--ks/--adler-moser", "one potential source is required")
    rep = trivial_monodromy_exact(u) if args.exact else trivial_monodromy_report(u, args.bits)
    out = rep.to_dict()
    out["u"] = ratfunc_to_json(u)
    return rep.passed, out, None


def cmd_verify_theorem1(args):
    rep = theorem1_check(_ratfunc(args.w, "--w"), args.bits)
    return rep.passed and bool(rep.exact_verdict), rep.to_dict(), None


def _chain_from_args(args):
    if args.input:
        data = _load_json(args.input, "--input")
        try:
            return [ratfunc_from_json(f) for f in data["fs"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"--input[fs] ({exc})", "malformed chain") from None
    if not args.fs:
        raise InputError("--fs/--input", "a chain is required")
    return [_ratfunc(t, f"--fs[{i}]") for i, t in enumerate(args.fs.split(";"))]


def cmd_verify_chain(args):
    fs = _chain_from_args(args)
    check = verify_chain(fs)
    out = {"relation": "dressing_chain", "N": len(fs), "verdict": "pass" if check.passed else "fail",
           "alphas": [None if a is None else rational_to_str(a) for a in check.alphas],
           "failed_index": check.failed_index}
    if check.passed:
        out["residue_tuples"] = [list(t) for t in chain_residue_tuples(fs, args.bits)]
    return check.passed, out, None


def cmd_verify_piv(args):
    w = _ratfunc(args.w, "--w")
    a, b = _rationals(args.a, "--a"), _rationals(args.b, "--b")
    if len(a) != 1 or len(b) != 1:
        raise InputError("--a/--b", "exactly one rational each is required")
    defect = piv_defect(w, a[0], b[0])
    poles = piv_pole_expansion_check(w, args.bits)
    ok = defect.is_zero()
    out = {"relation": "piv", "w": ratfunc_to_json(w), "a": rational_to_str(a[0]), "b": rational_to_str(b[0]),
           "verdict": "pass" if ok else "fail", "defect": ratfunc_to_json(defect), "defect_text": str(defect),
           "pole_expansion": poles.to_dict()}
    return ok, out, None


def cmd_chains_build(args):
    try:
        flag = parse_flag(args.flag)
    except ValueError as exc:
        raise InputError("--flag", str(exc)) from None
    mu = _rationals(args.mu, "--mu")
    if len(mu) != 1:
        raise InputError("--mu", "exactly one rational is required")
    chain = build_chain(flag, mu[0])
    out = chain.to_json()
    out["signs"] = list(chain.signs)
    out["residue_tuples"] = [list(t) for t in chain_residue_tuples(chain.fs, args.bits)]
    if chain.N == 3:
        res = chain_to_piv(chain)
        out["piv"] = res.to_json()
        out["theorem1"] = theorem1_check(res.solution.w, args.bits).to_dict()
    return True, out, None


def cmd_chains_cycles(args):
    cycles = enumerate_residue_cycles(args.N, args.bound)
    return True, {"N": args.N, "cycles": [c.to_json() for c in cycles]}, None


def cmd_solve(args):
    results = multistart(args.system, args.n, args.starts, args.seed, bits=args.bits,
                         deflate=args.deflate, max_iterations=args.max_iterations)
    target = hermite(args.n) if args.system == "stieltjes" else None
    if args.match_ks is not None:
        target = hermite_wronskian(_ints(args.match_ks, "--match-ks"))
    tol = mpmath.mpf(10) ** (-args.bits // 12)
    all_matched = True
    for res in results:
        if res.converged and target is not None and target.degree == args.n:
            m = match_to_roots(res.config, target, tol, args.bits)
            res.matched = "yes" if m.matched else "no"
            res.distances = m.distances
            all_matched &= m.matched
    distinct = distinct_equilibria(results, args.bits)
    out = {"system": args.system, "n": args.n, "starts": args.starts,
           "converged": sum(r.converged for r in results),
           "distinct_equilibria": len(distinct), "results": [r.to_json() for r in results]}
    best = next((r for r in results if r.converged), None)
    rows = None
    if best is not None:
        with mpmath.workprec(args.bits + 32):
            rows = _points_rows(best.config, residual_vector(EquilibriumProblem(args.system, best.config),
                                                             best.config), args.bits)
    ok = best is not None and all_matched
    out["verdict"] = "pass" if ok else "fail"
    return ok, out, rows


# --- parser ------------------------------------------------------------------------------

def _common(p):
    p.add_argument("--bits", type=int, default=256, help="working precision in bits (default 256)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the report here instead of standard output")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--timestamp", action="store_true", help="add a timestamp to the run manifest")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pivlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    groups = parser.add_subparsers(dest="group", required=True)

    fam = groups.add_parser("families").add_subparsers(dest="command", required=True)
    p = fam.add_parser("gen", help="generate a polynomial family member")
    p.add_argument("--kind", choices=("hermite", "adler-moser", "adler-moser-wronskian", "hermite-wronskian"),
                   default="hermite")
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--taus", default="")
    p.add_argument("--ks", default="")
    _common(p)
    p.set_defaults(func=cmd_families_gen)

    sol = groups.add_parser("solutions").add_subparsers(dest="command", required=True)
    p = sol.add_parser("build", help="build f, w and u for a closed-form solution")
    p.add_argument("--mode", choices=("adler_moser", "exp", "hermite"), default="hermite")
    p.add_argument("--spec", help="SolutionSpec JSON file")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--direction", type=int, default=1)
    p.add_argument("--nu", default="1")
    p.add_argument("--taus", default="")
    p.add_argument("--ks", default="")
    p.add_argument("--k-extra", type=int, default=1)
    _common(p)
    p.set_defaults(func=cmd_solutions_build)

    ver = groups.add_parser("verify").add_subparsers(dest="command", required=True)
    for name, func in (("stieltjes", cmd_verify_stieltjes), ("calogero", cmd_verify_calogero)):
        p = ver.add_parser(name)
        p.add_argument("--hermite", type=int)
        p.add_argument("--ks", help="zeros of the Hermite Wronskian W(H_k1, ...)")
        p.add_argument("--poly")
        if name == "stieltjes":
            p.add_argument("--f", help="rational f: check Res f^2 = ... = Res f^{2|m|} = 0")
        _common(p)
        p.set_defaults(func=func)
    p = ver.add_parser("monodromy")
    p.add_argument("--u")
    p.add_argument("--potential", help="RatFunc JSON file")
    p.add_argument("--ks")
    p.add_argument("--adler-moser", type=int)
    p.add_argument("--taus", default="")
    p.add_argument("--exact", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_verify_monodromy)
    p = ver.add_parser("theorem1")
    p.add_argument("--w", required=True)
    _common(p)
    p.set_defaults(func=cmd_verify_theorem1)
    p = ver.add_parser("chain")
    p.add_argument("--fs", help="semicolon-separated f_1; ...; f_N")
    p.add_argument("--input", help="DressingChain JSON file")
    _common(p)
    p.set_defaults(func=cmd_verify_chain)
    p = ver.add_parser("piv")
    p.add_argument("--w", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    _common(p)
    p.set_defaults(func=cmd_verify_piv)

    ch = groups.add_parser("chains").add_subparsers(dest="command", required=True)
    p = ch.add_parser("build")
    p.add_argument("--flag", required=True, help='e.g. "[]<[1]<[1,2]"')
    p.add_argument("--mu", default="1")
    _common(p)
    p.set_defaults(func=cmd_chains_build)
    p = ch.add_parser("cycles")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--bound", type=int)
    _common(p)
    p.set_defaults(func=cmd_chains_cycles)

    p = groups.add_parser("solve", help="multistart equilibrium solve")
    p.add_argument("--system", choices=("stieltjes", "calogero"), default="stieltjes")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--starts", type=int, default=8)
    p.add_argument("--deflate", action="store_true")
    p.add_argument("--max-iterations", type=int, default=200)
    p.add_argument("--match-ks", help="match converged runs against zeros of W(H_k, k in ks)")
    _common(p)
    p.set_defaults(func=cmd_solve)
    return parser


def _attach_negative_values(argv):
    """Join ``--w -1/z`` into ``--w=-1/z`` so expressions may start with a minus sign."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if (tok.startswith("--") and "=" not in tok and nxt is not None and nxt.startswith("-")
                and not nxt.startswith("--") and nxt != "-h"):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _without_out(argv):
    """The output path does not change the content, so it stays out of the manifest."""
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
        elif tok == "--out":
            skip = True
        elif not tok.startswith("--out="):
            out.append(tok)
    return out


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_attach_negative_values(argv))
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    manifest = RunManifest(_without_out(argv), args.bits, args.seed,
                           timestamp=datetime.now(timezone.utc).isoformat() if args.timestamp else None)
    try:
        with mpmath.workprec(args.bits + 32):
            ok, report, rows = args.func(args)
    except InputError as exc:
        print(f"pivlab: malformed input: {exc}", file=sys.stderr)
        return 2
    except ConstructionError as exc:
        report = {"verdict": "fail", "error": str(exc), "diagnostics": exc.diagnostics}
        ok, rows = False, None
    except PivlabError as exc:
        print(f"pivlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if args.format == "csv" and rows is None:
        print("pivlab: this command has no point set; use --format json", file=sys.stderr)
        return 2
    text = emit_report(report, args.format, rows, manifest)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


def main():
    sys.exit(run())
