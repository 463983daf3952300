import re
from collections import defaultdict

CRITERIA = {
    1: "Hermite ODE identity, n <= 64",
    2: "Stieltjes residual at Hermite zeros, n <= 12, and perturbation",
    3: "Exact divisibility Stieltjes test, n <= 32, and H_n + 1",
    4: "Res (z + w)^2 = 0 on chain solutions of flag height <= 2, and w + 1",
    5: "Generalized Stieltjes vs trivial monodromy on 50 random functions",
    6: "Trivial monodromy of Adler-Moser and Hermite-Wronskian potentials",
    7: "Calogero relations at Hermite and W(H_1, H_2) zeros",
    8: "Equilibrium recovery from seeded random starts",
    9: "Dressing-chain closure and PIV reduction",
    10: "Residue-cycle enumeration, N in {3, 5, 7, 9}",
    11: "PIV pole expansion: residue +-1, constant term -z0",
}

_PATTERN = re.compile(r"test_acceptance\.py::test_ac(\d+)_")
_outcomes = defaultdict(list)
_notes = defaultdict(list)


def pytest_runtest_logreport(report):
    m = _PATTERN.search(report.nodeid)
    if not m:
        return
    ac = int(m.group(1))
    if report.when == "call" or report.outcome != "passed":
        _outcomes[ac].append(report.outcome)
    for key, value in report.user_properties:
        if key == "note" and report.when == "call":
            _notes[ac].append(value)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for ac, text in CRITERIA.items():
        results = _outcomes.get(ac)
        if not results:
            status = "NOT RUN"
        elif all(r == "passed" for r in results):
            status = "PASS"
        else:
            status = "FAIL"
        tr.write_line(f"AC{ac:<3} {status:<8} {text} ({len(results or [])} checks)")
        for note in dict.fromkeys(_notes.get(ac, [])):
            tr.write_line(f"          note: {note}")
