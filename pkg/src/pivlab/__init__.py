"""Rational solutions of the Painleve-IV hierarchy: constructions, verifiers and log-gas equilibria."""

__version__ = "0.1.0"

from .chains import (
    DressingChain,
    PIVSolution,
    ResidueCycle,
    build_chain,
    chain_to_piv,
    enumerate_residue_cycles,
    piv_pole_expansion_check,
    solve_piv_params,
    verify_chain,
    verify_piv,
)
from .equilibria import EquilibriumProblem, EquilibriumResult, match_to_roots, potential_and_gradient, solve_equilibrium
from .exactalg import ExpPoly, Poly, RatFunc, parse_ratfunc, wronskian
from .families import HermiteSequence, TauVector, adler_moser, adler_moser_wronskian, hermite, hermite_wronskian
from .monodromy import MonodromyReport, trivial_monodromy_exact, trivial_monodromy_report
from .relations import (
    ChargeConfig,
    RelationReport,
    calogero_residual,
    generalized_stieltjes_check,
    stieltjes_exact_simple,
    stieltjes_residual,
    theorem1_check,
)
from .solutions import SolutionSpec, build_f, partial_fractions, piv_w_from_f, potential_from_f
