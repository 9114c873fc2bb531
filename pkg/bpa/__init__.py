"""
bpa-bisim: bisimilarity of Basic Process Algebra processes.

- Regular strings over nonterminals in canonical lasso form
- Norms, size constants and the labelled transition system
- Bounded eq-levels, decompositions with congruence proofs
- The Prover-Refuter game, its strategies and an exhaustive solver
- A terminating decision procedure for normed systems
"""

from .bpa_core import BpaSystem, ExtNat, OMEGA, Rule, complete_dead, compute_norms, parse_system, validate
from .decomposition import Decomposition, check_decomposition, prover_decompositions, yield_delta
from .equivalence import EqLevelOracle, EqLevelResult, eqlevel_bounded
from .game import CompleteProver, GameOutcome, SoundRefuter, run_game
from .game_solver import SolverVerdict, solve_game
from .normed_analysis import complete_unnormed, decide_normed, eqlevel_bound
from .regular_strings import RegularString, canonicalize, parse_regular_string

__all__ = [
    "BpaSystem",
    "ExtNat",
    "OMEGA",
    "Rule",
    "complete_dead",
    "compute_norms",
    "parse_system",
    "validate",
    "Decomposition",
    "check_decomposition",
    "prover_decompositions",
    "yield_delta",
    "EqLevelOracle",
    "EqLevelResult",
    "eqlevel_bounded",
    "CompleteProver",
    "GameOutcome",
    "SoundRefuter",
    "run_game",
    "SolverVerdict",
    "solve_game",
    "complete_unnormed",
    "decide_normed",
    "eqlevel_bound",
    "RegularString",
    "canonicalize",
    "parse_regular_string",
]
