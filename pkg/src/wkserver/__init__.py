"""Computational laboratory for weighted k-server on uniform metrics.

A memoryless randomized algorithm on a uniform metric moves, on a
request its configuration misses, server i with probability
p_i / sum(p). This package computes the combinatorial constants and
subset potentials that govern that algorithm's competitive ratio,
checks the structural facts the analysis rests on, and simulates the
matching adversary so theory and play can be compared number for
number.

The layout mirrors the pipeline:

    constants      growth constants C_S and the limits alpha_k
    potentials     phi_S / f_S tables and currents, two backends
    lemma_checks   verifiers for the structural facts (reports, no asserts)
    ratios         the performance functional alpha~, rate choices, bounds
    game           adversary-vs-algorithm play with a potential audit
    cli            command-line front end (constants, potentials, ratio,
                   verify, simulate, sweep)

Masks encode subsets of {1..k} with bit i-1 for server i; see the
subsets module. All randomness flows through numpy Generators seeded
with explicit SeedSequences, so every number here is reproducible.
"""

from .constants import ConstantTable, alpha_growth_bound, build_constants, \
    check_constant_identities
from .errors import InternalConsistencyError, MonotonicityError, \
    NonConvergenceError, UsageError
from .game import AuditRecord, CostLedger, GameState, adversary_turn, \
    agreement_mask, algorithm_turn, check_invariant, eviction_fixup, \
    free_point, init_game, potential_audit_step, run
from .lemma_checks import verify_current_bounds, verify_current_monotonicity, \
    verify_feasibility, verify_limit, verify_p_monotonicity, \
    verify_supermodularity, verify_sweep_claims, verify_symmetry, \
    verify_tight_system
from .potentials import Current, PotentialTable, ProbVector, all_currents, \
    current, currents_into, level_sweeps, solve_direct, solve_gauss_seidel
from .ratios import RatioResult, WeightVector, alpha_tilde, harmonic_p, \
    limit_optimality_sweep, lower_bound_ratio, optimal_p, ratio_functional
from .reports import CheckRecord, CheckReport

__all__ = [
    "ConstantTable", "build_constants", "check_constant_identities",
    "alpha_growth_bound",
    "ProbVector", "PotentialTable", "Current", "solve_direct",
    "solve_gauss_seidel", "level_sweeps", "current", "currents_into",
    "all_currents",
    "verify_tight_system", "verify_feasibility",
    "verify_current_monotonicity", "verify_supermodularity",
    "verify_current_bounds", "verify_symmetry", "verify_p_monotonicity",
    "verify_sweep_claims", "verify_limit",
    "WeightVector", "RatioResult", "ratio_functional", "alpha_tilde",
    "optimal_p", "harmonic_p", "lower_bound_ratio", "limit_optimality_sweep",
    "GameState", "AuditRecord", "CostLedger", "init_game", "agreement_mask",
    "free_point", "check_invariant", "adversary_turn", "algorithm_turn",
    "eviction_fixup", "potential_audit_step", "run",
    "CheckRecord", "CheckReport",
    "UsageError", "MonotonicityError", "NonConvergenceError",
    "InternalConsistencyError",
]

__version__ = "1.0.0"
