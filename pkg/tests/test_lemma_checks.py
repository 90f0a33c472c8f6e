"""Structural verifiers: pass on solved tables, gate on wrong inputs.

The verifiers return CheckReports and never assert; these tests pin
(a) that they pass on correct tables across k, (b) that they fail or
refuse when handed inputs outside their hypotheses, and (c) a few
exact numbers computed by hand:

  * at k = 2 with beta = (1, r), rates p = (3, 2/r): the only nonzero
    smallest-missing gap is at S = {2} and equals 2 p2/(p1 + p2)
    exactly, so r = 10 gives gap = (2/5)/(16/5) = 1/8 and relative gap
    (1/8)/3 = 1/24 ~ 0.0417.
"""

from fractions import Fraction

import numpy as np
import pytest

from wkserver.constants import build_constants
from wkserver.errors import MonotonicityError, UsageError
from wkserver.lemma_checks import (verify_current_bounds,
                                   verify_current_monotonicity,
                                   verify_feasibility, verify_limit,
                                   verify_p_monotonicity,
                                   verify_sweep_claims, verify_supermodularity,
                                   verify_symmetry, verify_tight_system)
from wkserver.potentials import solve_direct, solve_gauss_seidel


def monotone_p(rng, k, lo=0.05):
    return tuple(sorted(map(float, rng.uniform(lo, 1.0, k)), reverse=True))


@pytest.fixture(scope="module")
def tables():
    rng = np.random.default_rng(2024)
    out = {}
    for k in (2, 3, 4, 6):
        p = monotone_p(rng, k)
        out[k] = (p, solve_direct(k, p))
    return out


# ---------------------------------------------------------------------------
# verifiers hold on correct tables
# ---------------------------------------------------------------------------


def test_tight_system_passes_monotone_and_not(tables):
    for k, (p, t) in tables.items():
        rep = verify_tight_system(t)
        assert rep.passed, rep.summary()
    # non-monotone p: the flow balance still holds
    t = solve_direct(3, (1.0, 3.0, 2.0))
    assert verify_tight_system(t).passed


def test_ordered_verifiers_pass(tables):
    c = build_constants(6)
    for k, (p, t) in tables.items():
        for rep in (verify_feasibility(t),
                    verify_current_monotonicity(t),
                    verify_supermodularity(t),
                    verify_current_bounds(t, c)):
            assert rep.passed, (k, rep.summary())


def test_gauss_seidel_tables_verify_too(tables):
    p, _ = tables[4]
    t = solve_gauss_seidel(4, p)
    assert verify_tight_system(t).passed
    assert verify_feasibility(t).passed


def test_symmetry_holds_for_tied_tail():
    rep = verify_symmetry(3, (0.9, 0.4, 0.4))
    assert rep.passed, rep.summary()
    rep = verify_symmetry(2, (0.7, 0.7), backend="gauss_seidel")
    assert rep.passed


def test_p_monotonicity_holds():
    rep = verify_p_monotonicity(2, (3.0, 2.0), 1.0)
    assert rep.passed, rep.summary()
    rep = verify_p_monotonicity(4, (1.0, 0.7, 0.5, 0.4), 0.1)
    assert rep.passed


def test_sweep_claims_hold(tables):
    for k in (2, 4):
        p, _ = tables[k]
        rep = verify_sweep_claims(k, p)
        assert rep.passed, rep.summary()
        assert any(r.check == "sweep-monotone" for r in rep.records)
        assert any(r.check == "sweep-exchange" for r in rep.records)
        assert any(r.check == "exchange-converged" for r in rep.records)


# ---------------------------------------------------------------------------
# hand-computed limit numbers
# ---------------------------------------------------------------------------


def test_limit_gap_value_k2_r10():
    c = build_constants(2)
    # threshold just above 1/24 passes, just below fails
    rep = verify_limit(2, c, (10,), threshold=0.042)
    assert rep.passed, rep.summary()
    rep = verify_limit(2, c, (10,), threshold=0.041)
    assert not rep.passed
    bad = rep.failures
    assert len(bad) == 1
    assert bad[0].subset == 0b10
    # the record carries the gap relative to C_S: (1/8) / 3 = 1/24
    assert bad[0].lhs == pytest.approx(1 / 24)
    # and the absolute gap 1/8 shows up on the nonnegativity record
    nn = [r for r in rep.records
          if r.check == "gap-nonnegative-r0" and r.subset == 0b10]
    assert nn and nn[0].lhs == pytest.approx(1 / 8)


def test_limit_gaps_shrink_and_pass_far_out():
    c = build_constants(3)
    rep = verify_limit(3, c, (10, 100, 10000), threshold=1e-3)
    assert rep.passed, rep.summary()
    checks = {r.check for r in rep.records}
    assert "gap-nonnegative-r0" in checks
    assert "gap-non-increasing-r2" in checks
    assert "gap-final-threshold" in checks


def test_limit_argument_gates():
    c = build_constants(2)
    with pytest.raises(UsageError):
        verify_limit(2, c, ())
    with pytest.raises(UsageError):
        verify_limit(2, c, (100, 10))      # not increasing
    with pytest.raises(UsageError):
        verify_limit(2, c, (1,))           # r must exceed 1
    with pytest.raises(UsageError):
        verify_limit(3, c, (10,))          # constant table too small


# ---------------------------------------------------------------------------
# hypothesis gates: wrong inputs refused loudly
# ---------------------------------------------------------------------------


def test_ordered_verifiers_refuse_non_monotone():
    t = solve_direct(3, (1.0, 3.0, 2.0))
    c = build_constants(3)
    with pytest.raises(MonotonicityError):
        verify_feasibility(t)
    with pytest.raises(MonotonicityError):
        verify_current_monotonicity(t)
    with pytest.raises(MonotonicityError):
        verify_supermodularity(t)
    with pytest.raises(MonotonicityError):
        verify_current_bounds(t, c)
    with pytest.raises(MonotonicityError):
        verify_sweep_claims(3, (1.0, 3.0, 2.0))


def test_symmetry_preconditions():
    with pytest.raises(UsageError):
        verify_symmetry(1, (1.0,))
    with pytest.raises(UsageError):
        verify_symmetry(3, (0.9, 0.5, 0.4))   # tail not tied
    with pytest.raises(UsageError):
        verify_symmetry(2, (0.7, 0.7), backend="nonsense")


def test_p_monotonicity_preconditions():
    with pytest.raises(UsageError):
        verify_p_monotonicity(2, (3.0, 2.0), 0.0)
    with pytest.raises(UsageError):
        verify_p_monotonicity(2, (3.0, 2.0), 2.5)  # not smaller
    with pytest.raises(MonotonicityError):
        verify_p_monotonicity(2, (2.0, 3.0), 1.0)


def test_reports_serialize():
    t = solve_direct(2, (3.0, 2.0))
    rep = verify_tight_system(t)
    text = rep.to_json()
    assert '"tight-system"' in text
    assert rep.summary().startswith("tight-system: pass")
