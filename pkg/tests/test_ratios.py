"""The performance functional alpha~, rate choices, and bounds.

Hand oracles:

  * k = 2 at the weight-matched rates: alpha~ = 5 exactly, for every
    weight pair. Verified here in exact arithmetic via Fractions, not
    just floats.
  * weight-matched rates for beta = (1, 10): C profile (3, 2) over
    beta gives p = (3, 0.2); for k = 3, beta = (1, 1, 1): C profile
    (21, 14, 6) stays as is.
  * lower bound formula alpha/(1 + s alpha): alpha = 5, s = 0.1 gives
    10/3.
"""

from fractions import Fraction

import numpy as np
import pytest

from wkserver.constants import build_constants
from wkserver.errors import MonotonicityError, UsageError
from wkserver.potentials import solve_direct
from wkserver.ratios import (WeightVector, alpha_tilde, harmonic_p,
                             limit_optimality_sweep, lower_bound_ratio,
                             optimal_p, ratio_functional)


def result_for(beta, exact=False):
    c = build_constants(len(tuple(beta)))
    p = optimal_p(beta, c, exact=exact)
    t = solve_direct(len(p.values), p, exact=exact)
    return alpha_tilde(beta, None, t), p, t


# ---------------------------------------------------------------------------
# the k = 2 headline value
# ---------------------------------------------------------------------------


def test_alpha_tilde_is_exactly_five_at_k2_optimal():
    c = build_constants(2)
    for beta in ((1, 2), (1, 10), (1, 1000), (7, 7)):
        p = optimal_p(beta, c, exact=True)
        t = solve_direct(2, p, exact=True)
        bv = WeightVector.from_user(beta)
        alpha, arg, per, weighted = ratio_functional(
            tuple(Fraction(x) for x in bv.values), p.values, t)
        assert alpha == Fraction(5), (beta, alpha)


def test_alpha_tilde_float_path_k2():
    res, p, t = result_for((1.0, 10.0))
    assert res.alpha_tilde == pytest.approx(5.0, rel=1e-12)
    assert res.arg_t == 2
    assert res.arg_t_canonical == 2
    assert res.s == pytest.approx(0.1)
    assert res.lower_bound == pytest.approx(10 / 3, rel=1e-12)
    assert res.per_server[res.arg_t - 1] == max(res.per_server)


def test_k1_ratio_is_one():
    res, p, t = result_for((4.0,))
    assert res.alpha_tilde == pytest.approx(1.0, rel=1e-14)
    assert res.s == 0.0
    assert res.lower_bound == pytest.approx(1.0, rel=1e-14)
    assert res.arg_t == 1


# ---------------------------------------------------------------------------
# rate choices
# ---------------------------------------------------------------------------


def test_optimal_p_values():
    c = build_constants(3)
    assert optimal_p((1.0, 10.0), c).values == (3.0, 0.2)
    assert optimal_p((1.0, 1.0, 1.0), c).values == (21.0, 14.0, 6.0)
    exact = optimal_p((1, 3), c, exact=True)
    assert exact.values == (Fraction(3), Fraction(2, 3))


def test_optimal_p_is_always_monotone():
    rng = np.random.default_rng(17)
    c = build_constants(8)
    for k in (2, 5, 8):
        beta = tuple(sorted(rng.uniform(0.1, 10.0, k)))
        assert optimal_p(beta, c).monotone


def test_harmonic_p():
    assert harmonic_p((1.0, 4.0)).values == (1.0, 0.25)
    assert harmonic_p((2,), exact=True).values == (Fraction(1, 2),)


# ---------------------------------------------------------------------------
# invariances
# ---------------------------------------------------------------------------


def test_alpha_invariant_under_scaling_p():
    c = build_constants(3)
    beta = (1.0, 2.0, 6.0)
    base_p = optimal_p(beta, c)
    base = alpha_tilde(beta, None, solve_direct(3, base_p)).alpha_tilde
    for scale in (0.1, 1.0, 10.0):
        pv = tuple(scale * x for x in base_p.values)
        got = alpha_tilde(beta, None, solve_direct(3, pv)).alpha_tilde
        assert got == pytest.approx(base, rel=1e-11)


def test_alpha_invariant_under_scaling_beta():
    c = build_constants(3)
    beta = (1.0, 2.0, 6.0)
    p = optimal_p(beta, c)
    t = solve_direct(3, p)
    base = alpha_tilde(beta, None, t).alpha_tilde
    scaled = alpha_tilde(tuple(3.0 * b for b in beta), None, t).alpha_tilde
    assert scaled == pytest.approx(base, rel=1e-12)


def test_user_order_round_trip():
    # same weights handed over in reversed order: same alpha~, same
    # canonical argmax, per_server permuted to match the caller
    res_fwd, _, t = result_for((1.0, 10.0))
    res_rev = alpha_tilde((10.0, 1.0), None, t)
    assert res_rev.alpha_tilde == pytest.approx(res_fwd.alpha_tilde)
    assert res_rev.arg_t_canonical == res_fwd.arg_t_canonical
    assert res_rev.arg_t == 1          # the heavy weight sits first now
    assert res_rev.per_server == tuple(reversed(res_fwd.per_server))


# ---------------------------------------------------------------------------
# bounds sanity on random weights
# ---------------------------------------------------------------------------


def test_alpha_bounds_sampled():
    rng = np.random.default_rng(23)
    c = build_constants(5)
    for k in (2, 3, 5):
        ak = c.alpha[k]
        for _ in range(5):
            beta = tuple(sorted(rng.uniform(0.5, 20.0, k)))
            p_opt = optimal_p(beta, c)
            res = alpha_tilde(beta, None, solve_direct(k, p_opt))
            assert res.alpha_tilde <= ak + 1e-9
            p_har = harmonic_p(beta)
            res_h = alpha_tilde(beta, None, solve_direct(k, p_har))
            assert res_h.alpha_tilde <= k * ak + 1e-9
            assert res.lower_bound <= res.alpha_tilde + 1e-12


def test_lower_bound_formula():
    assert lower_bound_ratio(5.0, 0.1) == pytest.approx(10 / 3)
    assert lower_bound_ratio(5.0, 0.0) == 5.0
    assert lower_bound_ratio(5.0, 1.0) == pytest.approx(5 / 6)
    # decreasing in s
    vals = [lower_bound_ratio(41.0, s) for s in (0.0, 0.2, 0.5, 1.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(UsageError):
        lower_bound_ratio(0.0, 0.5)
    with pytest.raises(UsageError):
        lower_bound_ratio(5.0, 1.5)


# ---------------------------------------------------------------------------
# gates
# ---------------------------------------------------------------------------


def test_alpha_tilde_refuses_non_monotone_p():
    t = solve_direct(2, (1.0, 2.0))
    with pytest.raises(MonotonicityError):
        alpha_tilde((1.0, 2.0), None, t)


def test_alpha_tilde_refuses_mismatched_table():
    t = solve_direct(2, (3.0, 2.0))
    with pytest.raises(UsageError):
        alpha_tilde((1.0, 2.0), (3.0, 1.0), t)
    with pytest.raises(UsageError):
        alpha_tilde((1.0, 2.0, 3.0), None, t)


def test_weight_vector_gates():
    with pytest.raises(UsageError):
        WeightVector.from_user(())
    with pytest.raises(UsageError):
        WeightVector.from_user((1.0, -2.0))
    with pytest.raises(UsageError):
        WeightVector(values=(2.0, 1.0), order=(0, 1))   # not ascending
    wv = WeightVector.from_user((5.0, 1.0, 3.0))
    assert wv.values == (1.0, 3.0, 5.0)
    assert wv.user_values() == (5.0, 1.0, 3.0)
    assert [wv.to_user_index(i) for i in (1, 2, 3)] == [2, 3, 1]


# ---------------------------------------------------------------------------
# the exact limit sweep
# ---------------------------------------------------------------------------


def test_limit_optimality_sweep_k2():
    c = build_constants(2)
    rep = limit_optimality_sweep(2, (10, 100), c, threshold_rel=1e-2)
    assert rep.passed, rep.summary()
    below = [r for r in rep.records if r.check.startswith("alpha-below")]
    # at k = 2 the functional sits at the limit exactly, for every r
    assert below and all(r.lhs == 5.0 for r in below)
    assert any(r.check == "alpha-final-threshold" for r in rep.records)


def test_limit_optimality_sweep_gates():
    c = build_constants(2)
    with pytest.raises(UsageError):
        limit_optimality_sweep(2, (), c)
    with pytest.raises(UsageError):
        limit_optimality_sweep(3, (10,), c)   # table too small
