"""Constant tables: an independent memoized oracle, hand values, identities.

The oracle below recomputes C_S straight from its defining recursion
with plain dict memoization over frozensets, sharing no code or data
layout with the package implementation.
"""

import json
from functools import cmp_to_key, lru_cache

import pytest

from wkserver import subsets
from wkserver.constants import (ConstantTable, alpha_growth_bound,
                                build_constants, check_constant_identities)
from wkserver.errors import UsageError

# alpha_m = alpha_{m-1}^2 + 3 alpha_{m-1} + 1 from 0, written out by hand
ALPHA_HAND = (0, 1, 5, 41, 1805, 3263441, 10650056950805)


@lru_cache(maxsize=None)
def oracle_c(s: frozenset) -> int:
    if not s:
        return 1
    total = 1
    for j in s:
        total += oracle_c(frozenset((s - {j}) | set(range(1, j))))
    return total


def mask_to_set(mask):
    return frozenset(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


def test_hand_values_smallest_sets():
    t = build_constants(2)
    assert t.c[0] == 1
    assert t.c[0b01] == 2          # C_{1} = 1 + C_empty
    assert t.c[0b10] == 3          # C_{2} = 1 + C_{1}
    assert t.c[0b11] == 6          # C_{1,2} = 1 + C_{2} + C_{1,1->fill}
    assert t.alpha == (0, 1, 5)


def test_alpha_sequence_hand_values():
    t = build_constants(6)
    assert t.alpha == ALPHA_HAND


def test_oracle_agreement_up_to_k8():
    for k in range(1, 9):
        t = build_constants(k)
        for mask in range(1 << k):
            assert t.c[mask] == oracle_c(mask_to_set(mask)), (k, mask)


def test_identities_exact_up_to_k12():
    for k in range(1, 13):
        rep = check_constant_identities(build_constants(k))
        assert rep.passed, rep.summary()
        assert rep.max_defect == 0.0


def test_growth_bound_exact_up_to_k12():
    for k in range(1, 13):
        rep = alpha_growth_bound(k)
        assert rep.passed, rep.summary()


def test_colex_monotonicity_of_c():
    # C grows along colex order: later sets absorb strictly more.
    t = build_constants(6)
    colex = sorted(range(1 << 6), key=cmp_to_key(
        lambda a, b: -1 if subsets.colex_precedes(a, b) else 1))
    assert colex[0] == 0 and colex[-1] == subsets.full_mask(6)
    for lo, hi in zip(colex, colex[1:]):
        assert subsets.colex_precedes(lo, hi)
        assert t.c[lo] < t.c[hi], (lo, hi)


def test_json_round_trip_identity():
    t = build_constants(7)
    back = ConstantTable.from_json(t.to_json())
    assert back == t
    # alpha entries travel as decimal strings, exactness preserved
    obj = json.loads(t.to_json())
    assert all(isinstance(a, str) for a in obj["alpha"])


def test_bad_k_rejected():
    for bad in (0, -1, subsets.K_MAX + 1):
        with pytest.raises(UsageError):
            build_constants(bad)
