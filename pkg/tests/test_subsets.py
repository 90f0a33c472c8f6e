"""Bitmask subset helpers: exhaustive checks against brute force."""

import pytest

from wkserver import subsets
from wkserver.errors import UsageError


def brute_elements(mask):
    return [i + 1 for i in range(mask.bit_length()) if mask >> i & 1]


def brute_colex(a, b):
    """Colex: compare by the largest element where the sets differ."""
    diff = a ^ b
    if diff == 0:
        return False
    top = diff.bit_length() - 1
    return not (a >> top & 1)


def test_full_and_prefix_masks():
    assert subsets.full_mask(3) == 0b111
    assert subsets.prefix_mask(0) == 0
    assert subsets.prefix_mask(4) == 0b1111
    assert subsets.bit(1) == 1
    assert subsets.bit(3) == 4


def test_elements_and_membership_exhaustive():
    for mask in range(1 << 6):
        els = list(subsets.elements(mask))
        assert els == brute_elements(mask)
        for i in range(1, 7):
            assert subsets.contains(mask, i) == (i in els)
        assert subsets.popcount(mask) == len(els)


def test_largest_and_smallest_missing():
    assert subsets.largest_element(0b1010) == 4
    assert subsets.smallest_missing(0b1011) == 3
    assert subsets.smallest_missing(0) == 1
    for mask in range(1, 1 << 8):
        assert subsets.largest_element(mask) == max(brute_elements(mask))
    for mask in range(1 << 8):
        missing = next(i for i in range(1, 10)
                       if i not in brute_elements(mask))
        assert subsets.smallest_missing(mask) == missing


def test_largest_element_rejects_empty():
    with pytest.raises(UsageError):
        subsets.largest_element(0)


def test_colex_matches_brute_force_all_pairs():
    n = 1 << 7
    for a in range(n):
        for b in range(n):
            assert subsets.colex_precedes(a, b) == brute_colex(a, b), (a, b)


def test_colex_is_a_strict_total_order_on_masks():
    masks = sorted(range(1 << 6),
                   key=lambda m: sum(1 for x in range(1 << 6)
                                     if subsets.colex_precedes(x, m)))
    for lo, hi in zip(masks, masks[1:]):
        assert subsets.colex_precedes(lo, hi)
        assert not subsets.colex_precedes(hi, lo)


def test_subsets_of_enumerates_exactly_the_subsets():
    for mask in (0, 0b1, 0b1010, 0b10110, 0b11111):
        subs = list(subsets.subsets_of(mask))
        assert len(subs) == 1 << subsets.popcount(mask)
        assert len(set(subs)) == len(subs)
        for s in subs:
            assert s & ~mask == 0


def test_validators():
    subsets.validate_k(1)
    subsets.validate_k(subsets.K_MAX)
    for bad in (0, -3, subsets.K_MAX + 1, 2.5):
        with pytest.raises(UsageError):
            subsets.validate_k(bad)
    subsets.validate_mask(0b101, 3)
    with pytest.raises(UsageError):
        subsets.validate_mask(0b1000, 3)
    with pytest.raises(UsageError):
        subsets.validate_mask(-1, 3)
