"""Bitmask subsets of {1, ..., k} and the co-lexicographic order.

Every table in this package is indexed by subsets S of the server set
[k] = {1, ..., k}, stored as plain Python ints: bit i-1 set means
element i is in S. Masks therefore run from 0 (empty set) to 2**k - 1
(the full set), and a table over all subsets is just a sequence of
length 2**k.

Co-lex order compares two sets by their largest differing element: S
precedes T when that element belongs to T. On bitmasks this is exactly
unsigned integer comparison, which is why iterating masks in increasing
numeric order is a valid bottom-up order for every recurrence used
here: each set's recursion targets have strictly smaller masks.
"""

from __future__ import annotations

from .errors import UsageError

K_MAX = 20  # tables are dense in 2**k; beyond this they stop fitting anything


def full_mask(k: int) -> int:
    """Mask of [k] itself."""
    return (1 << k) - 1


def bit(i: int) -> int:
    """Mask of the singleton {i}, 1-based."""
    return 1 << (i - 1)


def prefix_mask(m: int) -> int:
    """Mask of [m] = {1, ..., m}; [0] is the empty set."""
    return (1 << m) - 1


def contains(mask: int, i: int) -> bool:
    return (mask >> (i - 1)) & 1 == 1


def elements(mask: int):
    """Yield the elements of the set in increasing order."""
    i = 1
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def largest_element(mask: int) -> int:
    """max(S); errors on the empty set."""
    if mask <= 0:
        raise UsageError("largest_element of the empty set")
    return mask.bit_length()


def smallest_missing(mask: int) -> int:
    """The least i >= 1 not in S. For S = [m] this is m + 1."""
    # ~mask has its lowest set bit exactly at the first gap
    return ((~mask) & (mask + 1)).bit_length()


def popcount(mask: int) -> int:
    return mask.bit_count()


def colex_precedes(a: int, b: int) -> bool:
    """True iff subset a strictly precedes subset b in co-lex order.

    Definition: the largest element where the two sets differ belongs
    to b. Coincides with a < b on bitmasks (the largest differing bit
    decides an unsigned comparison), which the test suite checks pair
    by pair.
    """
    if a < 0 or b < 0:
        raise UsageError("negative bitmask")
    d = a ^ b
    if d == 0:
        return False
    return contains(b, d.bit_length())


def subsets_of(mask: int):
    """Yield all submasks of mask, increasing, including 0 and mask itself."""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        # standard subset-enumeration step: next submask in increasing order
        sub = (sub - mask) & mask


def validate_k(k: int) -> None:
    if not isinstance(k, int) or not (1 <= k <= K_MAX):
        raise UsageError(f"k must be an integer in 1..{K_MAX}, got {k!r}")


def validate_mask(mask: int, k: int) -> None:
    if not isinstance(mask, int) or not (0 <= mask < (1 << k)):
        raise UsageError(f"mask {mask!r} is not a subset of [{k}]")
