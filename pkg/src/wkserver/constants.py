"""Subset-lattice constants for the uniform-metric weighted server game.

Each subset S of [k] carries an integer constant C_S defined by the
recursion

    C_empty = 1
    C_S     = 1 + sum over j in S of C_{S \\ {j} union [j-1]}

(removing an element and back-filling everything below it). Alongside
them live the scalars

    alpha_0 = 0,   alpha_m = alpha_{m-1}^2 + 3 alpha_{m-1} + 1

so alpha_1, alpha_2, alpha_3 = 1, 5, 41. The two families are welded
together by three identities, checked exhaustively by
check_constant_identities:

    (a) if m = max(S) then C_S = (alpha_{m-1} + 2) * C_{S \\ {m}}
    (b) alpha_m = sum over j of C_{[m] \\ {j}} = C_{[m]} - 1
    (c) C_{[m] \\ {1}} > C_{[m] \\ {2}} > ... > C_{[m] \\ {m}}

C_S is the tight upper bound on the flow a server configuration can
absorb (see the current bounds in lemma_checks), and the C_{[k] \\ {i}}
profile is what the ratio machinery feeds back in as rates. alpha_k is
the k-server competitive-ratio value this whole laboratory circles
around; it grows doubly exponentially, and everything here is exact
integer arithmetic for that reason.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from . import subsets
from .errors import UsageError
from .reports import CheckReport, as_float


def _alpha_sequence(k: int) -> tuple[int, ...]:
    a = [0]
    for _ in range(k):
        a.append(a[-1] * a[-1] + 3 * a[-1] + 1)
    return tuple(a)


@dataclass(frozen=True)
class ConstantTable:
    """All C_S for S subseteq [k], plus alpha_0..alpha_k.

    c[mask] is C_S for the bitmask encoding of S (bit i-1 <-> element i);
    alpha[m] is alpha_m, with the conventional alpha[0] = 0. Entries are
    exact ints. Instances are immutable; share freely.
    """

    k: int
    c: tuple[int, ...]
    alpha: tuple[int, ...]

    def c_of(self, mask: int) -> int:
        subsets.validate_mask(mask, self.k)
        return self.c[mask]

    def to_json(self, indent: int | None = None) -> str:
        # ints as decimal strings: alpha_20 has ~300000 digits and JSON
        # numbers that size are a portability trap
        return json.dumps({
            "k": self.k,
            "alpha": [str(a) for a in self.alpha[1:]],
            "C": {str(mask): str(v) for mask, v in enumerate(self.c)},
        }, indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "ConstantTable":
        obj = json.loads(text)
        k = int(obj["k"])
        subsets.validate_k(k)
        alpha = (0,) + tuple(int(a) for a in obj["alpha"])
        if len(alpha) != k + 1:
            raise UsageError("alpha list length does not match k")
        c = [0] * (1 << k)
        if len(obj["C"]) != 1 << k:
            raise UsageError("C table length does not match k")
        for mask_str, v in obj["C"].items():
            c[int(mask_str)] = int(v)
        return cls(k=k, c=tuple(c), alpha=alpha)


def build_constants(k: int) -> ConstantTable:
    """Fill the full C table and alpha sequence for dimension k.

    Iterates masks in increasing order; every recursion target
    S \\ {j} union [j-1] drops bit j-1 and only adds lower bits, so its
    mask is strictly smaller and already filled.
    """
    subsets.validate_k(k)
    c = [0] * (1 << k)
    c[0] = 1
    for mask in range(1, 1 << k):
        total = 1
        for j in subsets.elements(mask):
            total += c[(mask & ~subsets.bit(j)) | subsets.prefix_mask(j - 1)]
        c[mask] = total
    return ConstantTable(k=k, c=tuple(c), alpha=_alpha_sequence(k))


def check_constant_identities(table: ConstantTable) -> CheckReport:
    """Exhaustively check identities (a), (b), (c) for every m <= k.

    All comparisons are exact over ints; the recorded lhs/rhs are float
    casts (saturating to inf for the astronomically large entries) and
    defect is 0.0 or the float cast of the integer mismatch.
    """
    report = CheckReport("constant-identities")
    k = table.k
    for mask in range(1, 1 << k):
        m = subsets.largest_element(mask)
        lhs = table.c[mask]
        rhs = (table.alpha[m - 1] + 2) * table.c[mask & ~subsets.bit(m)]
        report.add("factorization", mask, m, lhs, rhs,
                   abs(lhs - rhs), lhs == rhs)
    for m in range(1, k + 1):
        full_m = subsets.prefix_mask(m)
        row_sum = sum(table.c[full_m & ~subsets.bit(j)] for j in range(1, m + 1))
        report.add("alpha-as-row-sum", full_m, m, table.alpha[m], row_sum,
                   abs(table.alpha[m] - row_sum), table.alpha[m] == row_sum)
        report.add("alpha-as-full-set", full_m, m,
                   table.alpha[m], table.c[full_m] - 1,
                   abs(table.alpha[m] - (table.c[full_m] - 1)),
                   table.alpha[m] == table.c[full_m] - 1)
        for j in range(1, m):
            hi = table.c[full_m & ~subsets.bit(j)]
            lo = table.c[full_m & ~subsets.bit(j + 1)]
            report.add("near-full-chain", full_m, j, hi, lo,
                       as_float(lo - hi + 1), hi > lo)
    return report


def alpha_growth_bound(k: int) -> CheckReport:
    """Exact growth facts about alpha: squaring-style blowup and the
    doubly exponential envelope.

    For every 2 <= m <= k:    alpha_m + 2 < (alpha_{m-1} + 2)^2
    For every 1 <= m <= k:    alpha_m < (8/5)^(2^m)

    The envelope comparison is done over exact rationals
    (alpha_m * 5^(2^m) < 8^(2^m)), never through floats.
    """
    subsets.validate_k(k)
    alpha = _alpha_sequence(k)
    report = CheckReport("alpha-growth")
    for m in range(2, k + 1):
        lhs = alpha[m] + 2
        rhs = (alpha[m - 1] + 2) ** 2
        report.add("square-step", -1, m, lhs, rhs,
                   as_float(lhs - rhs + 1), lhs < rhs)
    for m in range(1, k + 1):
        e = 1 << m
        envelope = Fraction(8, 5) ** e
        holds = alpha[m] < envelope
        report.add("envelope-8-5", -1, m, alpha[m], as_float(envelope),
                   0.0 if holds else as_float(alpha[m] - envelope), holds)
    return report
