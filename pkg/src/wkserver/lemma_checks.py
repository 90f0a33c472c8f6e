"""Inequality and identity checks on solved potential tables.

Everything the competitive analysis needs from the potentials is a
finite list of inequalities over the subset lattice. Each verifier
below walks its full quantifier range and returns a CheckReport; none
of them mutate anything. The checks:

  tight system          I(S -> S+i) = 1 + sum_{j in S} I(S-j -> S)
                        at the smallest missing i, any positive p.
  feasibility           the same expression as an inequality (>=) for
                        every missing i, equality at the smallest.
  current monotonicity  I(S -> S+i) <= I(S -> S+j) for missing i <= j.
  supermodularity       phi_{S+i} + phi_{S+j} <= phi_{S+i+j} + phi_S,
                        equivalently currents only grow as the base
                        set grows.
  current bounds        1 <= I(S -> S+i) <= C_S at the smallest
                        missing i.
  symmetry              equal trailing rates make the table invariant
                        under swapping the last two servers.
  p-monotonicity        lowering the last rate raises every f entry.
  sweep claims          the iterative backend's sweeps are entrywise
                        non-decreasing, and within each sweep the
                        rate-weighted increments are ordered by the
                        added element.
  limit                 under rates C_{[k] \\ {i}} / r^(i-1) the
                        smallest-missing currents climb to C_S as the
                        weight separation r grows; runs in exact
                        rational arithmetic, where "nonnegative" and
                        "non-increasing" are exact statements.

The feasibility, monotonicity, supermodularity, bounds, and sweep
claims are theorems only for non-increasing p; those verifiers raise
MonotonicityError on anything else, so a hypothesis violation can
never masquerade as a numerical failure. The tight system needs no
hypothesis and is checked for arbitrary positive p.

Slack convention is the package-wide absolute+relative mix (see
reports.tol); the default 1e-9 sits orders of magnitude above
round-off for k <= 12 yet far below every true lemma gap seen at
random p, as calibrated against the exact-rational mode.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import subsets
from .constants import ConstantTable
from .errors import MonotonicityError, UsageError
from .potentials import (
    K_EXACT_MAX,
    ProbVector,
    PotentialTable,
    current,
    level_sweeps,
    _f_top,
    solve_direct,
    solve_gauss_seidel,
)
from .reports import CheckReport, as_float, tol

SLACK_DEFAULT = 1e-9


def _require_monotone(p: ProbVector, what: str) -> None:
    if not p.monotone:
        raise MonotonicityError(
            f"{what} is proved only for non-increasing rate vectors; "
            f"got a non-monotone p")


def _smallest_missing_pairs(table: PotentialTable):
    """Yield (S, i, I(S -> S+i), sum of currents into S) for S strict."""
    k = table.k
    for mask in range(0, (1 << k) - 1):
        i = subsets.smallest_missing(mask)
        up = current(table, mask | subsets.bit(i), i)
        into = sum(current(table, mask, j) for j in subsets.elements(mask))
        yield mask, i, up, into


def verify_tight_system(table: PotentialTable,
                        slack: float = SLACK_DEFAULT) -> CheckReport:
    """The per-state flow balance at the smallest missing element.

    Holds for every positive p, monotone or not.
    """
    report = CheckReport("tight-system")
    for mask, i, up, into in _smallest_missing_pairs(table):
        lhs, rhs = up, 1 + into
        defect = abs(lhs - rhs)
        report.add("tight-system", mask, i, lhs, rhs, defect,
                   defect <= tol(slack, lhs, rhs))
    return report


def verify_feasibility(table: PotentialTable,
                       slack: float = SLACK_DEFAULT) -> CheckReport:
    """I(S -> S+i) >= 1 + sum of currents into S, every missing i;
    equality at the smallest missing i."""
    _require_monotone(table.p, "feasibility")
    report = CheckReport("feasibility")
    k = table.k
    for mask in range(0, (1 << k) - 1):
        smallest = subsets.smallest_missing(mask)
        into = sum(current(table, mask, j) for j in subsets.elements(mask))
        rhs = 1 + into
        for i in range(1, k + 1):
            if subsets.contains(mask, i):
                continue
            lhs = current(table, mask | subsets.bit(i), i)
            if i == smallest:
                defect = abs(lhs - rhs)
            else:
                defect = rhs - lhs          # positive iff inequality broken
            report.add("feasibility", mask, i, lhs, rhs, defect,
                       defect <= tol(slack, lhs, rhs))
    return report


def verify_current_monotonicity(table: PotentialTable,
                                slack: float = SLACK_DEFAULT) -> CheckReport:
    """Adding a heavier (later-indexed) element draws at least as much
    current: I(S -> S+i) <= I(S -> S+j) for missing i <= j."""
    _require_monotone(table.p, "current monotonicity")
    report = CheckReport("current-monotonicity")
    k = table.k
    for mask in range(0, (1 << k) - 1):
        missing = [i for i in range(1, k + 1) if not subsets.contains(mask, i)]
        ups = {i: current(table, mask | subsets.bit(i), i) for i in missing}
        for a_pos in range(len(missing)):
            for b_pos in range(a_pos + 1, len(missing)):
                i, j = missing[a_pos], missing[b_pos]
                defect = ups[i] - ups[j]
                report.add("current-monotonicity", mask, i, ups[i], ups[j],
                           defect, defect <= tol(slack, ups[i], ups[j]))
    return report


def verify_supermodularity(table: PotentialTable,
                           slack: float = SLACK_DEFAULT) -> CheckReport:
    """phi is supermodular: phi_{S+i} + phi_{S+j} <= phi_{S+i+j} + phi_S.

    Also checks the equivalent current form over nested base sets:
    I(S' -> S'+i) <= I(S -> S+i) for every S' subseteq S not containing i.
    """
    _require_monotone(table.p, "supermodularity")
    report = CheckReport("supermodularity")
    k = table.k
    phi = table.phi
    for mask in range(0, 1 << k):
        missing = [i for i in range(1, k + 1) if not subsets.contains(mask, i)]
        for a_pos in range(len(missing)):
            for b_pos in range(a_pos + 1, len(missing)):
                i, j = missing[a_pos], missing[b_pos]
                lhs = phi[mask | subsets.bit(i)] + phi[mask | subsets.bit(j)]
                rhs = phi[mask | subsets.bit(i) | subsets.bit(j)] + phi[mask]
                defect = lhs - rhs
                report.add("supermodular-phi", mask, i, lhs, rhs, defect,
                           defect <= tol(slack, lhs, rhs))
    for mask in range(0, (1 << k) - 1):
        for i in range(1, k + 1):
            if subsets.contains(mask, i):
                continue
            big = current(table, mask | subsets.bit(i), i)
            for sub in subsets.subsets_of(mask):
                small = current(table, sub | subsets.bit(i), i)
                defect = small - big
                report.add("supermodular-current", mask, i, small, big,
                           defect, defect <= tol(slack, small, big))
    return report


def verify_current_bounds(table: PotentialTable, c: ConstantTable,
                          slack: float = SLACK_DEFAULT) -> CheckReport:
    """1 <= I(S -> S+i) <= C_S at the smallest missing i."""
    _require_monotone(table.p, "current bounds")
    if c.k < table.k:
        raise UsageError("constant table dimension smaller than potential table")
    report = CheckReport("current-bounds")
    for mask, i, up, _ in _smallest_missing_pairs(table):
        lower_defect = 1 - up
        report.add("current-lower", mask, i, up, 1.0, lower_defect,
                   lower_defect <= tol(slack, up, 1.0))
        cap_f = as_float(c.c[mask])
        upper_defect = up - cap_f
        report.add("current-upper", mask, i, up, cap_f, upper_defect,
                   upper_defect <= tol(slack, up, 1.0))
    return report


def verify_symmetry(k: int, p, backend: str = "direct",
                    slack: float = SLACK_DEFAULT) -> CheckReport:
    """With p_k = p_{k-1}, swapping the last two servers fixes the table.

    Solves internally, then compares f and phi across the swap
    S <-> S \\ {k-1} union {k} for every S containing exactly one of
    the two.
    """
    pv = ProbVector.coerce(p)
    if pv.k != k:
        raise UsageError(f"rate vector has length {pv.k}, expected {k}")
    if k < 2 or pv.values[k - 1] != pv.values[k - 2]:
        raise UsageError("symmetry check requires k >= 2 and p_k = p_{k-1} exactly")
    table = _solve(backend, k, pv)
    report = CheckReport("symmetry")
    lo, hi = subsets.bit(k - 1), subsets.bit(k)
    for mask in range(1, 1 << k):
        if subsets.contains(mask, k - 1) and not subsets.contains(mask, k):
            swapped = (mask & ~lo) | hi
            for what, a, b in (("f-swap", table.f[mask], table.f[swapped]),
                               ("phi-swap", table.phi[mask], table.phi[swapped])):
                defect = abs(a - b)
                report.add(what, mask, k - 1, a, b, defect,
                           defect <= tol(slack, a, b))
    return report


def verify_p_monotonicity(k: int, p, pk_smaller: float,
                          backend: str = "direct",
                          slack: float = SLACK_DEFAULT) -> CheckReport:
    """Lowering the last rate can only raise f: with p' = p except
    p'_k = pk_smaller <= p_k, every f_S(p') >= f_S(p)."""
    pv = ProbVector.coerce(p)
    if pv.k != k:
        raise UsageError(f"rate vector has length {pv.k}, expected {k}")
    _require_monotone(pv, "p-monotonicity")
    if not (0 < pk_smaller <= pv.values[-1]):
        raise UsageError("pk_smaller must lie in (0, p_k]")
    base = _solve(backend, k, pv)
    lowered = _solve(backend, k,
                     ProbVector(pv.values[:-1] + (float(pk_smaller),)))
    report = CheckReport("p-monotonicity")
    for mask in range(1, 1 << k):
        a, b = base.f[mask], lowered.f[mask]
        defect = a - b                      # positive iff f dropped
        report.add("f-nondecreasing-as-pk-drops", mask,
                   subsets.largest_element(mask), b, a, defect,
                   defect <= tol(slack, a, b))
    return report


def _solve(backend: str, k: int, pv: ProbVector) -> PotentialTable:
    if backend == "direct":
        return solve_direct(k, pv)
    if backend in ("gauss_seidel", "gs"):
        return solve_gauss_seidel(k, pv)
    raise UsageError(f"unknown backend {backend!r}")


def verify_sweep_claims(k: int, p, tol_stop: float = 1e-10,
                        max_sweeps: int = 2_000_000,
                        slack: float = SLACK_DEFAULT) -> CheckReport:
    """Per-sweep structure of the iterative backend, checked at every
    sweep it executes.

    (a) sweep monotonicity: f never decreases, entrywise, sweep over
        sweep (true for any positive p; the whole run is still gated
        on monotone p because of part b);
    (b) exchange inequality: for a level-m set S and consecutive
        missing elements a < b < m,
        p_a (f_{S+a} - f_S) <= p_b (f_{S+b} - f_S);
    (c) the same inequality on the converged values, for all (not just
        consecutive) missing pairs below k at the top level.

    tol_stop only decides how many sweeps get executed and therefore
    checked; the inequalities are claims about every sweep.
    """
    pv = ProbVector.coerce(p)
    if pv.k != k:
        raise UsageError(f"rate vector has length {pv.k}, expected {k}")
    _require_monotone(pv, "sweep exchange inequality")
    scale = max(pv.values)
    pn = tuple(x / scale for x in pv.values)
    report = CheckReport("sweep-claims")
    f_all = np.zeros(1 << k)
    for m in range(1, k + 1):
        n = 1 << (m - 1)
        triples = []                    # (idx_S, idx_S+a, idx_S+b, p_a, p_b)
        for idx in range(n):
            mask = idx | (1 << (m - 1))
            missing = [i for i in range(1, m) if not subsets.contains(mask, i)]
            for a, b in zip(missing, missing[1:]):
                triples.append((idx, idx | (1 << (a - 1)),
                                idx | (1 << (b - 1)), pn[a - 1], pn[b - 1]))
        if triples:
            t_s, t_a, t_b, t_pa, t_pb = (np.array(col) for col in zip(*triples))
        worst_drop = 0.0
        worst_exchange = 0.0
        prev = np.zeros(n)
        f_top = _f_top(pn, m, f_all)
        prev[n - 1] = f_top
        sweeps = 0
        final = prev
        for cur in level_sweeps(pn, m, f_top):
            sweeps += 1
            worst_drop = max(worst_drop, float(np.max(prev - cur)))
            if triples:
                gain_a = t_pa * (cur[t_a] - cur[t_s])
                gain_b = t_pb * (cur[t_b] - cur[t_s])
                worst_exchange = max(worst_exchange,
                                     float(np.max(gain_a - gain_b)))
            change = float(np.max(np.abs(cur - prev) / (1.0 + np.abs(cur))))
            prev = cur
            if change <= tol_stop:
                final = cur
                break
            if sweeps >= max_sweeps:
                raise UsageError(
                    f"sweep claims: level {m} did not settle within "
                    f"{max_sweeps} sweeps; loosen tol_stop")
        scale_f = float(np.max(np.abs(final))) if n else 1.0
        report.add("sweep-monotone", -1, m, float(sweeps), 0.0, worst_drop,
                   worst_drop <= slack * (1.0 + scale_f))
        report.add("sweep-exchange", -1, m, float(sweeps), 0.0, worst_exchange,
                   worst_exchange <= slack * (1.0 + scale_f))
        # converged values: all missing pairs below m, not just consecutive
        worst_final = 0.0
        for idx in range(n):
            mask = idx | (1 << (m - 1))
            missing = [i for i in range(1, m) if not subsets.contains(mask, i)]
            for a_pos in range(len(missing)):
                for b_pos in range(a_pos + 1, len(missing)):
                    a, b = missing[a_pos], missing[b_pos]
                    ga = pn[a - 1] * (final[idx | (1 << (a - 1))] - final[idx])
                    gb = pn[b - 1] * (final[idx | (1 << (b - 1))] - final[idx])
                    worst_final = max(worst_final, float(ga - gb))
        report.add("exchange-converged", -1, m, 0.0, 0.0, worst_final,
                   worst_final <= slack * (1.0 + scale_f))
        idxs = np.arange(n)
        f_all[idxs | (1 << (m - 1))] = final
    return report


def verify_limit(k: int, c: ConstantTable, r_values,
                 threshold: float = 1e-3,
                 slack: float = SLACK_DEFAULT) -> CheckReport:
    """Exact-arithmetic run of the weight-separation limit.

    For each r, with beta_i = r^(i-1) and rates p_i = C_{[k]\\{i}} /
    beta_i, every smallest-missing current I(S -> S+i) sits below C_S;
    the gap C_S - I is nonnegative (checked exactly) and shrinks as r
    grows (checked exactly across consecutive r). At the largest r the
    gap must end below `threshold` relative to C_S, i.e.
    (C_S - I) <= threshold * C_S (also an exact comparison). The
    threshold is relative because the gap scales with C_S: empirically
    the relative gap is ~7/r uniformly over S for k <= 6, while the
    absolute gap at k = 6 reaches C_S * O(1/r) ~ 1e7 even at r = 1e6,
    so an absolute threshold would say nothing about convergence.
    """
    subsets.validate_k(k)
    if k > K_EXACT_MAX:
        raise UsageError(f"limit verification runs exactly; k <= {K_EXACT_MAX}")
    if c.k < k:
        raise UsageError("constant table dimension smaller than k")
    rs = [Fraction(r) for r in r_values]
    if not rs or any(r <= 1 for r in rs) or any(b <= a for a, b in zip(rs, rs[1:])):
        raise UsageError("r_values must be increasing and each > 1")
    report = CheckReport("limit")
    full = subsets.full_mask(k)
    prev_gaps: dict[int, Fraction] | None = None
    for r_pos, r in enumerate(rs):
        p = [Fraction(c.c[full & ~subsets.bit(i)]) / r ** (i - 1)
             for i in range(1, k + 1)]
        table = solve_direct(k, p, exact=True)
        gaps: dict[int, Fraction] = {}
        for mask in range(0, full):
            i = subsets.smallest_missing(mask)
            gap = c.c[mask] - current(table, mask | subsets.bit(i), i)
            gaps[mask] = gap
            report.add(f"gap-nonnegative-r{r_pos}", mask, i, float(gap), 0.0,
                       float(-gap), gap >= 0)
            if prev_gaps is not None:
                shrink_defect = gap - prev_gaps[mask]
                report.add(f"gap-non-increasing-r{r_pos}", mask, i,
                           float(gap), float(prev_gaps[mask]),
                           float(shrink_defect), shrink_defect <= 0)
        prev_gaps = gaps
    thr = Fraction(threshold)
    for mask, gap in (prev_gaps or {}).items():
        rel = gap / c.c[mask]
        report.add("gap-final-threshold", mask, subsets.smallest_missing(mask),
                   float(rel), threshold, float(rel - thr), rel < thr)
    return report
