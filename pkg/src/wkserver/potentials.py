"""Implicit potentials for the memoryless process on the subset lattice.

The object of study is a randomized memoryless strategy on a uniform
metric: when a request must be served, server i moves with probability
p_i / (p_1 + ... + p_k). Its analysis runs through a potential
phi_S >= 0, one value per subset S of [k] (S is the set of servers
currently "in agreement" with the opponent's configuration), normalized
so phi_empty = 0 and scaling like 1/c when p is scaled by c.

phi is defined level by level. Write m = max(S) and f_S for the scaled
increment picked up when m joins:

    phi_S = phi_{S \\ {m}} + f_S / p_m .

For fixed m, the unknowns {f_S : m in S, S subseteq [m]} satisfy one
balance equation per set (i is the smallest element missing from S,
necessarily i < m when S != [m]):

    (p_i + sum_{j in S} p_j) f_S
        = p_i f_{S union {i}} + sum_{j in S \\ {m}} p_j f_{S \\ {j}},

and the top set is pinned by the level below,

    f_[m] = 1 + sum_{j < m} I([m-1] \\ {j} -> [m-1]),

where I(S \\ {i} -> S) = p_i (phi_S - phi_{S \\ {i}}) is the "current"
flowing up an edge of the lattice. Each level's system is strictly
diagonally dominant (the diagonal beats the off-diagonal row sum by
exactly p_m > 0), hence uniquely solvable, and the whole table follows
by back-substitution. Two backends solve the level systems:

  * solve_direct: per-level elimination in the style of
    Grassmann-Taksar-Heyman, using only additions and multiplications
    of nonnegative quantities. The workhorse; entrywise accurate even
    when the rates span hundreds of orders of magnitude.
  * solve_gauss_seidel: sweep iteration from f = 0 with the top set
    pinned, monotone non-decreasing sweep by sweep. Kept because its
    iterates have structure worth testing in their own right (see
    lemma_checks), and as an independent cross-check of the direct
    path.

Within a sweep, a set only reads strictly larger sets (current sweep)
and strictly smaller sets (previous sweep); same-size sets never
couple. Sweeps here update size groups in decreasing order, which
realizes exactly that reading discipline; the documented tie-break
inside a size group (decreasing bitmask) is therefore unobservable.

Both backends normalize p to max(p) = 1 internally and undo the
scaling on phi afterwards: f and the currents are invariant under
scaling p, so this is free, and it keeps every intermediate quantity
on a sane absolute scale when callers pass rate profiles spanning
many orders of magnitude. The residual reported on the table is the max absolute
defect of the defining equations divided by (1 + max |f|): the f
values themselves grow without bound as k grows or the rates spread
out, so only a defect measured against that scale is meaningful in
floating point (an absolute defect can never beat eps * max |f|).

An exact mode (exact=True on solve_direct, k <= 8) runs the same level
elimination over fractions.Fraction. Any float input is admissible
(floats are rationals); the resulting table satisfies the defining
equations with defect exactly zero, which is what pins down the slack
budgets used by the floating checks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np
import scipy.sparse

from . import subsets
from .errors import InternalConsistencyError, NonConvergenceError, UsageError

K_SOLVE_MAX = 12   # dense level systems up to 2048 x 2048
K_EXACT_MAX = 8    # fraction elimination stays pleasant up to 128 x 128

DEFAULT_TOL = 1e-13
DEFAULT_MAX_SWEEPS = 2_000_000


@dataclass(frozen=True)
class ProbVector:
    """A positive rate vector p_1..p_k, entries float or Fraction."""

    values: tuple

    def __post_init__(self):
        k = len(self.values)
        if not (1 <= k <= subsets.K_MAX):
            raise UsageError(f"rate vector length must be 1..{subsets.K_MAX}")
        for x in self.values:
            if not (x > 0) or (isinstance(x, float) and not math.isfinite(x)):
                raise UsageError("rate vector entries must be positive and finite")

    @property
    def k(self) -> int:
        return len(self.values)

    @property
    def monotone(self) -> bool:
        """Non-increasing: p_1 >= p_2 >= ... >= p_k."""
        v = self.values
        return all(v[i] >= v[i + 1] for i in range(len(v) - 1))

    @classmethod
    def coerce(cls, p, exact: bool = False) -> "ProbVector":
        if isinstance(p, ProbVector):
            p = p.values
        if exact:
            return cls(tuple(Fraction(x) for x in p))
        return cls(tuple(float(x) for x in p))


class Current(NamedTuple):
    """One lattice edge current I(from -> to), to = from union {i}."""

    from_mask: int
    to_mask: int
    value: float


@dataclass(frozen=True)
class PotentialTable:
    """phi and f over every subset of [k], for one rate vector.

    phi[mask] spans all 2**k masks with phi[0] = 0. f[mask] is defined
    for every nonempty mask (each set stored at the level of its own
    largest element); f[0] is kept as 0 so masks index directly.
    residual is the max defect of the defining equations on the
    max-normalized system, divided by (1 + max |f|); sweeps records
    per-level sweep counts for the iterative backend. Immutable;
    share freely across threads.
    """

    k: int
    p: ProbVector
    phi: tuple
    f: tuple
    residual: float
    backend: str
    exact: bool = False
    sweeps: tuple = field(default=())

    def phi_of(self, mask: int):
        subsets.validate_mask(mask, self.k)
        return self.phi[mask]

    def f_of(self, mask: int):
        subsets.validate_mask(mask, self.k)
        if mask == 0:
            raise UsageError("f is defined for nonempty subsets only")
        return self.f[mask]

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps({
            "k": self.k,
            "p": [float(x) for x in self.p.values],
            "backend": self.backend,
            "phi": {str(m): float(v) for m, v in enumerate(self.phi)},
            "f": {str(m): float(v) for m, v in enumerate(self.f) if m},
            "residual": self.residual,
        }, indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "PotentialTable":
        obj = json.loads(text)
        k = int(obj["k"])
        subsets.validate_k(k)
        phi = [0.0] * (1 << k)
        for m, v in obj["phi"].items():
            phi[int(m)] = float(v)
        f = [0.0] * (1 << k)
        for m, v in obj["f"].items():
            f[int(m)] = float(v)
        return cls(k=k, p=ProbVector.coerce(obj["p"]), phi=tuple(phi),
                   f=tuple(f), residual=float(obj["residual"]),
                   backend=str(obj["backend"]))


# ---------------------------------------------------------------------------
# level system assembly
# ---------------------------------------------------------------------------
#
# Level m has 2**(m-1) unknowns, one per S with m in S subseteq [m].
# A set is addressed by its low bits: idx = mask & (2**(m-1) - 1), so
# idx == 2**(m-1) - 1 is the pinned top set [m].


def _level_entries(p, m: int):
    """Yield (idx, diag, [(col, coef), ...]) for every non-pinned row.

    p is a sequence of level-m-usable rates (0-based), float or Fraction.
    Off-diagonal coefficients are returned positive, as used on the
    right-hand side of the sweep update; the dense assembly negates them.
    """
    n = 1 << (m - 1)
    top = 1 << (m - 1)
    for idx in range(n - 1):
        mask = idx | top
        i = subsets.smallest_missing(mask)
        diag = p[i - 1] + p[m - 1]
        cols = [(idx | (1 << (i - 1)), p[i - 1])]
        for j in subsets.elements(idx):        # idx's bits are S \ {m}
            diag = diag + p[j - 1]
            cols.append((idx & ~(1 << (j - 1)), p[j - 1]))
        yield idx, diag, cols


def _f_top(p, m: int, f) -> object:
    """Pinned value for the top set of level m from the levels below.

    One plus the sum of the currents into [m-1], each telescoped over
    the mask-indexed f values of the finished levels (the same chain
    current() walks). Differencing the accumulated phi here instead
    would feed cancellation noise into the pin, and through it into
    every level above, once the rates are spread wide.
    """
    if m == 1:
        return 1 if isinstance(p[0], Fraction) else 1.0
    terms = []
    for j in range(1, m):
        terms.append(f[subsets.prefix_mask(j)])
        for level in range(j + 1, m):
            full_l = subsets.prefix_mask(level)
            terms.append((p[j - 1] / p[level - 1])
                         * (f[full_l] - f[full_l & ~subsets.bit(j)]))
    if isinstance(p[0], Fraction):
        return 1 + sum(terms)
    return 1.0 + math.fsum(float(t) for t in terms)


def _solve_level_dense(pn: np.ndarray, m: int, f_top: float) -> np.ndarray:
    """Entrywise-accurate elimination on one level system.

    The system is an M-matrix whose nonnegative data are known exactly:
    off-diagonal coefficients are single rates, and every row's
    diagonal exceeds its off-diagonal sum by exactly p_m. Elimination
    runs GTH-style in that representation. The diagonal is never
    stored: it is carried as (dominance excess) + (off-diagonal row
    sum), and eliminating pivot c updates row r's excess as
    e_r += (B_rc / d_c) e_c in place of the usual diagonal subtraction.
    Every operation then combines nonnegative quantities, so each
    solution entry comes out with relative error a small multiple of
    machine epsilon no matter how wide the rates spread. Plain LU, by
    contrast, loses the small entries of a level once the spread nears
    1/eps and can return a whole level with flipped signs (matched
    rate profiles reach spreads of 1e50+ by k = 9). Rows are
    pre-scaled by their initial diagonal, which caps every stored
    quantity at the level's few-hundred row count and rules out
    overflow.
    """
    n = 1 << (m - 1)
    if n == 1:
        return np.array([float(f_top)])
    off = np.zeros((n, n))
    excess = np.full(n, float(pn[m - 1]))
    rhs = np.zeros(n)
    excess[n - 1] = 1.0
    rhs[n - 1] = float(f_top)
    for idx, _diag, cols in _level_entries(pn, m):
        for col, coef in cols:
            off[idx, col] = coef
    scale = excess + off.sum(axis=1)
    off /= scale[:, None]
    excess /= scale
    diag = np.zeros(n)
    for c in range(n - 1):
        d_c = excess[c] + off[c, c + 1:].sum()
        if not (d_c > 0.0 and math.isfinite(d_c)):   # pragma: no cover
            raise InternalConsistencyError(
                f"level-{m} elimination lost positivity at pivot {c}")
        diag[c] = d_c
        mult = off[c + 1:, c] / d_c
        live = np.flatnonzero(mult)
        if live.size:
            rows = live + c + 1
            excess[rows] += mult[live] * excess[c]
            rhs[rows] += mult[live] * rhs[c]
            off[rows, c + 1:] += np.outer(mult[live], off[c, c + 1:])
            off[rows, rows] = 0.0
            off[rows, c] = 0.0
    diag[n - 1] = excess[n - 1]
    x = np.zeros(n)
    for c in range(n - 1, -1, -1):
        x[c] = (rhs[c] + off[c, c + 1:] @ x[c + 1:]) / diag[c]
    if not np.all(np.isfinite(x)):                   # pragma: no cover
        raise InternalConsistencyError(
            f"level-{m} solve produced non-finite values")
    return x


def _solve_level_exact(p, m: int, f_top: Fraction) -> list:
    """Fraction Gaussian elimination on the level system.

    Strict diagonal dominance makes every pivot nonzero without row
    exchanges, but a swap is attempted anyway if a zero shows up.
    """
    n = 1 << (m - 1)
    if n == 1:
        return [Fraction(f_top)]
    a = [[Fraction(0)] * n for _ in range(n)]
    b = [Fraction(0)] * n
    a[n - 1][n - 1] = Fraction(1)
    b[n - 1] = Fraction(f_top)
    for idx, diag, cols in _level_entries(p, m):
        a[idx][idx] = Fraction(diag)
        for col, coef in cols:
            a[idx][col] = -Fraction(coef)
    for col in range(n):
        piv = col
        while piv < n and a[piv][col] == 0:
            piv += 1
        if piv == n:
            raise InternalConsistencyError(f"singular level-{m} system (exact)")
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            b[col], b[piv] = b[piv], b[col]
        inv = 1 / a[col][col]
        for row in range(n):
            if row != col and a[row][col] != 0:
                factor = a[row][col] * inv
                arow, acol = a[row], a[col]
                for c2 in range(col, n):
                    arow[c2] -= factor * acol[c2]
                b[row] -= factor * b[col]
    return [b[i] / a[i][i] for i in range(n)]


# ---------------------------------------------------------------------------
# sweep iteration
# ---------------------------------------------------------------------------


def level_sweeps(p, m: int, f_top: float):
    """Generate successive sweep iterates for level m; never stops itself.

    Start: f = 0 everywhere except the pinned top set. Each sweep
    updates size groups in decreasing order, so a set reads this
    sweep's values on its superset neighbor and last sweep's values on
    its subset neighbors. Yields a fresh array (indexed by low bits)
    after every sweep. Callers own the stopping rule.
    """
    p = ProbVector.coerce(p).values
    if not (1 <= m <= len(p)):
        raise UsageError(f"level {m} out of range for k = {len(p)}")
    n = 1 << (m - 1)
    f = np.zeros(n)
    f[n - 1] = f_top
    if n == 1:
        while True:
            yield f.copy()

    diag = np.zeros(n)
    rows_ix, cols_ix, data = [], [], []
    for idx, d, cols in _level_entries(p, m):
        diag[idx] = d
        for col, coef in cols:
            rows_ix.append(idx)
            cols_ix.append(col)
            data.append(coef)
    off = scipy.sparse.csr_matrix(
        (data, (rows_ix, cols_ix)), shape=(n, n))
    dense = n <= 64
    if dense:
        off = off.toarray()

    groups = []
    by_size: dict[int, list[int]] = {}
    for idx in range(n - 1):
        by_size.setdefault(subsets.popcount(idx), []).append(idx)
    for size in sorted(by_size, reverse=True):
        rows = np.array(by_size[size])
        groups.append((rows, off[rows], diag[rows]))

    while True:
        for rows, offg, diagg in groups:
            f[rows] = (offg @ f) / diagg
        yield f.copy()


def _iterate_level(p, m, f_top, tol, max_sweeps):
    """Run level_sweeps to the stopping rule; return (f, sweep count)."""
    n = 1 << (m - 1)
    prev = np.zeros(n)
    prev[n - 1] = f_top
    sweeps = 0
    for cur in level_sweeps(p, m, f_top):
        sweeps += 1
        change = float(np.max(np.abs(cur - prev) / (1.0 + np.abs(cur))))
        if change <= tol:
            return cur, sweeps
        if sweeps >= max_sweeps:
            raise NonConvergenceError(
                f"level {m}: no convergence to {tol} within {max_sweeps} sweeps")
        prev = cur


# ---------------------------------------------------------------------------
# full solves
# ---------------------------------------------------------------------------


def _residual(pn, k: int, f) -> float:
    """Max defect of the level equations and pins, scaled by 1 + max |f|."""
    worst = 0.0
    for m in range(1, k + 1):
        top = 1 << (m - 1)
        pin = _f_top(pn, m, f)
        worst = max(worst, abs(f[subsets.prefix_mask(m)] - pin))
        for idx, diag, cols in _level_entries(pn, m):
            mask = idx | top
            terms = [diag * f[mask]]
            terms.extend(-coef * f[col | top] for col, coef in cols)
            worst = max(worst, abs(math.fsum(terms)))
    return worst / (1.0 + max(abs(v) for v in f))


def _finish_table(p_user, k, pn, scale, f_levels, backend, exact, sweeps):
    """Back-substitute phi, measure the residual, freeze the table."""
    size = 1 << k
    if exact:
        phi = [Fraction(0)] * size
        f = [Fraction(0)] * size
    else:
        phi = [0.0] * size
        f = [0.0] * size
    for m in range(1, k + 1):
        top = 1 << (m - 1)
        level = f_levels[m]
        for idx in range(1 << (m - 1)):
            mask = idx | top
            f[mask] = level[idx]
            phi[mask] = phi[idx] + f[mask] / pn[m - 1]
    if exact:
        residual_exact = _residual_exact(pn, k, f)
        residual = float(residual_exact)
        phi_out = [v / scale for v in phi]
    else:
        residual = _residual(pn, k, f)
        phi_out = [float(v) / scale for v in phi]
        f = [float(v) for v in f]
    return PotentialTable(
        k=k, p=p_user, phi=tuple(phi_out), f=tuple(f), residual=residual,
        backend=backend, exact=exact, sweeps=tuple(sweeps))


def _residual_exact(p, k: int, f) -> Fraction:
    worst = Fraction(0)
    for m in range(1, k + 1):
        top = 1 << (m - 1)
        pin = _f_top(p, m, f)
        worst = max(worst, abs(f[subsets.prefix_mask(m)] - pin))
        for idx, diag, cols in _level_entries(p, m):
            mask = idx | top
            total = diag * f[mask]
            for col, coef in cols:
                total -= coef * f[col | top]
            worst = max(worst, abs(total))
    return worst / (1 + max(abs(v) for v in f))


def _validate_solve_args(k: int, p, exact: bool) -> ProbVector:
    subsets.validate_k(k)
    if k > K_SOLVE_MAX:
        raise UsageError(f"potential solves support k <= {K_SOLVE_MAX}")
    if exact and k > K_EXACT_MAX:
        raise UsageError(f"exact mode supports k <= {K_EXACT_MAX}")
    pv = ProbVector.coerce(p, exact=exact)
    if pv.k != k:
        raise UsageError(f"rate vector has length {pv.k}, expected {k}")
    return pv


def solve_direct(k: int, p, exact: bool = False) -> PotentialTable:
    """Solve every level by dense elimination; back-substitute phi.

    Accepts any positive p, monotone or not. exact=True switches all
    arithmetic to Fraction (k <= 8) and yields a table whose residual
    is exactly zero.
    """
    pv = _validate_solve_args(k, p, exact)
    if exact:
        scale = max(pv.values)
        pn = [x / scale for x in pv.values]
        f_levels: dict[int, list] = {}
        f_all = [Fraction(0)] * (1 << k)
        for m in range(1, k + 1):
            f_levels[m] = _solve_level_exact(pn, m, _f_top(pn, m, f_all))
            top = 1 << (m - 1)
            for idx in range(1 << (m - 1)):
                f_all[idx | top] = f_levels[m][idx]
        return _finish_table(pv, k, pn, scale, f_levels, "direct", True, ())

    scale = max(pv.values)
    pn = np.array([x / scale for x in pv.values])
    f_levels_np: dict[int, np.ndarray] = {}
    f_all_np = np.zeros(1 << k)
    for m in range(1, k + 1):
        f_levels_np[m] = _solve_level_dense(pn, m, _f_top(pn, m, f_all_np))
        top = 1 << (m - 1)
        idxs = np.arange(1 << (m - 1))
        f_all_np[idxs | top] = f_levels_np[m]
    return _finish_table(pv, k, pn, scale, f_levels_np, "direct", False, ())


def solve_gauss_seidel(k: int, p, tol: float = DEFAULT_TOL,
                       max_sweeps: int = DEFAULT_MAX_SWEEPS) -> PotentialTable:
    """Solve every level by monotone sweeps from zero.

    Stops a level when every entry's change in a sweep drops to
    tol * (1 + |f_entry|); raises NonConvergenceError at max_sweeps.
    The scale is per entry, not the level max: f values within one
    level span many orders of magnitude, and a stop measured against
    the level max freezes the small entries while they still carry
    large relative error. The trailing error of the stopping rule is
    roughly change / (1 - rate) with rate the sweep contraction
    factor, so tol should sit a couple of orders below the agreement
    one wants against solve_direct.
    """
    pv = _validate_solve_args(k, p, False)
    if not (tol > 0):
        raise UsageError("tol must be positive")
    scale = max(pv.values)
    pn = np.array([x / scale for x in pv.values])
    f_levels: dict[int, np.ndarray] = {}
    f_all = np.zeros(1 << k)
    sweeps = []
    for m in range(1, k + 1):
        f_levels[m], used = _iterate_level(pn, m, _f_top(pn, m, f_all),
                                           tol, max_sweeps)
        sweeps.append(used)
        top = 1 << (m - 1)
        idxs = np.arange(1 << (m - 1))
        f_all[idxs | top] = f_levels[m]
    return _finish_table(pv, k, pn, scale, f_levels, "gauss_seidel",
                         False, sweeps)


# ---------------------------------------------------------------------------
# currents
# ---------------------------------------------------------------------------


def current(table: PotentialTable, mask: int, i: int):
    """I(S \\ {i} -> S) = p_i (phi_S - phi_{S \\ {i}}); requires i in S.

    Evaluated by telescoping the stored f values down the max-element
    chain rather than differencing the accumulated phi: with m = max S
    and i < m,

        I(S \\ {i} -> S) = (p_i / p_m) (f_S - f_{S \\ {i}})
                           + I(S \\ {i, m} -> S \\ {m}),

    bottoming out at f once i is the largest element left. The two
    forms are algebraically identical, but phi grows like 1/min(p)
    while the step for a high-rate server is ~1/p_i, so the direct
    difference loses all significant digits once the rates span more
    than ~16 orders of magnitude (matched rates reach 1e50+ of spread
    by k = 10). Every telescoped term is a same-level difference of
    currents into nested sets, nonnegative and well-scaled.
    """
    subsets.validate_mask(mask, table.k)
    if not subsets.contains(mask, i):
        raise UsageError(f"server {i} is not in subset {mask:#b}")
    p = table.p.values
    total = Fraction(0) if table.exact else 0.0
    while True:
        m = subsets.largest_element(mask)
        if m == i:
            return total + table.f[mask]
        total += (p[i - 1] / p[m - 1]) * (
            table.f[mask] - table.f[mask & ~subsets.bit(i)])
        mask &= ~subsets.bit(m)


def currents_into(table: PotentialTable, mask: int) -> dict:
    """All currents flowing up into S: {j: I(S \\ {j} -> S) for j in S}."""
    return {j: current(table, mask, j) for j in subsets.elements(mask)}


def all_currents(table: PotentialTable) -> list[Current]:
    """Every lattice edge current, ordered by (to_mask, i)."""
    out = []
    for mask in range(1, 1 << table.k):
        for j in subsets.elements(mask):
            out.append(Current(mask & ~subsets.bit(j), mask,
                               float(current(table, mask, j))))
    return out
