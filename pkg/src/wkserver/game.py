"""Adversarial request game on a uniform metric with 2k points.

Two configurations live on points 0..2k-1: the adversary's servers
a_1..a_k and the algorithm's s_1..s_k (server i costs beta_i to move;
beta ascending). The algorithm is the memoryless strategy: it serves
every request by moving server j with probability p_j / sum(p). The
adversary plays the matched strategy parameterized by a chosen server
t:

  * if some a_i disagrees with s_i, request a_i for the smallest such
    i (cost 0 to the adversary; every s_l provably sits elsewhere);
  * otherwise (full agreement) move a_t to the lowest point occupied
    by no server, request it, and pay beta_t.

After the algorithm responds, at most one repair can be needed: if the
moved algorithm server j now sits on a_i for some i < j, the adversary
relocates a_i to the lowest free point (paying beta_i, booked
separately as eviction cost). This maintains the invariant a_i != s_j
for every i < j, which in turn guarantees requests never land on an
algorithm server. Lower-indexed algorithm servers may sit on
higher-indexed adversary points; that is harmless and allowed.

The agreement set S = {i : a_i = s_i} is the whole analysis state.
Writing W = sum_j p_j beta_j and varphi_S = -W * phi_S for the solved
potential phi, each phase moves varphi in a controlled way:

  * a t-move raises varphi by W * I([k]\\{t} -> [k]) / p_t
    >= alpha~ * beta_t, with equality when t is the argmax server;
  * an algorithm response from state S changes varphi by exactly
    -W / P in expectation (P = sum p_j), which is also exactly its
    expected cost: the potential pays for the algorithm;
  * an eviction leaves S, hence varphi, untouched.

run() plays n steps and books costs into a CostLedger; with audit on,
every phase is checked against those three facts per step (the per-S
expectations are precomputed, so the audit is O(1) a step). Identical
(inputs, seed) give bit-identical ledgers; the per-step functions
adversary_turn / algorithm_turn / eviction_fixup consume the same
random stream as run()'s blocked fast path, so stepping manually
reproduces run() exactly.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from . import subsets
from .errors import InternalConsistencyError, UsageError
from .potentials import ProbVector, PotentialTable, solve_direct
from .ratios import ratio_functional
from .reports import tol

AUDIT_SLACK = 1e-9
AUDIT_KEEP_DEFAULT = 1000
_BLOCK = 1 << 16


@dataclass
class GameState:
    """Mutable positions plus the sampling stream for one play-out."""

    k: int
    beta: tuple
    p: tuple
    adv: list
    alg: list
    rng: np.random.Generator
    cum: tuple = field(default=())

    def copy_positions(self) -> "GameState":
        """Snapshot for audits: shares beta/p/rng, copies positions."""
        return GameState(k=self.k, beta=self.beta, p=self.p,
                         adv=list(self.adv), alg=list(self.alg),
                         rng=self.rng, cum=self.cum)


@dataclass(frozen=True)
class AuditRecord:
    phase: str
    step: int
    delta_phi: float
    bound: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"phase": self.phase, "step": self.step,
                "delta_phi": self.delta_phi, "bound": self.bound,
                "pass": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class CostLedger:
    """Cost totals and audit outcome of one run.

    alg / adv / adv_evict are the algorithm's total cost, the
    adversary's t-move total, and its eviction total. potential_audit
    retains failures plus the first audit_keep records per phase
    (audit_truncated says whether anything was dropped); audit_checks
    and audit_failures always count every check.
    """

    k: int
    beta: tuple
    p: tuple
    t: int
    n: int
    seed: object
    trial: int | None
    alg: float
    adv: float
    adv_evict: float
    audit_checks: int
    audit_failures: int
    potential_audit: tuple
    audit_truncated: bool
    phi_initial: float | None
    phi_final: float | None
    worst_prefix_margin: float

    @property
    def ratio(self) -> float:
        denom = self.adv + self.adv_evict
        return self.alg / denom if denom > 0 else math.nan

    @property
    def ratio_adjusted(self) -> float:
        """(alg + varphi_final - varphi_initial) / adv: the estimator
        whose per-step drift the audit pins to zero at the argmax t."""
        if self.phi_initial is None or self.adv <= 0:
            return math.nan
        return (self.alg + self.phi_final - self.phi_initial) / self.adv

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps({
            "k": self.k,
            "beta": list(self.beta),
            "p": list(self.p),
            "t": self.t,
            "n": self.n,
            "seed": self.seed if isinstance(self.seed, int) else str(self.seed),
            "trial": self.trial,
            "alg": self.alg,
            "adv": self.adv,
            "adv_evict": self.adv_evict,
            "ratio": self.ratio,
            "ratio_adjusted": self.ratio_adjusted,
            "audit_checks": self.audit_checks,
            "audit_failures": self.audit_failures,
            "worst_prefix_margin": self.worst_prefix_margin,
        }, indent=indent)


def _validate_game_args(k: int, beta, p) -> tuple:
    subsets.validate_k(k)
    bt = tuple(float(x) for x in beta)
    if len(bt) != k:
        raise UsageError(f"beta has length {len(bt)}, expected {k}")
    if any(not (x > 0) or not math.isfinite(x) for x in bt):
        raise UsageError("weights must be positive and finite")
    if any(bt[i] > bt[i + 1] for i in range(k - 1)):
        raise UsageError("the game works in canonical order: beta ascending "
                         "(sort the weights and permute p accordingly)")
    pv = ProbVector.coerce(p)
    if pv.k != k:
        raise UsageError(f"p has length {pv.k}, expected {k}")
    return bt, pv.values


def _cumulative(p: tuple) -> tuple:
    total = math.fsum(p)
    acc, out = 0.0, []
    for x in p:
        acc += x
        out.append(acc / total)
    out[-1] = 1.0          # guard the tail against rounding
    return tuple(out)


def init_game(k: int, beta, p, seed) -> GameState:
    """Fresh game: both sides agree on points 0..k-1 (server i at i-1).

    seed may be anything numpy's default_rng accepts (int or a
    SeedSequence); the stream is the game's single source of
    randomness.
    """
    bt, pt = _validate_game_args(k, beta, p)
    return GameState(k=k, beta=bt, p=pt,
                     adv=list(range(k)), alg=list(range(k)),
                     rng=np.random.default_rng(seed),
                     cum=_cumulative(pt))


def agreement_mask(g: GameState) -> int:
    """S = {i : a_i = s_i} as a bitmask, recomputed from positions."""
    mask = 0
    for i in range(g.k):
        if g.adv[i] == g.alg[i]:
            mask |= 1 << i
    return mask


def free_point(g: GameState) -> int:
    """Lowest of the 2k points occupied by no server of either side."""
    occupied = set(g.adv) | set(g.alg)
    for pt in range(2 * g.k):
        if pt not in occupied:
            return pt
    raise InternalConsistencyError("no free point: some side occupies "
                                   "duplicate points")


def check_invariant(g: GameState) -> None:
    """a_i != s_j for every i < j; positions distinct per side."""
    if len(set(g.adv)) != g.k or len(set(g.alg)) != g.k:
        raise InternalConsistencyError("server positions collided within a side")
    for i in range(g.k - 1):
        for j in range(i + 1, g.k):
            if g.adv[i] == g.alg[j]:
                raise InternalConsistencyError(
                    f"invariant broken: a_{i+1} = s_{j+1} = {g.adv[i]}")


def adversary_turn(g: GameState, t: int) -> tuple:
    """One adversary phase; returns (request point, adversary cost).

    Requests the smallest-index disagreement if any (cost 0),
    otherwise moves server t to the lowest free point and requests it
    (cost beta_t).
    """
    if not (1 <= t <= g.k):
        raise UsageError(f"t must be in 1..{g.k}")
    for i in range(g.k):
        if g.adv[i] != g.alg[i]:
            request = g.adv[i]
            if request in g.alg:
                raise InternalConsistencyError(
                    "request landed on an algorithm server; invariant broken")
            return request, 0.0
    dest = free_point(g)
    g.adv[t - 1] = dest
    return dest, g.beta[t - 1]


def _draw(cum: tuple, u: float) -> int:
    """Inverse-CDF lookup: 1-based server index for uniform u in [0,1)."""
    return bisect_right(cum, u) + 1


def algorithm_turn(g: GameState, request: int, p=None, rng=None) -> tuple:
    """One memoryless response; returns (moved server 1-based, cost).

    Draws a single uniform from the stream and inverts the cumulative
    rates, the same consumption pattern as run()'s blocked fast path,
    so interleaving manual turns with run() stays reproducible.
    """
    if request in g.alg:
        raise UsageError(f"request {request} is on an algorithm server")
    if not (0 <= request < 2 * g.k):
        raise UsageError(f"request {request} is not a point of the metric")
    cum = g.cum if p is None else _cumulative(ProbVector.coerce(p).values)
    stream = g.rng if rng is None else rng
    j = _draw(cum, float(stream.random()))
    g.alg[j - 1] = request
    return j, g.beta[j - 1]


def eviction_fixup(g: GameState) -> float:
    """Restore a_i != s_j (i < j) by relocating evicted adversary
    servers, smallest i first; returns the adversary cost added."""
    cost = 0.0
    moved = 0
    for i in range(g.k - 1):
        for j in range(i + 1, g.k):
            if g.alg[j] == g.adv[i]:
                g.adv[i] = free_point(g)
                cost += g.beta[i]
                moved += 1
                break
    if moved > 1:
        raise InternalConsistencyError(
            "more than one eviction after a single move")
    return cost


# ---------------------------------------------------------------------------
# potential bookkeeping
# ---------------------------------------------------------------------------


def _varphi(table: PotentialTable, beta: tuple, p: tuple) -> np.ndarray:
    """varphi[mask] = -W * phi[mask], W = sum p_j beta_j."""
    w = math.fsum(pj * bj for pj, bj in zip(p, beta))
    return -w * np.array([float(v) for v in table.phi])


def _next_mask(mask: int, j: int, k: int) -> int:
    """State after algorithm server j serves the pending request."""
    i = subsets.smallest_missing(mask)
    if j == i:
        return mask | subsets.bit(i)
    if subsets.contains(mask, j):
        return mask & ~subsets.bit(j)
    return mask


def _expected_alg_delta(varphi: np.ndarray, p: tuple, k: int) -> np.ndarray:
    """E[delta varphi | algorithm phase from S], per strict-subset S."""
    total = math.fsum(p)
    out = np.zeros(1 << k)
    for mask in range(0, (1 << k) - 1):
        acc = [pj * (varphi[_next_mask(mask, j, k)] - varphi[mask])
               for j, pj in enumerate(p, start=1)]
        out[mask] = math.fsum(acc) / total
    return out


def potential_audit_step(g_before: GameState, g_after: GameState, phase: str,
                         table: PotentialTable, beta, p,
                         step: int = 0, slack: float = AUDIT_SLACK) -> AuditRecord:
    """Check one phase transition against the potential facts.

    adversary phase: a t-move raises varphi by exactly
    W * I([k]\\{t} -> [k]) / p_t; that equals alpha~ * beta_t when t
    is the argmax server (the adversary's actual choice) and falls
    below it otherwise; the audit checks the exact identity for
    every t, plus delta <= alpha~ * beta_t always and equality when
    t is the argmax. A plain request moves nothing. algorithm phase:
    the expected varphi change from the pre-state must equal the
    expected cost, -W/P (the record carries those expectations; a
    single realized step is just noise). eviction phase: the
    agreement set, hence varphi, must be untouched.
    """
    bt, pt = _validate_game_args(g_before.k, beta, p)
    varphi = _varphi(table, bt, pt)
    before = agreement_mask(g_before)
    after = agreement_mask(g_after)
    if phase == "adversary":
        movers = [i + 1 for i in range(g_before.k)
                  if g_before.adv[i] != g_after.adv[i]]
        if not movers:
            return AuditRecord(phase, step, 0.0, 0.0, before == after,
                               "request only")
        if len(movers) > 1 or before != subsets.full_mask(g_before.k):
            return AuditRecord(phase, step, 0.0, 0.0, False,
                               "t-move not from full agreement")
        t = movers[0]
        delta = float(varphi[after] - varphi[before])
        alpha, arg, per, weighted = ratio_functional(bt, pt, table)
        bound = float(alpha) * bt[t - 1]
        exact = float(weighted) * float(per[t - 1]) * bt[t - 1]
        eps = tol(slack, delta, bound)
        ok = abs(delta - exact) <= eps and delta <= bound + eps
        if t == arg:
            ok = ok and abs(delta - bound) <= eps
        return AuditRecord(phase, step, delta, bound, ok, f"t={t}")
    if phase == "algorithm":
        if before == subsets.full_mask(g_before.k):
            return AuditRecord(phase, step, 0.0, 0.0, False,
                               "algorithm phase with no pending disagreement")
        total = math.fsum(pt)
        w = math.fsum(pj * bj for pj, bj in zip(pt, bt))
        delta = float(_expected_alg_delta(varphi, pt, g_before.k)[before])
        bound = -w / total
        ok = abs(delta - bound) <= tol(slack, delta, bound)
        return AuditRecord(phase, step, delta, bound, ok, "expectations")
    if phase == "eviction":
        delta = float(varphi[after] - varphi[before])
        return AuditRecord(phase, step, delta, 0.0, before == after, "")
    raise UsageError(f"unknown phase {phase!r}")


# ---------------------------------------------------------------------------
# full runs
# ---------------------------------------------------------------------------


def run(k: int, beta, p, t_index: int, n_steps: int, seed, *,
        trial: int | None = None, audit: bool = True,
        table: PotentialTable | None = None,
        audit_keep: int = AUDIT_KEEP_DEFAULT,
        transcript: IO[str] | None = None,
        slack: float = AUDIT_SLACK) -> CostLedger:
    """Play n_steps of the matched game; return the cost ledger.

    t_index is the adversary's chosen server (1-based, canonical
    order). seed plus optional trial index pin the stream: trial=None
    uses seed directly, otherwise stream i is spawned off the seed, so
    multi-trial runs are reproducible and independent. audit=False
    skips the potential checks (and leaves the varphi fields unset);
    table, if given, must be solved for this p and spares re-solving.
    transcript, if given, receives CSV rows
    step,phase,request,mover,cost,state_mask,phi (eviction rows only
    when one happened; phi is varphi at the post-phase state, blank
    with audit off).
    """
    bt, pt = _validate_game_args(k, beta, p)
    if not (1 <= t_index <= k):
        raise UsageError(f"t_index must be in 1..{k}")
    if n_steps < 0:
        raise UsageError("n_steps must be nonnegative")
    ss = np.random.SeedSequence(seed) if trial is None else \
        np.random.SeedSequence(seed, spawn_key=(trial,))
    g = GameState(k=k, beta=bt, p=pt, adv=list(range(k)), alg=list(range(k)),
                  rng=np.random.default_rng(ss), cum=_cumulative(pt))

    full = subsets.full_mask(k)
    varphi = None
    exp_delta = None
    tmove_delta = tmove_bound = exp_bound = 0.0
    records: list[AuditRecord] = []
    kept = {"adversary": 0, "algorithm": 0, "eviction": 0}
    truncated = False
    checks = failures = 0
    phi_initial = phi_final = None
    if audit:
        if table is None:
            table = solve_direct(k, pt)
        elif tuple(float(x) for x in table.p.values) != pt or table.k != k:
            raise UsageError("table was solved for a different rate vector")
        varphi = _varphi(table, bt, pt)
        exp_delta = _expected_alg_delta(varphi, pt, k)
        alpha, arg, per, weighted = ratio_functional(bt, pt, table)
        tmove_delta = float(varphi[full & ~subsets.bit(t_index)] - varphi[full])
        tmove_bound = float(alpha) * bt[t_index - 1]
        tmove_exact = float(weighted) * float(per[t_index - 1]) * bt[t_index - 1]
        total = math.fsum(pt)
        w = math.fsum(pj * bj for pj, bj in zip(pt, bt))
        exp_bound = -w / total
        tmove_eps = tol(slack, tmove_delta, tmove_bound)
        tmove_ok = (abs(tmove_delta - tmove_exact) <= tmove_eps
                    and tmove_delta <= tmove_bound + tmove_eps)
        if t_index == arg:
            tmove_ok = tmove_ok and abs(tmove_delta - tmove_bound) <= tmove_eps
        phi_initial = float(varphi[full])

    def book(phase: str, step: int, delta: float, bound: float, ok: bool,
             detail: str = "") -> None:
        nonlocal checks, failures, truncated
        checks += 1
        if not ok:
            failures += 1
            records.append(AuditRecord(phase, step, delta, bound, False, detail))
        elif kept[phase] < audit_keep:
            kept[phase] += 1
            records.append(AuditRecord(phase, step, delta, bound, True, detail))
        else:
            truncated = True

    s_of_beta = max((bt[i] / bt[i + 1] for i in range(k - 1)), default=0.0)
    alg_cost = adv_cost = evict_cost = 0.0
    worst_margin = math.inf
    if transcript is not None:
        transcript.write(TRANSCRIPT_HEADER)
    ublock = g.rng.random(min(_BLOCK, max(n_steps, 1)))
    upos = 0
    cum = g.cum
    adv, alg = g.adv, g.alg

    for step in range(n_steps):
        # adversary phase
        mask = agreement_mask(g)
        if mask == full:
            dest = free_point(g)
            adv[t_index - 1] = dest
            request = dest
            adv_cost += bt[t_index - 1]
            if audit:
                book("adversary", step, tmove_delta, tmove_bound, tmove_ok,
                     f"t={t_index}")
            mask_after_adv = full & ~subsets.bit(t_index)
        else:
            i = subsets.smallest_missing(mask)
            request = adv[i - 1]
            mask_after_adv = mask
        if request in alg:
            raise InternalConsistencyError(
                "request landed on an algorithm server; invariant broken")
        if transcript is not None:
            pv = repr(float(varphi[mask_after_adv])) if varphi is not None else ""
            mover = t_index if mask == full else ""
            cost = bt[t_index - 1] if mask == full else 0.0
            transcript.write(f"{step},adversary,{request},{mover},{cost!r},"
                             f"{mask_after_adv},{pv}\n")

        # algorithm phase
        if upos >= len(ublock):
            ublock = g.rng.random(_BLOCK)
            upos = 0
        j = bisect_right(cum, float(ublock[upos])) + 1
        upos += 1
        alg[j - 1] = request
        alg_cost += bt[j - 1]
        if audit:
            delta = float(exp_delta[mask_after_adv])
            book("algorithm", step, delta, exp_bound,
                 abs(delta - exp_bound) <= tol(slack, delta, exp_bound))
        mask_after_alg = agreement_mask(g)
        if transcript is not None:
            pv = repr(float(varphi[mask_after_alg])) if varphi is not None else ""
            transcript.write(f"{step},algorithm,{request},{j},{bt[j-1]!r},"
                             f"{mask_after_alg},{pv}\n")

        # eviction phase
        adv_before = list(adv) if transcript is not None else None
        cost = eviction_fixup(g)
        if cost > 0.0:
            evict_cost += cost
            mask_now = agreement_mask(g)
            if audit:
                book("eviction", step,
                     float(varphi[mask_now] - varphi[mask_after_alg]), 0.0,
                     mask_now == mask_after_alg)
            if transcript is not None:
                pv = repr(float(varphi[mask_now])) if varphi is not None else ""
                moved = next(i + 1 for i in range(k) if adv_before[i] != adv[i])
                transcript.write(f"{step},eviction,{adv[moved-1]},{moved},"
                                 f"{cost!r},{mask_now},{pv}\n")
        check_invariant(g)
        margin = s_of_beta * alg_cost - evict_cost
        if margin < worst_margin:
            worst_margin = margin

    if audit:
        phi_final = float(varphi[agreement_mask(g)])
    return CostLedger(
        k=k, beta=bt, p=pt, t=t_index, n=n_steps,
        seed=seed, trial=trial,
        alg=alg_cost, adv=adv_cost, adv_evict=evict_cost,
        audit_checks=checks, audit_failures=failures,
        potential_audit=tuple(records), audit_truncated=truncated,
        phi_initial=phi_initial, phi_final=phi_final,
        worst_prefix_margin=worst_margin if n_steps else 0.0)


TRANSCRIPT_HEADER = "step,phase,request,mover,cost,state_mask,phi\n"
