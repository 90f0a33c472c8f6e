"""Command-line front end.

Six commands over the library:

  constants   lattice constants C_S and the alpha sequence, with the
              exact identity and growth reports.
  potentials  solve one rate vector and dump the phi/f table.
  ratio       alpha~, the argmax server, and the adversary's bound for
              one (beta, p) pair.
  verify      sample random monotone rate vectors and run the whole
              verifier suite on both solver backends.
  simulate    play the adversarial game and report empirical ratios
              against [lower bound, alpha~].
  sweep       exact separated-weights sweep: limit gaps plus the
              alpha~-at-optimal grid report.

Exit codes: 0 success, 1 usage error (bad flags, refused hypotheses),
2 verification failure (a check report came back failing), 3 internal
inconsistency (non-convergence, singular system, audit failure).
All commands are deterministic given their full flag set (seeds
included); random trials are spawned per-index off the seed, so
--trials N --seed S always replays the same N games.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import game, lemma_checks, subsets
from .constants import (
    ConstantTable,
    alpha_growth_bound,
    build_constants,
    check_constant_identities,
)
from .errors import InternalConsistencyError, NonConvergenceError, UsageError
from .potentials import (
    DEFAULT_TOL,
    K_EXACT_MAX,
    K_SOLVE_MAX,
    solve_direct,
    solve_gauss_seidel,
)
from .ratios import WeightVector, alpha_tilde, harmonic_p, limit_optimality_sweep, optimal_p
from .reports import CheckReport

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_INTERNAL = 3


@dataclass(frozen=True)
class RunConfig:
    """Resolved flag set for one invocation (recorded in seeded dumps)."""

    command: str
    k: int
    beta: tuple | None
    p_mode: str
    p: tuple | None
    backend: str
    seed: int
    n_steps: int
    trials: int
    r_values: tuple
    tol: float
    slack: float
    output: str

    def to_dict(self) -> dict:
        return {
            "command": self.command, "k": self.k,
            "beta": list(self.beta) if self.beta else None,
            "p_mode": self.p_mode,
            "p": list(self.p) if self.p else None,
            "backend": self.backend, "seed": self.seed,
            "n_steps": self.n_steps, "trials": self.trials,
            "r_values": list(self.r_values), "tol": self.tol,
            "slack": self.slack, "output": self.output,
        }


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def _set_string(mask: int) -> str:
    return "{" + ",".join(str(i) for i in subsets.elements(mask)) + "}"


def _report_summary(rep: CheckReport) -> dict:
    return {"name": rep.name, "passed": rep.passed, "checks": len(rep.records),
            "failures": len(rep.failures), "max_defect": rep.max_defect}


def _print(obj, out: str, human_lines, csv_lines) -> None:
    if out == "json":
        print(json.dumps(obj, indent=2))
    elif out == "csv":
        for line in csv_lines():
            print(line)
    else:
        for line in human_lines():
            print(line)


def _resolve_k(args, vectors) -> int:
    lengths = {len(v) for v in vectors if v is not None}
    if getattr(args, "k", None) is not None:
        lengths.add(args.k)
    if not lengths:
        raise UsageError("supply --k or a vector to infer it from")
    if len(lengths) != 1:
        raise UsageError(f"inconsistent dimensions: {sorted(lengths)}")
    return lengths.pop()


def _resolve_p(args, beta: WeightVector | None, c: ConstantTable):
    """Apply the p-mode: exactly one of --p / --optimal / --harmonic."""
    modes = [args.p is not None, args.optimal, args.harmonic]
    if sum(modes) != 1:
        raise UsageError("exactly one of --p, --optimal, --harmonic is required")
    if args.p is not None:
        return tuple(args.p), "explicit"
    if beta is None:
        raise UsageError("--optimal/--harmonic need --beta")
    if args.optimal:
        return optimal_p(beta, c).values, "optimal"
    return harmonic_p(beta).values, "harmonic"


def _solve(backend: str, k: int, p, tol: float):
    if backend == "direct":
        return solve_direct(k, p)
    return solve_gauss_seidel(k, p, tol=tol)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_constants(args) -> int:
    k = args.k
    table = build_constants(k)
    identities = check_constant_identities(table)
    growth = alpha_growth_bound(k)
    obj = {
        "table": json.loads(table.to_json()),
        "identities": _report_summary(identities),
        "growth": _report_summary(growth),
        "alpha_k_below_1.6^(2^k)": growth.passed,
    }

    def human():
        yield f"alpha_1..alpha_{k}: " + ", ".join(str(a) for a in table.alpha[1:])
        for mask in range(1, 1 << k):
            yield f"C_{_set_string(mask)} = {table.c[mask]}"
        yield (f"identities: {'pass' if identities.passed else 'FAIL'} "
               f"({len(identities.records)} checks)")
        yield (f"growth alpha_k < 1.6^(2^k): "
               f"{'pass' if growth.passed else 'FAIL'}")

    def csv():
        yield "mask,set,C"
        for mask in range(1, 1 << k):
            yield f"{mask},{_set_string(mask)},{table.c[mask]}"

    _print(obj, args.out, human, csv)
    return EXIT_OK if identities.passed and growth.passed else EXIT_VERIFY


def cmd_potentials(args) -> int:
    beta = WeightVector.from_user(args.beta) if args.beta is not None else None
    k = _resolve_k(args, [args.beta, args.p])
    p, _ = _resolve_p(args, beta, build_constants(k))
    table = _solve(args.backend, k, p, args.tol)
    obj = json.loads(table.to_json())

    def human():
        yield f"k={k} backend={table.backend} residual={table.residual:.3e}"
        yield f"p: {', '.join(repr(float(x)) for x in table.p.values)}"
        for mask in range(1, 1 << k):
            yield (f"S={_set_string(mask):<{2*k+4}} phi={table.phi[mask]!r} "
                   f"f={table.f[mask]!r}")

    def csv():
        yield "mask,set,phi,f"
        for mask in range(1, 1 << k):
            yield f"{mask},{_set_string(mask)},{table.phi[mask]!r},{table.f[mask]!r}"

    _print(obj, args.out, human, csv)
    return EXIT_OK


def cmd_ratio(args) -> int:
    if args.beta is None:
        raise UsageError("ratio requires --beta")
    beta = WeightVector.from_user(args.beta)
    k = _resolve_k(args, [args.beta, args.p])
    p, p_mode = _resolve_p(args, beta, build_constants(k))
    table = _solve(args.backend, k, p, args.tol)
    res = alpha_tilde(beta, p, table)
    obj = json.loads(res.to_json())
    obj["p"] = [float(x) for x in p]
    obj["p_mode"] = p_mode
    obj["backend"] = args.backend

    def human():
        yield f"alpha~ = {res.alpha_tilde!r}"
        yield f"argmax server (user order): {res.arg_t}   (canonical: {res.arg_t_canonical})"
        yield f"separation s = {res.s!r}"
        yield f"adversary lower bound alpha~/(1+s*alpha~) = {res.lower_bound!r}"
        yield "per-server ratios (user order): " + ", ".join(repr(x) for x in res.per_server)
        yield f"p ({p_mode}): " + ", ".join(repr(float(x)) for x in p)

    def csv():
        yield "alpha_tilde,arg_t,lower_bound,s"
        yield f"{res.alpha_tilde!r},{res.arg_t},{res.lower_bound!r},{res.s!r}"

    _print(obj, args.out, human, csv)
    return EXIT_OK


def _verify_reports(k: int, p: tuple, backend: str, tol: float,
                    slack: float, c: ConstantTable):
    table = _solve(backend, k, p, tol)
    yield lemma_checks.verify_tight_system(table, slack)
    yield lemma_checks.verify_feasibility(table, slack)
    yield lemma_checks.verify_current_monotonicity(table, slack)
    yield lemma_checks.verify_supermodularity(table, slack)
    yield lemma_checks.verify_current_bounds(table, c, slack)
    if k >= 2:
        p_sym = p[:-1] + (p[-2],)          # last rate copied from the one above
        yield lemma_checks.verify_symmetry(k, p_sym, backend=backend, slack=slack)
    yield lemma_checks.verify_p_monotonicity(k, p, p[-1] / 2, backend=backend,
                                             slack=slack)


def sample_monotone_p(rng: np.random.Generator, k: int) -> tuple:
    """Sorted positive uniforms: the verify command's rate sampler."""
    while True:
        p = tuple(sorted(map(float, rng.uniform(0.0, 1.0, k)), reverse=True))
        if p[-1] > 0:
            return p


def cmd_verify(args) -> int:
    k = args.k
    c = build_constants(k)
    rng = np.random.default_rng(args.seed)
    rows = []
    total_checks = total_failures = 0
    worst = 0.0
    for trial in range(args.trials):
        p = sample_monotone_p(rng, k)
        for backend in ("direct", "gs"):
            for rep in _verify_reports(k, p, backend, args.tol, args.slack, c):
                rows.append({"trial": trial, "backend": backend,
                             **_report_summary(rep)})
                total_checks += len(rep.records)
                total_failures += len(rep.failures)
                worst = max(worst, rep.max_defect)
        rep = lemma_checks.verify_sweep_claims(k, p, slack=args.slack)
        rows.append({"trial": trial, "backend": "gs", **_report_summary(rep)})
        total_checks += len(rep.records)
        total_failures += len(rep.failures)
        worst = max(worst, rep.max_defect)
    if args.trials > 0 and k <= K_EXACT_MAX:
        rep = lemma_checks.verify_limit(k, c, (10, 100, 1000), threshold=0.05)
        rows.append({"trial": None, "backend": "exact", **_report_summary(rep)})
        total_checks += len(rep.records)
        total_failures += len(rep.failures)
        worst = max(worst, rep.max_defect)
    obj = {"config": _config_from(args, k).to_dict(),
           "checks": total_checks, "failures": total_failures,
           "worst_defect": worst, "reports": rows}

    def human():
        yield (f"k={k} trials={args.trials}: {total_checks} checks, "
               f"{total_failures} failures, worst defect {worst:.3e}")
        for row in rows:
            flag = "pass" if row["passed"] else "FAIL"
            yield (f"  trial={row['trial']} backend={row['backend']:<6} "
                   f"{row['name']:<22} {flag} ({row['checks']} checks, "
                   f"max defect {row['max_defect']:.2e})")

    def csv():
        yield "trial,backend,name,passed,checks,failures,max_defect"
        for r in rows:
            yield (f"{r['trial']},{r['backend']},{r['name']},{r['passed']},"
                   f"{r['checks']},{r['failures']},{r['max_defect']!r}")

    _print(obj, args.out, human, csv)
    return EXIT_OK if total_failures == 0 else EXIT_VERIFY


def cmd_simulate(args) -> int:
    if args.beta is None:
        raise UsageError("simulate requires --beta")
    beta = WeightVector.from_user(args.beta)
    k = _resolve_k(args, [args.beta, args.p])
    c = build_constants(k)
    p, p_mode = _resolve_p(args, beta, c)
    table = _solve(args.backend, k, p, args.tol)
    res = alpha_tilde(beta, p, table)
    if args.trials < 1:
        raise UsageError("simulate needs --trials >= 1")
    if args.transcript is not None and args.trials != 1:
        raise UsageError("--transcript needs --trials 1")
    ledgers = []
    for trial in range(args.trials):
        stream = None
        if args.transcript is not None:
            stream = open(args.transcript, "w")
        try:
            ledgers.append(game.run(
                k, beta.values, p, res.arg_t_canonical, args.steps,
                args.seed, trial=trial, table=table, transcript=stream))
        finally:
            if stream is not None:
                stream.close()
    alg = sum(l.alg for l in ledgers)
    adv = sum(l.adv for l in ledgers)
    evict = sum(l.adv_evict for l in ledgers)
    pooled_ratio = alg / (adv + evict) if adv + evict > 0 else math.nan
    per_ratio = [l.ratio for l in ledgers]
    if len(per_ratio) > 1:
        sigma = float(np.std(per_ratio, ddof=1) / math.sqrt(len(per_ratio)))
    else:
        sigma = None
    half = 3 * sigma if sigma is not None else 0.0
    band = [res.lower_bound - half, res.alpha_tilde + half]
    in_band = band[0] <= pooled_ratio <= band[1]
    audit_failures = sum(l.audit_failures for l in ledgers)
    obj = {
        "config": _config_from(args, k).to_dict(),
        "alpha_tilde": res.alpha_tilde,
        "lower_bound": res.lower_bound,
        "s": res.s,
        "t": res.arg_t_canonical,
        "p_mode": p_mode,
        "per_trial": [json.loads(l.to_json()) for l in ledgers],
        "pooled": {"alg": alg, "adv": adv, "adv_evict": evict,
                   "ratio": pooled_ratio, "sigma": sigma,
                   "band": band, "in_band": in_band},
        "audit_failures": audit_failures,
    }

    def human():
        yield (f"k={k} beta={list(beta.values)} p={p_mode} t={res.arg_t_canonical} "
               f"steps={args.steps} trials={args.trials}")
        yield (f"alpha~ = {res.alpha_tilde!r}, lower bound = {res.lower_bound!r}, "
               f"s = {res.s!r}")
        for l in ledgers:
            yield (f"  trial {l.trial}: alg={l.alg!r} adv={l.adv!r} "
                   f"evict={l.adv_evict!r} ratio={l.ratio!r} "
                   f"adjusted={l.ratio_adjusted!r}")
        yield (f"pooled ratio = {pooled_ratio!r} "
               f"(band [{band[0]!r}, {band[1]!r}], "
               f"{'inside' if in_band else 'OUTSIDE'})")
        yield f"audit: {audit_failures} failures"

    def csv():
        yield "trial,alg,adv,adv_evict,ratio,ratio_adjusted,audit_failures"
        for l in ledgers:
            yield (f"{l.trial},{l.alg!r},{l.adv!r},{l.adv_evict!r},"
                   f"{l.ratio!r},{l.ratio_adjusted!r},{l.audit_failures}")

    _print(obj, args.out, human, csv)
    return EXIT_OK if audit_failures == 0 else EXIT_INTERNAL


def cmd_sweep(args) -> int:
    k = args.k
    if not args.r:
        raise UsageError("sweep requires --r")
    c = build_constants(k)
    r_max = max(args.r)
    threshold = max(1e-3, 10.0 / r_max)
    limit_rep = lemma_checks.verify_limit(k, c, args.r, threshold=threshold)
    opt_rep = limit_optimality_sweep(k, args.r, c,
                                     threshold_rel=threshold)
    failures = len(limit_rep.failures) + len(opt_rep.failures)
    obj = {
        "config": _config_from(args).to_dict(),
        "threshold": threshold,
        "limit": json.loads(limit_rep.to_json()),
        "optimality": json.loads(opt_rep.to_json()),
    }

    def human():
        yield (f"k={k} r={list(args.r)} threshold={threshold!r} "
               f"(relative to C_S / alpha_k)")
        yield f"limit gaps: {'pass' if limit_rep.passed else 'FAIL'} " \
              f"({len(limit_rep.records)} checks, worst {limit_rep.max_defect:.2e})"
        yield f"optimality: {'pass' if opt_rep.passed else 'FAIL'} " \
              f"({len(opt_rep.records)} checks)"
        for rec in opt_rep.records:
            yield (f"  {rec.check:<28} lhs={rec.lhs!r} rhs={rec.rhs!r} "
                   f"{'pass' if rec.passed else 'FAIL'}")

    def csv():
        yield "report,check,S,i,lhs,rhs,defect,pass"
        for rep in (limit_rep, opt_rep):
            for rec in rep.records:
                yield (f"{rep.name},{rec.check},{rec.subset},{rec.index},"
                       f"{rec.lhs!r},{rec.rhs!r},{rec.defect!r},{rec.passed}")

    _print(obj, args.out, human, csv)
    return EXIT_OK if failures == 0 else EXIT_VERIFY


# ---------------------------------------------------------------------------
# wiring
# ---------------------------------------------------------------------------


def _config_from(args, k: int | None = None) -> RunConfig:
    return RunConfig(
        command=args.command,
        k=k if k is not None else (getattr(args, "k", None) or 0),
        beta=tuple(args.beta) if getattr(args, "beta", None) else None,
        p_mode=("optimal" if getattr(args, "optimal", False)
                else "harmonic" if getattr(args, "harmonic", False)
                else "explicit" if getattr(args, "p", None) else "none"),
        p=tuple(args.p) if getattr(args, "p", None) else None,
        backend=getattr(args, "backend", "direct"),
        seed=getattr(args, "seed", 0),
        n_steps=getattr(args, "steps", 0),
        trials=getattr(args, "trials", 0),
        r_values=tuple(getattr(args, "r", ()) or ()),
        tol=getattr(args, "tol", DEFAULT_TOL),
        slack=getattr(args, "slack", lemma_checks.SLACK_DEFAULT),
        output=args.out,
    )


def _add_common(sub, *, k_required=False, vectors=False, backend=False,
                seed=False, steps=False, trials=None, r=False, slack=False):
    sub.add_argument("--k", type=int, required=k_required,
                     help="number of servers")
    if vectors:
        sub.add_argument("--beta", type=_float_list,
                         help="move costs, comma separated (any order)")
        group = sub.add_mutually_exclusive_group()
        group.add_argument("--p", type=_float_list,
                           help="explicit rates, canonical (ascending-weight) order")
        group.add_argument("--optimal", action="store_true",
                           help="use the weight-matched rates C/beta")
        group.add_argument("--harmonic", action="store_true",
                           help="use the rates 1/beta")
    if backend:
        sub.add_argument("--backend", choices=("direct", "gs"),
                         default="direct", help="level-system solver")
        sub.add_argument("--tol", type=float, default=DEFAULT_TOL,
                         help="sweep stopping tolerance for --backend gs")
    if seed:
        sub.add_argument("--seed", type=int, default=0)
    if steps:
        sub.add_argument("--steps", type=int, default=100_000,
                         help="requests per trial")
    if trials is not None:
        sub.add_argument("--trials", type=int, default=trials)
    if r:
        sub.add_argument("--r", type=_float_list,
                         help="weight separations, comma separated, increasing")
    if slack:
        sub.add_argument("--slack", type=float,
                         default=lemma_checks.SLACK_DEFAULT,
                         help="verification slack")
    sub.add_argument("--out", choices=("json", "csv", "human"),
                     default="human")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wkserver",
                     description="memoryless strategies vs adaptive adversaries "
                                 "on uniform metrics: constants, potentials, "
                                 "ratios, verification, simulation")
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("constants", help="C_S table and alpha sequence")
    _add_common(s, k_required=True)
    s.set_defaults(func=cmd_constants)

    s = subs.add_parser("potentials", help="solve phi/f for one rate vector")
    _add_common(s, vectors=True, backend=True)
    s.set_defaults(func=cmd_potentials)

    s = subs.add_parser("ratio", help="alpha~ and the adversary bound")
    _add_common(s, vectors=True, backend=True)
    s.set_defaults(func=cmd_ratio)

    s = subs.add_parser("verify", help="run the verifier suite on random monotone p")
    _add_common(s, k_required=True, backend=True, seed=True, trials=10, slack=True)
    s.set_defaults(func=cmd_verify)

    s = subs.add_parser("simulate", help="play the adversarial game")
    _add_common(s, vectors=True, backend=True, seed=True, steps=True, trials=4)
    s.add_argument("--transcript", help="CSV transcript path (needs --trials 1)")
    s.set_defaults(func=cmd_simulate)

    s = subs.add_parser("sweep", help="separated-weights limit sweep (exact)")
    _add_common(s, k_required=True, r=True)
    s.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:               # MonotonicityError included
        print(f"wkserver: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (NonConvergenceError, InternalConsistencyError) as e:
        print(f"wkserver: internal: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
