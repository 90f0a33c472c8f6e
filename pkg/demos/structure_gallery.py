"""Structure gallery: the facts the analysis stands on, checked live.

The performance bound for the memoryless strategy is not one
inequality but a small tower of structural facts about the potential:
feasibility of the defining system, monotonicity of currents along
the subset lattice, supermodularity of phi, universal current bounds
1 <= I <= C_S, invariance under relabeling tied rates, monotone
response to shrinking the weakest rate, and sweep-by-sweep
monotonicity of the iterative solver. Each has a verifier that
returns a report instead of asserting, so a violation would be data,
not a crash.

This script draws random non-increasing rate vectors and runs the
whole gallery, printing per-verifier worst defects. All defects
should sit at rounding scale (~1e-12 or below); the slack the
verifiers grant is 1e-9.

Run:
    python3 demos/structure_gallery.py
    python3 demos/structure_gallery.py --k 7 --draws 20
"""

import argparse

import numpy as np

from wkserver import build_constants, solve_direct, verify_current_bounds, \
    verify_current_monotonicity, verify_feasibility, verify_p_monotonicity, \
    verify_supermodularity, verify_sweep_claims, verify_symmetry, \
    verify_tight_system


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=6, help="servers (default 6)")
    ap.add_argument("--draws", type=int, default=10,
                    help="random rate vectors (default 10)")
    ap.add_argument("--seed", type=int, default=20260819)
    args = ap.parse_args()

    c = build_constants(args.k)
    rng = np.random.default_rng(args.seed)

    totals: dict[str, tuple[int, float, bool]] = {}

    def record(name: str, rep) -> None:
        n, worst, ok = totals.get(name, (0, 0.0, True))
        totals[name] = (n + len(rep.records),
                        max(worst, rep.max_defect),
                        ok and rep.passed)

    for _ in range(args.draws):
        p = tuple(sorted(rng.uniform(0.05, 1.0, size=args.k))[::-1])
        t = solve_direct(args.k, p)
        record("tight system", verify_tight_system(t))
        record("feasibility", verify_feasibility(t))
        record("current monotonicity", verify_current_monotonicity(t))
        record("supermodularity", verify_supermodularity(t))
        record("current bounds", verify_current_bounds(t, c))
        record("rate monotonicity",
               verify_p_monotonicity(args.k, p, p[-1] / 2))
        record("sweep claims", verify_sweep_claims(args.k, p))
        if args.k >= 2:
            tied = p[:-1] + (p[-2],)
            record("tie symmetry", verify_symmetry(args.k, tied))

    print(f"{args.draws} non-increasing rate vectors at k = {args.k}")
    print(f"{'verifier':<22} {'checks':>8} {'worst defect':>14} {'verdict':>8}")
    for name, (n, worst, ok) in totals.items():
        print(f"{name:<22} {n:>8} {worst:>14.3e} "
              f"{'pass' if ok else 'FAIL':>8}")

    bad = [n for n, (_, _, ok) in totals.items() if not ok]
    print()
    if bad:
        print(f"violations in: {', '.join(bad)} (inspect the reports!)")
    else:
        print("every structural fact held on every draw")


if __name__ == "__main__":
    main()
