"""Potential tables: two solvers, one answer, and an exact referee.

The per-subset potential phi_S is what makes the memoryless strategy
analyzable: each level (sets sharing their largest element) satisfies
a strictly diagonally dominant linear system, so phi is unique. This
script solves one rate vector with both backends, prints the full
phi / f table side by side, measures backend agreement and the
defining-equation residual, and, for small k, re-solves in exact
rational arithmetic to show the floating tables are honest.

The currents I(S \\ {i} -> S) = p_i (phi_S - phi_{S \\ {i}}) printed
at the end are the quantities the performance functional consumes;
they stay between 1 and C_S no matter how lopsided the rates are.

Run:
    python3 demos/potential_backends.py
    python3 demos/potential_backends.py --k 5 --spread 100 --seed 7
"""

import argparse
from fractions import Fraction

import numpy as np

from wkserver import build_constants, currents_into, solve_direct, \
    solve_gauss_seidel


def mask_label(mask: int, k: int) -> str:
    return "{" + ",".join(str(i + 1) for i in range(k) if mask >> i & 1) + "}"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=4, help="servers (default 4)")
    ap.add_argument("--spread", type=float, default=10.0,
                    help="ratio of largest to smallest rate (default 10)")
    ap.add_argument("--seed", type=int, default=20260819)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    raw = np.sort(rng.uniform(1.0, args.spread, size=args.k))[::-1]
    p = tuple(float(x) for x in raw)
    print(f"rate vector p (non-increasing): "
          f"{', '.join(f'{x:.4f}' for x in p)}")

    td = solve_direct(args.k, p)
    tg = solve_gauss_seidel(args.k, p)
    print(f"direct residual:       {td.residual:.3e}")
    print(f"gauss-seidel residual: {tg.residual:.3e} "
          f"(sweeps per level: {tg.sweeps})")

    agree = max(abs(a - b) / max(abs(a), abs(b))
                for a, b in zip(td.phi[1:], tg.phi[1:]))
    print(f"backend agreement on phi (max relative): {agree:.3e}")

    print()
    print(f"{'subset':<14} {'phi (direct)':>16} {'f (direct)':>16} "
          f"{'phi (sweeps)':>16}")
    for mask in range(1, 1 << args.k):
        print(f"{mask_label(mask, args.k):<14} {td.phi[mask]:>16.8f} "
              f"{td.f[mask]:>16.8f} {tg.phi[mask]:>16.8f}")

    if args.k <= 6:
        pf = tuple(Fraction(x) for x in p)
        te = solve_direct(args.k, pf, exact=True)
        worst = max(abs(float(e) - d) / float(e)
                    for e, d in zip(te.phi[1:], td.phi[1:]))
        print()
        print(f"exact rational referee: residual is exactly "
              f"{te.residual}, float-vs-exact max relative error "
              f"{worst:.3e}")

    c = build_constants(args.k)
    full = (1 << args.k) - 1
    print()
    print("currents into the full set (each must lie in [1, C_S]):")
    for i, val in sorted(currents_into(td, full).items()):
        cap = c.c[full & ~(1 << (i - 1))]
        print(f"  I(full minus {i} -> full) = {float(val):>14.6f}   "
              f"cap C_S = {cap}")


if __name__ == "__main__":
    main()
