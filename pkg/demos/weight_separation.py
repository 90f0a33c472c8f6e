"""Weight separation: watching alpha~ climb to alpha_k, exactly.

The guarantee alpha~(beta, matched p) <= alpha_k is tight only in the
limit of strongly separated weights. Set beta_i = r^(i-1) and let r
grow: alpha~ rises monotonically toward alpha_k, and a perturbation
grid around the matched rates shows they sit at (the bottom of) a
genuine valley. Every number in this script is computed in exact
rational arithmetic, so the monotonicity along r and the bound
alpha~ <= alpha_k are verified as true inequalities between
fractions, with zero float slack.

The printed gap behaves like O(1/r): each 10x in r buys roughly one
more digit of agreement with alpha_k.

Run:
    python3 demos/weight_separation.py
    python3 demos/weight_separation.py --k 4 --r 10 100 1000 10000
"""

import argparse
from fractions import Fraction

from wkserver import build_constants, limit_optimality_sweep, optimal_p, \
    ratio_functional, solve_direct


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=3, help="servers (default 3)")
    ap.add_argument("--r", type=int, nargs="+",
                    default=[10, 100, 1000, 10_000, 100_000],
                    help="increasing separation factors")
    args = ap.parse_args()

    c = build_constants(args.k)
    alpha_k = c.alpha[args.k]
    print(f"k = {args.k}, alpha_k = {alpha_k}, beta_i = r^(i-1), "
          f"matched rates, exact arithmetic")
    print(f"{'r':>8}  {'alpha~':>22}  {'alpha_k - alpha~':>18}  "
          f"{'relative gap':>13}")
    for r in args.r:
        beta = tuple(Fraction(r) ** (i - 1) for i in range(1, args.k + 1))
        p = optimal_p(beta, c, exact=True)
        table = solve_direct(args.k, p, exact=True)
        a, _, _, _ = ratio_functional(beta, p.values, table)
        gap = alpha_k - a
        print(f"{r:>8}  {float(a):>22.12f}  {float(gap):>18.3e}  "
              f"{float(gap / alpha_k):>13.3e}")

    print()
    rep = limit_optimality_sweep(args.k, args.r, c)
    verdicts = {}
    for rec in rep.records:
        family = rec.check.rsplit("-r", 1)[0]
        ok, n = verdicts.get(family, (True, 0))
        verdicts[family] = (ok and rec.passed, n + 1)
    print("exact sweep verdicts (bound, monotonicity, valley, threshold):")
    for family, (ok, n) in verdicts.items():
        print(f"  {family:<28} x{n}: {'pass' if ok else 'FAIL'}")


if __name__ == "__main__":
    main()
