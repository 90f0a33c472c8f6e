"""Growth constants: the C_S table and the alpha sequence.

The competitive ratio of the memoryless strategy on a uniform metric
is governed by a family of integer constants C_S, one per subset S of
the server index set, with alpha_k = C_{[k]} the headline constant
for k servers. This script builds the table, prints the alpha
sequence with the quadratic recurrence alpha_{m+1} = alpha_m^2 +
3 alpha_m + 1 made visible, runs the exact integer identity suite,
and compares alpha_k against its doubly exponential envelope
(8/5)^(2^k).

Everything here is exact integer arithmetic: a defect of 0.0 from the
identity suite means the identities hold on the nose, not merely to
rounding.

Run:
    python3 demos/constant_growth.py
    python3 demos/constant_growth.py --k 14
"""

import argparse
import math

from wkserver import alpha_growth_bound, build_constants, \
    check_constant_identities


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=12,
                    help="largest index to build (default 12)")
    args = ap.parse_args()

    c = build_constants(args.k)

    print(f"alpha sequence up to k = {args.k}")
    print(f"{'k':>3}  {'alpha_k':>24}  {'recurrence check':>18}  "
          f"{'log10 alpha_k':>13}  {'(8/5)^(2^k) margin':>18}")
    for m in range(1, args.k + 1):
        a = c.alpha[m]
        rec = "seed" if m == 1 else \
            ("ok" if a == c.alpha[m - 1] ** 2 + 3 * c.alpha[m - 1] + 1
             else "VIOLATED")
        digits = len(str(a))
        shown = str(a) if digits <= 24 else f"~10^{digits - 1} ({digits} digits)"
        log10a = math.log10(a) if m > 0 else float("-inf")
        envelope = (2 ** m) * math.log10(8 / 5)
        print(f"{m:>3}  {shown:>24}  {rec:>18}  {log10a:>13.2f}  "
              f"{envelope - log10a:>18.2f}")

    print()
    rep = check_constant_identities(c)
    print(f"integer identity suite: {len(rep.records)} checks, "
          f"passed = {rep.passed}, max defect = {rep.max_defect}")
    env = alpha_growth_bound(args.k)
    print(f"growth envelope suite:  {len(env.records)} checks, "
          f"passed = {env.passed}")

    print()
    print("a taste of the subset table at k = 4 (C_S by bitmask):")
    c4 = build_constants(4)
    for mask in range(1, 1 << 4):
        members = "{" + ",".join(
            str(i + 1) for i in range(4) if mask >> i & 1) + "}"
        print(f"  C_{members:<10} = {c4.c[mask]}")


if __name__ == "__main__":
    main()
