"""Rate tuning: weight-matched rates against weight-oblivious ones.

Given server weights beta_1 <= ... <= beta_k, the memoryless strategy
still has a free knob, the rate vector p. The performance functional
alpha~(beta, p) scores a choice; the theory offers two canonical
candidates. Matched rates p_i = C_{[k] \\ {i}} / beta_i achieve
alpha~ <= alpha_k for every beta; oblivious rates p_i = 1 / beta_i
(no knowledge of the constants) concede a factor k, alpha~ <=
k alpha_k. This script samples random weight vectors, evaluates both,
and prints the observed worst cases next to the guarantees.

Note how much slack the matched bound leaves once weights are not
degenerate: the observed alpha~ sits far below alpha_k already at
moderate k, and equality alpha~ = alpha_k needs k <= 2.

Run:
    python3 demos/rate_tuning.py
    python3 demos/rate_tuning.py --k-max 8 --draws 50
"""

import argparse

import numpy as np

from wkserver import alpha_tilde, build_constants, harmonic_p, optimal_p, \
    solve_direct


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k-max", type=int, default=6,
                    help="largest server count (default 6)")
    ap.add_argument("--draws", type=int, default=30,
                    help="random weight vectors per k (default 30)")
    ap.add_argument("--seed", type=int, default=20260819)
    args = ap.parse_args()

    c = build_constants(args.k_max)
    rng = np.random.default_rng(args.seed)

    print(f"{args.draws} weight draws per k, beta_i uniform in [0.1, 10]")
    print(f"{'k':>2}  {'worst a~/alpha_k':>17}  {'matched bound':>13}  "
          f"{'worst a~/(k alpha_k)':>20}  {'oblivious bound':>15}")
    for k in range(1, args.k_max + 1):
        worst_m = 0.0
        worst_h = 0.0
        for _ in range(args.draws):
            beta = tuple(sorted(rng.uniform(0.1, 10.0, size=k)))
            pm = optimal_p(beta, c)
            rm = alpha_tilde(beta, None, solve_direct(k, pm))
            worst_m = max(worst_m, rm.alpha_tilde / float(c.alpha[k]))
            ph = harmonic_p(beta)
            rh = alpha_tilde(beta, None, solve_direct(k, ph))
            worst_h = max(worst_h, rh.alpha_tilde / (k * float(c.alpha[k])))
        print(f"{k:>2}  {worst_m:>17.6f}  {'<= 1':>13}  "
              f"{worst_h:>20.6f}  {'<= 1':>15}")

    print()
    print("one draw in detail (k = 3):")
    beta = tuple(sorted(rng.uniform(0.1, 10.0, size=3)))
    print(f"  beta = ({', '.join(f'{b:.4f}' for b in beta)})")
    for name, p in (("matched", optimal_p(beta, c)),
                    ("oblivious", harmonic_p(beta))):
        res = alpha_tilde(beta, None, solve_direct(3, p))
        print(f"  {name:<9}: alpha~ = {res.alpha_tilde:>12.6f}, "
              f"argmax server t = {res.arg_t}, "
              f"adversary lower bound = {res.lower_bound:.6f}")
    print(f"  alpha_3 = {c.alpha[3]}, 3 alpha_3 = {3 * c.alpha[3]}")


if __name__ == "__main__":
    main()
