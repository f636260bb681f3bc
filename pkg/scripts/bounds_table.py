"""Print the central-binomial and event-A bounds side by side for a range of n.

    python scripts/bounds_table.py --max-n 64
"""

import argparse

from avgratio.bounds import central_binomial_bound, event_a_probability, lemma3_chain


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-n", type=int, default=32)
    ap.add_argument("--q", type=float, default=11 / 12)
    args = ap.parse_args()

    print(f"{'n':>4} {'C(n,n/2)/robbins':>17} {'Pr[A]':>12} {'binom step':>12} {'sqrt(n)3^-n/2':>14} {'1-e/2pi n':>10}")
    for n in range(2, args.max_n + 1, 2):
        exact, robbins = central_binomial_bound(n)
        chain = lemma3_chain(n, args.q)
        assert event_a_probability(n, args.q).prob_exact == chain[0]
        print(f"{n:4d} {exact / robbins:17.6f} {chain[0]:12.9f} {chain[1]:12.9f} {chain[3]:14.9f} {chain[4]:10.6f}")


if __name__ == "__main__":
    main()
