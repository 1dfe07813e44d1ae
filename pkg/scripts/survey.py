"""Tabulate eta_f for every divergence kind next to the Hellinger sandwich.

    python scripts/survey.py --channels 20 --seed 0 --max-size 4
"""
import argparse

import numpy as np

from sdpi import DivergenceKind, eta_f, sandwich_bounds
from sdpi.model import random_channel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--channels", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-size", type=int, default=4)
    args = ap.parse_args()

    kinds = list(DivergenceKind)
    print("  #  size  " + "  ".join(f"{k.value:>10}" for k in kinds) + "     d/2   g(d/2)")
    for i in range(args.channels):
        rng = np.random.default_rng([args.seed, i])
        n, m = rng.integers(2, args.max_size + 1, size=2)
        ch = random_channel(rng, int(n), int(m))
        etas = [eta_f(ch, k).eta for k in kinds]
        lo, up, _ = sandwich_bounds(ch)
        print(f"{i:>3}  {n}x{m}   " + "  ".join(f"{e:10.6f}" for e in etas) + f"  {lo:.4f}  {up:.4f}")


if __name__ == "__main__":
    main()
