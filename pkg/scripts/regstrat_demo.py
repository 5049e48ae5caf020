"""Tikhonov convergence under the a-priori rule alpha = sqrt(eps).

Prints the H^r error next to the worst-case bound for a random real phantom.
"""
import argparse

import numpy as np

from torusct import FreqBox, covering_directions
from torusct.phantoms import random_phantom
from torusct.regular import TikhonovConfig, regstrat_experiment, reports_to_csv
from torusct.weights import good_weight, normalize


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--d", type=int, default=1)
    ap.add_argument("--K", type=int, default=3)
    ap.add_argument("--s", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    box = FreqBox(args.n, args.K)
    D = covering_directions(args.n, args.d, box)
    w = normalize(good_weight(1.0, 1, D, box), D, box)
    rng = np.random.default_rng(args.seed)
    f = random_phantom(box, rng, real=True)
    cfg = TikhonovConfig(1.0, w, s=args.s, r=0.0, delta=args.s)
    eps = [10.0 ** -e for e in range(1, 9)]
    print(f"# |D| = {len(D)}, box size {box.size}")
    print(reports_to_csv(regstrat_experiment(f, cfg, eps, D, rng=rng), args.seed), end="")


if __name__ == "__main__":
    main()
