"""Sobolev stability ratios ||f||_{H^s} / ||Rf|| over phantoms, weights and p."""
import argparse

import numpy as np

from torusct import FreqBox, covering_directions
from torusct.phantoms import bump_phantom, delta_phantom, random_phantom
from torusct.regular import stability_report, stability_to_csv
from torusct.weights import constant_weight, good_weight, normalize, partition_weight


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--d", type=int, default=1)
    ap.add_argument("--K", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    box = FreqBox(args.n, args.K)
    D = covering_directions(args.n, args.d, box)
    phantoms = {
        "random": random_phantom(box, np.random.default_rng(args.seed), real=True),
        "bump": bump_phantom(box),
        "delta": delta_phantom(box, (1,) + (0,) * (args.n - 1), real=True),
    }
    weights = {
        "constant": constant_weight(),
        "good": good_weight(1.0, 1, D, box),
        "partition": partition_weight(D, box),
        "normalized": normalize(constant_weight(), D, box),
    }
    for pname, f in phantoms.items():
        for wname, w in weights.items():
            reports = [stability_report(f, w, D, s, p) for s in (0.0, 1.0) for p in (1.5, 2.0, 4.0)]
            print(f"## phantom={pname} weight={wname}")
            print(stability_to_csv(reports, args.seed), end="")


if __name__ == "__main__":
    main()
