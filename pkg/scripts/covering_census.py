"""Size of the covering direction set, heights and wrap counts per (n, d, K)."""
import argparse
from collections import Counter

from torusct import FreqBox, covering_directions, transverse_frame


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-n", type=int, default=4)
    ap.add_argument("--max-K", type=int, default=2)
    args = ap.parse_args()

    print("n,d,K,directions,max_entry,wrap_counts")
    for n in range(2, args.max_n + 1):
        for d in range(1, n):
            for K in range(1, args.max_K + 1):
                D = covering_directions(n, d, FreqBox(n, K))
                wraps = Counter(transverse_frame(A).det for A in D)
                hist = " ".join(f"{k}:{v}" for k, v in sorted(wraps.items()))
                print(f"{n},{d},{K},{len(D)},{max(abs(v) for A in D for row in A.basis for v in row)},{hist}")


if __name__ == "__main__":
    main()
