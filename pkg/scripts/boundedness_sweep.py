"""Certified upper bound versus the empirical operator norm, over a small
grid of tensors, Hoelder triples and weights.

    python3 scripts/boundedness_sweep.py --radius 8 --samples 200 --csv sweep.csv
"""
import argparse
import csv
import math
import sys

import numpy as np

from dbo.lattice import holder_triple
from dbo.norms import n0_threshold
from dbo.symbols import Matrix, smooth_bracket_power
from dbo.tensors import DenseTruncated, DiagonalCutoff, separable_tensor, theta_two
from dbo.verification import boundedness_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radius", type=int, default=8)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv", default=None)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    tensors = {
        "diagonal": DiagonalCutoff(1.0, 3 * args.radius, 1),
        "theta2": theta_two(smooth_bracket_power(1, -12)),
        "separable": separable_tensor(Matrix.decaying(1, 0.0, 12.0), Matrix.decaying(1, 0.0, 12.0)),
        "banded": DenseTruncated.random(1, args.radius, rng, band=3),
    }
    triples = [(2, 2), (1, math.inf), (3, 6), (math.inf, math.inf)]
    weights = [(0.0, 0.0, 0.0), (0.5, -0.5, 0.0), (0.0, 1.0, -0.5)]

    rows = []
    for name, theta in tensors.items():
        for p, q in triples:
            t = holder_triple(p, q)
            for s1, s2, omega in weights:
                N = math.floor(n0_threshold(1, omega, s1, s2)) + 1
                rep = boundedness_experiment(theta, t, s1, s2, omega, N, args.radius,
                                             args.samples, args.seed)
                upper = rep.details["certificate"]["upper"]
                rows.append({"tensor": name, "p": p, "q": q, "r": t.r, "s1": s1, "s2": s2,
                             "omega": omega, "N": N, "empirical": rep.value, "upper": upper,
                             "verdict": rep.verdict})
                print(f"{name:10s} (p,q,r)=({p},{q},{t.r:g}) s=({s1},{s2}) w={omega:4.1f} N={N}"
                      f"  empirical={rep.value:.4g}  upper={upper:.4g}  {rep.verdict}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    return 0 if all(r["verdict"] == "pass" for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
