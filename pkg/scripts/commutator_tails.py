"""Tail curves of the commutator [T, b] for a decaying convolution-plane
tensor and a finitely supported b, for several decay orders N.

    python3 scripts/commutator_tails.py --radius 24 --samples 100 --csv tails.csv
"""
import argparse
import csv

from dbo.lattice import WeightedSequence, holder_triple
from dbo.symbols import smooth_bracket_power
from dbo.tensors import theta_two
from dbo.verification import CompactnessExperiment, compactness_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radius", type=int, default=24)
    ap.add_argument("--samples", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--orders", default="2,3,4")
    ap.add_argument("--csv", default=None)
    args = ap.parse_args()

    b = WeightedSequence([-1], [0.5, 1.0, -0.5])
    rows = []
    for N in (float(x) for x in args.orders.split(",")):
        e = CompactnessExperiment(theta_two(smooth_bracket_power(1, -2 * N)), b,
                                  holder_triple(2, 2), N=N, samples=args.samples,
                                  seed=args.seed, R=args.radius)
        curve, rep = compactness_experiment(e)
        print(f"N={N:g}: slope {curve.fitted_slope:.3f} (target <= {rep.details['slopeTarget']:.2f}),"
              f" rate bound {'ok' if rep.details['rateOk'] else 'VIOLATED'},"
              f" j0 per eps {rep.details['minimalJ0']}  -> {rep.verdict}")
        rows += [{"N": N, "j0": j0, "tail": t} for j0, t in curve.points]
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["N", "j0", "tail"])
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
