"""Membership scans for the standard example tensors.

Prints one verdict line per example and optionally writes every report to a
JSON file.

    python3 scripts/bt_examples.py --radius 20 --out bt_examples.json
"""
import argparse
import json
import time

from dbo.lattice import WeightedSequence
from dbo.norms import bt_membership_scan
from dbo.symbols import bracket_power, monomial, smooth_bracket_power
from dbo.tensors import (ConvolutionType, DiagonalCutoff, MultiplicationType,
                         VariableCoefficient, theta_phi, theta_two)
from dbo.verification import lemma_x_scan, negative_witness_scan


def examples(N):
    V = WeightedSequence([-2], [0.1, 0.3, 1.0, 0.3, 0.1])
    phi = smooth_bracket_power(1, -1)
    return [
        ("diagonal cutoff", DiagonalCutoff(1.0, 10, 1), 0.0, "consistent-with-membership"),
        ("theta_2, smooth decay", theta_two(smooth_bracket_power(1, -2 * N)), 0.0,
         "consistent-with-membership"),
        ("theta_V", MultiplicationType(V), 0.0, "violation"),
        ("theta_V at omega = 2N", MultiplicationType(V), 2.0 * N, "consistent-with-membership"),
        ("theta_Phi, order -1", theta_phi(phi), phi.omega + 2 * N, "consistent-with-membership"),
        ("theta_ab, a = b = 1", ConvolutionType(mode="monomial", a=(1,), b=(1,)), 2 + 2 * N,
         "consistent-with-membership"),
        ("theta_(V,Phi)", VariableCoefficient([(WeightedSequence([-1], [0.5, 1.0, 0.5]), phi)]),
         phi.omega + 2 * N, "consistent-with-membership"),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radius", type=int, default=20)
    ap.add_argument("--N", type=float, default=2.0)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    reports = {}
    for name, theta, omega, expect in examples(args.N):
        t0 = time.perf_counter()
        rep = bt_membership_scan(theta, omega, args.N, R=args.radius)
        mark = "ok " if rep.verdict == expect else "!! "
        print(f"{mark}{name:26s} omega={omega:5.1f}  {rep.verdict:28s} "
              f"sup={rep.value:.4g}  ({time.perf_counter() - t0:.2f} s)")
        reports[name] = rep.as_dict()

    V = MultiplicationType(WeightedSequence.delta((0,)))
    ray = negative_witness_scan(V, 0.0, args.N, 4 * args.radius)
    print(f"ray j = 2k = 2l for V = 1: {ray.verdict}, growth {ray.details['growth']:.3g}")
    kink = lemma_x_scan(bracket_power(1, -1), args.N, R=args.radius)
    print(f"kinked <|x|+|y|>^-1 symbol: {kink.verdict}")
    reports["ray witness"] = ray.as_dict()
    reports["kinked symbol"] = kink.as_dict()
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(reports, fh, sort_keys=True, indent=2)


if __name__ == "__main__":
    main()
