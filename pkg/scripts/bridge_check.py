"""Fourier-side tensors against their physical-side operators on the torus.

    python3 scripts/bridge_check.py --pairs 20 --kmax 8
"""
import argparse

import numpy as np

from dbo.fourier import TorusGrid, bridge_check, grid_size, random_band_limited
from dbo.lattice import WeightedSequence
from dbo.symbols import monomial
from dbo.tensors import ConvolutionType, MultiplicationType, VariableCoefficient


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=20)
    ap.add_argument("--kmax", type=int, default=8)
    ap.add_argument("--d", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    d, KV = args.d, 2
    shape = (2 * KV + 1,) * d
    V = WeightedSequence([-KV] * d, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    z = (0,) * d
    one = (1,) + (0,) * (d - 1)
    families = {
        "d^a F d^b G, a=b=0": ConvolutionType(mode="monomial", a=z, b=z),
        "d^a F d^b G, a=1, b=2": ConvolutionType(mode="monomial", a=one,
                                                 b=tuple(2 * x for x in one)),
        "V F G": MultiplicationType(V),
        "V dF G": VariableCoefficient([(V, monomial(one, z))]),
    }
    for name, theta in families.items():
        worst = 0.0
        for _ in range(args.pairs):
            K = int(rng.integers(1, args.kmax + 1))
            g = TorusGrid(d, grid_size(2 * (KV + 2 * K) + 1))
            rep = bridge_check(theta, random_band_limited(g, K, rng),
                               random_band_limited(g, K, rng), K)
            worst = max(worst, rep.details["relativeResidual"])
        print(f"{name:24s} worst relative residual {worst:.2e}")


if __name__ == "__main__":
    main()
