import math

import numpy as np
import pytest

from dbo.fourier import (TorusFunction, TorusGrid, band_limit, bridge_check, from_fourier,
                         grid_size, hs_norm_coefficients, hs_norm_grid, min_grid_size,
                         physical_derivative_product, random_band_limited, to_fourier)
from dbo.lattice import WeightedSequence, weighted_norm
from dbo.symbols import bracket_power, monomial
from dbo.tensors import ConvolutionType, MultiplicationType, VariableCoefficient, theta_two


def test_to_fourier_examples():
    g = TorusGrid(1, 8)
    one = to_fourier(TorusFunction.from_callable(g, lambda x: np.ones(x.shape[:-1])), 2)
    assert one.at((0,)) == pytest.approx(1.0) and abs(one.flat()).sum() == pytest.approx(1.0)
    e1 = to_fourier(TorusFunction.from_callable(g, lambda x: np.exp(2j * np.pi * x[..., 0])), 2)
    assert e1.at((1,)) == pytest.approx(1.0, abs=1e-15) and abs(e1.at((-1,))) < 1e-15


def test_single_mode_convention_is_exact():
    # e^{2 pi i x} at x = m/4 is exactly (1, i, -1, -i)
    F = TorusFunction(TorusGrid(1, 4), [1, 1j, -1, -1j])
    f = to_fourier(F, 1)
    assert f.at((1,)) == 1 and f.at((0,)) == 0 and f.at((-1,)) == 0
    back = from_fourier(WeightedSequence.delta((1,)), TorusGrid(1, 4))
    assert np.array_equal(back.samples, F.samples)


def test_round_trips(rng):
    for d, K, n in ((1, 5, 16), (2, 3, 8)):
        g = TorusGrid(d, n)
        F = random_band_limited(g, K, rng)
        f = to_fourier(F, K)
        assert np.allclose(from_fourier(f, g).samples, F.samples, rtol=0,
                           atol=1e-12 * np.abs(F.samples).max())
        shape = (2 * K + 1,) * d
        c = WeightedSequence([-K] * d, rng.standard_normal(shape) + 0j)
        assert np.allclose(to_fourier(from_fourier(c, g), K).flat(), c.flat(), atol=1e-12)


def test_grid_limits():
    with pytest.raises(ValueError):
        to_fourier(TorusFunction(TorusGrid(1, 8), np.ones(8)), 4)
    with pytest.raises(ValueError):
        from_fourier(WeightedSequence.delta((4,)), TorusGrid(1, 8))
    assert min_grid_size(3, 2) == 13 and grid_size(13) == 16 and grid_size(16) == 16
    assert TorusGrid(1, 9).nyquist == 4


def test_physical_derivative_product_examples(rng):
    g = TorusGrid(1, 16)
    F = random_band_limited(g, 3, rng)
    G = random_band_limited(g, 3, rng)
    P = physical_derivative_product(F, G, (0,), (0,))
    assert np.allclose(P.samples, F.samples * G.samples, atol=1e-12)
    e = TorusFunction.from_callable(g, lambda x: np.exp(2j * np.pi * x[..., 0]))
    P = physical_derivative_product(e, e, (1,), (0,))
    want = 2j * np.pi * np.exp(4j * np.pi * g.nodes()[..., 0])
    assert np.allclose(P.samples, want, atol=1e-12)
    with pytest.raises(ValueError):
        physical_derivative_product(F, G, (1,), (0,), K=4)  # 4K + 1 = 17 > 16


def test_band_limit(rng):
    g = TorusGrid(2, 16)
    assert band_limit(random_band_limited(g, 3, rng)) == 3
    assert band_limit(TorusFunction(g, np.zeros((16, 16)))) == 0


def test_parseval_and_hs(rng):
    for d, K, n in ((1, 6, 16), (2, 3, 8)):
        F = random_band_limited(TorusGrid(d, n), K, rng)
        f = to_fourier(F, K)
        assert F.l2_norm() == pytest.approx(weighted_norm(f, 0, 2), rel=1e-12)
        for s in (-1.0, 0.5, 2.0):
            assert hs_norm_grid(F, s) == pytest.approx(hs_norm_coefficients(F, s, K), rel=1e-12)


def bridge_families(d, rng):
    fams = []
    for a in range(3):
        for b in range(3 - a):
            aa = (a,) + (0,) * (d - 1)
            bb = (0,) * (d - 1) + (b,)
            fams.append(ConvolutionType(mode="monomial", a=aa, b=bb))
    KV = 2
    shape = (2 * KV + 1,) * d
    V = WeightedSequence([-KV] * d, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    fams.append(MultiplicationType(V))
    fams.append(VariableCoefficient([(V, monomial((1,) * d, (0,) * d))]))
    return fams, KV


@pytest.mark.parametrize("d,K", [(1, 8), (2, 3)])
def test_bridge_families(d, K, rng):
    fams, KV = bridge_families(d, rng)
    n = grid_size(2 * (KV + 2 * K) + 1)
    g = TorusGrid(d, n)
    for th in fams:
        F, G = random_band_limited(g, K, rng), random_band_limited(g, K, rng)
        rep = bridge_check(th, F, G, K)
        assert rep.verdict == "pass", (th.family, rep.value)


def test_bridge_examples(rng):
    g = TorusGrid(1, 32)
    F, G = random_band_limited(g, 4, rng), random_band_limited(g, 4, rng)
    plain = ConvolutionType(mode="monomial", a=(0,), b=(0,))
    assert bridge_check(plain, F, G, 4).value <= 1e-12
    assert bridge_check(MultiplicationType(WeightedSequence.delta((0,))), F, G, 4).verdict == "pass"
    # V F' G computed directly on the grid
    V = WeightedSequence([-1], [0.5, 1.0, -0.25j])
    th = VariableCoefficient([(V, monomial((1,), (0,)))])
    x = g.nodes()[..., 0]
    Vx = sum(c * np.exp(2j * np.pi * k * x) for k, c in zip((-1, 0, 1), V.flat()))
    f = to_fourier(F, 4)
    dF = sum(2j * np.pi * k * c * np.exp(2j * np.pi * k * x) for k, c in zip(range(-4, 5), f.flat()))
    direct = to_fourier(TorusFunction(g, Vx * dF * G.samples), 9)
    from dbo.operators import apply
    out = apply(th, f, to_fourier(G, 4), 9)
    assert np.allclose(out.flat(), direct.flat(), atol=1e-10)
    assert bridge_check(th, F, G, 4).verdict == "pass"


def test_bridge_rejections(rng):
    g = TorusGrid(1, 16)
    F, G = random_band_limited(g, 4, rng), random_band_limited(g, 4, rng)
    with pytest.raises(ValueError, match="need n >= 17"):
        bridge_check(ConvolutionType(mode="monomial", a=(1,), b=(0,)), F, G, 4)
    with pytest.raises(ValueError):
        bridge_check(theta_two(bracket_power(1, -2)), F, G, 4)
