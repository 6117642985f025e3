import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dbo.lattice import (WeightedSequence, cube_points, holder_triple, lp_norm,
                         pointwise_multiply, weighted_norm)
from dbo.operators import (HypothesisUnmet, apply, apply_linear, cauchy_schwarz_bound,
                           commutator, duality_pairing, empirical_operator_norm,
                           schur_upper_bound, split_orders)
from dbo.parallel import set_workers
from dbo.symbols import Matrix, smooth_bracket_power
from dbo.tensors import (DenseTruncated, DiagonalCutoff, diagonal_indicator, separable_tensor,
                         theta_two, transpose)


def rand_seq(rng, d, R):
    shape = (2 * R + 1,) * d
    return WeightedSequence([-R] * d, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def loop_apply(theta, f, g, out_R):
    """Naive triple loop over the output cube and both supports."""
    d = theta.d
    out = {}
    for j in cube_points(out_R, d):
        s = 0j
        for k in f.points():
            for l in g.points():
                s += theta.evaluate(j, k, l) * f.at(k) * g.at(l)
        out[tuple(j)] = s
    return out


# -- apply --------------------------------------------------------------------

def test_apply_examples():
    d0 = WeightedSequence.delta((0,))
    out = apply(diagonal_indicator(1), d0, d0, 3)
    assert out.at((0,)) == 1 and np.count_nonzero(out.flat()) == 1
    rng = np.random.default_rng(0)
    f, g = rand_seq(rng, 1, 3), rand_seq(rng, 1, 3)
    out = apply(DiagonalCutoff(1.0, 9, 1), f, g, 3)
    assert np.array_equal(out.flat(), f.flat() * g.flat())
    ones = DenseTruncated.from_cube(np.ones((3, 3, 3)), 1)
    one = WeightedSequence([-1], np.ones(3))
    assert np.array_equal(apply(ones, one, one, 1).flat(), np.full(3, 9.0))


@pytest.mark.parametrize("d,R", [(1, 3), (2, 1)])
def test_apply_against_triple_loop(d, R):
    rng = np.random.default_rng(1)
    th = DenseTruncated.random(d, R, rng)
    f, g = rand_seq(rng, d, R), rand_seq(rng, d, R)
    got = apply(th, f, g, R)
    want = loop_apply(th, f, g, R)
    scale = max(abs(v) for v in want.values())
    for j, v in want.items():
        assert abs(got.at(j) - v) <= 1e-12 * scale


def test_apply_linear_examples():
    rng = np.random.default_rng(2)
    f = rand_seq(rng, 2, 2)
    out = apply_linear(Matrix.identity(2), f, 2)
    assert np.array_equal(out.flat(), f.flat())
    sh = apply_linear(Matrix.shift(2, 1, 1), f, 3)
    for k in f.points():
        assert sh.at(tuple(k + np.array([1, 0]))) == f.at(k)
    sigma = Matrix.banded_random(1, 5, 2, rng)
    f = rand_seq(rng, 1, 5)
    P = cube_points(5, 1)
    M = np.array([[sigma.evaluate(j, k) for k in P] for j in P])
    assert np.allclose(apply_linear(sigma, f, 5).flat(), M @ f.flat(), rtol=0, atol=1e-12)


@pytest.mark.parametrize("d,R", [(1, 4), (2, 2)])
def test_separable_consistency(d, R):
    rng = np.random.default_rng(3)
    s1 = Matrix.banded_random(d, R, 1, rng)
    s2 = Matrix.banded_random(d, R, 2, rng)
    f, g = rand_seq(rng, d, R), rand_seq(rng, d, R)
    lhs = apply(separable_tensor(s1, s2), f, g, R).flat()
    rhs = apply_linear(s1, f, R).flat() * apply_linear(s2, g, R).flat()
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-12 * np.abs(rhs).max())


def test_separable_consistency_exact_on_integer_data():
    # small integers keep every partial sum exact, so the identity holds bitwise
    rng = np.random.default_rng(4)
    R = 4
    P = cube_points(R, 1)
    pairs = [(j, k) for j in P for k in P if abs(j[0] - k[0]) <= 1]
    mk = lambda: Matrix.dense(WeightedSequence.from_points(
        np.array([np.concatenate([j, k]) for j, k in pairs]),
        rng.integers(-3, 4, len(pairs)).astype(complex)), 1)
    s1, s2 = mk(), mk()
    f = WeightedSequence([-R], rng.integers(-3, 4, 2 * R + 1).astype(complex))
    g = WeightedSequence([-R], rng.integers(-3, 4, 2 * R + 1).astype(complex))
    lhs = apply(separable_tensor(s1, s2), f, g, R).flat()
    rhs = apply_linear(s1, f, R).flat() * apply_linear(s2, g, R).flat()
    assert np.array_equal(lhs, rhs)


coef = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@given(coef, coef, st.integers(0, 2 ** 32 - 1))
def test_bilinearity(a, b, seed):
    rng = np.random.default_rng(seed)
    th = DenseTruncated.random(1, 2, rng)
    f, f2, g = rand_seq(rng, 1, 2), rand_seq(rng, 1, 2), rand_seq(rng, 1, 2)
    lhs = apply(th, f * a + f2 * b, g, 2).flat()
    rhs = a * apply(th, f, g, 2).flat() + b * apply(th, f2, g, 2).flat()
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-12 * (1 + np.abs(rhs).max()))
    lhs = apply(th, g, f * a + f2 * b, 2).flat()
    rhs = a * apply(th, g, f, 2).flat() + b * apply(th, g, f2, 2).flat()
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-12 * (1 + np.abs(rhs).max()))


def test_apply_is_thread_independent():
    rng = np.random.default_rng(5)
    th = DenseTruncated.random(1, 6, rng)
    f, g = rand_seq(rng, 1, 6), rand_seq(rng, 1, 6)
    outs = []
    for n in (1, 2, 8):
        set_workers(n)
        try:
            outs.append(apply(th, f, g, 6).flat())
        finally:
            set_workers(None)
    assert all(np.array_equal(outs[0], o) for o in outs[1:])


# -- commutators and pairings ---------------------------------------------------

def test_commutator_zero_cases_are_exact():
    rng = np.random.default_rng(6)
    th = DenseTruncated.random(1, 3, rng)
    f, g = rand_seq(rng, 1, 3), rand_seq(rng, 1, 3)
    b = WeightedSequence([-6], np.full(13, 2.5 - 1j))
    diag = DiagonalCutoff(WeightedSequence([-3], rng.standard_normal(7) + 0j), 9)
    brand = rand_seq(rng, 1, 3)
    for slot in (1, 2):
        assert np.all(commutator(th, b, slot, f, g, 3).flat() == 0)
        assert np.all(commutator(diag, brand, slot, f, g, 3).flat() == 0)


def test_commutator_against_two_applies():
    rng = np.random.default_rng(7)
    th = DenseTruncated.random(1, 3, rng)
    f, g, b = rand_seq(rng, 1, 3), rand_seq(rng, 1, 3), rand_seq(rng, 1, 3)
    Tfg = apply(th, f, g, 3)
    one = apply(th, pointwise_multiply(b, f), g, 3) - pointwise_multiply(b, Tfg)
    two = apply(th, f, pointwise_multiply(b, g), 3) - pointwise_multiply(b, Tfg)
    scale = np.abs(Tfg.flat()).max() * np.abs(b.flat()).max()
    for slot, want in ((1, one), (2, two)):
        got = commutator(th, b, slot, f, g, 3)
        pts = got.points()
        assert np.allclose(got.flat(), want(pts), rtol=0, atol=1e-12 * scale)


def test_duality_pairings_agree():
    rng = np.random.default_rng(8)
    d0 = WeightedSequence.delta((0,))
    th = DenseTruncated.random(1, 3, rng)
    assert duality_pairing(th, d0, d0, d0) == th.evaluate((0,), (0,), (0,))
    f, g, h = rand_seq(rng, 1, 3), rand_seq(rng, 1, 3), rand_seq(rng, 1, 3)
    base = duality_pairing(th, f, g, h)
    Tfg = apply(th, f, g, 3)
    p1 = np.sum(Tfg.flat() * h(Tfg.points()))
    T1 = apply(transpose(th, 1), h, g, 3)
    p2 = np.sum(T1.flat() * f(T1.points()))
    T2 = apply(transpose(th, 2), f, h, 3)
    p3 = np.sum(T2.flat() * g(T2.points()))
    for p in (p1, p2, p3):
        assert abs(p - base) <= 1e-12 * (1 + abs(base))


# -- upper bounds ---------------------------------------------------------------

def test_cauchy_schwarz_bound():
    assert cauchy_schwarz_bound(diagonal_indicator(1), 2) == pytest.approx(1.0)
    ones = DenseTruncated.from_cube(np.ones((3, 3, 3)), 1)
    assert cauchy_schwarz_bound(ones, 1) == pytest.approx(9.0, rel=1e-14)
    rng = np.random.default_rng(9)
    th = DenseTruncated.random(1, 3, rng)
    bound = cauchy_schwarz_bound(th, 3)
    for _ in range(100):
        f, g = rand_seq(rng, 1, 3), rand_seq(rng, 1, 3)
        f = f * (1 / weighted_norm(f, 0, 2))
        g = g * (1 / weighted_norm(g, 0, 2))
        assert weighted_norm(apply(th, f, g, 3), 0, 1) <= bound + 1e-9


def test_split_orders():
    N1, N2, e1, e2 = split_orders(1, 0.0, 0.0, 0.0, 3)
    assert (N1, N2, e1, e2) == (3.0, 3.0, 0.0, 0.0)
    N1, N2, e1, e2 = split_orders(1, 1.0, 0.0, 1.0, 5)
    assert N1 + N2 == 10 and N1 - 1 - e1 == pytest.approx(N2 - 1 - e2)
    with pytest.raises(ValueError):
        split_orders(1, 0.0, 0.0, 0.0, 3, split=(2.0, 3.0))
    with pytest.raises(HypothesisUnmet):
        split_orders(1, 0.0, 0.0, 0.0, 3, split=(1.0, 5.0))


def test_certificate_diagonal_indicator():
    t = holder_triple(2, 2)
    cert = schur_upper_bound(diagonal_indicator(1), t, 0, 0, 0, 2, 4)
    assert cert.factors["normOmegaN"] == 1.0 and cert.factors["K_w"] == pytest.approx(1.0)
    assert math.isfinite(cert.upper) and cert.upper >= 1.0
    emp = empirical_operator_norm(diagonal_indicator(1), t, 0, 0, 0, 4, samples=20)
    assert emp == pytest.approx(1.0, rel=1e-12) and emp <= cert.upper


def test_certificate_refused_at_threshold():
    t = holder_triple(2, 2)
    with pytest.raises(HypothesisUnmet):
        schur_upper_bound(diagonal_indicator(1), t, 0, 0, 0, 1, 4)
    # N0 = 2 + 0 + (1 + 2) / 2 = 3.5
    th = diagonal_indicator(2)
    with pytest.raises(HypothesisUnmet):
        schur_upper_bound(th, t, 0.0, 3.0, -1.0, 3.5, 2)
    assert schur_upper_bound(th, t, 0.0, 3.0, -1.0, 4, 2).upper > 0


def test_certificate_banded_dominates_sampled_ratios():
    rng = np.random.default_rng(10)
    R = 12
    th = DenseTruncated.random(1, R, rng, band=3)
    t = holder_triple(2, 2)
    cert = schur_upper_bound(th, t, 0, 0, 0, 3, R)
    best, info = empirical_operator_norm(th, t, 0, 0, 0, R, samples=200, seed=3,
                                         return_ratios=True)
    assert max(info["sampled"]) <= cert.upper and best <= cert.upper


def test_certificate_with_weights_dominates_ratios():
    t = holder_triple(1.5, 3)
    th = theta_two(smooth_bracket_power(1, -8))
    cert = schur_upper_bound(th, t, 0.5, -0.5, 1.0, 4, 6)
    emp = empirical_operator_norm(th, t, 0.5, -0.5, 1.0, 6, samples=50)
    assert emp <= cert.upper


# -- empirical norm -------------------------------------------------------------

def test_empirical_norm_examples():
    t = holder_triple(math.inf, math.inf)
    v = empirical_operator_norm(DiagonalCutoff(1.0, 12, 1), t, 0, 0, 0, 3, samples=10)
    assert v == pytest.approx(1.0, rel=1e-12)


def test_empirical_norm_is_deterministic_and_thread_independent():
    rng = np.random.default_rng(11)
    th = DenseTruncated.random(1, 3, rng)
    t = holder_triple(2, 2)
    vals = []
    for n in (1, 4):
        set_workers(n)
        try:
            vals.append(empirical_operator_norm(th, t, 0, 0, 0, 3, samples=30, seed=5))
        finally:
            set_workers(None)
    assert vals[0] == vals[1]


def test_empirical_norm_against_phase_grid_oracle():
    """d = 1, R = 2, (2, 2, 1).  ||T(f,g)||_1 = max over unimodular h of
    |f^T (sum_j h_j D_j) g|, so the norm is max_h sigma_max(sum_j h_j D_j).
    A phase grid with m values per coordinate (h_0 = 1 fixed) gives a lower
    value; adding the Lipschitz error 2 sin(pi / 2m) sum_j ||D_j||_2 gives
    an upper value."""
    rng = np.random.default_rng(12)
    n = 5
    D = rng.standard_normal((n, n, n)) + 1j * rng.standard_normal((n, n, n))
    th = DenseTruncated.from_cube(D, 1)
    m = 12
    ph = np.exp(2j * np.pi * np.arange(m) / m)
    grid = np.array(list(itertools.product(range(m), repeat=n - 1)))
    H = np.concatenate([np.ones((len(grid), 1)), ph[grid]], axis=1)
    M = np.einsum("hj,jkl->hkl", H, D)
    lower = float(np.linalg.svd(M, compute_uv=False)[:, 0].max())
    lip = 2 * math.sin(math.pi / (2 * m)) * sum(np.linalg.norm(D[j], 2) for j in range(n))
    upper = lower + lip
    emp = empirical_operator_norm(th, holder_triple(2, 2), 0, 0, 0, 2, samples=200)
    assert emp <= upper * (1 + 1e-12)
    assert emp >= 0.9 * lower
