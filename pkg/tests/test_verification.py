import math

import numpy as np
import pytest

from dbo.lattice import WeightedSequence, holder_triple, weighted_norm
from dbo.norms import bt_membership_scan
from dbo.operators import apply
from dbo.symbols import (bracket_power, constant, monomial, polynomial,
                         smooth_bracket_power)
from dbo.tensors import (DiagonalCutoff, MultiplicationType, diagonal_indicator, theta_phi,
                         theta_two)
from dbo.verification import (CompactnessExperiment, boundedness_experiment,
                              compactness_experiment, lemma_x_scan, negative_witness_scan,
                              v_phi_scan, variable_coefficient_scan)

T221 = holder_triple(2, 2)
SMOOTH_V = WeightedSequence([-2], [0.1, 0.3, 1.0, 0.3, 0.1])


# -- boundedness ----------------------------------------------------------------

def test_boundedness_diagonal_passes():
    rep = boundedness_experiment(diagonal_indicator(1), T221, N=2, R=6, samples=50)
    assert rep.verdict == "pass"
    assert rep.value <= rep.details["certificate"]["upper"]


def test_boundedness_theta_two_with_scripted_ratios():
    N, R = 2, 6
    th = theta_two(bracket_power(1, -2 * N))
    rep = boundedness_experiment(th, T221, N=N, R=R, samples=100, seed=1)
    assert rep.verdict == "pass"
    upper = rep.details["certificate"]["upper"]
    for seed in range(5):
        rng = np.random.default_rng(seed)
        f = WeightedSequence([-R], rng.standard_normal(2 * R + 1) + 1j * rng.standard_normal(2 * R + 1))
        g = WeightedSequence([-R], rng.standard_normal(2 * R + 1))
        ratio = weighted_norm(apply(th, f, g, R), 0, 1) / (weighted_norm(f, 0, 2) * weighted_norm(g, 0, 2))
        assert ratio <= upper


def test_boundedness_unweighted_special_case():
    th = theta_two(smooth_bracket_power(1, -4))
    for t in (holder_triple(1, math.inf), holder_triple(3, 6)):
        rep = boundedness_experiment(th, t, N=1.5, R=5, samples=30)
        assert rep.verdict == "pass", rep.details


def test_boundedness_hypothesis_unmet_is_not_failure():
    rep = boundedness_experiment(diagonal_indicator(1), T221, N=1, R=4)
    assert rep.verdict == "hypothesis-unmet" and rep.passed
    assert rep.details["N0"] == 1


# -- compactness ----------------------------------------------------------------

def theta2_experiment(**kw):
    args = dict(theta=theta_two(smooth_bracket_power(1, -6)), b=WeightedSequence.delta((0,)),
                triple=T221, N=3, samples=100, seed=0, R=24)
    args.update(kw)
    return CompactnessExperiment(**args)


def test_compactness_theta_two():
    curve, rep = compactness_experiment(theta2_experiment())
    assert rep.verdict == "pass"
    tails = [t for _, t in curve.points]
    assert all(a >= b for a, b in zip(tails, tails[1:]))
    assert curve.fitted_slope <= -(3 - 1) + 0.5
    assert rep.details["rateOk"]
    assert curve.to_csv().startswith("j0,tail\n0,")


def test_compactness_slot_two():
    _, rep = compactness_experiment(theta2_experiment(slot=2, samples=30))
    assert rep.verdict == "pass"


def test_compactness_zero_cases():
    for e in (theta2_experiment(b=WeightedSequence.zeros(1), samples=10, R=8),
              theta2_experiment(theta=DiagonalCutoff(1.0, 30, 1), samples=10, R=8,
                                b=WeightedSequence([-2], np.arange(1.0, 6.0)))):
        curve, rep = compactness_experiment(e)
        assert all(t == 0 for _, t in curve.points)
        assert rep.details["identicallyZero"]
        assert all(v == 0 for v in rep.details["minimalJ0"].values())


def test_compactness_rejects_bad_configs():
    with pytest.raises(ValueError):
        theta2_experiment(triple=holder_triple(math.inf, math.inf))
    with pytest.raises(ValueError):
        theta2_experiment(epsilons=(0.1, 0.0))


# -- BT classes -----------------------------------------------------------------

def test_witness_constant_potential():
    V = MultiplicationType(WeightedSequence.delta((0,)))
    rep = negative_witness_scan(V, 0.0, 2, 64)
    assert rep.verdict == "violation"
    j, k, l = rep.witness["triple"]
    assert j[0] == 2 * k[0] == 2 * l[0]
    # along the ray the quotient is <2t>^4 / <4t>^0
    t = k[0]
    assert rep.value == pytest.approx((1 + (2 * t) ** 2) ** 2, rel=1e-12)
    assert negative_witness_scan(V, 4.0, 2, 64).verdict == "no-violation"


def test_witness_smooth_potential_and_scan_agree():
    V = MultiplicationType(SMOOTH_V)
    rep = negative_witness_scan(V, 0.0, 2, 64)
    assert rep.verdict == "violation" and rep.witness["offset"] == [0]
    scan = bt_membership_scan(V, 0.0, 2, 1, 1, R=10)
    assert scan.verdict != "consistent-with-membership"


def test_lemma_x_examples():
    assert lemma_x_scan(constant(1), 2, R=10).verdict == "consistent-with-membership"
    assert lemma_x_scan(monomial((1,), (1,)), 2, R=10).verdict == "consistent-with-membership"
    rep = lemma_x_scan(smooth_bracket_power(1, -1), 2, R=10)
    assert rep.verdict == "consistent-with-membership"
    assert rep.details["reducedPlaneCheck"]["stable"]


def test_kinked_bracket_symbol_is_flagged():
    # <|x| + |y|>^-1 has a kink on the axes, so second differences there decay
    # one power too slowly for the order-(-1) estimates
    assert lemma_x_scan(bracket_power(1, -1), 2, R=10).verdict == "inconclusive"


def test_v_phi_with_delta_potential_matches_lemma_x():
    phi = smooth_bracket_power(1, -1)
    a = v_phi_scan(WeightedSequence.delta((0,)), phi, 2, R=8)
    b = lemma_x_scan(phi, 2, R=8)
    ra, rb = a.details["seminorms"], b.details["seminorms"]
    assert [r["value2R"] for r in ra] == [r["value2R"] for r in rb]
    assert a.verdict == b.verdict == "consistent-with-membership"


def test_v_phi_examples():
    assert v_phi_scan(SMOOTH_V, constant(1), 2, R=10).verdict == "consistent-with-membership"
    V2 = WeightedSequence([-1], [0.5, 1.0, 0.5])
    terms = [(SMOOTH_V, monomial((1,), (0,))), (V2, polynomial(1, [(2.0, (0,), (1,))])),
             (V2, constant(1, 3.0))]
    assert variable_coefficient_scan(terms, 2, R=10).verdict == "consistent-with-membership"


def test_theta_phi_matches_theta_two_on_swapped_symbol():
    # on the plane Theta_2(j, k, l) = Phi(l, k): both constructions agree for symmetric Phi
    phi = smooth_bracket_power(1, -2)
    J = np.array([[3], [0], [-2]])
    K = np.array([[1], [2], [-5]])
    assert np.allclose(theta_phi(phi)(J, K, J - K), theta_two(phi)(J, K, J - K))
