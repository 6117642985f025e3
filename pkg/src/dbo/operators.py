"""Applying tensors to sequences, commutators, the duality pairing, and
upper/lower estimates of the bilinear operator norm.

All sums run over finite supports.  Triples are produced chunk by chunk from
the tensor's support metadata; each chunk is reduced on its own and the
partial results are combined with a fixed pairwise tree, so the output does
not depend on the number of worker threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .lattice import (INF, DimensionMismatch, HolderTriple, WeightedSequence, bracket,
                      box_points, cube_points, dual_exponent, euclid, holder_triple,
                      lp_norm, lp_norm_axis)
from .norms import mixed_lebesgue_norm, n0_threshold, norm_omega_n
from .parallel import pairwise_sum, pmap
from .report import jsonable
from .support import CHUNK, cube_box
from .symbols import Matrix
from .tensors import Tensor, materialize


class HypothesisUnmet(ValueError):
    """The decay order N does not exceed the threshold N0."""


def _check_dims(d: int, *seqs):
    for s in seqs:
        if s.d != d:
            raise DimensionMismatch(f"sequence has d={s.d}, expected d={d}")


def _box(seq: WeightedSequence):
    return seq.lo, seq.hi


def _cube_seq(radius: int, d: int, flat: np.ndarray) -> WeightedSequence:
    shape = (2 * radius + 1,) * d
    return WeightedSequence([-radius] * d, flat.reshape(shape))


def _linear_index(J: np.ndarray, radius: int) -> np.ndarray:
    """Position of each point of J in the C-ordered cube of the given radius."""
    n = 2 * radius + 1
    idx = np.zeros(len(J), dtype=np.int64)
    for m in range(J.shape[1]):
        idx = idx * n + (J[:, m] + radius)
    return idx


def _accumulate(J, contrib, radius: int, size: int) -> np.ndarray:
    idx = _linear_index(J, radius)
    re = np.bincount(idx, weights=contrib.real, minlength=size)
    im = np.bincount(idx, weights=contrib.imag, minlength=size)
    return re + 1j * im


def _contract(theta: Tensor, f: WeightedSequence, g: WeightedSequence, out_radius: int,
              factor=None) -> WeightedSequence:
    """sum_{k,l} Theta(j,k,l) factor(j,k,l) f_k g_l for |j|_inf <= out_radius."""
    d = theta.d
    _check_dims(d, f, g)
    if out_radius < 0:
        raise ValueError("output radius must be nonnegative")
    size = (2 * out_radius + 1) ** d
    if f.is_empty() or g.is_empty():
        return _cube_seq(out_radius, d, np.zeros(size, dtype=complex))
    boxes = [cube_box(d, out_radius), _box(f), _box(g)]
    chunks = list(theta.support.enumerate(boxes, CHUNK))

    def work(c):
        J, K, L = c
        w = f(K) * g(L)
        nz = w != 0
        if factor is not None:
            w = w * factor(J, K, L)
            nz &= w != 0
        if not np.any(nz):
            return np.zeros(size, dtype=complex)
        J, K, L, w = J[nz], K[nz], L[nz], w[nz]
        return _accumulate(J, theta.values(J, K, L) * w, out_radius, size)

    parts = pmap(work, chunks)
    total = pairwise_sum(parts) if parts else np.zeros(size, dtype=complex)
    return _cube_seq(out_radius, d, total)


def apply(theta: Tensor, f: WeightedSequence, g: WeightedSequence,
          out_radius: int) -> WeightedSequence:
    """(T_Theta(f, g))_j = sum_k sum_l Theta(j, k, l) f_k g_l, stored on the
    cube |j|_inf <= out_radius."""
    return _contract(theta, f, g, out_radius)


def apply_linear(sigma: Matrix, f: WeightedSequence, out_radius: int) -> WeightedSequence:
    """(L_sigma f)_j = sum_k sigma(j, k) f_k."""
    d = sigma.d
    _check_dims(d, f)
    size = (2 * out_radius + 1) ** d
    if f.is_empty():
        return _cube_seq(out_radius, d, np.zeros(size, dtype=complex))
    Jp = cube_points(out_radius, d)
    Kp = f.points()
    fk = f.flat()
    keep = fk != 0
    Kp, fk = Kp[keep], fk[keep]
    per = max(1, CHUNK // max(len(Kp), 1))
    chunks = [Jp[s:s + per] for s in range(0, len(Jp), per)]

    def work(Jc):
        J = np.repeat(Jc, len(Kp), axis=0)
        K = np.tile(Kp, (len(Jc), 1))
        if sigma.band is not None:
            ok = euclid(J - K) <= sigma.band + 1e-9
            J, K = J[ok], K[ok]
        w = np.tile(fk, len(Jc))
        if sigma.band is not None:
            w = w[ok]
        return _accumulate(J, sigma.values(J, K) * w, out_radius, size)

    return _cube_seq(out_radius, d, pairwise_sum(pmap(work, chunks)))


def commutator(theta: Tensor, b: WeightedSequence, slot: int, f: WeightedSequence,
               g: WeightedSequence, out_radius: int) -> WeightedSequence:
    """[T_Theta, b]_1(f, g)_j = sum Theta(j,k,l) (b_k - b_j) f_k g_l   (slot 1)
    [T_Theta, b]_2(f, g)_j = sum Theta(j,k,l) (b_l - b_j) f_k g_l   (slot 2)

    Evaluated from this expanded form, so the factor is an exact zero
    whenever the two b values coincide."""
    if slot not in (1, 2):
        raise ValueError("slot must be 1 or 2")
    _check_dims(theta.d, b)
    if slot == 1:
        def factor(J, K, L):
            return b(K) - b(J)
    else:
        def factor(J, K, L):
            return b(L) - b(J)
    return _contract(theta, f, g, out_radius, factor)


def duality_pairing(theta: Tensor, f: WeightedSequence, g: WeightedSequence,
                    h: WeightedSequence) -> complex:
    """sum_{j,k,l} Theta(j, k, l) f_k g_l h_j."""
    _check_dims(theta.d, f, g, h)
    if f.is_empty() or g.is_empty() or h.is_empty():
        return 0j
    chunks = list(theta.support.enumerate([_box(h), _box(f), _box(g)], CHUNK))

    def work(c):
        J, K, L = c
        return np.sum(theta.values(J, K, L) * f(K) * g(L) * h(J))

    parts = pmap(work, chunks)
    return complex(pairwise_sum(parts)) if parts else 0j


# ---------------------------------------------------------------------------
# upper bounds
# ---------------------------------------------------------------------------

def cauchy_schwarz_bound(theta: Tensor, R: int) -> float:
    """||Theta||_{l^1_j l^2_k l^2_l} on the radius-R cube."""
    return mixed_lebesgue_norm(theta, holder_triple(2.0, 2.0), R)


@dataclass
class BoundCertificate:
    """C with ||T(f,g)||_{l^r_{s1+s2}} <= C ||f||_{l^p_{s1+omega}} ||g||_{l^q_{s2+omega}}
    for f, g supported in the radius-R cube and the output measured there.

    upper = norm * K_w * S1 * S2, see :func:`schur_upper_bound`.
    """

    upper: float
    lower_empirical: Optional[float]
    triple: HolderTriple
    s1: float
    s2: float
    omega: float
    N: float
    N1: float
    N2: float
    R: int
    factors: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return jsonable({"upper": self.upper, "lowerEmpirical": self.lower_empirical,
                         "triple": self.triple.as_dict(), "s1": self.s1, "s2": self.s2,
                         "omega": self.omega, "N": self.N, "N1": self.N1, "N2": self.N2,
                         "R": self.R, "factors": self.factors})


def split_orders(d: int, omega: float, s1: float, s2: float, N: float, split=None):
    """N1 + N2 = 2N with N_i > d + omega_+ + |s_i + omega|; by default the
    slack 2N - 2d - e1 - e2 is shared equally."""
    e1 = max(omega, 0.0) + abs(s1 + omega)
    e2 = max(omega, 0.0) + abs(s2 + omega)
    if split is None:
        slack = 2 * N - 2 * d - e1 - e2
        N1, N2 = d + e1 + slack / 2, d + e2 + slack / 2
    else:
        N1, N2 = (float(x) for x in split)
        if abs(N1 + N2 - 2 * N) > 1e-12:
            raise ValueError(f"split must satisfy N1 + N2 = 2N = {2 * N}")
    if not (N1 > d + e1 and N2 > d + e2):
        raise HypothesisUnmet(f"split N1={N1}, N2={N2} needs N_i > d + omega_+ + |s_i + omega| "
                              f"= ({d + e1}, {d + e2})")
    return N1, N2, e1, e2


def _peetre_constant(d, omega, s1, s2, N, N1, N2, e1, e2, R) -> float:
    """max over j, k, l in the cube of

        <|j|+|k|>^w <|j|+|l|>^w <j>^{s1+s2} <k>^{-s1-w} <l>^{-s2-w}
        * <j-k>^{N1-e1} <j-l>^{N2-e2} / <|j-k|+|j-l|>^{2N},

    the product of every implicit constant used to pass from the weighted
    tensor bound to a product of two discrete convolutions."""
    P = cube_points(R, d)
    nP = euclid(P)
    lb = np.log(bracket(nP))
    w = omega

    def work(rows):
        best = -np.inf
        for i in rows:
            j = P[i]
            nj = nP[i]
            djk = euclid(j - P)                        # |j - k| over all k
            a = w * np.log(bracket(nj + nP)) - (s1 + w) * lb + (N1 - e1) * np.log(bracket(djk))
            b = w * np.log(bracket(nj + nP)) - (s2 + w) * lb + (N2 - e2) * np.log(bracket(djk))
            rho = djk[:, None] + djk[None, :]
            tot = a[:, None] + b[None, :] - 2 * N * np.log(bracket(rho))
            best = max(best, float(tot.max()) + (s1 + s2) * lb[i])
        return best

    rows = np.arange(len(P))
    per = max(1, CHUNK // max(len(P) ** 2, 1))
    blocks = [rows[s:s + per] for s in range(0, len(P), per)]
    return float(math.exp(max(pmap(work, blocks))))


def schur_upper_bound(theta: Tensor, t: HolderTriple, s1: float, s2: float, omega: float,
                      N: float, R: int, split=None) -> BoundCertificate:
    """Certified constant for f, g supported in the radius-R cube, output on
    the same cube.

    With F_k = <k>^{s1+w}|f_k| and G_l = <l>^{s2+w}|g_l|,

        <j>^{s1+s2}|T(f,g)_j| <= ||Theta||_{w,N} K_w (a1 * F)_j (a2 * G)_j,
        a_i(u) = <u>^{e_i - N_i},  e_i = w_+ + |s_i + w|,

    then Hoelder in j and Young's inequality give the factors
    S_i = sum of a_i over all differences of cube points (the radius-2R cube).
    """
    t.require_banach()
    d = theta.d
    n0 = n0_threshold(d, omega, s1, s2)
    if not N > n0:
        raise HypothesisUnmet(f"N = {N} does not exceed N0 = {n0}")
    N1, N2, e1, e2 = split_orders(d, omega, s1, s2, N, split)
    norm = norm_omega_n(theta, omega, N, R)
    Kw = _peetre_constant(d, omega, s1, s2, N, N1, N2, e1, e2, R)
    U = euclid(cube_points(2 * R, d))
    S1 = float(np.sum(bracket(U) ** (e1 - N1)))
    S2 = float(np.sum(bracket(U) ** (e2 - N2)))
    upper = norm.value * Kw * S1 * S2
    return BoundCertificate(
        upper=upper, lower_empirical=None, triple=t, s1=s1, s2=s2, omega=omega, N=N,
        N1=N1, N2=N2, R=R,
        factors={"normOmegaN": norm.value, "normArgmax": norm.argmax,
                 "normBoundaryRatio": norm.boundary_ratio, "K_w": Kw,
                 "l1WeightSum1": S1, "l1WeightSum2": S2, "N0": n0, "e1": e1, "e2": e2})


# ---------------------------------------------------------------------------
# empirical lower bound
# ---------------------------------------------------------------------------

def _dual_vector(y: np.ndarray, p: float) -> np.ndarray:
    """z with ||z||_{p'} = 1 and <y, z> = ||y||_p (a norming functional)."""
    a = np.abs(y)
    ph = np.where(a > 0, y / np.where(a > 0, a, 1.0), 0)
    if p == INF:
        z = np.zeros_like(y)
        i = int(np.argmax(a))
        z[i] = ph[i]
        return z
    if p == 1.0:
        return ph
    n = lp_norm(y, p)
    if n == 0:
        return np.zeros_like(y)
    return ph * (a / n) ** (p - 1)


def _normalize(x: np.ndarray, p: float) -> np.ndarray:
    n = lp_norm(x, p)
    return x / n if n > 0 else x


def _operator_p_to_r(A: np.ndarray, p: float, r: float, x0: np.ndarray, iters: int = 30):
    """Lower estimate of ||A||_{p -> r} and a maximizing unit vector.

    p = 1 is exact (largest column norm).  Otherwise the nonlinear power
    iteration x <- dual_{p'}(A^* dual_r(A x)) is run from x0 and from the best
    column, keeping the best iterate seen."""
    cols = lp_norm_axis(A, r, axis=0)
    c = int(np.argmax(cols))
    e = np.zeros(A.shape[1], dtype=complex)
    e[c] = 1.0
    best_val, best_x = float(cols[c]), e
    if p == 1.0:
        return best_val, best_x
    pd = dual_exponent(p)
    for start in (x0, e):
        x = _normalize(start.astype(complex), p)
        for _ in range(iters):
            y = np.einsum("jk,k->j", A, x)
            val = lp_norm(y, r)
            if val > best_val:
                best_val, best_x = val, x
            w = np.einsum("jk,j->k", A.conj(), _dual_vector(y, r))
            if lp_norm(w, pd) == 0:
                break
            x = _normalize(_dual_vector(w, pd), p)
    return best_val, best_x


def _weighted_block(theta, t, s1, s2, omega, R):
    P = cube_points(R, theta.d)
    B = materialize(theta, P, P, P)
    lb = bracket(euclid(P))
    D = B * (lb ** (s1 + s2))[:, None, None] / (lb ** (s1 + omega))[None, :, None] \
        / (lb ** (s2 + omega))[None, None, :]
    return P, D


def _value(D, F, G, r):
    return lp_norm(np.einsum("jkl,k,l->j", D, F, G), r)


def _unit_sample(rng, n, p):
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return _normalize(x, p)


def empirical_operator_norm(theta: Tensor, t: HolderTriple, s1: float, s2: float,
                            omega: float, R: int, samples: int = 200, seed: int = 0,
                            rounds: int = 10, return_ratios: bool = False):
    """Best value of ||T(f,g)||_{l^r_{s1+s2}} found over unit f in
    l^p_{s1+omega}, g in l^q_{s2+omega} supported in the radius-R cube.

    Candidates: ``samples`` complex Gaussian pairs (sample i uses the
    generator seeded with (seed, i)), every pair of unit point masses, and
    ``rounds`` of alternating ascent from the best candidate.  The result is
    a lower bound for the operator norm on the truncation.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    p, q, r = t.p, t.q, t.r
    P, D = _weighted_block(theta, t, s1, s2, omega, R)
    n = len(P)

    def one(i):
        rng = np.random.default_rng([seed, i])
        F = _unit_sample(rng, n, p)
        G = _unit_sample(rng, n, q)
        return _value(D, F, G, r), F, G

    sampled = pmap(one, range(samples))
    ratios = [v for v, _, _ in sampled]
    # point masses: the output for (delta_k, delta_l) is the column D[:, k, l]
    masses = lp_norm_axis(D.reshape(n, n * n), r, axis=0).reshape(n, n)
    km, lm = np.unravel_index(int(np.argmax(masses)), masses.shape)
    i_best = int(np.argmax(ratios))
    if masses[km, lm] > ratios[i_best]:
        F = np.zeros(n, dtype=complex)
        G = np.zeros(n, dtype=complex)
        F[km] = G[lm] = 1.0
        best = float(masses[km, lm])
    else:
        best, F, G = sampled[i_best]
    ascent = []
    for _ in range(rounds):
        A = np.einsum("jkl,l->jk", D, G)
        _, F = _operator_p_to_r(A, p, r, F)
        A = np.einsum("jkl,k->jl", D, F)
        _, G = _operator_p_to_r(A, q, r, G)
        v = _value(D, F, G, r)
        ascent.append(v)
        best = max(best, v)
    best = max(best, float(masses.max()), max(ratios))
    if return_ratios:
        return best, {"sampled": ratios, "pointMassMax": float(masses.max()), "ascent": ascent}
    return best
