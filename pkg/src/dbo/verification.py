"""Desk-scale experiments for boundedness, compactness of commutators and
membership in the BT classes, each producing a :class:`Report`."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .lattice import (INF, HolderTriple, WeightedSequence, bracket, cube_points,
                      dual_exponent, euclid, lp_norm, lp_norm_axis)
from .norms import (ZERO_TOL, _bt_parts, bt_membership_scan, multi_indices,
                    n0_threshold, norm_zero_n, ray_quotients, scan_quotient)
from .operators import (HypothesisUnmet, _normalize, _unit_sample, empirical_operator_norm,
                        schur_upper_bound)
from .parallel import pmap
from .report import Report
from .symbols import SymbolFunction
from .tensors import (Magnitude, MultiplicationType, Tensor, TorusCoefficient,
                      VariableCoefficient, materialize, theta_phi)


# ---------------------------------------------------------------------------
# boundedness
# ---------------------------------------------------------------------------

def boundedness_experiment(theta: Tensor, t: HolderTriple, s1: float = 0.0, s2: float = 0.0,
                           omega: float = 0.0, N: float = 2.0, R: int = 8,
                           samples: int = 200, seed: int = 0, slack: float = 1e-9,
                           split=None) -> Report:
    """Certificate versus sampled ratios.  Passes iff no sampled ratio
    exceeds upper * (1 + slack)."""
    params = {"triple": t.as_dict(), "s1": s1, "s2": s2, "omega": omega, "N": N, "R": R,
              "samples": samples, "seed": seed, "slack": slack}
    try:
        cert = schur_upper_bound(theta, t, s1, s2, omega, N, R, split)
    except HypothesisUnmet as exc:
        return Report("verify-bound", params, verdict="hypothesis-unmet",
                      details={"reason": str(exc),
                               "N0": n0_threshold(theta.d, omega, s1, s2)})
    best, info = empirical_operator_norm(theta, t, s1, s2, omega, R, samples, seed,
                                         return_ratios=True)
    cert.lower_empirical = best
    limit = cert.upper * (1.0 + slack)
    worst = max(info["sampled"] + info["ascent"] + [info["pointMassMax"], best])
    verdict = "pass" if worst <= limit else "fail"
    return Report("verify-bound", params, value=best, radius=R,
                  boundary_ratio=cert.factors["normBoundaryRatio"], verdict=verdict,
                  witness=None if verdict == "pass" else {"ratio": worst, "upper": cert.upper},
                  details={"certificate": cert.as_dict(), "maxSampledRatio": max(info["sampled"]),
                           "pointMassMax": info["pointMassMax"], "ascent": info["ascent"],
                           "ratioOverUpper": worst / cert.upper if cert.upper > 0 else 0.0})


# ---------------------------------------------------------------------------
# compactness of commutators
# ---------------------------------------------------------------------------

@dataclass
class CompactnessExperiment:
    theta: Tensor
    b: WeightedSequence
    triple: HolderTriple
    N: float
    epsilons: Sequence[float] = (1e-1, 1e-2, 1e-3)
    samples: int = 100
    seed: int = 0
    R: int = 24
    slot: int = 1

    def __post_init__(self):
        if any(e <= 0 for e in self.epsilons):
            raise ValueError("epsilons must be positive")
        if self.triple.r == INF:
            raise ValueError("the tail criterion needs r < inf")
        self.triple.require_banach()
        if self.slot not in (1, 2):
            raise ValueError("slot must be 1 or 2")

    @property
    def j1(self) -> float:
        """Radius (Euclidean) of the support of b."""
        nz = self.b.nonzero_points()
        return float(euclid(nz).max()) if len(nz) else 0.0


@dataclass
class TailCurve:
    points: list            # (j0, tail)
    fitted_slope: Optional[float]
    fit_range: tuple = ()

    def as_rows(self) -> list:
        return [{"j0": j0, "tail": t} for j0, t in self.points]

    def to_csv(self) -> str:
        return "j0,tail\n" + "".join(f"{j0},{t!r}\n" for j0, t in self.points)


def _commutator_block(e: CompactnessExperiment):
    P = cube_points(e.R, e.theta.d)
    B = materialize(e.theta, P, P, P)
    bP = e.b(P)
    if e.slot == 1:
        C = B * (bP[None, :, None] - bP[:, None, None])
    else:
        C = B * (bP[None, None, :] - bP[:, None, None])
    return P, C


def _tails(absout: np.ndarray, order: np.ndarray, levels: np.ndarray, r: float,
           j0s: np.ndarray) -> np.ndarray:
    """(sum_{|j| > j0} |out_j|^r)^{1/r} for each j0, per sample (rows).

    Suffix sums of nonnegative terms, so the result is nonincreasing in j0
    even in floating point."""
    a = absout[:, order] ** r
    suffix = np.cumsum(a[:, ::-1], axis=1)[:, ::-1]
    suffix = np.concatenate([suffix, np.zeros((len(a), 1))], axis=1)
    # first position with |j| > j0
    pos = np.searchsorted(levels, j0s, side="right")
    return suffix[:, pos] ** (1.0 / r)


def _rate_constant(e: CompactnessExperiment, j0s: np.ndarray) -> dict:
    """Constants of the tail estimate for |j| > j0 >= 2 j1, where b_j = 0:

    |[T,b](f,g)_j| <= |b|_inf ||Theta||_{0,N} (sum_{|k|<=j1} |f_k| <j-k>^-N)
                      (sum_l <j-l>^-N |g_l|)
                  <= |b|_inf ||Theta||_{0,N} card^{1/p'} K1 <j>^-N S_N ||f||_p ||g||_q

    and (sum_{|j|>j0} <j>^{-Nr})^{1/r} <= K2 <j0>^{-N+d/r}."""
    d, N, R = e.theta.d, e.N, e.R
    p, r = e.triple.p, e.triple.r
    j1 = e.j1
    P = cube_points(R, d)
    nP = euclid(P)
    norm = norm_zero_n(e.theta, N, R).value
    binf = float(np.abs(e.b.flat()).max()) if not e.b.is_empty() else 0.0
    near = P[nP <= j1 + 1e-12]
    card = len(near)
    # slot 2 puts b on the g side, so the point count meets q' instead of p'
    pd = dual_exponent(p if e.slot == 1 else e.triple.q)
    card_factor = 1.0 if pd == INF else card ** (1.0 / pd)
    far = P[nP >= 2 * j1 - 1e-12]
    K1 = 0.0
    for k in near:
        K1 = max(K1, float(np.max(bracket(euclid(far)) ** N / bracket(euclid(far - k)) ** N)))
    SN = float(np.sum(bracket(euclid(cube_points(2 * R, d))) ** (-N)))
    order = np.argsort(nP, kind="stable")
    levels = nP[order]
    w = bracket(levels) ** (-N * r)
    suffix = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])
    pos = np.searchsorted(levels, j0s, side="right")
    rate = bracket(j0s.astype(float)) ** (-N + d / r)
    K2 = float(np.max(suffix[pos] ** (1.0 / r) / rate))
    C = binf * norm * card_factor * K1 * SN * K2
    return {"C": C, "bInf": binf, "normZeroN": norm, "card": card, "cardFactor": card_factor,
            "K1": K1, "S_N": SN, "K2": K2, "j1": j1}


def compactness_experiment(e: CompactnessExperiment) -> tuple[TailCurve, Report]:
    """Uniform tail decay of [T, b](f, g) over a finite sample of the unit
    ball, the minimal j0 per epsilon, the explicit rate bound and a log-log
    slope."""
    d, N = e.theta.d, e.N
    p, q, r = e.triple.p, e.triple.q, e.triple.r
    P, C = _commutator_block(e)
    n = len(P)
    nP = euclid(P)
    order = np.argsort(nP, kind="stable")
    levels = nP[order]
    j0s = np.arange(0, int(math.ceil(levels[-1])) + 1)

    def one(i):
        rng = np.random.default_rng([e.seed, i])
        F = _unit_sample(rng, n, p)
        G = _unit_sample(rng, n, q)
        return np.abs(np.einsum("jkl,k,l->j", C, F, G))

    outs = np.array(pmap(one, range(e.samples)))
    tails = _tails(outs, order, levels, r, j0s).max(axis=0)
    # point masses (delta_k, delta_l): the output is the column C[:, k, l]
    cols = np.abs(C.reshape(n, n * n)).T
    per = 4096
    for s in range(0, len(cols), per):
        tails = np.maximum(tails, _tails(cols[s:s + per], order, levels, r, j0s).max(axis=0))

    monotone = bool(np.all(np.diff(tails) <= 0))
    first_below = {}
    for eps in e.epsilons:
        hit = np.flatnonzero(tails < eps)
        first_below[repr(float(eps))] = int(j0s[hit[0]]) if len(hit) else None

    j1 = e.j1
    rate = _rate_constant(e, j0s)
    lo = max(2 * j1, 1.0)
    in_rate = j0s >= 2 * j1
    bound = rate["C"] * bracket(j0s.astype(float)) ** (-N + d / r)
    rate_ok = bool(np.all(tails[in_rate] <= bound[in_rate] * (1 + 1e-9) + 1e-300))

    fit = (j0s >= lo) & (j0s <= e.R // 2) & (tails > 0)
    slope = None
    if fit.sum() >= 2:
        x = np.log(bracket(j0s[fit].astype(float)))
        slope = float(np.polyfit(x, np.log(tails[fit]), 1)[0])
    target = -(N - d / r) + 0.5
    slope_ok = slope is None or slope <= target
    zero = bool(np.all(tails == 0))
    verdict = "pass" if (monotone and rate_ok and slope_ok) else "fail"
    curve = TailCurve([(int(a), float(b)) for a, b in zip(j0s, tails)], slope,
                      (float(lo), float(e.R // 2)))
    report = Report(
        "verify-compactness",
        params={"triple": e.triple.as_dict(), "N": N, "R": e.R, "samples": e.samples,
                "seed": e.seed, "slot": e.slot, "epsilons": list(e.epsilons)},
        value=float(tails[0]), radius=e.R, verdict=verdict,
        details={"tail": curve.as_rows(), "fittedSlope": slope, "slopeTarget": target,
                 "slopeOk": slope_ok, "monotone": monotone, "rateOk": rate_ok,
                 "rate": rate, "minimalJ0": first_below, "identicallyZero": zero})
    return curve, report


# ---------------------------------------------------------------------------
# BT-class witnesses
# ---------------------------------------------------------------------------

def negative_witness_scan(theta: Tensor, omega: float, N: float, rmax: int,
                          divergence: float = 2.0, offset=None) -> Report:
    """The alpha = beta = 0 quotient along the ray k = l = t e_1,
    j = 2 t e_1 (+ offset), for |j| up to ``rmax``.

    For Theta_V the default offset is the point where |V^| is largest, which
    is the origin for potentials with dominant mean.  Reports "violation"
    when the quotient at the end of the ray is at least ``divergence``
    times its value at half the length."""
    d = theta.d
    if offset is None:
        offset = np.zeros(d, dtype=np.int64)
        if isinstance(theta, MultiplicationType):
            c = theta.V.coeffs
            offset = c.points()[int(np.argmax(np.abs(c.flat())))]
    offset = np.asarray(offset, dtype=np.int64)
    t, J, K, L, q = ray_quotients(theta, omega, N, rmax, offset)
    tmax = len(t)
    half = max(1, tmax // 2)
    q_half, q_end = float(q[half - 1]), float(q[-1])
    grows = q_end > 0 and q_end >= divergence * q_half
    verdict = "violation" if grows else "no-violation"
    witness = None
    if grows:
        witness = {"triple": (J[-1].tolist(), K[-1].tolist(), L[-1].tolist()),
                   "quotient": q_end, "quotientHalf": q_half, "ray": "j = 2k = 2l",
                   "offset": offset.tolist()}
    return Report("witness", {"omega": omega, "N": N, "rmax": rmax, "divergence": divergence},
                  value=q_end, argmax=(J[-1].tolist(), K[-1].tolist(), L[-1].tolist()),
                  radius=int(np.abs(J[-1]).max()), verdict=verdict, witness=witness,
                  details={"ray": [{"t": int(a), "quotient": float(b)} for a, b in zip(t, q)],
                           "growth": q_end / q_half if q_half > 0 else None})


def reduced_plane_check(theta: Tensor, order: float, alpha_max: int, beta_max: int, R: int,
                        stability: float = 0.10) -> dict:
    """C_{alpha,beta} = max |Delta_2^alpha Delta_3^beta Theta| / <|k|+|l|>^{order-|alpha|-|beta|}
    over the cube at radii R and 2R, for tensors living on planes j - k - l = const.

    A constant is stable when it changes by at most ``stability`` between the
    radii or is numerically zero at both."""
    rows, stable = [], True
    for alpha in multi_indices(theta.d, alpha_max):
        for beta in multi_indices(theta.d, beta_max):
            diff, _ = _bt_parts(theta, alpha, beta, 0.0)
            ex = order - sum(abs(a) for a in alpha) - sum(abs(b) for b in beta)

            def weight(nj, nk, nl, ex=ex):
                return bracket(nk + nl) ** ex

            small, big = scan_quotient(diff, 0.0, weight, [R, 2 * R])
            floor = ZERO_TOL * scan_quotient(Magnitude(diff), 0.0, weight, 2 * R).value
            zero = big.value <= floor
            ok = zero or big.value <= small.value * (1 + stability)
            stable &= ok
            rows.append({"alpha": list(alpha), "beta": list(beta), "C_R": small.value,
                         "C_2R": big.value, "numericallyZero": zero, "stable": ok})
    return {"stable": stable, "constants": rows}


def _combine(scan: Report, plane: dict, kind: str, params: dict) -> Report:
    verdict = scan.verdict
    if verdict == "consistent-with-membership" and not plane["stable"]:
        verdict = "inconclusive"
    details = dict(scan.details)
    details["reducedPlaneCheck"] = plane
    return Report(kind, {**scan.params, **params}, value=scan.value, argmax=scan.argmax,
                  radius=scan.radius, boundary_ratio=scan.boundary_ratio, verdict=verdict,
                  witness=scan.witness, details=details)


def lemma_x_scan(phi: SymbolFunction, N: float, alpha_max: int = 2, beta_max: int = 2,
                 R: int = 20, stability: float = 0.10, divergence: float = 2.0) -> Report:
    """Membership scan of Theta_Phi at order omega(Phi) + 2N together with
    the reduced plane inequality at order omega(Phi)."""
    theta = theta_phi(phi)
    omega = phi.omega + 2 * N
    scan = bt_membership_scan(theta, omega, N, alpha_max, beta_max, R, stability, divergence)
    plane = reduced_plane_check(theta, phi.omega, alpha_max, beta_max, R, stability)
    return _combine(scan, plane, "lemma-x", {"phi": phi.spec(), "phiOrder": phi.omega})


def variable_coefficient_scan(terms, N: float, alpha_max: int = 2, beta_max: int = 2,
                              R: int = 20, stability: float = 0.10,
                              divergence: float = 2.0) -> Report:
    """Same as :func:`lemma_x_scan` for sum_i V_i^(j-k-l) Phi_i(k, l), at
    order max_i omega(Phi_i) + 2N."""
    theta = VariableCoefficient(terms)
    w0 = theta.omega
    scan = bt_membership_scan(theta, w0 + 2 * N, N, alpha_max, beta_max, R, stability,
                              divergence)
    plane = reduced_plane_check(theta, w0, alpha_max, beta_max, R, stability)
    return _combine(scan, plane, "v-phi", {"phiOrder": w0})


def v_phi_scan(V, phi: SymbolFunction, N: float, R: int = 20, alpha_max: int = 2,
               beta_max: int = 2, stability: float = 0.10, divergence: float = 2.0) -> Report:
    return variable_coefficient_scan([(V, phi)], N, alpha_max, beta_max, R, stability,
                                     divergence)
