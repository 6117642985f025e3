"""Tensor norms and seminorms over truncated index cubes, and the BT-class
membership scanner.

Every supremum over Z^{3d} is replaced by a maximum over the cube
max(|j|_inf, |k|_inf, |l|_inf) <= R.  Each :class:`ScanResult` also carries
the maximum over the boundary shell of that cube so callers can judge
whether the truncation is adequate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Optional, Sequence

import numpy as np

from .lattice import (INF, HolderTriple, MultiIndex, bracket, cube_points, euclid,
                      lp_norm_axis)
from .parallel import pmap
from .report import Report, ScanResult
from .support import CHUNK, cube_box
from .tensors import Magnitude, Tensor, finite_difference, materialize

# weight(nj, nk, nl) -> positive array; the scanned quotient is
# |Theta| * <|j-k| + |j-l|>^{2N} / weight
Weight = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]

PRUNE_FRACTION = 1e-3
# relative size below which a scanned difference counts as an exact zero
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class NormParams:
    """Parameters shared by the norms, the threshold N0 and the certificates."""

    omega: float = 0.0
    N: float = 1.0
    omega1: Optional[float] = None
    omega2: Optional[float] = None
    s1: float = 0.0
    s2: float = 0.0
    alpha: tuple = ()
    beta: tuple = ()

    def __post_init__(self):
        if not self.N >= 1:
            raise ValueError("N must be >= 1")

    @property
    def orders(self) -> tuple[float, float]:
        w1 = self.omega if self.omega1 is None else self.omega1
        w2 = self.omega if self.omega2 is None else self.omega2
        return w1, w2

    def as_dict(self) -> dict:
        return {"omega": self.omega, "omega1": self.orders[0], "omega2": self.orders[1],
                "N": self.N, "s1": self.s1, "s2": self.s2,
                "alpha": list(self.alpha), "beta": list(self.beta)}


def _omega_weight(w1: float, w2: float) -> Weight:
    def weight(nj, nk, nl):
        return bracket(nj + nk) ** w1 * bracket(nj + nl) ** w2
    return weight


def _sum_weight(w: float) -> Weight:
    def weight(nj, nk, nl):
        return bracket(nj + nk + nl) ** w
    return weight


def _norm_values(d: int, R: int) -> np.ndarray:
    return np.unique(np.round(euclid(cube_points(R, d)), 12))


def max_over_norms(fn: Callable, d: int, R: int) -> float:
    """Maximum of fn(|j|, |k|, |l|) over the cube, using that j, k, l range
    independently and fn depends only on their Euclidean lengths."""
    v = _norm_values(d, R)
    a, b, c = np.meshgrid(v, v, v, indexing="ij")
    return float(np.max(fn(a, b, c)))


def _levels(J, K, L) -> np.ndarray:
    return np.maximum(np.maximum(np.abs(J).max(1), np.abs(K).max(1)), np.abs(L).max(1))


class _Tracker:
    """Running maxima of the quotient for a set of nested radii."""

    def __init__(self, radii: Sequence[int]):
        self.radii = list(radii)
        self.best = [0.0] * len(radii)
        self.arg = [None] * len(radii)
        self.boundary = [0.0] * len(radii)
        self.count = [0] * len(radii)

    def update(self, q, J, K, L):
        lev = _levels(J, K, L)
        for i, r in enumerate(self.radii):
            inside = lev <= r
            if not np.any(inside):
                continue
            qi = q[inside]
            self.count[i] += int(inside.sum())
            m = int(np.argmax(qi))
            # strict '>' keeps the first maximizer in enumeration order
            if self.arg[i] is None or qi[m] > self.best[i]:
                idx = np.flatnonzero(inside)[m]
                self.best[i] = float(qi[m])
                self.arg[i] = (J[idx].tolist(), K[idx].tolist(), L[idx].tolist())
            on_b = lev[inside] == r
            if np.any(on_b):
                self.boundary[i] = max(self.boundary[i], float(qi[on_b].max()))

    def results(self) -> list[ScanResult]:
        return [ScanResult(self.best[i], self.arg[i], r, self.boundary[i], self.count[i])
                for i, r in enumerate(self.radii)]


def scan_quotient(theta: Tensor, N: float, weight: Weight, radii: Sequence[int] | int
                  ) -> list[ScanResult] | ScanResult:
    """sup |Theta| <|j-k|+|j-l|>^{2N} / weight(|j|,|k|,|l|) over nested cubes.

    Triples are enumerated from the tensor's support metadata.  For tensors
    with only a declared decay majorant, shells of growing |j-k|+|j-l| are
    visited in order and the scan stops once a certified bound for all
    remaining shells falls below ``PRUNE_FRACTION`` of the current maximum.
    """
    single = isinstance(radii, (int, np.integer))
    radii = sorted({int(radii)} if single else {int(r) for r in radii})
    if radii[0] < 1:
        raise ValueError("scan radius must be >= 1")
    Rmax = radii[-1]
    d = theta.d
    tr = _Tracker(radii)

    def quotient(J, K, L):
        vals = np.abs(theta.values(J, K, L))
        rho = euclid(J - K) + euclid(J - L)
        w = weight(euclid(J), euclid(K), euclid(L))
        return vals * bracket(rho) ** (2 * N) / w

    sup = theta.support
    pruned = (sup.decay is not None and sup.box is None and sup.plane is None
              and sup.band is None and 2 * N < sup.decay[1])
    if pruned:
        _shell_scan(theta, N, weight, Rmax, quotient, tr)
    else:
        box = cube_box(d, Rmax)
        chunks = list(sup.enumerate([box, box, box], CHUNK))

        def work(c):
            return quotient(*c)

        for (J, K, L), q in zip(chunks, pmap(work, chunks)):
            tr.update(q, J, K, L)
    res = tr.results()
    return res[0] if single else res


def _shell_scan(theta, N, weight, R, quotient, tr):
    d = theta.d
    C, Kdec = theta.support.decay
    wmin = 1.0 / max_over_norms(lambda a, b, c: 1.0 / weight(a, b, c), d, R)
    offs = cube_points(2 * R, d)
    no = euclid(offs)
    iu, iv = np.meshgrid(np.arange(len(offs)), np.arange(len(offs)), indexing="ij")
    iu, iv = iu.ravel(), iv.ravel()
    rho = no[iu] + no[iv]
    order = np.argsort(rho, kind="stable")
    iu, iv, rho = iu[order], iv[order], rho[order]
    shell = np.floor(rho).astype(np.int64)
    Jp = cube_points(R, d)
    best = 0.0
    for s in np.unique(shell):
        majorant = C * bracket(float(s)) ** (2 * N - Kdec) / wmin
        if best > 0 and majorant < PRUNE_FRACTION * best:
            break
        sel = shell == s
        U, V = offs[iu[sel]], offs[iv[sel]]
        J = np.repeat(Jp, len(U), axis=0)
        K = J + np.tile(U, (len(Jp), 1))
        L = J + np.tile(V, (len(Jp), 1))
        ok = (np.abs(K).max(1) <= R) & (np.abs(L).max(1) <= R)
        J, K, L = J[ok], K[ok], L[ok]
        if len(J) == 0:
            continue
        q = quotient(J, K, L)
        tr.update(q, J, K, L)
        best = max(best, float(q.max()))


# ---------------------------------------------------------------------------
# the norms
# ---------------------------------------------------------------------------

def norm_omega_n(theta: Tensor, omega: float, N: float, R):
    """||Theta||_{omega,N}: |Theta| <|j-k|+|j-l|>^{2N} / (<|j|+|k|>^omega <|j|+|l|>^omega)."""
    return scan_quotient(theta, N, _omega_weight(omega, omega), R)


def norm_zero_n(theta: Tensor, N: float, R):
    return scan_quotient(theta, N, _omega_weight(0.0, 0.0), R)


def norm_two_order(theta: Tensor, omega1: float, omega2: float, N: float, R):
    return scan_quotient(theta, N, _omega_weight(omega1, omega2), R)


def seminorm00(theta: Tensor, omega: float, N: float, R):
    """||Theta||_{0,0,omega,N}: denominator <|j|+|k|+|l|>^omega."""
    return scan_quotient(theta, N, _sum_weight(omega), R)


def _bt_parts(theta: Tensor, alpha, beta, omega: float):
    a = MultiIndex(tuple(alpha)) if alpha is not None else MultiIndex.zero(theta.d)
    b = MultiIndex(tuple(beta)) if beta is not None else MultiIndex.zero(theta.d)
    diff = finite_difference(theta, a, b)
    return diff, _sum_weight(omega - a.abs_sum - b.abs_sum)


def bt_seminorm(theta: Tensor, alpha, beta, omega: float, N: float, R):
    """||Theta||_{alpha,beta,omega,N}: |Delta_2^alpha Delta_3^beta Theta|
    <|j-k|+|j-l|>^{2N} / <|j|+|k|+|l|>^{omega-|alpha|-|beta|}."""
    diff, weight = _bt_parts(theta, alpha, beta, omega)
    return scan_quotient(diff, N, weight, R)


def bt_noise_floor(theta: Tensor, alpha, beta, omega: float, N: float, R):
    """Same scan for the magnitude envelope of the differenced tensor, times
    ``ZERO_TOL``.  A seminorm at or below this is indistinguishable from an
    exactly vanishing difference."""
    diff, weight = _bt_parts(theta, alpha, beta, omega)
    env = scan_quotient(Magnitude(diff), N, weight, R)
    if isinstance(env, list):
        return [ZERO_TOL * e.value for e in env]
    return ZERO_TOL * env.value


def n0_threshold(d: int, omega: float, s1: float, s2: float) -> float:
    """d + omega_+ + (|s1 + omega| + |s2 + omega|) / 2."""
    return d + max(omega, 0.0) + 0.5 * (abs(s1 + omega) + abs(s2 + omega))


# ---------------------------------------------------------------------------
# mixed Lebesgue norms
# ---------------------------------------------------------------------------

ORDERINGS = [("l", "k", "j"), ("k", "l", "j"), ("l", "j", "k"),
             ("j", "l", "k"), ("k", "j", "l"), ("j", "k", "l")]
_AXIS = {"j": 0, "k": 1, "l": 2}


def iterated_norm(block: np.ndarray, exps: dict, order=("l", "k", "j")) -> float:
    """Iterated norm of a dense (j, k, l) block, innermost index first."""
    arr = np.abs(block)
    axes = ["j", "k", "l"]
    for name in order:
        ax = axes.index(name)
        arr = lp_norm_axis(arr, exps[name], axis=ax)
        axes.pop(ax)
    return float(arr)


def mixed_lebesgue_norm(theta: Tensor, t: HolderTriple, R: int, minimize: bool = False):
    """||Theta||_{l^r_j l^{p'}_k l^{q'}_l} over the radius-R cube, computed
    inner to outer (l, then k, then j).  With ``minimize`` the minimum over
    all six nestings is returned together with the per-ordering values."""
    if R < 1:
        raise ValueError("radius must be >= 1")
    P = cube_points(R, theta.d)
    block = materialize(theta, P, P, P)
    exps = {"j": t.r, "k": t.p_dual, "l": t.q_dual}
    if not minimize:
        return iterated_norm(block, exps)
    vals = {"".join(reversed(o)): iterated_norm(block, exps, o) for o in ORDERINGS}
    return min(vals.values()), vals


# ---------------------------------------------------------------------------
# comparison constants between the two families of norms
# ---------------------------------------------------------------------------

def comparison_constants(d: int, omega: float, R: int) -> dict:
    """Brute-forced constants C with, on the radius-R cube,

    omega >= 0:  ||.||_{0,0,2w,N} <= C_a ||.||_{w,N}   and  ||.||_{w,N} <= C_b ||.||_{0,0,w,N}
    omega <= 0:  ||.||_{0,0,w,N}  <= C_a ||.||_{w,N}   and  ||.||_{w,N} <= C_b ||.||_{0,0,2w,N}

    Each is the maximum of the pointwise ratio of the two denominators.
    """
    w = omega
    ab = _omega_weight(w, w)
    if w >= 0:
        ca = max_over_norms(lambda a, b, c: ab(a, b, c) / _sum_weight(2 * w)(a, b, c), d, R)
        cb = max_over_norms(lambda a, b, c: _sum_weight(w)(a, b, c) / ab(a, b, c), d, R)
        return {"first": (2 * w, ca), "second": (w, cb)}
    ca = max_over_norms(lambda a, b, c: ab(a, b, c) / _sum_weight(w)(a, b, c), d, R)
    cb = max_over_norms(lambda a, b, c: _sum_weight(2 * w)(a, b, c) / ab(a, b, c), d, R)
    return {"first": (w, ca), "second": (2 * w, cb)}


# ---------------------------------------------------------------------------
# BT-class membership
# ---------------------------------------------------------------------------

def multi_indices(d: int, max_abs: int) -> list[tuple[int, ...]]:
    """All alpha in Z^d with sum |alpha_m| <= max_abs, in a fixed order."""
    rng = range(-max_abs, max_abs + 1)
    out = [a for a in product(rng, repeat=d) if sum(abs(x) for x in a) <= max_abs]
    return sorted(out, key=lambda a: (sum(abs(x) for x in a), a))


def ray_quotients(theta: Tensor, omega: float, N: float, rmax: int, offset=None):
    """The quotient |Theta| <|j-k|+|j-l|>^{2N} / <|j|+|k|+|l|>^omega along
    the ray k = l = t e_1, j = 2 t e_1 + offset, for t = 1 .. max(1, rmax // 2).

    Returns (t, J, K, L, q)."""
    d = theta.d
    offset = np.zeros(d, dtype=np.int64) if offset is None else np.asarray(offset, dtype=np.int64)
    t = np.arange(1, max(1, rmax // 2) + 1)
    e1 = np.zeros(d, dtype=np.int64)
    e1[0] = 1
    K = t[:, None] * e1
    L = K.copy()
    J = 2 * K + offset
    vals = np.abs(theta.values(J, K, L))
    rho = euclid(J - K) + euclid(J - L)
    q = vals * bracket(rho) ** (2 * N) / bracket(euclid(J) + euclid(K) + euclid(L)) ** omega
    return t, J, K, L, q


def _ray_witness(theta, alpha, beta, omega, N, rmax, divergence):
    diff, _ = _bt_parts(theta, alpha, beta, omega)
    order = omega - sum(abs(a) for a in alpha) - sum(abs(b) for b in beta)
    t, J, K, L, q = ray_quotients(diff, order, N, rmax)
    half, end = float(q[max(1, len(t) // 2) - 1]), float(q[-1])
    if not (end > 0 and end >= divergence * half):
        return None
    return {"triple": (J[-1].tolist(), K[-1].tolist(), L[-1].tolist()), "quotient": end,
            "quotientHalf": half, "ray": "j = 2k = 2l"}


def bt_membership_scan(theta: Tensor, omega: float, N: float, alpha_max: int = 2,
                       beta_max: int = 2, R: int = 20, stability: float = 0.10,
                       divergence: float = 2.0) -> Report:
    """Scan every seminorm with |alpha| <= alpha_max, |beta| <= beta_max at
    radii R and 2R and turn the evidence into a verdict.

    consistent-with-membership: every seminorm changes by at most
        ``stability`` (relative) between the radii;
    violation: some seminorm grows by a factor >= ``divergence`` with its
        maximizer on the boundary of the larger cube;
    inconclusive: anything else.

    Seminorms below the roundoff floor of :func:`bt_noise_floor` at both
    radii are reported as numerically zero and count as stable.  A violation
    witness is the maximizer over the larger cube; when the same quotient
    also diverges along the ray j = 2k = 2l inside that cube, the ray triple
    is attached as well.
    """
    if alpha_max < 0 or beta_max < 0:
        raise ValueError("alpha_max and beta_max must be nonnegative")
    rows = []
    verdict = "consistent-with-membership"
    witness = None
    top = None
    for alpha in multi_indices(theta.d, alpha_max):
        for beta in multi_indices(theta.d, beta_max):
            small, big = bt_seminorm(theta, alpha, beta, omega, N, [R, 2 * R])
            floor = bt_noise_floor(theta, alpha, beta, omega, N, [R, 2 * R])[1]
            zero = big.value <= floor
            on_boundary = big.argmax is not None and \
                max(max(abs(c) for c in p) for p in big.argmax) == 2 * R
            finite = math.isfinite(big.value)
            grows = not zero and big.value > small.value * (1.0 + stability)
            diverges = (not zero and finite and big.value > 0 and on_boundary
                        and big.value >= divergence * small.value)
            rows.append({"alpha": list(alpha), "beta": list(beta), "valueR": small.value,
                         "value2R": big.value, "argmax2R": big.argmax,
                         "boundaryRatio2R": big.boundary_ratio, "noiseFloor": floor,
                         "numericallyZero": zero, "finite": finite})
            if top is None or big.value > top[0].value:
                top = (big, alpha, beta)
            if (diverges or not finite) and verdict != "violation":
                verdict = "violation"
                witness = {"alpha": list(alpha), "beta": list(beta), "triple": big.argmax,
                           "valueR": small.value, "value2R": big.value,
                           "ray": _ray_witness(theta, alpha, beta, omega, N, 2 * R, divergence)}
            elif grows and verdict == "consistent-with-membership":
                verdict = "inconclusive"
    best = top[0]
    return Report(
        kind="bt-check",
        params={"omega": omega, "N": N, "alphaMax": alpha_max, "betaMax": beta_max,
                "R": R, "stability": stability, "divergence": divergence},
        value=best.value, argmax=best.argmax, radius=2 * R,
        boundary_ratio=max(r["boundaryRatio2R"] for r in rows),
        verdict=verdict, witness=witness,
        details={"seminorms": rows, "support": theta.support.describe()})
