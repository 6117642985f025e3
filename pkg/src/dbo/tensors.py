"""Infinite tensors Theta(j, k, l) on Z^d x Z^d x Z^d.

Tensors are lazy, vectorized evaluators carrying :class:`Support` metadata.
``values(J, K, L)`` takes integer arrays of shape (n, d) and returns n
complex entries; only :class:`DenseTruncated` stores its entries.
"""
from __future__ import annotations

import math
from typing import Callable, Optional, Sequence

import numpy as np

from .lattice import (DimensionMismatch, LatticePoint, MultiIndex, WeightedSequence,
                      bracket, euclid)
from .support import Support
from .symbols import (Matrix, SymbolFunction, TWO_PI_I, matrix_from_spec, monomial,
                      symbol_from_spec)

FAMILIES = ("DenseTruncated", "DiagonalCutoff", "ConvolutionType", "MultiplicationType",
            "VariableCoefficient", "Separable", "Shifted", "Differenced", "Transposed",
            "Function")


def _as_array(p, d: int) -> np.ndarray:
    if isinstance(p, LatticePoint):
        p = p.coords
    a = np.asarray(p, dtype=np.int64).reshape(-1)
    if a.size != d:
        raise DimensionMismatch(f"expected a point in Z^{d}, got {a.size} coordinates")
    return a


class Tensor:
    family = "Tensor"

    def __init__(self, d: int, support: Support):
        if d < 1:
            raise ValueError("d must be >= 1")
        self.d = d
        self.support = support

    def values(self, J, K, L) -> np.ndarray:
        raise NotImplementedError

    def magnitude(self, J, K, L) -> np.ndarray:
        """Pointwise bound for the sizes of the terms that make up
        ``values``; floating-point error in ``values`` is a small multiple of
        machine epsilon times this."""
        return np.abs(self.values(J, K, L))

    def __call__(self, J, K, L) -> np.ndarray:
        J, K, L = (np.asarray(X, dtype=np.int64) for X in (J, K, L))
        for X in (J, K, L):
            if X.shape[-1] != self.d:
                raise DimensionMismatch(f"tensor has d={self.d}, got points with d={X.shape[-1]}")
        return self.values(J.reshape(-1, self.d), K.reshape(-1, self.d),
                           L.reshape(-1, self.d)).reshape(J.shape[:-1])

    def evaluate(self, j, k, l) -> complex:
        J, K, L = (_as_array(p, self.d)[None] for p in (j, k, l))
        return complex(self.values(J, K, L)[0])

    def spec(self) -> dict:
        return {"d": self.d, "family": self.family, "params": self._params()}

    def _params(self) -> dict:
        raise ValueError(f"{self.family} tensors cannot be serialized")

    def __repr__(self):
        return f"{self.family}(d={self.d}, support={self.support.label})"


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

class DenseTruncated(Tensor):
    """Materialized entries, stored as a sequence on Z^{3d}; zero elsewhere."""

    family = "DenseTruncated"

    def __init__(self, entries: WeightedSequence, d: int):
        if entries.d != 3 * d:
            raise DimensionMismatch("dense tensor entries must live on Z^{3d}")
        self.entries = entries
        nz = entries.nonzero_points()
        if len(nz):
            J, K, L = nz[:, :d], nz[:, d:2 * d], nz[:, 2 * d:]
            band = float(np.max(euclid(J - K) + euclid(J - L)))
            boxes = [(nz[:, s * d:(s + 1) * d].min(0), nz[:, s * d:(s + 1) * d].max(0))
                     for s in range(3)]
        else:
            band = 0.0
            boxes = [(np.zeros(d, int), np.full(d, -1))] * 3
        sup = Support(d, band=band, exact=True, label="finite block").with_box(boxes)
        super().__init__(d, sup)

    @classmethod
    def from_cube(cls, values: np.ndarray, d: int) -> "DenseTruncated":
        """``values`` has 3d axes of equal length 2R+1, indexed (j..., k..., l...)."""
        values = np.asarray(values, dtype=complex)
        if values.ndim != 3 * d:
            raise DimensionMismatch("cube array needs 3d axes")
        R = (values.shape[0] - 1) // 2
        return cls(WeightedSequence([-R] * (3 * d), values), d)

    @classmethod
    def from_points(cls, d: int, triples, values) -> "DenseTruncated":
        pts = np.asarray(triples, dtype=np.int64).reshape(len(values), 3 * d)
        return cls(WeightedSequence.from_points(pts, values), d)

    @classmethod
    def random(cls, d: int, radius: int, rng, band: Optional[float] = None,
               real: bool = False) -> "DenseTruncated":
        from .lattice import cube_points
        P = cube_points(radius, d)
        n = len(P)
        shape = (n, n, n)
        vals = rng.standard_normal(shape)
        if not real:
            vals = vals + 1j * rng.standard_normal(shape)
        if band is not None:
            rho = euclid(P[:, None, None, :] - P[None, :, None, :]) \
                + euclid(P[:, None, None, :] - P[None, None, :, :])
            vals = np.where(rho <= band + 1e-9, vals, 0)
        J = np.repeat(P, n * n, axis=0)
        K = np.tile(np.repeat(P, n, axis=0), (n, 1))
        L = np.tile(P, (n * n, 1))
        return cls.from_points(d, np.concatenate([J, K, L], axis=1), vals.reshape(-1))

    def values(self, J, K, L):
        return self.entries(np.concatenate([J, K, L], axis=-1))

    def _params(self):
        return {"entries": self.entries.to_json_obj()["entries"]}


class DiagonalCutoff(Tensor):
    """theta_j [j = k = l] [|j| + |k| + |l| <= M]."""

    family = "DiagonalCutoff"

    def __init__(self, theta, M: int, d: Optional[int] = None):
        if isinstance(theta, WeightedSequence):
            d = theta.d
            self.theta = theta
            self.constant = None
        else:
            if d is None:
                raise ValueError("d is required for a constant theta")
            self.theta = None
            self.constant = complex(theta)
        if M < 0:
            raise ValueError("cutoff M must be nonnegative")
        self.M = M
        r = int(math.floor(M / 3.0 + 1e-12))
        lo, hi = np.full(d, -r), np.full(d, r)
        if self.theta is not None:
            lo, hi = np.maximum(lo, self.theta.lo), np.minimum(hi, self.theta.hi)
        sup = Support(d, band=0.0, exact=True, label="diagonal j=k=l").with_box([(lo, hi)] * 3)
        super().__init__(d, sup)

    def values(self, J, K, L):
        on = np.all(J == K, axis=-1) & np.all(J == L, axis=-1)
        on &= euclid(J) + euclid(K) + euclid(L) <= self.M + 1e-9
        th = self.theta(J) if self.theta is not None else np.full(len(J), self.constant)
        return np.where(on, th, 0j)

    def _params(self):
        th = self.theta.to_json_obj() if self.theta is not None else \
            [self.constant.real, self.constant.imag]
        return {"theta": th, "M": self.M}


class ConvolutionType(Tensor):
    """Tensors supported on the plane j = k + l.

    mode ``phi_of_kl``:          Phi(k, l) [j = k + l]
    mode ``phi_of_differences``: Phi(j - k, j - l) [j = k + l]
    mode ``monomial``:           (2 pi i k)^a (2 pi i l)^b [j = k + l]
    """

    family = "ConvolutionType"
    MODES = ("phi_of_kl", "phi_of_differences", "monomial")

    def __init__(self, phi: Optional[SymbolFunction] = None, mode: str = "phi_of_kl",
                 a=None, b=None):
        if mode not in self.MODES:
            raise ValueError(f"mode must be one of {self.MODES}")
        if mode == "monomial":
            phi = monomial(a, b)
            self.a, self.b = tuple(a), tuple(b)
        elif phi is None:
            raise ValueError("a symbol function is required")
        self.phi = phi
        self.mode = mode
        super().__init__(phi.d, Support.convolution_plane(phi.d))

    def values(self, J, K, L):
        on = np.all(J == K + L, axis=-1)
        out = np.zeros(len(J), dtype=complex)
        if np.any(on):
            if self.mode == "phi_of_differences":
                x, y = J[on] - K[on], J[on] - L[on]
            else:
                x, y = K[on], L[on]
            out[on] = self.phi(x.astype(float), y.astype(float))
        return out

    def _params(self):
        if self.mode == "monomial":
            return {"mode": "monomial", "a": list(self.a), "b": list(self.b)}
        return {"mode": self.mode, "phi": self.phi.spec()}


class TorusCoefficient:
    """Fourier coefficients V^ of a smooth potential V on the torus."""

    def __init__(self, coeffs: WeightedSequence, K: float = 2.0, C: Optional[float] = None):
        self.coeffs = coeffs
        self.K = float(K)
        self.C = self.decay_constant(self.K) if C is None else float(C)

    @property
    def d(self) -> int:
        return self.coeffs.d

    def decay_constant(self, K: float) -> float:
        """Smallest C with |V^(n)| <= C <n>^-K on the stored support."""
        if self.coeffs.is_empty():
            return 0.0
        return float(np.max(np.abs(self.coeffs.flat()) * bracket(euclid(self.coeffs.points())) ** K))

    def check_decay(self) -> bool:
        return self.decay_constant(self.K) <= self.C * (1 + 1e-12)

    def __call__(self, points):
        return self.coeffs(points)


class MultiplicationType(Tensor):
    """Theta_V(j, k, l) = V^(j - k - l)."""

    family = "MultiplicationType"

    def __init__(self, V):
        self.V = V if isinstance(V, TorusCoefficient) else TorusCoefficient(V)
        c = self.V.coeffs
        lo, hi = (c.lo, c.hi) if not c.is_empty() else (np.zeros(c.d, int), np.full(c.d, -1))
        super().__init__(c.d, Support.convolution_plane(c.d, lo, hi))

    def values(self, J, K, L):
        return self.V(J - K - L)

    def _params(self):
        return {"vhat": self.V.coeffs.to_json_obj()}


class VariableCoefficient(Tensor):
    """sum_i V_i^(j - k - l) Phi_i(k, l); a single term is Theta_{V, Phi}."""

    family = "VariableCoefficient"

    def __init__(self, terms: Sequence[tuple]):
        if not terms:
            raise ValueError("at least one (V, Phi) term is required")
        self.terms = [(V if isinstance(V, TorusCoefficient) else TorusCoefficient(V), phi)
                      for V, phi in terms]
        d = self.terms[0][1].d
        sup = None
        for V, phi in self.terms:
            if V.d != d or phi.d != d:
                raise DimensionMismatch("all terms must share the dimension")
            c = V.coeffs
            lo, hi = (c.lo, c.hi) if not c.is_empty() else (np.zeros(d, int), np.full(d, -1))
            s = Support.convolution_plane(d, lo, hi)
            sup = s if sup is None else sup.union(s)
        super().__init__(d, sup)

    @property
    def omega(self) -> float:
        return max(phi.omega for _, phi in self.terms)

    def values(self, J, K, L):
        out = np.zeros(len(J), dtype=complex)
        for V, phi in self.terms:
            v = V(J - K - L)
            nz = v != 0
            if np.any(nz):
                out[nz] += v[nz] * phi(K[nz].astype(float), L[nz].astype(float))
        return out

    def _params(self):
        return {"terms": [{"vhat": V.coeffs.to_json_obj(), "phi": phi.spec()}
                          for V, phi in self.terms]}


class Separable(Tensor):
    """Theta(j, k, l) = sigma1(j, k) sigma2(j, l)."""

    family = "Separable"

    def __init__(self, sigma1: Matrix, sigma2: Matrix):
        if sigma1.d != sigma2.d:
            raise DimensionMismatch("matrices must share the dimension")
        self.sigma1, self.sigma2 = sigma1, sigma2
        d = sigma1.d
        if sigma1.band is not None and sigma2.band is not None:
            sup = Support.banded(d, sigma1.band + sigma2.band)
        else:
            decay = None
            if sigma1.omega <= 0 and sigma2.omega <= 0 and \
                    math.isfinite(sigma1.decay) and math.isfinite(sigma2.decay):
                K = min(sigma1.decay, sigma2.decay)
                decay = (sigma1.bound * sigma2.bound * 2.0 ** (K / 2.0), K)
            sup = Support.everywhere(d, decay=decay)
        if sigma1.box is not None or sigma2.box is not None:
            big = (np.full(d, -10 ** 9), np.full(d, 10 ** 9))
            b1 = sigma1.box or (big, big)
            b2 = sigma2.box or (big, big)
            jlo = np.maximum(b1[0][0], b2[0][0])
            jhi = np.minimum(b1[0][1], b2[0][1])
            sup = sup.with_box([(jlo, jhi), b1[1], b2[1]])
        super().__init__(d, sup)
        # |Theta| <~ <|j|+|k|>^w1 <|j|+|l|>^w2 <|j-k|+|j-l|>^-M with M = min(M1, M2)
        self.claim = {"omega1": sigma1.omega, "omega2": sigma2.omega,
                      "N": min(sigma1.decay, sigma2.decay) / 2.0}

    def values(self, J, K, L):
        return self.sigma1.values(J, K) * self.sigma2.values(J, L)

    def _params(self):
        return {"sigma1": self.sigma1.spec(), "sigma2": self.sigma2.spec()}


class Shifted(Tensor):
    """Theta(j + t e_m, k + t e_m, l) (slot 2) or Theta(j + t e_m, k, l + t e_m) (slot 3)."""

    family = "Shifted"

    def __init__(self, base: Tensor, slot: int, axis: int, steps: int):
        if slot not in (2, 3):
            raise ValueError("slot must be 2 or 3")
        if not 1 <= axis <= base.d:
            raise ValueError(f"axis {axis} outside 1..{base.d}")
        self.base, self.slot, self.axis, self.steps = base, slot, axis, int(steps)
        self._e = np.zeros(base.d, dtype=np.int64)
        self._e[axis - 1] = self.steps
        super().__init__(base.d, base.support.shifted(slot, axis - 1, self.steps))

    def values(self, J, K, L):
        e = self._e
        if self.slot == 2:
            return self.base.values(J + e, K + e, L)
        return self.base.values(J + e, K, L + e)

    def magnitude(self, J, K, L):
        e = self._e
        if self.slot == 2:
            return self.base.magnitude(J + e, K + e, L)
        return self.base.magnitude(J + e, K, L + e)

    def _params(self):
        return {"base": self.base.spec(), "slot": self.slot, "axis": self.axis,
                "steps": self.steps}


class Differenced(Tensor):
    """One partial finite difference Delta_slot^{axis, sign} Theta = shifted - Theta."""

    family = "Differenced"

    def __init__(self, base: Tensor, slot: int, axis: int, sign: int):
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        self.base, self.slot, self.axis, self.sign = base, slot, axis, sign
        self.shifted = Shifted(base, slot, axis, sign)
        super().__init__(base.d, self.shifted.support.union(base.support))

    def values(self, J, K, L):
        return self.shifted.values(J, K, L) - self.base.values(J, K, L)

    def magnitude(self, J, K, L):
        return self.shifted.magnitude(J, K, L) + self.base.magnitude(J, K, L)

    def _params(self):
        return {"base": self.base.spec(), "slot": self.slot, "axis": self.axis,
                "sign": self.sign}


class Transposed(Tensor):
    """Theta^{*1}(j, k, l) = Theta(k, j, l); Theta^{*2}(j, k, l) = Theta(l, k, j)."""

    family = "Transposed"

    def __init__(self, base: Tensor, which: int):
        if which not in (1, 2):
            raise ValueError("which must be 1 or 2")
        self.base, self.which = base, which
        super().__init__(base.d, base.support.transposed(which))

    def values(self, J, K, L):
        if self.which == 1:
            return self.base.values(K, J, L)
        return self.base.values(L, K, J)

    def magnitude(self, J, K, L):
        if self.which == 1:
            return self.base.magnitude(K, J, L)
        return self.base.magnitude(L, K, J)

    def _params(self):
        return {"base": self.base.spec(), "which": self.which}


class FunctionTensor(Tensor):
    """Ad-hoc tensor from a vectorized callable (library use only, not JSON)."""

    family = "Function"

    def __init__(self, d: int, fn: Callable, support: Optional[Support] = None):
        self.fn = fn
        super().__init__(d, support or Support.everywhere(d))

    def values(self, J, K, L):
        return np.broadcast_to(np.asarray(self.fn(J, K, L), dtype=complex), (len(J),)).copy()


# ---------------------------------------------------------------------------
# calculus
# ---------------------------------------------------------------------------

def shift_tensor(theta: Tensor, slot: int, m: int, sign: int, steps: int = 1) -> Tensor:
    """Theta_slot^{m, sign} (``steps`` times).  Consecutive shifts along the
    same slot and axis are merged."""
    t = sign * steps
    if isinstance(theta, Shifted) and theta.slot == slot and theta.axis == m:
        t += theta.steps
        theta = theta.base
        if t == 0:
            return theta
    return Shifted(theta, slot, m, t)


def _as_multi(a, d: int) -> MultiIndex:
    if isinstance(a, MultiIndex):
        m = a
    elif a is None:
        m = MultiIndex.zero(d)
    else:
        m = MultiIndex(tuple(a))
    if m.d != d:
        raise DimensionMismatch(f"multi-index {m.entries} is not in Z^{d}")
    return m


def finite_difference(theta: Tensor, alpha=None, beta=None) -> Tensor:
    """Delta_2^alpha Delta_3^beta Theta, composed lazily.

    Each factor Delta_{i,m}^t is (Delta_i^{m, sign t})^{|t|}; the product
    Delta_{i,1}^{a_1} ... Delta_{i,d}^{a_d} is applied right to left, and
    Delta_3^beta acts before Delta_2^alpha.
    """
    alpha = _as_multi(alpha, theta.d)
    beta = _as_multi(beta, theta.d)
    out = theta
    for slot, idx in ((3, beta), (2, alpha)):
        for m in reversed(range(1, theta.d + 1)):
            t = idx.entries[m - 1]
            for _ in range(abs(t)):
                out = Differenced(out, slot, m, 1 if t > 0 else -1)
    return out


class Magnitude(Tensor):
    """The nonnegative envelope ``theta.magnitude`` as a tensor of its own."""

    family = "Magnitude"

    def __init__(self, base: Tensor):
        self.base = base
        super().__init__(base.d, base.support)

    def values(self, J, K, L):
        return self.base.magnitude(J, K, L).astype(complex)


def transpose(theta: Tensor, which: int) -> Tensor:
    return Transposed(theta, which)


def separable_tensor(sigma1: Matrix, sigma2: Matrix) -> Separable:
    return Separable(sigma1, sigma2)


def diagonal_indicator(d: int) -> DenseTruncated:
    """Theta = [j = k = l = 0]."""
    z = np.zeros((1, 3 * d), dtype=np.int64)
    return DenseTruncated.from_points(d, z, [1.0])


def theta_two(phi: SymbolFunction) -> ConvolutionType:
    """Phi(j - k, j - l) [j = k + l]."""
    return ConvolutionType(phi, "phi_of_differences")


def theta_phi(phi: SymbolFunction) -> ConvolutionType:
    """Phi(k, l) [j = k + l]."""
    return ConvolutionType(phi, "phi_of_kl")


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def tensor_from_spec(obj: dict) -> Tensor:
    d = int(obj["d"])
    fam = obj["family"]
    p = obj.get("params", {})
    if fam == "DenseTruncated":
        return DenseTruncated(WeightedSequence.from_json_obj({"d": 3 * d, "entries": p["entries"]}), d)
    if fam == "DiagonalCutoff":
        th = p.get("theta", [1.0, 0.0])
        if isinstance(th, dict):
            return DiagonalCutoff(WeightedSequence.from_json_obj(th), int(p["M"]))
        if not isinstance(th, (list, tuple)):
            th = [th, 0.0]
        return DiagonalCutoff(complex(*th), int(p["M"]), d)
    if fam == "ConvolutionType":
        mode = p.get("mode", "phi_of_kl")
        if mode == "monomial":
            return ConvolutionType(mode="monomial", a=p["a"], b=p["b"])
        return ConvolutionType(symbol_from_spec(d, p["phi"]), mode)
    if fam == "MultiplicationType":
        return MultiplicationType(WeightedSequence.from_json_obj(p["vhat"]))
    if fam == "VariableCoefficient":
        terms = p.get("terms")
        if terms is None:
            terms = [{"vhat": p["vhat"], "phi": p["phi"]}]
        return VariableCoefficient([(WeightedSequence.from_json_obj(t["vhat"]),
                                     symbol_from_spec(d, t["phi"])) for t in terms])
    if fam == "Separable":
        return Separable(matrix_from_spec(d, p["sigma1"]), matrix_from_spec(d, p["sigma2"]))
    if fam == "Shifted":
        return Shifted(tensor_from_spec(p["base"]), int(p["slot"]), int(p["axis"]), int(p["steps"]))
    if fam == "Differenced":
        return Differenced(tensor_from_spec(p["base"]), int(p["slot"]), int(p["axis"]), int(p["sign"]))
    if fam == "Transposed":
        return Transposed(tensor_from_spec(p["base"]), int(p["which"]))
    raise ValueError(f"unknown tensor family {fam!r}")


def materialize(theta: Tensor, Jp: np.ndarray, Kp: np.ndarray, Lp: np.ndarray) -> np.ndarray:
    """Dense block Theta[j, k, l] for the point lists Jp, Kp, Lp (each (n, d)).

    Entries are filled through support enumeration over the bounding boxes of
    the point lists, so structured tensors cost far less than the full block.
    """
    from .support import CHUNK
    out = np.zeros((len(Jp), len(Kp), len(Lp)), dtype=complex)
    if not (len(Jp) and len(Kp) and len(Lp)):
        return out
    index = []
    for P in (Jp, Kp, Lp):
        lo, hi = P.min(0), P.max(0)
        shape = tuple(hi - lo + 1)
        lut = np.full(shape, -1, dtype=np.int64)
        lut[tuple((P - lo).T)] = np.arange(len(P))
        index.append((lo, hi, lut))
    boxes = [(lo, hi) for lo, hi, _ in index]
    for J, K, L in theta.support.enumerate(boxes, CHUNK):
        ij, ik, il = (lut[tuple((X - lo).T)] for X, (lo, _, lut) in zip((J, K, L), index))
        ok = (ij >= 0) & (ik >= 0) & (il >= 0)
        if not np.any(ok):
            continue
        out[ij[ok], ik[ok], il[ok]] = theta.values(J[ok], K[ok], L[ok])
    return out
