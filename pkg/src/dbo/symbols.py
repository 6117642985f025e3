"""Symbol functions Phi(x, y) on R^d x R^d and infinite matrices sigma(j, k).

Symbols come from a small registry of named families with numeric
parameters, so they can be described in JSON without executing code.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import hermite as _herm

from .lattice import DimensionMismatch, WeightedSequence, box_points, bracket, euclid

TWO_PI_I = 2j * math.pi

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]
DerivEvaluator = Callable[[tuple, tuple, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SymbolFunction:
    """A named symbol Phi with declared order ``omega``.

    ``evaluator(x, y)`` takes float arrays of shape (n, d) and returns n
    complex values.  ``deriv(alpha, beta, x, y)`` is the exact partial
    derivative when known.  ``terms`` lists ``(coef, a, b)`` when Phi is a
    polynomial sum of coef*(2 pi i x)^a (2 pi i y)^b, which is what the
    torus bridge needs to build the physical-side operator.
    """

    name: str
    d: int
    omega: float
    evaluator: Evaluator = field(repr=False, compare=False)
    params: dict = field(default_factory=dict, compare=False)
    deriv: Optional[DerivEvaluator] = field(default=None, repr=False, compare=False)
    terms: Optional[tuple] = field(default=None, compare=False)

    def __call__(self, x, y) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if x.shape[-1] != self.d or y.shape[-1] != self.d:
            raise DimensionMismatch("symbol evaluated at points of the wrong dimension")
        return np.asarray(self.evaluator(x, y), dtype=complex)

    def spec(self) -> dict:
        return {"name": self.name, **self.params}


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def bracket_power(d: int, exponent: float) -> SymbolFunction:
    """Phi(x, y) = <|x| + |y|>^exponent, a symbol of order ``exponent``."""
    e = float(exponent)

    def ev(x, y):
        return bracket(euclid(x) + euclid(y)) ** e + 0j

    return SymbolFunction("bracket_power", d, e, ev, {"exponent": e})


def smooth_bracket_power(d: int, exponent: float) -> SymbolFunction:
    """Phi(x, y) = (1 + |x|^2 + |y|^2)^(exponent/2).

    Unlike :func:`bracket_power` this is smooth across the coordinate
    hyperplanes, so it satisfies the symbol estimates of every order of
    differentiation; the two are comparable within a factor 2^(|exponent|/2).
    """
    e = float(exponent)

    def ev(x, y):
        return (1.0 + np.sum(x * x, axis=-1) + np.sum(y * y, axis=-1)) ** (e / 2) + 0j

    return SymbolFunction("smooth_bracket_power", d, e, ev, {"exponent": e})


def _monomial_1d_deriv(t: np.ndarray, power: int, order: int) -> np.ndarray:
    if order > power:
        return np.zeros_like(t, dtype=complex)
    coef = math.factorial(power) / math.factorial(power - order)
    return coef * TWO_PI_I ** power * t.astype(complex) ** (power - order)


def polynomial(d: int, terms) -> SymbolFunction:
    """Phi(x, y) = sum coef (2 pi i x)^a (2 pi i y)^b over ``terms``."""
    terms = tuple((complex(c), tuple(int(v) for v in a), tuple(int(v) for v in b))
                  for c, a, b in terms)
    for _, a, b in terms:
        if len(a) != d or len(b) != d or min(a + b, default=0) < 0:
            raise ValueError("monomial exponents must be nonnegative d-vectors")
    order = max((sum(a) + sum(b) for _, a, b in terms), default=0)

    def deriv(alpha, beta, x, y):
        out = np.zeros(x.shape[0], dtype=complex)
        for c, a, b in terms:
            val = np.full(x.shape[0], c, dtype=complex)
            for m in range(d):
                val *= _monomial_1d_deriv(x[:, m], a[m], alpha[m])
                val *= _monomial_1d_deriv(y[:, m], b[m], beta[m])
            out += val
        return out

    def ev(x, y):
        return deriv((0,) * d, (0,) * d, x, y)

    params = {"terms": [{"coef": [c.real, c.imag], "a": list(a), "b": list(b)}
                        for c, a, b in terms]}
    return SymbolFunction("polynomial", d, float(order), ev, params, deriv, terms)


def monomial(a, b) -> SymbolFunction:
    """Phi(x, y) = (2 pi i x)^a (2 pi i y)^b, of order |a| + |b|."""
    a = tuple(int(v) for v in a)
    b = tuple(int(v) for v in b)
    base = polynomial(len(a), [(1.0, a, b)])
    return SymbolFunction("monomial", len(a), base.omega, base.evaluator,
                          {"a": list(a), "b": list(b)}, base.deriv, base.terms)


def constant(d: int, value: complex = 1.0) -> SymbolFunction:
    value = complex(value)
    base = polynomial(d, [(value, (0,) * d, (0,) * d)])
    return SymbolFunction("constant", d, 0.0, base.evaluator,
                          {"value": [value.real, value.imag]}, base.deriv, base.terms)


def gaussian(d: int, width: float = 1.0) -> SymbolFunction:
    """Smooth cutoff exp(-(|x|^2 + |y|^2) / width^2); rapidly decaying, so it
    satisfies the symbol estimates for every order (declared 0)."""
    w = float(width)

    def one_axis(t, n):
        c = np.zeros(n + 1)
        c[n] = 1.0
        return (-1.0 / w) ** n * _herm.hermval(t / w, c) * np.exp(-(t / w) ** 2)

    def deriv(alpha, beta, x, y):
        out = np.ones(x.shape[0], dtype=complex)
        for m in range(d):
            out *= one_axis(x[:, m], alpha[m]) * one_axis(y[:, m], beta[m])
        return out

    def ev(x, y):
        return deriv((0,) * d, (0,) * d, x, y)

    return SymbolFunction("gaussian", d, 0.0, ev, {"width": w}, deriv)


REGISTRY = {
    "bracket_power": lambda d, p: bracket_power(d, p["exponent"]),
    "smooth_bracket_power": lambda d, p: smooth_bracket_power(d, p["exponent"]),
    "monomial": lambda d, p: monomial(p["a"], p["b"]),
    "polynomial": lambda d, p: polynomial(
        d, [(complex(*t.get("coef", [1.0, 0.0])), t["a"], t["b"]) for t in p["terms"]]),
    "constant": lambda d, p: constant(d, complex(*p.get("value", [1.0, 0.0]))),
    "gaussian": lambda d, p: gaussian(d, p.get("width", 1.0)),
}


def symbol_from_spec(d: int, spec: dict) -> SymbolFunction:
    name = spec.get("name")
    if name not in REGISTRY:
        raise ValueError(f"unknown symbol {name!r}; known: {sorted(REGISTRY)}")
    phi = REGISTRY[name](d, spec)
    if phi.d != d:
        raise DimensionMismatch(f"symbol {name} has d={phi.d}, expected {d}")
    return phi


def finite_difference_derivative(phi: SymbolFunction, alpha, beta, x, y, h: float = 1e-4):
    """Central-difference approximation of d^alpha_x d^beta_y Phi at (x, y)."""
    d = phi.d
    steps = []
    for m in range(d):
        steps.append((0, m, alpha[m]))
        steps.append((1, m, beta[m]))
    offsets = [(np.zeros((1, d)), np.zeros((1, d)), 1.0)]
    for which, m, n in steps:
        if n == 0:
            continue
        new = []
        for i in range(n + 1):
            w = (-1) ** i * math.comb(n, i) / h ** n
            shift = (n / 2.0 - i) * h
            for ox, oy, c in offsets:
                ox2, oy2 = ox.copy(), oy.copy()
                (ox2 if which == 0 else oy2)[0, m] += shift
                new.append((ox2, oy2, c * w))
        offsets = new
    out = np.zeros(np.atleast_2d(x).shape[0], dtype=complex)
    for ox, oy, c in offsets:
        out += c * phi(np.atleast_2d(x) + ox, np.atleast_2d(y) + oy)
    return out


def check_derivatives(phi: SymbolFunction, x, y, max_order: int = 2,
                      h: float = 1e-4, tol: float = 1e-4) -> float:
    """Largest relative gap between finite differences and ``phi.deriv``
    over all nonnegative (alpha, beta) with |alpha| + |beta| <= max_order.
    Raises if the gap exceeds ``tol``."""
    if phi.deriv is None:
        raise ValueError(f"symbol {phi.name} has no exact derivative")
    x = np.atleast_2d(np.asarray(x, float))
    y = np.atleast_2d(np.asarray(y, float))
    worst = 0.0
    for idx in product(range(max_order + 1), repeat=2 * phi.d):
        if sum(idx) > max_order or sum(idx) == 0:
            continue
        alpha, beta = idx[:phi.d], idx[phi.d:]
        exact = phi.deriv(alpha, beta, x, y)
        approx = finite_difference_derivative(phi, alpha, beta, x, y, h)
        gap = float(np.max(np.abs(exact - approx) / (1.0 + np.abs(exact))))
        worst = max(worst, gap)
    if worst > tol:
        raise AssertionError(f"finite differences disagree with exact derivatives ({worst:.3g})")
    return worst


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

class Matrix:
    """An infinite matrix sigma(j, k) on Z^d x Z^d.

    ``band`` (when not None) promises sigma(j, k) = 0 for |j - k| > band; ``box``
    optionally bounds the support as ((jlo, jhi), (klo, khi)).  ``omega`` and
    ``decay`` record the declared order and off-diagonal decay M of the
    linear-operator condition |sigma(j,k)| <= bound <|j|+|k|>^omega <j-k>^-M.
    """

    def __init__(self, d: int, evaluator, omega: float = 0.0, decay: float = math.inf,
                 band: Optional[float] = None, box=None, name: str = "matrix", spec=None,
                 bound: float = 1.0):
        self.d = d
        self.bound = float(bound)
        self._ev = evaluator
        self.omega = float(omega)
        self.decay = float(decay)
        self.band = band
        self.box = box
        self.name = name
        self._spec = spec

    def values(self, J, K) -> np.ndarray:
        return np.asarray(self._ev(np.asarray(J), np.asarray(K)), dtype=complex)

    def evaluate(self, j, k) -> complex:
        return complex(self.values(np.asarray(j)[None], np.asarray(k)[None])[0])

    def spec(self) -> dict:
        if self._spec is None:
            raise ValueError(f"matrix {self.name} has no JSON description")
        return self._spec

    # factories ------------------------------------------------------------
    @classmethod
    def identity(cls, d: int, scale: complex = 1.0) -> "Matrix":
        def ev(J, K):
            return np.where(np.all(J == K, axis=-1), complex(scale), 0j)

        s = complex(scale)
        return cls(d, ev, 0.0, math.inf, band=0.0, name="identity",
                   spec={"kind": "identity", "scale": [s.real, s.imag]})

    @classmethod
    def shift(cls, d: int, axis: int = 1, sign: int = 1) -> "Matrix":
        """sigma(j, k) = [j = k + sign e_axis]."""
        e = np.zeros(d, dtype=np.int64)
        e[axis - 1] = sign

        def ev(J, K):
            return np.where(np.all(J == K + e, axis=-1), 1.0 + 0j, 0j)

        return cls(d, ev, 0.0, math.inf, band=1.0, name="shift",
                   spec={"kind": "shift", "axis": axis, "sign": sign})

    @classmethod
    def dense(cls, entries: WeightedSequence, d: int) -> "Matrix":
        """Finitely supported matrix stored as a sequence on Z^{2d}."""
        if entries.d != 2 * d:
            raise DimensionMismatch("dense matrix entries must live on Z^{2d}")
        nz = entries.nonzero_points()
        band = float(euclid(nz[:, :d] - nz[:, d:]).max()) if len(nz) else 0.0
        box = None
        if not entries.is_empty():
            box = ((entries.lo[:d], entries.hi[:d]), (entries.lo[d:], entries.hi[d:]))

        def ev(J, K):
            return entries(np.concatenate([J, K], axis=-1))

        obj = entries.to_json_obj()
        return cls(d, ev, 0.0, math.inf, band=band, box=box, name="dense",
                   spec={"kind": "dense", "entries": obj["entries"]})

    @classmethod
    def banded_random(cls, d: int, radius: int, width: int, rng) -> "Matrix":
        pts = box_points([-radius] * d, [radius] * d)
        J = np.repeat(pts, len(pts), axis=0)
        K = np.tile(pts, (len(pts), 1))
        keep = euclid(J - K) <= width
        vals = rng.standard_normal(keep.sum()) + 1j * rng.standard_normal(keep.sum())
        seq = WeightedSequence.from_points(np.concatenate([J[keep], K[keep]], axis=1), vals)
        return cls.dense(seq, d)

    @classmethod
    def decaying(cls, d: int, omega: float, M: float, scale: complex = 1.0) -> "Matrix":
        """sigma(j, k) = scale <|j|+|k|>^omega <j-k>^-M, saturating the linear condition."""
        def ev(J, K):
            return complex(scale) * bracket(euclid(J) + euclid(K)) ** omega \
                * bracket(euclid(J - K)) ** (-M)

        s = complex(scale)
        return cls(d, ev, omega, M, name="decaying", bound=abs(s),
                   spec={"kind": "decaying", "omega": omega, "M": M, "scale": [s.real, s.imag]})


def matrix_from_spec(d: int, spec: dict) -> Matrix:
    kind = spec.get("kind")
    if kind == "identity":
        return Matrix.identity(d, complex(*spec.get("scale", [1.0, 0.0])))
    if kind == "shift":
        return Matrix.shift(d, int(spec.get("axis", 1)), int(spec.get("sign", 1)))
    if kind == "dense":
        seq = WeightedSequence.from_json_obj({"d": 2 * d, "entries": spec["entries"]})
        return Matrix.dense(seq, d)
    if kind == "decaying":
        return Matrix.decaying(d, float(spec["omega"]), float(spec["M"]),
                               complex(*spec.get("scale", [1.0, 0.0])))
    raise ValueError(f"unknown matrix kind {kind!r}")
