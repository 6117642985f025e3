"""Lattice points, power weights, finitely supported sequences on Z^d and
Hölder exponent arithmetic.

Exponents are plain floats with ``math.inf`` standing for p = infinity; every
routine that does exponent arithmetic special-cases it.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

INF = math.inf


class DimensionMismatch(ValueError):
    pass


# ---------------------------------------------------------------------------
# points and weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticePoint:
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) < 1:
            raise ValueError("a lattice point needs at least one coordinate")
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    @property
    def d(self) -> int:
        return len(self.coords)

    def norm(self) -> float:
        return math.sqrt(sum(c * c for c in self.coords))

    def __add__(self, other: "LatticePoint") -> "LatticePoint":
        _same_dim(self.d, other.d)
        return LatticePoint(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "LatticePoint") -> "LatticePoint":
        _same_dim(self.d, other.d)
        return LatticePoint(tuple(a - b for a, b in zip(self.coords, other.coords)))

    @classmethod
    def unit(cls, m: int, d: int, sign: int = 1) -> "LatticePoint":
        """The unit vector ``sign * e_m`` (``m`` counted from 1)."""
        if not 1 <= m <= d:
            raise ValueError(f"axis {m} outside 1..{d}")
        return cls(tuple(sign if n == m - 1 else 0 for n in range(d)))


@dataclass(frozen=True)
class MultiIndex:
    entries: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(int(a) for a in self.entries))

    @property
    def d(self) -> int:
        return len(self.entries)

    @property
    def abs_sum(self) -> int:
        return sum(abs(a) for a in self.entries)

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.entries)

    @classmethod
    def zero(cls, d: int) -> "MultiIndex":
        return cls((0,) * d)


@dataclass(frozen=True)
class WeightParams:
    s: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.s):
            raise ValueError("weight exponent must be finite")


def bracket(x):
    """Japanese bracket (1 + x^2)^(1/2) of a nonnegative scalar or array."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise ValueError("bracket expects nonnegative input")
    out = np.sqrt(1.0 + arr * arr)
    return float(out) if np.ndim(out) == 0 else out


def euclid(points) -> np.ndarray:
    """Euclidean norms of an (..., d) integer array of lattice points."""
    p = np.asarray(points, dtype=float)
    return np.sqrt(np.sum(p * p, axis=-1))


def power_weight(k, w: WeightParams | float):
    """w_s(k) = <|k|>^s for a LatticePoint, a coordinate tuple or an (n, d) array."""
    s = w.s if isinstance(w, WeightParams) else float(w)
    if isinstance(k, LatticePoint):
        return bracket(k.norm()) ** s
    arr = np.asarray(k)
    if arr.ndim == 1:
        return bracket(float(euclid(arr))) ** s
    return bracket(euclid(arr)) ** s


def _same_dim(a: int, b: int):
    if a != b:
        raise DimensionMismatch(f"dimension mismatch: {a} != {b}")


# ---------------------------------------------------------------------------
# point enumeration
# ---------------------------------------------------------------------------

def box_points(lo, hi) -> np.ndarray:
    """All integer points of the box [lo, hi] in C order, shape (n, d)."""
    lo = np.asarray(lo, dtype=np.int64)
    hi = np.asarray(hi, dtype=np.int64)
    if np.any(hi < lo):
        return np.zeros((0, lo.size), dtype=np.int64)
    axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def cube_points(radius: int, d: int) -> np.ndarray:
    return box_points([-radius] * d, [radius] * d)


def ball_count(radius: float, d: int) -> int:
    """Number of lattice points k with Euclidean |k| <= radius."""
    r = int(math.floor(radius))
    pts = cube_points(r, d)
    return int(np.count_nonzero(euclid(pts) <= radius + 1e-12))


# ---------------------------------------------------------------------------
# sequences
# ---------------------------------------------------------------------------

class WeightedSequence:
    """Finitely supported complex sequence on Z^d.

    Values are stored densely over an axis-aligned support box ``[lo, hi]``;
    evaluation anywhere outside the box returns exactly 0.  Instances are
    immutable (the backing array is read-only).
    """

    __slots__ = ("_lo", "_values")

    def __init__(self, lo: Sequence[int], values):
        lo = np.asarray(lo, dtype=np.int64).reshape(-1)
        vals = np.array(values, dtype=complex)
        if vals.ndim != lo.size:
            raise DimensionMismatch(
                f"values have {vals.ndim} axes but lo has {lo.size} entries")
        if lo.size < 1:
            raise ValueError("d must be >= 1")
        vals.setflags(write=False)
        lo.setflags(write=False)
        self._lo = lo
        self._values = vals

    # construction helpers -------------------------------------------------
    @classmethod
    def zeros(cls, d: int) -> "WeightedSequence":
        return cls([0] * d, np.zeros((0,) * d))

    @classmethod
    def delta(cls, point, value: complex = 1.0) -> "WeightedSequence":
        pt = point.coords if isinstance(point, LatticePoint) else tuple(point)
        return cls(pt, np.full((1,) * len(pt), value, dtype=complex))

    @classmethod
    def on_cube(cls, radius: int, values) -> "WeightedSequence":
        values = np.asarray(values, dtype=complex)
        return cls([-radius] * values.ndim, values)

    @classmethod
    def from_points(cls, points, values, d: int | None = None) -> "WeightedSequence":
        pts = np.asarray(points, dtype=np.int64)
        vals = np.asarray(values, dtype=complex).reshape(-1)
        if pts.size == 0:
            if d is None:
                raise ValueError("cannot infer d from an empty point list")
            return cls.zeros(d)
        pts = pts.reshape(len(vals), -1)
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        arr = np.zeros(tuple(hi - lo + 1), dtype=complex)
        arr[tuple((pts - lo).T)] = vals
        return cls(lo, arr)

    @classmethod
    def from_function(cls, fn, lo, hi) -> "WeightedSequence":
        pts = box_points(lo, hi)
        vals = np.asarray(fn(pts), dtype=complex)
        shape = tuple(np.asarray(hi) - np.asarray(lo) + 1)
        return cls(lo, vals.reshape(shape))

    # basic properties -----------------------------------------------------
    @property
    def d(self) -> int:
        return self._lo.size

    @property
    def lo(self) -> np.ndarray:
        return self._lo

    @property
    def hi(self) -> np.ndarray:
        return self._lo + np.asarray(self._values.shape) - 1

    @property
    def array(self) -> np.ndarray:
        return self._values

    @property
    def size(self) -> int:
        return self._values.size

    def is_empty(self) -> bool:
        return self._values.size == 0

    def points(self) -> np.ndarray:
        return box_points(self.lo, self.hi)

    def flat(self) -> np.ndarray:
        return self._values.reshape(-1)

    def support_radius(self) -> int:
        """Smallest R with the support box inside the sup-norm cube of radius R."""
        if self.is_empty():
            return 0
        return int(max(np.abs(self.lo).max(), np.abs(self.hi).max()))

    def nonzero_points(self) -> np.ndarray:
        mask = self.flat() != 0
        return self.points()[mask]

    # evaluation -----------------------------------------------------------
    def __call__(self, points) -> np.ndarray:
        """Vectorized lookup; ``points`` has shape (..., d)."""
        pts = np.asarray(points, dtype=np.int64)
        if pts.shape[-1] != self.d:
            raise DimensionMismatch(f"points have d={pts.shape[-1]}, sequence d={self.d}")
        out = np.zeros(pts.shape[:-1], dtype=complex)
        if self.is_empty():
            return out
        rel = pts - self.lo
        inside = np.all((rel >= 0) & (rel < np.asarray(self._values.shape)), axis=-1)
        if np.any(inside):
            idx = tuple(np.moveaxis(rel[inside], -1, 0))
            out[inside] = self._values[idx]
        return out

    def at(self, point) -> complex:
        pt = point.coords if isinstance(point, LatticePoint) else tuple(point)
        return complex(self(np.asarray(pt)[None, :])[0])

    # arithmetic -----------------------------------------------------------
    def _hull(self, other: "WeightedSequence"):
        _same_dim(self.d, other.d)
        if self.is_empty():
            return other.lo, other.hi
        if other.is_empty():
            return self.lo, self.hi
        return np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi)

    def restrict(self, lo, hi) -> "WeightedSequence":
        lo = np.maximum(np.asarray(lo), self.lo)
        hi = np.minimum(np.asarray(hi), self.hi)
        if np.any(hi < lo):
            return WeightedSequence.zeros(self.d)
        sl = tuple(slice(int(a), int(b) + 1) for a, b in zip(lo - self.lo, hi - self.lo))
        return WeightedSequence(lo, self._values[sl])

    def expand(self, lo, hi) -> "WeightedSequence":
        """Same sequence stored over the (larger) box [lo, hi]."""
        pts = box_points(lo, hi)
        shape = tuple(np.asarray(hi) - np.asarray(lo) + 1)
        return WeightedSequence(lo, self(pts).reshape(shape))

    def __add__(self, other: "WeightedSequence") -> "WeightedSequence":
        lo, hi = self._hull(other)
        pts = box_points(lo, hi)
        shape = tuple(hi - lo + 1)
        return WeightedSequence(lo, (self(pts) + other(pts)).reshape(shape))

    def __sub__(self, other: "WeightedSequence") -> "WeightedSequence":
        return self + other * (-1.0)

    def __mul__(self, c: complex) -> "WeightedSequence":
        return WeightedSequence(self.lo, self._values * c)

    __rmul__ = __mul__

    def __repr__(self):
        return f"WeightedSequence(d={self.d}, lo={self.lo.tolist()}, hi={self.hi.tolist()})"

    # serialization --------------------------------------------------------
    def to_json_obj(self, keep_zeros: bool = False) -> dict:
        entries = []
        for pt, v in zip(self.points(), self.flat()):
            if v != 0 or keep_zeros:
                entries.append([int(c) for c in pt] + [float(v.real), float(v.imag)])
        return {"d": self.d, "entries": entries}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "WeightedSequence":
        d = int(obj["d"])
        entries = obj.get("entries", [])
        if not entries:
            return cls.zeros(d)
        pts, vals = [], []
        for e in entries:
            if len(e) != d + 2:
                raise ValueError(f"sequence entry {e!r} should have {d + 2} numbers")
            pts.append([int(c) for c in e[:d]])
            vals.append(complex(e[d], e[d + 1]))
        return cls.from_points(pts, vals)

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj())


def pointwise_multiply(b: WeightedSequence, f: WeightedSequence) -> WeightedSequence:
    """(bf)_k = b_k f_k, stored over the intersection of the two support boxes."""
    _same_dim(b.d, f.d)
    if b.is_empty() or f.is_empty():
        return WeightedSequence.zeros(b.d)
    lo = np.maximum(b.lo, f.lo)
    hi = np.minimum(b.hi, f.hi)
    if np.any(hi < lo):
        return WeightedSequence.zeros(b.d)
    pts = box_points(lo, hi)
    return WeightedSequence(lo, (b(pts) * f(pts)).reshape(tuple(hi - lo + 1)))


# ---------------------------------------------------------------------------
# exponents and norms
# ---------------------------------------------------------------------------

def _check_exponent(p: float) -> float:
    p = float(p)
    if not (p >= 1.0):
        raise ValueError(f"exponent {p} outside [1, inf]")
    return p


def reciprocal(p: float) -> float:
    return 0.0 if p == INF else 1.0 / p


def dual_exponent(p: float) -> float:
    p = _check_exponent(p)
    if p == 1.0:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class HolderTriple:
    """Exponents with 1/p + 1/q = 1/r.  ``r`` may fall below 1; consumers
    that need a normed target space call :meth:`require_banach`."""

    p: float
    q: float
    r: float

    @property
    def p_dual(self) -> float:
        return dual_exponent(self.p)

    @property
    def q_dual(self) -> float:
        return dual_exponent(self.q)

    def require_banach(self, finite_r: bool = False) -> "HolderTriple":
        if self.r < 1.0:
            raise ValueError(f"target exponent r={self.r} < 1 is not supported")
        if finite_r and self.r == INF:
            raise ValueError("r = inf is not allowed here")
        return self

    def as_dict(self) -> dict:
        return {"p": _exp_json(self.p), "q": _exp_json(self.q), "r": _exp_json(self.r)}


def _exp_json(p: float):
    return "inf" if p == INF else p


def parse_exponent(text) -> float:
    if isinstance(text, str) and text.strip().lower() in {"inf", "infinity", "oo"}:
        return INF
    return float(text)


def holder_triple(p: float, q: float) -> HolderTriple:
    p = _check_exponent(p)
    q = _check_exponent(q)
    inv = reciprocal(p) + reciprocal(q)
    r = INF if inv == 0.0 else 1.0 / inv
    return HolderTriple(p, q, r)


def lp_norm(values, p: float) -> float:
    """Plain l^p norm of a flat array (p = inf allowed), scaled to avoid overflow."""
    a = np.abs(np.asarray(values)).reshape(-1)
    if a.size == 0:
        return 0.0
    m = float(a.max())
    if p == INF or m == 0.0:
        return m
    if p == 1.0:
        return float(a.sum())
    if p == 2.0:
        return float(m * np.sqrt(np.sum((a / m) ** 2)))
    return float(m * np.sum((a / m) ** p) ** (1.0 / p))


def lp_norm_axis(values, p: float, axis: int = -1) -> np.ndarray:
    """l^p norm along one axis of a nonnegative or complex array."""
    a = np.abs(np.asarray(values))
    if p == INF:
        return a.max(axis=axis) if a.shape[axis] else np.zeros(np.delete(a.shape, axis))
    if p == 1.0:
        return a.sum(axis=axis)
    m = a.max(axis=axis, keepdims=True) if a.shape[axis] else np.zeros_like(a.sum(axis=axis, keepdims=True))
    safe = np.where(m > 0, m, 1.0)
    return (np.squeeze(safe, axis=axis) * np.sum((a / safe) ** p, axis=axis) ** (1.0 / p))


def weighted_norm(f: WeightedSequence, w: WeightParams | float, p: float) -> float:
    """||f||_{l^p_s} = (sum_k <k>^{sp} |f_k|^p)^{1/p}, or sup_k <k>^s |f_k| for p = inf."""
    p = _check_exponent(p)
    if f.is_empty():
        return 0.0
    vals = power_weight(f.points(), w) * np.abs(f.flat())
    return lp_norm(vals, p)
