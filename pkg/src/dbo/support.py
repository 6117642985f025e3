"""Support metadata for lazily evaluated tensors and enumeration of the
lattice triples (j, k, l) where a tensor may be nonzero.

A :class:`Support` is always a *superset* of the true support.  It combines
up to four constraints:

* ``box``   - per-slot axis-aligned boxes,
* ``plane`` - ``cj*j + ck*k + cl*l`` lies in an offset box (coefficients +-1),
* ``band``  - ``|j-k| + |j-l| <= W`` (Euclidean lengths),
* ``decay`` - a declared majorant ``|Theta| <= C <|j-k|+|j-l|>^-K`` used only
  for pruning scans, never for enumeration.

Enumeration picks the cheapest generator among the available constraints and
filters with all of them, yielding chunks in a fixed order so that every
consumer is deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator, Optional, Sequence

import numpy as np

from .lattice import box_points, euclid

CHUNK = 1 << 17
_BAND_EPS = 1e-9

Box = tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class Plane:
    coef: tuple[int, int, int]
    lo: tuple[int, ...]
    hi: tuple[int, ...]


@dataclass(frozen=True)
class Support:
    d: int
    box: Optional[tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]] = None
    plane: Optional[Plane] = None
    band: Optional[float] = None
    decay: Optional[tuple[float, float]] = None
    exact: bool = False
    label: str = "everywhere"

    # -- constructors -------------------------------------------------------
    @classmethod
    def everywhere(cls, d: int, decay=None) -> "Support":
        return cls(d, decay=decay, label="everywhere")

    @classmethod
    def cube(cls, d: int, radius: int, exact: bool = True) -> "Support":
        b = (tuple([-radius] * d), tuple([radius] * d))
        return cls(d, box=(b, b, b), exact=exact, label=f"cube of radius {radius}")

    @classmethod
    def convolution_plane(cls, d: int, lo=None, hi=None, exact: bool = True) -> "Support":
        lo = tuple([0] * d) if lo is None else tuple(int(x) for x in lo)
        hi = tuple([0] * d) if hi is None else tuple(int(x) for x in hi)
        label = "j=k+l plane" if lo == hi == tuple([0] * d) else "j-k-l in offset box"
        return cls(d, plane=Plane((1, -1, -1), lo, hi), exact=exact, label=label)

    @classmethod
    def banded(cls, d: int, width: float, exact: bool = False) -> "Support":
        return cls(d, band=float(width), exact=exact, label=f"diagonal band of width {width}")

    # -- transformations ----------------------------------------------------
    def with_box(self, boxes) -> "Support":
        boxes = tuple((tuple(int(x) for x in lo), tuple(int(x) for x in hi)) for lo, hi in boxes)
        if self.box is not None:
            boxes = tuple(
                (tuple(np.maximum(a[0], b[0]).tolist()), tuple(np.minimum(a[1], b[1]).tolist()))
                for a, b in zip(self.box, boxes))
        return replace(self, box=boxes)

    def shifted(self, slot: int, axis: int, t: int) -> "Support":
        """Support of Theta(j + t e_m, k + t e_m, l) (slot 2) or
        Theta(j + t e_m, k, l + t e_m) (slot 3); ``axis`` counted from 0."""
        e = np.zeros(self.d, dtype=np.int64)
        e[axis] = t
        moved = (0, 1) if slot == 2 else (0, 2)
        box = self.box
        if box is not None:
            box = tuple(
                (tuple((np.asarray(lo) - e).tolist()), tuple((np.asarray(hi) - e).tolist()))
                if s in moved else (lo, hi)
                for s, (lo, hi) in enumerate(box))
        plane = self.plane
        if plane is not None:
            c = plane.coef
            off = (c[moved[0]] + c[moved[1]]) * e
            plane = Plane(c, tuple((np.asarray(plane.lo) - off).tolist()),
                          tuple((np.asarray(plane.hi) - off).tolist()))
        band = None if self.band is None else self.band + abs(t)
        decay = None
        if self.decay is not None:
            C, K = self.decay
            decay = (C * (math.sqrt(2.0) * math.sqrt(1.0 + t * t)) ** K, K)
        return replace(self, box=box, plane=plane, band=band, decay=decay,
                       label=f"shifted({self.label})")

    def transposed(self, which: int) -> "Support":
        perm = (1, 0, 2) if which == 1 else (2, 1, 0)
        box = None if self.box is None else tuple(self.box[p] for p in perm)
        plane = self.plane
        if plane is not None:
            plane = Plane(tuple(plane.coef[p] for p in perm), plane.lo, plane.hi)
        band = None if self.band is None else 2.0 * self.band
        decay = None
        if self.decay is not None:
            C, K = self.decay
            decay = (C * 2.0 ** K, K)
        return replace(self, box=box, plane=plane, band=band, decay=decay,
                       label=f"transposed({self.label})")

    def union(self, other: "Support") -> "Support":
        box = None
        if self.box is not None and other.box is not None:
            box = tuple(
                (tuple(np.minimum(a[0], b[0]).tolist()), tuple(np.maximum(a[1], b[1]).tolist()))
                for a, b in zip(self.box, other.box))
        plane = None
        if (self.plane is not None and other.plane is not None
                and self.plane.coef == other.plane.coef):
            plane = Plane(self.plane.coef,
                          tuple(np.minimum(self.plane.lo, other.plane.lo).tolist()),
                          tuple(np.maximum(self.plane.hi, other.plane.hi).tolist()))
        band = None
        if self.band is not None and other.band is not None:
            band = max(self.band, other.band)
        decay = None
        if self.decay is not None and other.decay is not None:
            decay = (self.decay[0] + other.decay[0], min(self.decay[1], other.decay[1]))
        label = self.label if self.label == other.label else f"union({self.label}, {other.label})"
        return Support(self.d, box=box, plane=plane, band=band, decay=decay,
                       exact=self.exact and other.exact, label=label)

    def describe(self) -> dict:
        out = {"label": self.label, "exact": self.exact}
        if self.band is not None:
            out["band"] = self.band
        if self.plane is not None:
            out["plane"] = {"coef": list(self.plane.coef), "lo": list(self.plane.lo),
                            "hi": list(self.plane.hi)}
        if self.box is not None:
            out["box"] = [[list(lo), list(hi)] for lo, hi in self.box]
        if self.decay is not None:
            out["decay"] = list(self.decay)
        return out

    # -- enumeration --------------------------------------------------------
    def mask(self, J, K, L) -> np.ndarray:
        keep = np.ones(J.shape[0], dtype=bool)
        if self.box is not None:
            for X, (lo, hi) in zip((J, K, L), self.box):
                keep &= np.all((X >= np.asarray(lo)) & (X <= np.asarray(hi)), axis=1)
        if self.plane is not None:
            c = self.plane.coef
            v = c[0] * J + c[1] * K + c[2] * L
            keep &= np.all((v >= np.asarray(self.plane.lo)) & (v <= np.asarray(self.plane.hi)), axis=1)
        if self.band is not None:
            keep &= euclid(J - K) + euclid(J - L) <= self.band + _BAND_EPS
        return keep

    def enumerate(self, boxes: Sequence[Box], chunk: int = CHUNK
                  ) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """Yield (J, K, L) chunks of candidate triples with each slot inside
        the corresponding box of ``boxes``."""
        boxes = [(np.asarray(lo, dtype=np.int64), np.asarray(hi, dtype=np.int64))
                 for lo, hi in boxes]
        if self.box is not None:
            boxes = [(np.maximum(lo, np.asarray(blo)), np.minimum(hi, np.asarray(bhi)))
                     for (lo, hi), (blo, bhi) in zip(boxes, self.box)]
        sizes = [int(np.prod(np.maximum(hi - lo + 1, 0))) for lo, hi in boxes]
        if min(sizes) == 0:
            return
        costs = {"full": sizes[0] * sizes[1] * sizes[2]}
        if self.plane is not None:
            n_off = int(np.prod(np.asarray(self.plane.hi) - np.asarray(self.plane.lo) + 1))
            costs["plane"] = sizes[1] * sizes[2] * max(n_off, 0)
        if self.band is not None:
            costs["band"] = sizes[0] * _band_offsets(self.d, self.band).shape[0]
        strategy = min(costs, key=lambda s: (costs[s], s))
        gen = {"full": self._gen_full, "plane": self._gen_plane, "band": self._gen_band}[strategy]
        for J, K, L in gen(boxes, chunk):
            inside = np.ones(J.shape[0], dtype=bool)
            for X, (lo, hi) in zip((J, K, L), boxes):
                inside &= np.all((X >= lo) & (X <= hi), axis=1)
            keep = inside & self.mask(J, K, L)
            if np.any(keep):
                yield J[keep], K[keep], L[keep]

    def _gen_full(self, boxes, chunk):
        P = [box_points(lo, hi) for lo, hi in boxes]
        nk, nl = len(P[1]), len(P[2])
        per_j = max(1, chunk // max(nk * nl, 1))
        KK = np.repeat(P[1], nl, axis=0)
        LL = np.tile(P[2], (nk, 1))
        for s in range(0, len(P[0]), per_j):
            Jc = P[0][s:s + per_j]
            J = np.repeat(Jc, nk * nl, axis=0)
            yield J, np.tile(KK, (len(Jc), 1)), np.tile(LL, (len(Jc), 1))

    def _gen_plane(self, boxes, chunk):
        c = self.plane.coef
        Kp = box_points(*boxes[1])
        Lp = box_points(*boxes[2])
        offs = box_points(np.asarray(self.plane.lo), np.asarray(self.plane.hi))
        nl, no = len(Lp), len(offs)
        per_k = max(1, chunk // max(nl * no, 1))
        for s in range(0, len(Kp), per_k):
            Kc = Kp[s:s + per_k]
            K = np.repeat(Kc, nl * no, axis=0)
            L = np.tile(np.repeat(Lp, no, axis=0), (len(Kc), 1))
            O = np.tile(offs, (len(Kc) * nl, 1))
            # cj = +-1, so dividing by cj is multiplying by it
            J = c[0] * (O - c[1] * K - c[2] * L)
            yield J, K, L

    def _gen_band(self, boxes, chunk):
        UV = _band_offsets(self.d, self.band)
        Jp = box_points(*boxes[0])
        nuv = len(UV)
        per_j = max(1, chunk // max(nuv, 1))
        U, V = UV[:, :self.d], UV[:, self.d:]
        for s in range(0, len(Jp), per_j):
            Jc = Jp[s:s + per_j]
            J = np.repeat(Jc, nuv, axis=0)
            yield J, J + np.tile(U, (len(Jc), 1)), J + np.tile(V, (len(Jc), 1))


_BAND_CACHE: dict = {}


def _band_offsets(d: int, width: float) -> np.ndarray:
    """Offsets (u, v) in Z^d x Z^d with |u| + |v| <= width, shape (n, 2d)."""
    key = (d, float(width))
    if key not in _BAND_CACHE:
        w = int(math.floor(width + _BAND_EPS))
        pts = box_points([-w] * d, [w] * d)
        nrm = euclid(pts)
        pts, nrm = pts[nrm <= width + _BAND_EPS], nrm[nrm <= width + _BAND_EPS]
        iu, iv = np.meshgrid(np.arange(len(pts)), np.arange(len(pts)), indexing="ij")
        iu, iv = iu.ravel(), iv.ravel()
        ok = nrm[iu] + nrm[iv] <= width + _BAND_EPS
        arr = np.concatenate([pts[iu[ok]], pts[iv[ok]]], axis=1)
        arr.setflags(write=False)
        _BAND_CACHE[key] = arr
    return _BAND_CACHE[key]


def cube_box(d: int, radius: int) -> Box:
    return (np.full(d, -radius, dtype=np.int64), np.full(d, radius, dtype=np.int64))
