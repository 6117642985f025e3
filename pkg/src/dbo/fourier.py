"""Band-limited functions on the torus T^d = [0, 1)^d sampled on a uniform
grid, and the check that Fourier-side tensors reproduce physical-side
bilinear operators.

Convention: F(x) = sum_k f_k e^{2 pi i k.x}, so f_k = n^{-d} sum_m F(x_m)
e^{-2 pi i k.x_m}, which is numpy's forward FFT divided by n^d.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lattice import WeightedSequence, bracket, cube_points, euclid, weighted_norm
from .operators import apply
from .report import Report
from .symbols import SymbolFunction
from .tensors import ConvolutionType, MultiplicationType, Tensor, VariableCoefficient

BRIDGE_TOL = 1e-10


@dataclass(frozen=True)
class TorusGrid:
    d: int
    n: int

    def __post_init__(self):
        if self.d < 1 or self.n < 1:
            raise ValueError("grid needs d >= 1 and n >= 1")

    @property
    def nyquist(self) -> int:
        """Largest K with every |k|_inf <= K resolved without aliasing."""
        return (self.n - 1) // 2

    def nodes(self) -> np.ndarray:
        """x_m = m / n, shape (n,)*d + (d,)."""
        ax = np.arange(self.n) / self.n
        return np.stack(np.meshgrid(*([ax] * self.d), indexing="ij"), axis=-1)

    def frequencies(self) -> np.ndarray:
        """Integer frequency of each FFT slot, shape (n,)*d + (d,)."""
        ax = np.fft.fftfreq(self.n, 1.0 / self.n).round().astype(np.int64)
        return np.stack(np.meshgrid(*([ax] * self.d), indexing="ij"), axis=-1)


class TorusFunction:
    """Samples of a function at the grid nodes (read-only)."""

    def __init__(self, grid: TorusGrid, samples):
        s = np.array(samples, dtype=complex)
        if s.shape != (grid.n,) * grid.d:
            raise ValueError(f"samples must have shape {(grid.n,) * grid.d}")
        s.setflags(write=False)
        self.grid = grid
        self.samples = s

    @classmethod
    def from_callable(cls, grid: TorusGrid, fn) -> "TorusFunction":
        return cls(grid, fn(grid.nodes()))

    def __mul__(self, other: "TorusFunction") -> "TorusFunction":
        if other.grid != self.grid:
            raise ValueError("functions live on different grids")
        return TorusFunction(self.grid, self.samples * other.samples)

    def l2_norm(self) -> float:
        """L^2(T^d) norm by the grid quadrature (exact for band-limited data)."""
        return float(np.sqrt(np.mean(np.abs(self.samples) ** 2)))


def min_grid_size(K: int, factors: int = 1) -> int:
    """Smallest n resolving the product of ``factors`` functions of band
    limit K: 2 * factors * K + 1."""
    return 2 * factors * K + 1


def grid_size(bound: int) -> int:
    """Smallest power of two >= bound (exactness needs only the bound)."""
    return 1 << max(0, int(math.ceil(math.log2(max(bound, 1)))))


def _spectrum(F: TorusFunction) -> np.ndarray:
    return np.fft.fftn(F.samples) / F.grid.n ** F.grid.d


def to_fourier(F: TorusFunction, K: int) -> WeightedSequence:
    """Coefficients f_k for |k|_inf <= K."""
    if F.grid.n < 2 * K + 1:
        raise ValueError(f"band limit {K} exceeds the grid's Nyquist limit {F.grid.nyquist}")
    spec = _spectrum(F)
    pts = cube_points(K, F.grid.d)
    vals = spec[tuple((pts % F.grid.n).T)]
    return WeightedSequence([-K] * F.grid.d, vals.reshape((2 * K + 1,) * F.grid.d))


def from_fourier(f: WeightedSequence, grid: TorusGrid) -> TorusFunction:
    """F(x) = sum_k f_k e^{2 pi i k.x} on the grid nodes."""
    if f.d != grid.d:
        raise ValueError("dimension mismatch")
    if f.support_radius() > grid.nyquist:
        raise ValueError(f"coefficients up to |k| = {f.support_radius()} need n >= "
                         f"{2 * f.support_radius() + 1}, grid has n = {grid.n}")
    spec = np.zeros((grid.n,) * grid.d, dtype=complex)
    if not f.is_empty():
        spec[tuple((f.points() % grid.n).T)] = f.flat()
    return TorusFunction(grid, np.fft.ifftn(spec) * grid.n ** grid.d)


def band_limit(F: TorusFunction, tol: float = 1e-12) -> int:
    """Smallest K with every coefficient beyond |k|_inf = K below
    tol * (largest coefficient)."""
    spec = np.abs(_spectrum(F))
    top = spec.max()
    if top == 0:
        return 0
    lev = np.abs(F.grid.frequencies()).max(axis=-1)
    big = lev[spec > tol * top]
    return int(big.max())


def _require_band(F: TorusFunction, K: int, name: str):
    if band_limit(F) > K:
        raise ValueError(f"{name} is not band-limited to K = {K}")


def spectral_derivative(F: TorusFunction, a) -> TorusFunction:
    """partial^a F, computed by multiplying f_k by (2 pi i k)^a."""
    a = tuple(int(v) for v in a)
    if len(a) != F.grid.d or min(a) < 0:
        raise ValueError("derivative order must be a nonnegative d-vector")
    freq = F.grid.frequencies()
    mult = np.ones((F.grid.n,) * F.grid.d, dtype=complex)
    for m, am in enumerate(a):
        if am:
            # the unpaired Nyquist slot of an even grid is not a derivative of a
            # real mode; band limits keep it empty
            mult *= (2j * math.pi * freq[..., m]) ** am
    return TorusFunction(F.grid, np.fft.ifftn(np.fft.fftn(F.samples) * mult))


def physical_derivative_product(F: TorusFunction, G: TorusFunction, a, b,
                                K: Optional[int] = None) -> TorusFunction:
    """T_{a,b}(F, G) = partial^a F * partial^b G on the grid.

    The grid must resolve the product: n >= 4K + 1 where K is the band limit
    of F and G (measured when not given)."""
    if F.grid != G.grid:
        raise ValueError("F and G live on different grids")
    if K is None:
        K = max(band_limit(F), band_limit(G))
    else:
        _require_band(F, K, "F")
        _require_band(G, K, "G")
    need = min_grid_size(K, 2)
    if F.grid.n < need:
        raise ValueError(f"grid n = {F.grid.n} aliases the product; need n >= {need}")
    return spectral_derivative(F, a) * spectral_derivative(G, b)


def _polynomial_terms(phi: SymbolFunction):
    if phi.terms is None:
        raise ValueError(f"symbol {phi.name} has no physical-side form (polynomial symbols only)")
    return phi.terms


def _physical_convolution(phi: SymbolFunction, F, G, K) -> TorusFunction:
    out = np.zeros(F.samples.shape, dtype=complex)
    for c, a, b in _polynomial_terms(phi):
        out = out + c * physical_derivative_product(F, G, a, b, K).samples
    return TorusFunction(F.grid, out)


def bridge_check(theta: Tensor, F: TorusFunction, G: TorusFunction, K: int,
                 tol: float = BRIDGE_TOL) -> Report:
    """Compare apply(Theta, F^, G^) with the Fourier coefficients of the
    physical-side operator:

    ConvolutionType (polynomial Phi):  sum c d^a F d^b G
    MultiplicationType:                V F G
    VariableCoefficient:               sum_i V_i T_{Phi_i}(F, G)

    Passes iff max |difference| <= tol * (1 + max |output|)."""
    d, n = F.grid.d, F.grid.n
    if theta.d != d:
        raise ValueError("dimension mismatch")
    _require_band(F, K, "F")
    _require_band(G, K, "G")
    f, g = to_fourier(F, K), to_fourier(G, K)
    if isinstance(theta, ConvolutionType):
        if theta.mode == "phi_of_differences":
            raise ValueError("the phi_of_differences mode has no physical-side form here")
        KV = 0
        Kout = 2 * K
        phys = lambda: _physical_convolution(theta.phi, F, G, K)
    elif isinstance(theta, MultiplicationType):
        KV = theta.V.coeffs.support_radius()
        Kout = KV + 2 * K
        phys = lambda: from_fourier(theta.V.coeffs, F.grid) * (F * G)
    elif isinstance(theta, VariableCoefficient):
        KV = max(V.coeffs.support_radius() for V, _ in theta.terms)
        Kout = KV + 2 * K

        def phys():
            out = np.zeros(F.samples.shape, dtype=complex)
            for V, phi in theta.terms:
                out = out + (from_fourier(V.coeffs, F.grid) * _physical_convolution(phi, F, G, K)).samples
            return TorusFunction(F.grid, out)
    else:
        raise ValueError(f"no physical-side form for {theta.family} tensors")
    need = 2 * Kout + 1
    if n < need:
        raise ValueError(f"grid n = {n} is too small; need n >= {need} "
                         f"(power of two: {grid_size(need)})")
    fourier_side = apply(theta, f, g, Kout)
    physical_side = to_fourier(phys(), Kout)
    diff = np.abs(fourier_side.flat() - physical_side.flat())
    scale = float(np.abs(fourier_side.flat()).max())
    resid = float(diff.max())
    ok = resid <= tol * (1.0 + scale)
    return Report("bridge", {"family": theta.family, "K": K, "KV": KV, "n": n, "d": d,
                             "tol": tol},
                  value=resid, radius=Kout, verdict="pass" if ok else "fail",
                  details={"outputMax": scale, "relativeResidual": resid / (1.0 + scale)})


def hs_norm_coefficients(F: TorusFunction, s: float, K: int) -> float:
    """||F||_{H^s} as the l^2_s norm of the coefficients."""
    return weighted_norm(to_fourier(F, K), s, 2.0)


def hs_norm_grid(F: TorusFunction, s: float) -> float:
    """||F||_{H^s} on the grid: apply the multiplier <k>^s in frequency, then
    take the L^2 grid norm."""
    w = bracket(euclid(F.grid.frequencies().reshape(-1, F.grid.d))).reshape(F.samples.shape) ** s
    return TorusFunction(F.grid, np.fft.ifftn(np.fft.fftn(F.samples) * w)).l2_norm()


def random_band_limited(grid: TorusGrid, K: int, rng) -> TorusFunction:
    """Complex Gaussian coefficients on |k|_inf <= K."""
    shape = (2 * K + 1,) * grid.d
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return from_fourier(WeightedSequence([-K] * grid.d, c), grid)
