"""Spectral calculus of the square-root Dirichlet Laplacian on the strip.

Every operator here is a multiplier ``sigma(lambda)`` acting diagonally on
Fourier-sine coefficients, except the velocity and derivatives, which act on
the odd extension with whole-plane Fourier symbols and are then restricted.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import (
    Field,
    GridSpec,
    ExtendedField,
    doubled_values,
    forward_coeffs,
    inverse_coeffs,
    odd_spectrum,
    _check_finite,
)

TAIL_TOLERANCE = 1e-8


def _bump(y):
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    inside = np.abs(y) < 1.0
    yi = y[inside]
    out[inside] = np.exp(-1.0 / (1.0 - yi * yi))
    return out


def phi0(lam) -> np.ndarray:
    """Dyadic bump supported in [1/2, 2], normalised so its dilates sum to one."""
    lam = np.asarray(lam, dtype=float)
    out = np.zeros_like(lam)
    pos = (lam > 0.5) & (lam < 2.0)
    x = np.log2(lam[pos])
    g = _bump(x)
    out[pos] = g / (_bump(x - 1.0) + g + _bump(x + 1.0))
    return out


def phi_j(lam, j: int) -> np.ndarray:
    return phi0(np.asarray(lam, dtype=float) / 2.0**j)


def psi(lam) -> np.ndarray:
    """Low-frequency cutoff: psi + sum_{j >= 1} phi_j = 1 on [0, inf)."""
    lam = np.asarray(lam, dtype=float)
    return np.where(lam < 2.0, 1.0 - phi_j(lam, 1), 0.0)


@dataclass(frozen=True)
class DyadicPartition:
    j_min: int
    j_max: int

    def __post_init__(self):
        if not self.j_min < self.j_max:
            raise ValueError(f"empty dyadic range [{self.j_min}, {self.j_max}]")

    @property
    def indices(self) -> range:
        return range(self.j_min, self.j_max + 1)

    @property
    def band(self) -> tuple[float, float]:
        """Interval of lambda on which the truncated family sums to one."""
        return 2.0 ** (self.j_min + 1), 2.0 ** (self.j_max - 1)

    def phi0(self, lam):
        return phi0(lam)

    def phi(self, j: int, lam):
        if j < self.j_min or j > self.j_max:
            raise ValueError(f"j={j} outside partition range [{self.j_min}, {self.j_max}]")
        return phi_j(lam, j)

    def psi(self, lam):
        return psi(lam)

    def weights(self, lam) -> np.ndarray:
        """Stacked phi_j(lam) for every j in range, shape (nj,) + lam.shape."""
        lam = np.asarray(lam, dtype=float)
        return np.stack([phi_j(lam, j) for j in self.indices])

    def total(self, lam) -> np.ndarray:
        return self.weights(lam).sum(axis=0)


def make_partition(j_min: int, j_max: int) -> DyadicPartition:
    return DyadicPartition(int(j_min), int(j_max))


def partition_for_grid(grid: GridSpec) -> DyadicPartition:
    """Smallest partition whose unit band covers every resolved eigenvalue."""
    j_min = math.floor(math.log2(grid.lambda_min)) - 1
    j_max = math.ceil(math.log2(grid.lambda_max)) + 1
    return DyadicPartition(j_min, j_max)


@dataclass(frozen=True)
class BesovParams:
    s: float = 0.0
    p: float = math.inf
    q: float = 1.0
    homogeneous: bool = True

    def __post_init__(self):
        for name in ("p", "q"):
            if getattr(self, name) not in (1, 2, math.inf):
                raise ValueError(f"unsupported {name}={getattr(self, name)}; use 1, 2 or inf")


# multipliers -----------------------------------------------------------------

def _sigma_on(grid, sigma):
    vals = np.asarray(sigma(grid.eigenvalues()), dtype=float)
    vals = np.broadcast_to(vals, (grid.n1, grid.n2))
    if not np.all(np.isfinite(vals)):
        raise ValueError("multiplier is not finite on the resolved eigenvalues")
    return vals


def apply_multiplier(f: Field, sigma: Callable[[np.ndarray], np.ndarray]) -> Field:
    _check_finite(f.values)
    c = forward_coeffs(f.values)
    return Field(f.grid, inverse_coeffs(c * _sigma_on(f.grid, sigma)))


def lp_block(f: Field, j: int, P: DyadicPartition) -> Field:
    return apply_multiplier(f, lambda lam: P.phi(j, lam))


def low_block(f: Field, P: DyadicPartition) -> Field:
    return apply_multiplier(f, P.psi)


def semigroup(f: Field, t: float) -> Field:
    """Poisson semigroup exp(-t Lambda_D) f."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    return apply_multiplier(f, lambda lam: np.exp(-t * lam))


def heat_semigroup(f: Field, t: float) -> Field:
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    return apply_multiplier(f, lambda lam: np.exp(-t * lam * lam))


def frac_lambda(f: Field, s: float) -> Field:
    return apply_multiplier(f, lambda lam: lam**s)


# odd-extension symbols ------------------------------------------------------------

class DoubledSymbols:
    """Whole-plane Fourier symbols on the doubled grid of ``grid``."""

    def __init__(self, grid: GridSpec):
        self.grid = grid
        k = grid.k
        xi1 = grid.xi1.copy()
        # x1 Nyquist carries no odd-derivative information
        xi1[k == -grid.n1 // 2] = 0.0
        xi2 = grid.xi2_doubled.copy()
        xi2[grid.l == grid.n2 + 1] = 0.0
        self.xi1 = xi1[:, None]
        self.xi2 = xi2[None, :]
        mod = np.hypot(grid.xi1[:, None], grid.xi2_doubled[None, :])
        self.abs_xi = mod
        inv = np.zeros_like(mod)
        np.divide(1.0, mod, out=inv, where=mod > 0)
        self.inv_abs_xi = inv
        self.mask = grid.dealias_mask()

    def derivative(self, beta1: int = 0, beta2: int = 0) -> np.ndarray:
        return (1j * self.xi1) ** beta1 * (1j * self.xi2) ** beta2

    def velocity(self) -> tuple[np.ndarray, np.ndarray]:
        """Symbols of u = grad-perp Lambda^{-1} acting on the odd extension."""
        return -1j * self.xi2 * self.inv_abs_xi, 1j * self.xi1 * self.inv_abs_xi


_SYMBOL_CACHE: dict[GridSpec, DoubledSymbols] = {}


def symbols(grid: GridSpec) -> DoubledSymbols:
    s = _SYMBOL_CACHE.get(grid)
    if s is None:
        s = _SYMBOL_CACHE[grid] = DoubledSymbols(grid)
    return s


def velocity_extended(theta: Field) -> tuple[ExtendedField, ExtendedField]:
    _check_finite(theta.values)
    sym = symbols(theta.grid)
    D = odd_spectrum(forward_coeffs(theta.values))
    a1, a2 = sym.velocity()
    return (ExtendedField(theta.grid, doubled_values(a1 * D)),
            ExtendedField(theta.grid, doubled_values(a2 * D)))


def velocity(theta: Field) -> tuple[Field, Field]:
    """u = grad-perp Lambda_D^{-1} theta, restricted to the interior samples.

    u1 is even in x2 and keeps a nonzero trace; u2 is odd and vanishes on the
    boundary.
    """
    e1, e2 = velocity_extended(theta)
    n2 = theta.grid.n2
    return (Field(theta.grid, e1.values[:, 1 : n2 + 1], dirichlet=False),
            Field(theta.grid, e2.values[:, 1 : n2 + 1]))


def derivative_extended(f: Field, beta1: int = 0, beta2: int = 0) -> ExtendedField:
    """d1^beta1 d2^beta2 of the odd extension, on the doubled grid."""
    sym = symbols(f.grid)
    D = odd_spectrum(forward_coeffs(f.values))
    return ExtendedField(f.grid, doubled_values(sym.derivative(beta1, beta2) * D))


# norms ------------------------------------------------------------------------------

def lp_norm(values: np.ndarray, p: float, grid: GridSpec) -> np.ndarray:
    """Grid-quadrature L^p norm over the trailing (n1, n2) axes."""
    a = np.abs(values)
    if p == math.inf:
        return a.max(axis=(-2, -1)) if a.shape[-1] and a.shape[-2] else np.zeros(a.shape[:-2])
    w = grid.dx1 * grid.dx2
    return (np.sum(a**p, axis=(-2, -1)) * w) ** (1.0 / p)


def _lq(seq: np.ndarray, q: float) -> float:
    if seq.size == 0:
        return 0.0
    if q == math.inf:
        return float(seq.max())
    return float(np.sum(seq**q) ** (1.0 / q))


def block_norms(coeffs: np.ndarray, grid: GridSpec, P: DyadicPartition,
                p: float = math.inf) -> np.ndarray:
    """||phi_j(Lambda_D) f||_{L^p} for every j in P; coeffs may be batched."""
    W = P.weights(grid.eigenvalues())
    c = np.asarray(coeffs)
    blocks = inverse_coeffs(c[..., None, :, :] * W)
    return lp_norm(blocks, p, grid)


def check_tail(coeffs: np.ndarray, grid: GridSpec, P: DyadicPartition) -> float:
    """Fraction of spectral mass outside the partition's unit band."""
    lo, hi = P.band
    lam = grid.eigenvalues()
    mass = np.abs(coeffs) ** 2
    total = mass.sum()
    if total == 0:
        return 0.0
    outside = mass[(lam < lo) | (lam > hi)].sum() / total
    if outside > TAIL_TOLERANCE:
        warnings.warn(
            f"{outside:.3e} of the spectral mass lies outside the partition band "
            f"[{lo:g}, {hi:g}]", stacklevel=3)
    return float(outside)


def besov_norm_coeffs(coeffs: np.ndarray, bp: BesovParams, grid: GridSpec,
                      P: DyadicPartition) -> float:
    check_tail(coeffs, grid, P)
    if bp.homogeneous:
        js = np.arange(P.j_min, P.j_max + 1)
        seq = 2.0 ** (bp.s * js) * block_norms(coeffs, grid, P, bp.p)
        return _lq(seq, bp.q)
    js = np.arange(max(P.j_min, 1), P.j_max + 1)
    lam = grid.eigenvalues()
    W = np.stack([phi_j(lam, j) for j in js]) if js.size else np.zeros((0,) + lam.shape)
    blocks = inverse_coeffs(coeffs[None] * W)
    seq = 2.0 ** (bp.s * js) * lp_norm(blocks, bp.p, grid)
    low = float(lp_norm(inverse_coeffs(coeffs * psi(lam)), bp.p, grid))
    return low + _lq(seq, bp.q)


def besov_norm(f: Field, bp: BesovParams, P: DyadicPartition | None = None) -> float:
    _check_finite(f.values)
    P = P or partition_for_grid(f.grid)
    return besov_norm_coeffs(forward_coeffs(f.values), bp, f.grid, P)


def besov_profile(coeffs: np.ndarray, grid: GridSpec, P: DyadicPartition,
                  p: float = math.inf) -> np.ndarray:
    """Per-shell L^p norms; the summands of the homogeneous Besov norms."""
    return block_norms(coeffs, grid, P, p)


def b0_b1_norms(coeffs: np.ndarray, grid: GridSpec, P: DyadicPartition, chunk: int = 64):
    """(||f||_{B^0_{inf,1}}, ||f||_{B^1_{inf,1}}) from one block sweep.

    ``coeffs`` may carry leading batch axes; results then have that shape.
    Batches are processed ``chunk`` states at a time to bound memory.
    """
    c = np.asarray(coeffs)
    js = np.arange(P.j_min, P.j_max + 1)
    if c.ndim == 2:
        norms = block_norms(c, grid, P, math.inf)
        return norms.sum(axis=-1), (norms * 2.0**js).sum(axis=-1)
    lead = c.shape[:-2]
    flat = c.reshape((-1,) + c.shape[-2:])
    b0 = np.empty(len(flat))
    b1 = np.empty(len(flat))
    for i in range(0, len(flat), chunk):
        norms = block_norms(flat[i : i + chunk], grid, P, math.inf)
        b0[i : i + chunk] = norms.sum(axis=-1)
        b1[i : i + chunk] = (norms * 2.0**js).sum(axis=-1)
    return b0.reshape(lead), b1.reshape(lead)


def multiplier_operator_norm(grid: GridSpec, sigma) -> float:
    """Exact L^inf -> L^inf norm of sigma(Lambda_D) on the grid.

    The discrete operator is real symmetric and x1-translation invariant, so
    its maximal absolute row sum is read off from deltas at x1 = 0.
    """
    vals = _sigma_on(grid, sigma)
    deltas = np.zeros((grid.n2, grid.n1, grid.n2))
    deltas[np.arange(grid.n2), 0, np.arange(grid.n2)] = 1.0
    cols = inverse_coeffs(forward_coeffs(deltas) * vals)
    return float(np.abs(cols).sum(axis=(1, 2)).max())
