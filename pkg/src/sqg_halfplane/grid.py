"""Grids, odd/even extensions and the Fourier-sine transform on the strip.

The half-plane is truncated to the periodic strip ``[0, L1) x [0, L2]`` with
zero Dirichlet data on ``x2 = 0`` and ``x2 = L2``. Only interior samples are
stored. A field ``f`` is expanded as

    f(x1, x2) = sum_{k, m} c[k, m] * exp(2j*pi*k*x1/L1) * sin(pi*m*x2/L2)

with ``k`` in numpy FFT order and ``m = 1..n2``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.fft as sfft


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    n1: int = 64
    n2: int = 63
    L1: float = 2 * np.pi
    L2: float = np.pi
    dealias_fraction: Fraction = Fraction(2, 3)

    def __post_init__(self):
        if self.n1 <= 0 or self.n1 % 2:
            raise ValueError(f"n1 must be a positive even integer, got {self.n1}")
        if self.n2 <= 0:
            raise ValueError(f"n2 must be a positive integer, got {self.n2}")
        if not (self.L1 > 0 and self.L2 > 0):
            raise ValueError("L1 and L2 must be positive")
        frac = Fraction(self.dealias_fraction).limit_denominator(1000)
        if not (0 < frac <= 1):
            raise ValueError("dealias_fraction must lie in (0, 1]")
        object.__setattr__(self, "dealias_fraction", frac)

    # sample geometry -----------------------------------------------------
    @property
    def dx1(self) -> float:
        return self.L1 / self.n1

    @property
    def dx2(self) -> float:
        return self.L2 / (self.n2 + 1)

    @property
    def m2(self) -> int:
        """Number of x2 samples on the odd-doubled periodic grid."""
        return 2 * self.n2 + 2

    @property
    def x1(self) -> np.ndarray:
        return np.arange(self.n1) * self.dx1

    @property
    def x2(self) -> np.ndarray:
        return np.arange(1, self.n2 + 1) * self.dx2

    @property
    def x2_doubled(self) -> np.ndarray:
        """x2 coordinates of the doubled grid in FFT order, in (-L2, L2]."""
        j = np.arange(self.m2)
        j = np.where(j <= self.n2 + 1, j, j - self.m2)
        return j * self.dx2

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x1, self.x2, indexing="ij")

    # spectral geometry ---------------------------------------------------
    @property
    def k(self) -> np.ndarray:
        """Integer x1 wavenumber indices in FFT order (-n1/2 .. n1/2-1)."""
        return np.rint(sfft.fftfreq(self.n1) * self.n1).astype(int)

    @property
    def m(self) -> np.ndarray:
        return np.arange(1, self.n2 + 1)

    @property
    def l(self) -> np.ndarray:
        """Integer x2 wavenumber indices of the doubled grid in FFT order."""
        return np.rint(sfft.fftfreq(self.m2) * self.m2).astype(int)

    @property
    def xi1(self) -> np.ndarray:
        return 2 * np.pi * self.k / self.L1

    @property
    def xi2_doubled(self) -> np.ndarray:
        return np.pi * self.l / self.L2

    def eigenvalues(self) -> np.ndarray:
        """lambda(k, m) on the (n1, n2) coefficient layout."""
        return _eigenvalues(self.n1, self.n2, self.L1, self.L2)

    @property
    def lambda_min(self) -> float:
        return np.pi / self.L2

    @property
    def lambda_max(self) -> float:
        return float(np.hypot(np.pi * self.n1 / self.L1, np.pi * self.n2 / self.L2))

    def dealias_mask(self) -> np.ndarray:
        """Sharp cutoff on the doubled-grid spectrum, shape (n1, m2)."""
        f = float(self.dealias_fraction)
        keep1 = np.abs(self.k) < f * self.n1 / 2
        keep2 = np.abs(self.l) < f * self.m2 / 2
        return keep1[:, None] & keep2[None, :]

    def coefficient_mask(self) -> np.ndarray:
        """The dealias cutoff restricted to sine coefficients, shape (n1, n2)."""
        return self.dealias_mask()[:, 1 : self.n2 + 1]


@lru_cache(maxsize=32)
def _eigenvalues(n1, n2, L1, L2):
    k = np.rint(sfft.fftfreq(n1) * n1)
    m = np.arange(1, n2 + 1)
    lam = np.hypot(2 * np.pi * k[:, None] / L1, np.pi * m[None, :] / L2)
    lam.setflags(write=False)
    return lam


def eigenvalue(grid: GridSpec, k: int, m: int) -> float:
    """Square-root Dirichlet eigenvalue of the mode exp(i k x1) sin(m x2)."""
    if m < 1:
        raise ValueError(f"sine index must be >= 1, got m={m}")
    return float(np.hypot(2 * np.pi * k / grid.L1, np.pi * m / grid.L2))


def _check_finite(values, what="field"):
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{what} contains NaN or Inf")


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples at the interior points of the strip, indexed (i, j)."""

    grid: GridSpec
    values: np.ndarray
    dirichlet: bool = True

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n1, self.grid.n2):
            raise GridMismatchError(
                f"values shape {v.shape} does not match grid {(self.grid.n1, self.grid.n2)}"
            )
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "Field":
        return cls(grid, np.zeros((grid.n1, grid.n2)))

    @classmethod
    def from_function(cls, grid: GridSpec, func) -> "Field":
        X1, X2 = grid.mesh()
        return cls(grid, np.broadcast_to(func(X1, X2), X1.shape).astype(float))

    def _like(self, values):
        return Field(self.grid, values, self.dirichlet)

    def __add__(self, other):
        _same_grid(self, other)
        return self._like(self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return self._like(self.values - other.values)

    def __mul__(self, a):
        return self._like(self.values * a)

    __rmul__ = __mul__

    def __neg__(self):
        return self._like(-self.values)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


@dataclass(frozen=True, eq=False)
class ExtendedField:
    """Samples on the doubled grid; column j' sits at x2 = j'*dx2 (mod 2*L2)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n1, self.grid.m2):
            raise GridMismatchError(
                f"values shape {v.shape} does not match doubled grid "
                f"{(self.grid.n1, self.grid.m2)}"
            )
        object.__setattr__(self, "values", v)

    def mirrored(self) -> np.ndarray:
        """values(i, -j') in the same layout."""
        return np.roll(self.values[:, ::-1], 1, axis=1)

    def parity_defect(self, parity: str = "odd") -> float:
        sign = -1.0 if parity == "odd" else 1.0
        return float(np.max(np.abs(self.values - sign * self.mirrored())))

    def boundary_trace(self) -> float:
        """Largest magnitude on the rows x2 = 0 and x2 = L2."""
        n2 = self.grid.n2
        return float(max(np.max(np.abs(self.values[:, 0])),
                         np.max(np.abs(self.values[:, n2 + 1]))))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier-sine coefficients, shape (n1, n2), x1 index in FFT order."""

    grid: GridSpec
    coeffs: np.ndarray
    reality: bool = True

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n1, self.grid.n2):
            raise GridMismatchError(
                f"coeffs shape {c.shape} does not match grid {(self.grid.n1, self.grid.n2)}"
            )
        object.__setattr__(self, "coeffs", c)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.grid.eigenvalues()

    def hermitian_defect(self) -> float:
        c = self.coeffs
        flipped = np.conj(np.roll(c[::-1], 1, axis=0))
        return float(np.max(np.abs(c - flipped))) if c.size else 0.0


def _same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


# extensions ----------------------------------------------------------------

def odd_extend(f: Field) -> ExtendedField:
    _check_finite(f.values)
    return ExtendedField(f.grid, _odd_values(f.values))


def _odd_values(v):
    n1, n2 = v.shape
    out = np.zeros((n1, 2 * n2 + 2))
    out[:, 1 : n2 + 1] = v
    out[:, n2 + 2 :] = -v[:, ::-1]
    return out


@lru_cache(maxsize=16)
def _cosine_trace_weights(n2):
    # Even band-limited fit: cos(m*pi*j/(n2+1)), m = 0..n2-1, through the
    # interior samples, evaluated at the two trace rows.
    j = np.arange(1, n2 + 1)
    m = np.arange(n2)
    C = np.cos(np.pi * np.outer(j, m) / (n2 + 1))
    Cinv = np.linalg.inv(C)
    w0 = np.ones(n2) @ Cinv
    wL = np.cos(np.pi * m) @ Cinv
    return w0, wL


def even_extend(f: Field) -> ExtendedField:
    """Even reflection in x2; trace rows come from the cosine interpolant."""
    _check_finite(f.values)
    v = f.values
    n1, n2 = v.shape
    w0, wL = _cosine_trace_weights(n2)
    out = np.empty((n1, 2 * n2 + 2))
    out[:, 0] = v @ w0
    out[:, 1 : n2 + 1] = v
    out[:, n2 + 1] = v @ wL
    out[:, n2 + 2 :] = v[:, ::-1]
    return ExtendedField(f.grid, out)


def restrict(g: ExtendedField, dirichlet: bool = True) -> Field:
    return Field(g.grid, g.values[:, 1 : g.grid.n2 + 1].copy(), dirichlet)


# transforms ----------------------------------------------------------------

def forward_coeffs(values: np.ndarray) -> np.ndarray:
    n1, n2 = values.shape[-2:]
    s = sfft.dst(values, type=1, axis=-1) / (n2 + 1)
    return sfft.fft(s, axis=-2) / n1


def inverse_coeffs(coeffs: np.ndarray) -> np.ndarray:
    """Real samples from coefficients; trailing axes are (n1, n2)."""
    n1 = coeffs.shape[-2]
    g = sfft.ifft(coeffs, axis=-2).real * n1
    return sfft.dst(g, type=1, axis=-1) * 0.5


def forward_transform(f: Field) -> Spectrum:
    _check_finite(f.values)
    return Spectrum(f.grid, forward_coeffs(f.values), reality=True)


def inverse_transform(s: Spectrum) -> Field:
    if not s.reality:
        warnings.warn("spectrum is not flagged real; taking the real part", stacklevel=2)
    elif s.hermitian_defect() > 1e-10 * max(1.0, float(np.max(np.abs(s.coeffs)))):
        warnings.warn("spectrum violates Hermitian symmetry; taking the real part",
                      stacklevel=2)
    return Field(s.grid, inverse_coeffs(s.coeffs))


# doubled-grid spectra --------------------------------------------------------
# D is normalised so that g(x) = sum D[k, l] exp(i(xi1 x1 + xi2 x2)), i.e.
# D = fft2(values) / (n1 * m2).

def odd_spectrum(coeffs: np.ndarray) -> np.ndarray:
    """Doubled-grid spectrum of the odd extension, from sine coefficients."""
    n1, n2 = coeffs.shape
    D = np.zeros((n1, 2 * n2 + 2), dtype=complex)
    half = coeffs * (-0.5j)
    D[:, 1 : n2 + 1] = half
    D[:, n2 + 2 :] = -half[:, ::-1]
    return D


def sine_coeffs_from_odd(D: np.ndarray) -> np.ndarray:
    """Inverse of :func:`odd_spectrum`, symmetrised over +-l."""
    n2 = D.shape[1] // 2 - 1
    return 1j * (D[:, 1 : n2 + 1] - D[:, n2 + 2 :][:, ::-1])


def doubled_values(D: np.ndarray) -> np.ndarray:
    return sfft.ifft2(D).real * (D.shape[0] * D.shape[1])


def doubled_spectrum(values: np.ndarray) -> np.ndarray:
    return sfft.fft2(values) / (values.shape[0] * values.shape[1])
