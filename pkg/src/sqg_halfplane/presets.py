"""Initial data library. Every preset is dealiased and vanishes on x2 = 0, L2."""
from __future__ import annotations

import numpy as np

from .grid import Field, GridSpec, forward_coeffs, inverse_coeffs


def _dealias(grid: GridSpec, values: np.ndarray) -> Field:
    c = forward_coeffs(values) * grid.coefficient_mask()
    return Field(grid, inverse_coeffs(c))


def _bump(r):
    out = np.zeros_like(r)
    inside = r < 1
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


def single_mode(grid: GridSpec, k: int = 0, m: int = 1, amplitude: float = 1.0) -> Field:
    """A cos(2 pi k x1/L1) sin(pi m x2/L2); a Lambda_D eigenfunction."""
    if m < 1 or m > grid.n2 or abs(k) >= grid.n1 // 2:
        raise ValueError(f"mode (k={k}, m={m}) is not representable on the grid")
    if not grid.coefficient_mask()[k % grid.n1, m - 1]:
        raise ValueError(f"mode (k={k}, m={m}) lies outside the dealiased band")
    x1, x2 = grid.mesh()
    return Field(grid, amplitude * np.cos(2 * np.pi * k * x1 / grid.L1)
                 * np.sin(np.pi * m * x2 / grid.L2))


def two_mode(grid: GridSpec, amplitude: float = 1.0) -> Field:
    x1, x2 = grid.mesh()
    v = (np.sin(2 * np.pi * x1 / grid.L1) * np.sin(np.pi * x2 / grid.L2)
         + np.sin(2 * np.pi * x2 / grid.L2))
    return _dealias(grid, amplitude * v)


def boundary_bump(grid: GridSpec, x0: float | None = None, width: float = 1.0,
                  amplitude: float = 1.0) -> Field:
    """Smooth bump centred on the wall point (x0, 0), times the factor x2/width."""
    if x0 is None:
        x0 = grid.L1 / 2
    if not width > 0:
        raise ValueError("width must be positive")
    if width >= grid.L2 or 2 * width >= grid.L1:
        raise ValueError(f"bump of width {width} overflows the strip")
    x1, x2 = grid.mesh()
    d1 = (x1 - x0 + grid.L1 / 2) % grid.L1 - grid.L1 / 2
    r = np.hypot(d1, x2) / width
    return _dealias(grid, amplitude * np.e * _bump(r) * x2 / width)


def interior_bump(grid: GridSpec, x0: float | None = None, y0: float | None = None,
                  width: float = 0.5, amplitude: float = 1.0) -> Field:
    if x0 is None:
        x0 = grid.L1 / 2
    if y0 is None:
        y0 = grid.L2 / 2
    if not width > 0:
        raise ValueError("width must be positive")
    if y0 - width <= 0 or y0 + width >= grid.L2 or 2 * width >= grid.L1:
        raise ValueError(f"bump at ({x0}, {y0}) of width {width} overflows the strip")
    x1, x2 = grid.mesh()
    d1 = (x1 - x0 + grid.L1 / 2) % grid.L1 - grid.L1 / 2
    r = np.hypot(d1, x2 - y0) / width
    return _dealias(grid, amplitude * np.e * _bump(r))


def random_band(grid: GridSpec, j_lo: int = 1, j_hi: int = 4, amplitude: float = 1.0,
                seed: int = 0) -> Field:
    """Random real field with spectrum in 2^j_lo <= lambda <= 2^j_hi.

    Each octave [2^j, 2^(j+1)) is drawn independently and scaled to unit sup
    norm, so the Littlewood-Paley profile is roughly flat; the sum is then
    scaled to sup norm ``amplitude``.
    """
    if j_hi <= j_lo:
        raise ValueError("need j_hi > j_lo")
    lam = grid.eigenvalues()
    mask = grid.coefficient_mask()
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(lam.shape) + 1j * rng.standard_normal(lam.shape)
    # Hermitian symmetry in k makes the field real
    kneg = (-grid.k) % grid.n1
    z = 0.5 * (z + np.conj(z[kneg]))
    total = np.zeros(lam.shape, dtype=complex)
    found = False
    for j in range(j_lo, j_hi):
        hi = 2.0 ** (j + 1)
        sel = mask & (lam >= 2.0**j) & ((lam < hi) if j + 1 < j_hi else (lam <= hi))
        if not sel.any():
            continue
        found = True
        shell = np.where(sel, z, 0)
        total += shell / np.abs(inverse_coeffs(shell)).max()
    if not found:
        raise ValueError(f"band [2^{j_lo}, 2^{j_hi}] holds no resolved modes")
    values = inverse_coeffs(total).real
    return Field(grid, amplitude * values / np.abs(values).max())


PRESETS = {
    "single_mode": single_mode,
    "two_mode": two_mode,
    "boundary_bump": boundary_bump,
    "interior_bump": interior_bump,
    "random_band": random_band,
}


def preset(name: str, grid: GridSpec | None = None, **params) -> Field:
    try:
        build = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return build(grid or GridSpec(), **params)
