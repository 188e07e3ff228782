"""Numerical audits of the linear, bilinear and analyticity estimates.

Every audit returns a value object carrying the measured worst ratio and a
verdict against a constant declared before sampling. The default constants
are regression values frozen from the built-in battery; none are known in
closed form.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.fft as sfft
from scipy.stats import qmc

from . import _kernels
from .calculus import (
    BesovParams,
    DyadicPartition,
    b0_b1_norms,
    besov_norm_coeffs,
    partition_for_grid,
    symbols,
)
from .grid import Field, GridSpec, forward_coeffs, inverse_coeffs, odd_spectrum
from .solver import Trajectory, operator_for

# Frozen regression constants (see tests/test_acceptance.py for the battery).
SMOOTHING_CONSTANT = 2.0
MAXIMAL_REGULARITY_CONSTANT = 4.0
BILINEAR_CONSTANT = 1.0
AMPLIFICATION_LIMIT = 1e12


@dataclass
class EstimateReport:
    name: str
    samples: int
    fitted_constant: float
    fitted_exponent: float = math.nan
    worst_ratio: float = 0.0
    verdict: str = "inconclusive"
    notes: str = ""

    CSV_HEADER = "name,samples,fitted_constant,fitted_exponent,worst_ratio,verdict,notes"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def _verdict(worst, constant):
    if not np.isfinite(worst):
        return "inconclusive"
    return "pass" if worst <= constant else "fail"


def _b_norm(c, grid, P, s):
    return besov_norm_coeffs(c, BesovParams(s, math.inf, 1), grid, P)


# linear estimates -----------------------------------------------------------------

def verify_smoothing(P: DyadicPartition, s: float, f: Field, times: Sequence[float],
                     constant: float = SMOOTHING_CONSTANT) -> EstimateReport:
    """t^s ||exp(-t Lambda) f||_{B^s_{inf,1}} / ||f||_{B^0_{inf,1}} over ``times``.

    ``fitted_exponent`` is the least-squares slope of log||exp(-t Lambda) f||_{B^s}
    against log t.
    """
    if not s > 0:
        raise ValueError("smoothing audit needs s > 0")
    times = np.asarray(times, dtype=float)
    if times.size == 0 or np.any(times <= 0):
        raise ValueError("times must be strictly positive")
    grid = f.grid
    c = forward_coeffs(f.values)
    lam = grid.eigenvalues()
    base = _b_norm(c, grid, P, 0.0)
    norms = np.array([_b_norm(np.exp(-t * lam) * c, grid, P, s) for t in times])
    if base == 0:
        return EstimateReport("smoothing", len(times), constant, math.nan, 0.0, "pass",
                              "zero data")
    ratios = norms * times**s / base
    slope = math.nan
    if times.size >= 2 and np.all(norms > 0):
        slope = float(np.polyfit(np.log(times), np.log(norms), 1)[0])
    worst = float(ratios.max())
    return EstimateReport("smoothing", len(times), constant, slope, worst,
                          _verdict(worst, constant), f"s={s}")


def _linear_duhamel(lam, times, forcing):
    """int_0^t exp(-(t-tau) Lambda) F(tau) dtau at each node, trapezoid per interval."""
    out = np.zeros_like(forcing)
    for n in range(1, len(times)):
        h = times[n] - times[n - 1]
        E = np.exp(-h * lam)
        out[n] = E * out[n - 1] + 0.5 * h * (E * forcing[n - 1] + forcing[n])
    return out


def verify_maximal_regularity(P: DyadicPartition, f, T: float, nt: int = 2001,
                              constant: float = MAXIMAL_REGULARITY_CONSTANT) -> EstimateReport:
    """Duhamel integral in L^inf B^0 and L^1 B^1 against ||f||_{L^1 B^0}.

    ``f`` is a Field (constant forcing on [0, T]) or a Trajectory of forcing
    samples starting at 0.
    """
    if isinstance(f, Trajectory):
        if len(f) == 0:
            raise ValueError("empty forcing trajectory")
        grid = f.grid
        times = np.asarray(f.times)
        F = f.coeffs()
    elif isinstance(f, Field):
        grid = f.grid
        times = np.linspace(0.0, T, nt)
        F = np.broadcast_to(forward_coeffs(f.values), (nt, grid.n1, grid.n2)).copy()
    else:
        raise ValueError("empty forcing")
    lam = grid.eigenvalues()
    W = _linear_duhamel(lam, times, F)
    w0, w1 = b0_b1_norms(W, grid, P)
    f0 = b0_b1_norms(F, grid, P)[0]
    if len(times) > 1:
        lhs = float(w0.max() + np.trapezoid(w1, times))
        rhs = float(np.trapezoid(f0, times))
    else:
        lhs, rhs = 0.0, 0.0
    if lhs == 0.0:
        ratio = 0.0
    elif rhs == 0.0:
        ratio = math.inf
    else:
        ratio = lhs / rhs
    return EstimateReport("maximal_regularity", len(times), constant, math.nan, ratio,
                          _verdict(ratio, constant), f"lhs={lhs!r} rhs={rhs!r}")


# bilinear estimate ----------------------------------------------------------------

def bilinear_ratio(P, f: Field, g: Field, s: float = 0.0) -> float:
    grid = f.grid
    op = operator_for(grid)
    cf = forward_coeffs(f.values)
    cg = forward_coeffs(g.values)
    lhs = _b_norm(op.bilinear(cf, cg), grid, P, s)
    if s == 0:
        rhs = _b_norm(cf, grid, P, 0.0) * _b_norm(cg, grid, P, 1.0)
    else:
        rhs = (_b_norm(cf, grid, P, s) * _b_norm(cg, grid, P, 1.0)
               + _b_norm(cf, grid, P, 0.0) * _b_norm(cg, grid, P, s + 1.0))
    if lhs == 0.0:
        return 0.0
    return lhs / rhs if rhs > 0 else math.inf


def verify_bilinear(P: DyadicPartition, f, g, s: float = 0.0,
                    constant: float = BILINEAR_CONSTANT) -> EstimateReport:
    """||B(f, g)||_{B^s_{inf,1}} against the product of Besov norms.

    ``f`` and ``g`` may be single Fields or equal-length sequences of pairs.
    The declared constant plays the role of C^{s+1}.
    """
    fs = [f] if isinstance(f, Field) else list(f)
    gs = [g] if isinstance(g, Field) else list(g)
    if len(fs) != len(gs):
        raise ValueError("f and g sequences must have equal length")
    ratios = np.array([bilinear_ratio(P, a, b, s) for a, b in zip(fs, gs)])
    worst = float(ratios.max()) if ratios.size else 0.0
    return EstimateReport("bilinear", len(fs), constant, math.nan, worst,
                          _verdict(worst, constant), f"s={s}")


# time derivatives ---------------------------------------------------------------------

def _effective_lambda_max(c, lam, rel=1e-14):
    a = np.abs(c)
    top = a.max()
    if top == 0:
        return 0.0
    return float(lam[a > rel * top].max())


def time_derivatives(theta: Field, alpha_max: int) -> list[Field]:
    """[theta, d_t theta, ..., d_t^alpha_max theta] along the SQG flow.

    d_t^a theta = -Lambda d_t^{a-1} theta
                  - sum_g binom(a-1, g) B(d_t^g theta, d_t^{a-1-g} theta).
    """
    if alpha_max < 0:
        raise ValueError("alpha_max must be >= 0")
    grid = theta.grid
    op = operator_for(grid)
    lam = grid.eigenvalues()
    c0 = forward_coeffs(theta.values)
    lam_eff = _effective_lambda_max(c0, lam)
    if lam_eff > 0 and alpha_max * math.log10(max(lam_eff, 1.0)) > math.log10(AMPLIFICATION_LIMIT):
        warnings.warn(f"lambda_eff^{alpha_max} = {lam_eff ** alpha_max:.3g} exceeds "
                      f"{AMPLIFICATION_LIMIT:.0e}; high time derivatives are unresolved",
                      stacklevel=2)
    ders = [c0]
    for a in range(1, alpha_max + 1):
        nxt = -lam * ders[a - 1]
        for g in range(a):
            nxt = nxt - math.comb(a - 1, g) * op.bilinear(ders[g], ders[a - 1 - g])
        ders.append(nxt)
    return [Field(grid, inverse_coeffs(d)) for d in ders]


def time_derivative(theta: Field, alpha: int) -> Field:
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    return time_derivatives(theta, alpha)[alpha]


# analyticity ------------------------------------------------------------------------

@dataclass
class AnalyticityReport:
    t: float
    beta_max: int
    space_table: np.ndarray
    joint_space_table: np.ndarray
    time_table: np.ndarray
    estimated_C: float
    estimated_C_joint: float
    radius_fit: float
    notes: str = ""

    def entries(self):
        """Yield (kind, alpha, beta1, beta2, value) rows."""
        b = self.beta_max
        for b1 in range(b + 1):
            for b2 in range(b + 1 - b1):
                yield "space", 0, b1, b2, float(self.space_table[b1, b2])
        for b1 in range(b + 1):
            for b2 in range(b + 1 - b1):
                yield "space_joint", 0, b1, b2, float(self.joint_space_table[b1, b2])
        for a in range(b + 1):
            yield "time", a, 0, 0, float(self.time_table[a])


def _root_constant(entries_by_order):
    best = 0.0
    for order, value in entries_by_order:
        if order >= 1 and value > 0:
            best = max(best, value ** (1.0 / order))
    return best


def space_derivative_sups(c, grid: GridSpec, beta_max: int) -> np.ndarray:
    """sup |d1^b1 d2^b2 f| over the doubled grid (so including x2 = 0, L2)."""
    sym = symbols(grid)
    D = odd_spectrum(c)
    out = np.full((beta_max + 1, beta_max + 1), np.nan)
    scale = grid.n1 * grid.m2
    for b1 in range(beta_max + 1):
        for b2 in range(beta_max + 1 - b1):
            vals = sfft.ifft2(sym.derivative(b1, b2) * D).real * scale
            out[b1, b2] = np.abs(vals).max()
    return out


def spectral_decay_slope(c, grid: GridSpec, floor: float = 1e-13) -> float:
    """Slope of log(max |c| per unit-lambda bin) against lambda above the peak."""
    lam = grid.eigenvalues()
    a = np.abs(c)
    top = a.max()
    if top == 0:
        return -math.inf
    bins = np.floor(lam).astype(int)
    nb = bins.max() + 1
    env = np.zeros(nb)
    np.maximum.at(env, bins.ravel(), a.ravel())
    centers = np.arange(nb) + 0.5
    peak = int(np.argmax(env))
    sel = (env > floor * top) & (np.arange(nb) >= peak)
    if sel.sum() == 1:
        # nothing above the floor past the peak: decay faster than any rate
        return -math.inf
    return float(np.polyfit(centers[sel], np.log(env[sel]), 1)[0])


def analyticity_diagnostic(traj: Trajectory, t: float, beta_max: int = 8) -> AnalyticityReport:
    if not t > 0:
        raise ValueError("analyticity tables need t > 0")
    if beta_max > 10:
        raise ValueError("beta_max must be <= 10")
    theta = traj.at(t)
    grid = traj.grid
    c = forward_coeffs(theta.values)
    sups = space_derivative_sups(c, grid, beta_max)
    space = np.full_like(sups, np.nan)
    joint = np.full_like(sups, np.nan)
    orders = []
    for b1 in range(beta_max + 1):
        for b2 in range(beta_max + 1 - b1):
            b = b1 + b2
            space[b1, b2] = t**b * sups[b1, b2] / (math.factorial(b1) * math.factorial(b2))
            joint[b1, b2] = t**b * sups[b1, b2] / math.factorial(b)
            orders.append((b, space[b1, b2]))
    ders = time_derivatives(theta, beta_max)
    time_table = np.array([t**a * ders[a].sup() / math.factorial(a)
                           for a in range(beta_max + 1)])
    orders_time = [(a, time_table[a]) for a in range(beta_max + 1)]
    C = _root_constant(orders + orders_time)
    C_joint = _root_constant(
        [(b1 + b2, joint[b1, b2]) for b1 in range(beta_max + 1)
         for b2 in range(beta_max + 1 - b1)] + orders_time)
    return AnalyticityReport(t, beta_max, space, joint, time_table, C, C_joint,
                             spectral_decay_slope(c, grid))


# Hoelder seminorm ---------------------------------------------------------------------

@lru_cache(maxsize=8)
def _halton_pairs(budget: int) -> np.ndarray:
    return qmc.Halton(d=4, scramble=False).random(budget)


def holder_seminorm_values(values: np.ndarray, grid: GridSpec, a: float = 0.25,
                           pair_budget: int = 2048, dirichlet: bool = True) -> float:
    n1, n2 = values.shape
    if dirichlet:
        # include the boundary rows, where the trace is zero
        padded = np.zeros((n1, n2 + 2))
        padded[:, 1:-1] = values
    else:
        padded = np.ascontiguousarray(values)
    rows = padded.shape[1]
    best = _kernels.neighbour_quotient_max(padded, grid.dx1, grid.dx2, a)
    if pair_budget > 0:
        u = _halton_pairs(int(pair_budget))
        i1 = np.minimum((u[:, 0] * n1).astype(np.int64), n1 - 1)
        j1 = np.minimum((u[:, 1] * rows).astype(np.int64), rows - 1)
        i2 = np.minimum((u[:, 2] * n1).astype(np.int64), n1 - 1)
        j2 = np.minimum((u[:, 3] * rows).astype(np.int64), rows - 1)
        best = max(best, _kernels.pair_quotient_max(padded, i1, j1, i2, j2,
                                                    grid.dx1, grid.dx2, grid.L1, a))
    return float(best)


def holder_seminorm(f: Field, a: float = 0.25, pair_budget: int = 2048) -> float:
    """Sampled sup |f(x) - f(y)| / |x - y|^a, boundary trace included."""
    if pair_budget < 1:
        raise ValueError("pair_budget must be >= 1")
    if not 0 < a <= 1:
        raise ValueError("Hoelder exponent must lie in (0, 1]")
    return holder_seminorm_values(f.values, f.grid, a, pair_budget, f.dirichlet)


# battery ------------------------------------------------------------------------------

def run_battery(grid: GridSpec | None = None, seed: int = 0, n_pairs: int = 20) -> list[EstimateReport]:
    """Built-in audit battery; every report should pass its declared constant."""
    from .presets import preset

    grid = grid or GridSpec()
    P = partition_for_grid(grid)
    rng = np.random.default_rng(seed)
    reports = []

    eig = preset("single_mode", grid, k=3, m=4)
    r = verify_smoothing(P, 1.0, eig, np.geomspace(1e-3, 1.0, 25))
    r.name = "smoothing_eigenfunction"
    reports.append(r)

    band = preset("random_band", grid, j_lo=1, j_hi=5, amplitude=1.0,
                  seed=int(rng.integers(2**32)))
    r = verify_smoothing(P, 1.0, band, np.geomspace(1e-3, 1.0, 25))
    r.name = "smoothing_random_band"
    reports.append(r)

    r = verify_maximal_regularity(P, preset("two_mode", grid, amplitude=1.0), 2.0)
    r.name = "maximal_regularity_two_mode"
    reports.append(r)

    fs, gs = [], []
    for _ in range(n_pairs):
        fs.append(preset("random_band", grid, j_lo=0, j_hi=3, amplitude=1.0,
                         seed=int(rng.integers(2**32))))
        gs.append(preset("random_band", grid, j_lo=0, j_hi=3, amplitude=1.0,
                         seed=int(rng.integers(2**32))))
    r = verify_bilinear(P, fs, gs, 0.0)
    r.name = "bilinear_s0"
    reports.append(r)
    return reports
