"""Critical SQG on the strip: nonlinear term, Duhamel map and time stepping.

States are carried as Fourier-sine coefficient arrays of shape (n1, n2).
Quadratic products are formed in physical space on the odd-doubled grid and
truncated by the grid's sharp dealiasing mask.
"""
from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np
import scipy.fft as sfft

from .calculus import (
    BesovParams,
    b0_b1_norms,
    besov_norm_coeffs,
    partition_for_grid,
    symbols,
)
from .grid import (
    ExtendedField,
    Field,
    GridMismatchError,
    GridSpec,
    _check_finite,
    forward_coeffs,
    inverse_coeffs,
    odd_spectrum,
    sine_coeffs_from_odd,
)

SCHEMES = ("integrating_factor_rk4", "etd_rk2")
SMALLNESS_THRESHOLD = 0.1
# modes with dt*lambda above this use plain linear interpolation in time
_IF_INTERP_LIMIT = 8.0


class NumericalFailure(FloatingPointError):
    def __init__(self, step: int, t: float):
        super().__init__(f"non-finite state at step {step} (t={t:.6g})")
        self.step = step
        self.t = t


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    scheme: str = "integrating_factor_rk4"
    dealias_fraction: Fraction | None = None
    snapshot_stride: int = 10
    picard_max_iter: int = 50
    picard_tol: float = 1e-10
    quadrature_nodes: int = 4
    holder_a: float = 0.25
    holder_pairs: int = 2048

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.dt < self.t_end:
            raise ValueError("dt must be smaller than t_end")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if self.quadrature_nodes < 2:
            raise ValueError("quadrature_nodes must be >= 2")

    def grid_for(self, grid: GridSpec) -> GridSpec:
        if self.dealias_fraction is None:
            return grid
        return dataclasses.replace(grid, dealias_fraction=self.dealias_fraction)


@dataclass
class Trajectory:
    grid: GridSpec
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    def append(self, t: float, state: Field, diag: dict | None = None):
        if state.grid != self.grid:
            raise GridMismatchError("trajectory states must share one grid")
        if self.times and not t > self.times[-1]:
            raise ValueError(f"times must increase strictly: {t} after {self.times[-1]}")
        self.times.append(float(t))
        self.states.append(state)
        self.diagnostics.append(diag or {})

    def __len__(self):
        return len(self.times)

    def index_of(self, t: float, tol: float = 1e-9) -> int:
        times = np.asarray(self.times)
        i = int(np.argmin(np.abs(times - t)))
        if abs(times[i] - t) > tol * max(1.0, abs(t)):
            raise ValueError(f"t={t} is not a stored time")
        return i

    def at(self, t: float, tol: float = 1e-9) -> Field:
        return self.states[self.index_of(t, tol)]

    def coeffs(self) -> np.ndarray:
        return np.stack([forward_coeffs(s.values) for s in self.states])

    @classmethod
    def from_coeffs(cls, grid, times, coeffs, diagnostics=None):
        traj = cls(grid)
        values = inverse_coeffs(np.asarray(coeffs))
        for n, t in enumerate(times):
            traj.append(t, Field(grid, values[n]), diagnostics[n] if diagnostics else None)
        return traj


# nonlinear term ------------------------------------------------------------------

class SQGOperator:
    """Cached symbols for the transport term on one grid."""

    def __init__(self, grid: GridSpec):
        self.grid = grid
        sym = symbols(grid)
        a1, a2 = sym.velocity()
        d1 = sym.derivative(1, 0)
        d2 = sym.derivative(0, 1)
        self._vel = np.stack(np.broadcast_arrays(a1, a2))
        self._grad = np.stack(np.broadcast_arrays(d1, d2))
        self.mask = sym.mask
        self.lam = grid.eigenvalues()
        self._scale = grid.n1 * grid.m2

    def _physical(self, D):
        return sfft.ifft2(D, axes=(-2, -1)).real * self._scale

    def product_doubled(self, cf, cg):
        """(u_f . grad) g on the doubled grid, before dealiasing."""
        Df = odd_spectrum(cf)
        Dg = Df if cg is cf else odd_spectrum(cg)
        stacked = np.concatenate([self._vel * Df, self._grad * Dg])
        u1, u2, g1, g2 = self._physical(stacked)
        return u1 * g1 + u2 * g2

    def bilinear_doubled(self, cf, cg, dealias=True):
        P = sfft.fft2(self.product_doubled(cf, cg)) / self._scale
        if dealias:
            P *= self.mask
        return P

    def bilinear(self, cf, cg, dealias=True):
        return sine_coeffs_from_odd(self.bilinear_doubled(cf, cg, dealias))

    def nonlinear(self, c):
        return self.bilinear(c, c)

    def rhs(self, c):
        return -self.nonlinear(c)


_OPERATORS: dict[GridSpec, SQGOperator] = {}


def operator_for(grid: GridSpec) -> SQGOperator:
    op = _OPERATORS.get(grid)
    if op is None:
        op = _OPERATORS[grid] = SQGOperator(grid)
    return op


def nonlinear_term(theta: Field) -> Field:
    """N(theta) = (u . grad) theta, u = grad-perp Lambda_D^{-1} theta."""
    _check_finite(theta.values)
    op = operator_for(theta.grid)
    return Field(theta.grid, inverse_coeffs(op.nonlinear(forward_coeffs(theta.values))))


def nonlinear_term_extended(theta: Field, dealias: bool = True) -> ExtendedField:
    """N(theta) on the doubled grid; its x2-parity and trace are diagnostics."""
    _check_finite(theta.values)
    op = operator_for(theta.grid)
    c = forward_coeffs(theta.values)
    if not dealias:
        return ExtendedField(theta.grid, op.product_doubled(c, c))
    P = op.bilinear_doubled(c, c)
    return ExtendedField(theta.grid, sfft.ifft2(P).real * op._scale)


def bilinear_form(f: Field, g: Field, dealias: bool = True) -> Field:
    """B(f, g) = (grad-perp Lambda_D^{-1} f . grad) g."""
    if f.grid != g.grid:
        raise GridMismatchError("bilinear_form needs fields on one grid")
    op = operator_for(f.grid)
    c = op.bilinear(forward_coeffs(f.values), forward_coeffs(g.values), dealias)
    return Field(f.grid, inverse_coeffs(c))


# Duhamel quadrature --------------------------------------------------------------

def _interpolate(op, ca, cb, ta, tb, s):
    """State at s in [ta, tb]: linear interpolation in the integrating-factor frame."""
    if tb == ta:
        return ca
    w = (s - ta) / (tb - ta)
    lam = op.lam
    if_ok = (tb - ta) * lam <= _IF_INTERP_LIMIT
    ea = np.exp(-(s - ta) * lam)
    eb = np.exp(np.where(if_ok, (tb - s) * lam, 0.0))
    frame = (1 - w) * ea * ca + w * eb * cb
    plain = (1 - w) * ca + w * cb
    return np.where(if_ok, frame, plain)


def _segment_integral(op, ca, cb, ta, tb, s0, s1, t_eval, q, Na=None, Nb=None):
    """Trapezoid rule for int_{s0}^{s1} exp(-(t_eval - tau) Lambda) N(theta(tau)) dtau."""
    if s1 <= s0:
        return np.zeros_like(ca)
    taus = np.linspace(s0, s1, q)
    h = (s1 - s0) / (q - 1)
    total = np.zeros_like(ca)
    for r, tau in enumerate(taus):
        if r == 0 and Na is not None and s0 == ta:
            N = Na
        elif r == q - 1 and Nb is not None and s1 == tb:
            N = Nb
        else:
            N = op.nonlinear(_interpolate(op, ca, cb, ta, tb, tau))
        w = 0.5 * h if r in (0, q - 1) else h
        total += w * np.exp(-(t_eval - tau) * op.lam) * N
    return total


def _duhamel_nodes(op, times, states, q, N_nodes=None):
    """Integral term at every node time, shape like ``states``."""
    if N_nodes is None:
        N_nodes = [op.nonlinear(c) for c in states]
    out = np.zeros_like(states)
    for n in range(1, len(times)):
        ta, tb = times[n - 1], times[n]
        seg = _segment_integral(op, states[n - 1], states[n], ta, tb, ta, tb, tb, q,
                                N_nodes[n - 1], N_nodes[n])
        out[n] = np.exp(-(tb - ta) * op.lam) * out[n - 1] + seg
    return out


def _psi_nodes(op, c0, times, states, q):
    lin = np.exp(-np.asarray(times)[:, None, None] * op.lam) * c0
    return lin - _duhamel_nodes(op, times, states, q)


def mild_rhs(theta0: Field, traj: Trajectory, t: float, quadrature_nodes: int = 4) -> Field:
    """Psi(theta)(t) = exp(-t Lambda) theta0 - int_0^t exp(-(t-tau) Lambda) N(theta(tau)) dtau."""
    times = np.asarray(traj.times)
    if len(times) == 0 or times[0] > 1e-12:
        raise ValueError("trajectory must start at t = 0")
    if t < 0 or t > times[-1] * (1 + 1e-12):
        raise ValueError(f"t={t} lies outside the trajectory span [0, {times[-1]}]")
    op = operator_for(traj.grid)
    states = traj.coeffs()
    c0 = forward_coeffs(theta0.values)
    i = int(np.searchsorted(times, t, side="right") - 1)
    i = min(i, len(times) - 1)
    integral = _duhamel_nodes(op, times[: i + 1], states[: i + 1], quadrature_nodes)[i]
    integral = np.exp(-(t - times[i]) * op.lam) * integral
    if t > times[i]:
        integral = integral + _segment_integral(
            op, states[i], states[i + 1], times[i], times[i + 1], times[i], t, t,
            quadrature_nodes)
    c = np.exp(-t * op.lam) * c0 - integral
    return Field(traj.grid, inverse_coeffs(c))


# Picard iteration ------------------------------------------------------------------

class PicardResult(NamedTuple):
    trajectory: Trajectory
    iterations: int
    contraction_history: list
    converged: bool
    residual: float


def picard_metric(op, times, diff, P) -> float:
    """sup_t ||.||_{B^0_{inf,1}} + int_0^T ||.||_{B^1_{inf,1}} dt."""
    b0, b1 = b0_b1_norms(diff, op.grid, P)
    return float(b0.max() + np.trapezoid(b1, times))


def picard_solve(theta0: Field, T: float, cfg: SolverConfig) -> PicardResult:
    """Fixed-point iteration of the Duhamel map from the linear evolution.

    Node spacing is ``cfg.dt``; each interval uses ``cfg.quadrature_nodes``
    trapezoid nodes. Non-convergence is reported, not raised.
    """
    _check_finite(theta0.values)
    grid = cfg.grid_for(theta0.grid)
    op = operator_for(grid)
    P = partition_for_grid(grid)
    nt = max(1, int(round(T / cfg.dt)))
    times = np.linspace(0.0, T, nt + 1)
    c0 = forward_coeffs(theta0.values)

    size = besov_norm_coeffs(c0, BesovParams(0, math.inf, 1), grid, P)
    if size > SMALLNESS_THRESHOLD:
        warnings.warn(f"||theta0||_B0 = {size:.3g} exceeds the small-data threshold "
                      f"{SMALLNESS_THRESHOLD}", stacklevel=2)

    theta = np.exp(-times[:, None, None] * op.lam) * c0
    history = []
    prev = None
    converged = False
    it = 0
    for it in range(1, cfg.picard_max_iter + 1):
        new = _psi_nodes(op, c0, times, theta, cfg.quadrature_nodes)
        if not np.all(np.isfinite(new)):
            warnings.warn(f"Picard iteration {it} produced non-finite values", stacklevel=2)
            break
        d = picard_metric(op, times, new - theta, P)
        if prev:
            history.append(d / prev)
        theta, prev = new, d
        if d <= cfg.picard_tol:
            converged = True
            break
    else:
        warnings.warn(f"Picard iteration did not converge in {cfg.picard_max_iter} steps "
                      "(data likely outside the small-data regime)", stacklevel=2)

    resid_states = _psi_nodes(op, c0, times, theta, cfg.quadrature_nodes) - theta
    residual = float(np.max(b0_b1_norms(resid_states, grid, P)[0]))
    traj = Trajectory.from_coeffs(grid, times, theta)
    return PicardResult(traj, it, history, converged, residual)


# time stepping ----------------------------------------------------------------

def _phi_functions(z):
    """phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2, elementwise."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 0.1
    zs = np.where(small, 0.0, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        p1 = np.expm1(zs) / zs
        p2 = (np.expm1(zs) - zs) / zs**2
    # Taylor series for small |z|
    s1 = np.zeros_like(z)
    s2 = np.zeros_like(z)
    term = np.ones_like(z)
    for n in range(20):
        s1 += term / math.factorial(n + 1)
        s2 += term / math.factorial(n + 2)
        term = term * z
    return np.where(small, s1, p1), np.where(small, s2, p2)


class Stepper:
    def __init__(self, grid: GridSpec, dt: float, scheme: str):
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
        self.op = operator_for(grid)
        self.dt = dt
        self.scheme = scheme
        lam = self.op.lam
        self.E = np.exp(-dt * lam)
        self.E2 = np.exp(-0.5 * dt * lam)
        if scheme == "etd_rk2":
            self.phi1, self.phi2 = _phi_functions(-dt * lam)

    def step(self, c):
        F = self.op.rhs
        dt = self.dt
        if self.scheme == "integrating_factor_rk4":
            E, E2 = self.E, self.E2
            k1 = F(c)
            k2 = F(E2 * (c + 0.5 * dt * k1))
            k3 = F(E2 * c + 0.5 * dt * k2)
            k4 = F(E * c + dt * E2 * k3)
            return E * c + (dt / 6.0) * (E * k1 + 2.0 * E2 * (k2 + k3) + k4)
        Fc = F(c)
        a = self.E * c + dt * self.phi1 * Fc
        return a + dt * self.phi2 * (F(a) - Fc)


def step_evolve(theta: Field, dt: float, cfg: SolverConfig) -> Field:
    if not dt > 0:
        raise ValueError("dt must be positive")
    _check_finite(theta.values)
    grid = cfg.grid_for(theta.grid)
    c = Stepper(grid, dt, cfg.scheme).step(forward_coeffs(theta.values))
    return Field(grid, inverse_coeffs(c))


def snapshot_diagnostics(c, grid, P, cfg: SolverConfig, prev: dict | None = None) -> dict:
    from .analysis import holder_seminorm_values

    values = inverse_coeffs(c)
    b0, b1 = b0_b1_norms(c, grid, P)
    linf = float(np.max(np.abs(values)))
    diag = {
        "linf": linf,
        "l2": float(np.sqrt(np.sum(values**2) * grid.dx1 * grid.dx2)),
        "besov0_inf_1": float(b0),
        "besov1_inf_1": float(b1),
        "holder_a": holder_seminorm_values(values, grid, cfg.holder_a, cfg.holder_pairs),
    }
    diag["max_principle_ok"] = prev is None or linf <= prev["linf"] * (1 + 1e-6)
    return diag


def simulate(theta0: Field, cfg: SolverConfig, diagnostics: bool = True,
             monitor=None) -> Trajectory:
    """Integrate from t = 0 to cfg.t_end, storing every snapshot_stride-th state.

    ``monitor(step, t, coeffs)`` is called after every step when given.
    """
    _check_finite(theta0.values)
    grid = cfg.grid_for(theta0.grid)
    P = partition_for_grid(grid)
    nsteps = int(math.floor(cfg.t_end / cfg.dt + 1e-9))
    remainder = cfg.t_end - nsteps * cfg.dt
    stepper = Stepper(grid, cfg.dt, cfg.scheme)
    c = forward_coeffs(theta0.values)
    traj = Trajectory(grid)

    def record(t, c, values=None):
        prev = traj.diagnostics[-1] if traj.diagnostics else None
        diag = snapshot_diagnostics(c, grid, P, cfg, prev) if diagnostics else {}
        traj.append(t, Field(grid, inverse_coeffs(c) if values is None else values), diag)

    # the first snapshot is the initial data itself, not its transform round trip
    record(0.0, c, np.array(theta0.values))
    t = 0.0
    for n in range(1, nsteps + 1):
        # blow-up is reported through NumericalFailure below
        with np.errstate(over="ignore", invalid="ignore"):
            c = stepper.step(c)
        t = n * cfg.dt
        if not np.all(np.isfinite(c)):
            raise NumericalFailure(n, t)
        if monitor is not None:
            monitor(n, t, c)
        if n % cfg.snapshot_stride == 0 or (n == nsteps and remainder <= 1e-12 * cfg.dt):
            record(t, c)
    if remainder > 1e-12 * cfg.dt:
        with np.errstate(over="ignore", invalid="ignore"):
            c = Stepper(grid, remainder, cfg.scheme).step(c)
        if not np.all(np.isfinite(c)):
            raise NumericalFailure(nsteps + 1, cfg.t_end)
        record(cfg.t_end, c)
    return traj
