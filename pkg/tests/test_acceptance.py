"""Acceptance gate: one test per criterion, each printing a pass/fail line.

The lines are collected and repeated in the terminal summary by conftest.
"""
import math

import numpy as np
import pytest

from sqg_halfplane import cli, fieldio
from sqg_halfplane.analysis import (
    analyticity_diagnostic,
    bilinear_ratio,
    holder_seminorm,
    time_derivative,
    verify_bilinear,
    verify_smoothing,
)
from sqg_halfplane.calculus import frac_lambda, partition_for_grid
from sqg_halfplane.grid import Field, GridSpec, forward_coeffs, inverse_coeffs
from sqg_halfplane.presets import preset
from sqg_halfplane.solver import (
    SolverConfig,
    Trajectory,
    nonlinear_term,
    nonlinear_term_extended,
    picard_solve,
    simulate,
)

from oracles import direct_forward, smooth_partition_weight

RESULTS = []

# frozen on first calibration: max over seeds 0..199 (pairs 2i, 2i+1), random_band j in [0, 4]
BILINEAR_REGRESSION = 0.22534688366872357
RADIUS_SLOPE_LIMIT = -0.4


def record(n, name, ok, detail):
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def wall_row(c, grid, x2):
    """Sine-series interpolant of the coefficients c on the row x2."""
    m = np.arange(1, grid.n2 + 1)
    return np.fft.ifft(c @ np.sin(np.pi * m * x2 / grid.L2)).real * grid.n1


def rel(a, b):
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


@pytest.fixture(scope="module")
def grid():
    return GridSpec()


@pytest.fixture(scope="module")
def P(grid):
    return partition_for_grid(grid)


@pytest.fixture(scope="module")
def small_run(grid):
    cfg = SolverConfig(dt=1e-3, t_end=1.0, snapshot_stride=10)
    return simulate(preset("two_mode", grid, amplitude=1e-2), cfg)


@pytest.fixture(scope="module")
def mp_run(grid):
    theta0 = preset("two_mode", grid, amplitude=0.5)
    sups = [theta0.sup()]
    cfg = SolverConfig(dt=1e-3, t_end=2.0, snapshot_stride=50)
    traj = simulate(theta0, cfg, diagnostics=False,
                    monitor=lambda n, t, c: sups.append(float(np.abs(inverse_coeffs(c)).max())))
    return traj, np.array(sups)


def test_01_transform_fidelity():
    rng = np.random.default_rng(1)
    worst_rt = worst_direct = worst_delta = 0.0
    for shape in [(8, 7), (16, 15), (32, 31), (64, 63), (6, 10)]:
        g = GridSpec(*shape)
        v = rng.standard_normal(shape)
        c = forward_coeffs(v)
        worst_rt = max(worst_rt, rel(inverse_coeffs(c), v))
        worst_direct = max(worst_direct, rel(c, direct_forward(v, g.L1, g.L2)))
    g = GridSpec()
    X1, X2 = g.mesh()
    for k0, m0 in [(0, 1), (1, 1), (3, 4), (10, 30)]:
        c = forward_coeffs(np.cos(k0 * X1) * np.sin(m0 * X2))
        expect = np.zeros_like(c)
        if k0 == 0:
            expect[0, m0 - 1] = 1.0
        else:
            expect[k0, m0 - 1] = expect[-k0, m0 - 1] = 0.5
        worst_delta = max(worst_delta, float(np.max(np.abs(c - expect))))
    ok = max(worst_rt, worst_direct, worst_delta) <= 1e-12
    record(1, "transform fidelity", ok,
           f"round trip {worst_rt:.1e}, direct sum {worst_direct:.1e}, delta {worst_delta:.1e}")


def test_02_partition_of_unity(P):
    lo, hi = P.band
    lam = np.geomspace(lo, hi, 1000)
    total = P.total(lam)
    dev = float(np.max(np.abs(total - 1)))
    # independent oracle for the individual weights
    w = np.array([smooth_partition_weight(x, 0.0, P.indices) for x in lam[::50]])
    record(2, "partition of unity", dev <= 1e-12 and np.allclose(w, 1, atol=1e-12),
           f"max |sum - 1| = {dev:.1e} on [{lo:g}, {hi:g}]")


def test_03_exact_single_mode(grid):
    X1, X2 = grid.mesh()
    worst_n = []

    def monitor(n, t, c):
        if n % 50 == 0:
            th = Field(grid, inverse_coeffs(c))
            worst_n.append(nonlinear_term(th).sup() / th.sup())

    traj = simulate(Field(grid, np.sin(X2)), SolverConfig(dt=1e-3, t_end=1.0, snapshot_stride=1000),
                    diagnostics=False, monitor=monitor)
    err = float(np.max(np.abs(traj.states[-1].values - math.exp(-1) * np.sin(X2))))
    n_rel = max(worst_n)
    record(3, "exact single-mode solution", err <= 1e-10 and n_rel <= 1e-12,
           f"|theta(1) - e^-1 sin x2| = {err:.1e}, max |N|/|theta| = {n_rel:.1e}")


def test_04_maximum_principle(mp_run):
    _, sups = mp_run
    growth = float(np.max(sups[1:] / sups[:-1] - 1))
    record(4, "maximum principle", growth <= 1e-6,
           f"{len(sups) - 1} steps, max relative step growth {growth:.1e}, "
           f"sup {sups[0]:.3f} -> {sups[-1]:.3f}")


def test_05_boundary_parity(mp_run, grid):
    traj, _ = mp_run
    th_trace = n_trace = n_parity = 0.0
    for f in traj.states:
        sup = f.sup()
        c = forward_coeffs(f.values)
        walls = [np.abs(wall_row(c, grid, x2)).max() for x2 in (0.0, grid.L2)]
        th_trace = max(th_trace, float(max(walls)) / sup)
        e = nonlinear_term_extended(f)
        scale = sup**2
        n_trace = max(n_trace, e.boundary_trace() / scale)
        n_parity = max(n_parity, e.parity_defect("odd") / scale)
    ok = th_trace <= 1e-8 and n_trace <= 1e-8 and n_parity <= 1e-8
    record(5, "boundary and parity preservation", ok,
           f"theta trace {th_trace:.1e}, N trace {n_trace:.1e}, N parity {n_parity:.1e}")


def test_06_smoothing():
    # the default grid resolves only ~7 octaves, too few for the t^-1 regime over
    # two decades of t; the anisotropic strip resolves 13
    g = GridSpec(8, 8191)
    Pg = partition_for_grid(g)
    f = preset("random_band", g, j_lo=0, j_hi=12, seed=0)
    times = np.geomspace(1e-3, 1e-1, 21)
    r = verify_smoothing(Pg, 1.0, f, times)
    slope = r.fitted_exponent
    gd = GridSpec()
    Pd = partition_for_grid(gd)
    eig = verify_smoothing(Pd, 1.0, preset("single_mode", gd, k=3, m=4), np.geomspace(1e-3, 3, 40))
    bound = (1 / math.e) * 2
    ok = abs(slope + 1) <= 0.1 and eig.worst_ratio <= bound
    record(6, "smoothing estimate", ok,
           f"slope {slope:.3f} on 8x8191, eigenfunction ratio {eig.worst_ratio:.3f} <= {bound:.3f}")


def test_07_bilinear(grid, P):
    ratios = [bilinear_ratio(P, preset("random_band", grid, j_lo=0, j_hi=4, seed=2 * i),
                             preset("random_band", grid, j_lo=0, j_hi=4, seed=2 * i + 1))
              for i in range(100)]
    worst = max(ratios)
    f = preset("single_mode", grid, k=3, m=4)
    zero = verify_bilinear(P, f, f, 0.0).worst_ratio
    ok = worst <= 1.05 * BILINEAR_REGRESSION and zero <= 1e-12
    record(7, "bilinear estimate", ok,
           f"max ratio {worst:.4f} (frozen {BILINEAR_REGRESSION:.4f}), self pair {zero:.1e}")


def test_08_picard(grid):
    theta0 = preset("two_mode", grid, amplitude=1e-2)
    res = picard_solve(theta0, 0.5, SolverConfig(dt=1e-2, t_end=0.5))
    ref = simulate(theta0, SolverConfig(dt=1e-4, t_end=0.5, snapshot_stride=10**6),
                   diagnostics=False).states[-1]
    diff = float(np.max(np.abs(res.trajectory.states[-1].values - ref.values)))
    ratios = res.contraction_history
    ok = (res.converged and all(q <= 0.5 for q in ratios) and res.residual <= 1e-6
          and diff <= 1e-5)
    record(8, "Picard contraction", ok,
           f"{res.iterations} iterations, max ratio {max(ratios, default=0):.1e}, "
           f"residual {res.residual:.1e}, vs time stepping {diff:.1e}")


def test_09_analyticity(small_run, grid):
    r = analyticity_diagnostic(small_run, 0.5, 8)
    C = r.estimated_C
    ok_bound = True
    for b1 in range(9):
        for b2 in range(9 - b1):
            ok_bound &= bool(r.space_table[b1, b2] <= C ** (b1 + b2) * (1 + 1e-12))
    X1, X2 = grid.mesh()
    exact = Trajectory(grid)
    for t in (0.0, 1.0):
        exact.append(t, Field(grid, math.exp(-t) * np.sin(X2)))
    c_exact = analyticity_diagnostic(exact, 1.0, 8).estimated_C
    ok = ok_bound and math.isfinite(C) and c_exact <= 1 and r.radius_fit <= RADIUS_SLOPE_LIMIT
    record(9, "analyticity diagnostic", ok,
           f"C = {C:.3f} (bound holds: {ok_bound}), exact C(1) = {c_exact:.3f}, "
           f"decay slope {r.radius_fit:.2f} <= {RADIUS_SLOPE_LIMIT}")


def test_10_time_derivatives(grid):
    theta = preset("two_mode", grid, amplitude=1.0)
    res = time_derivative(theta, 1) + frac_lambda(theta, 1.0) + nonlinear_term(theta)
    scale = theta.sup() * (1 + theta.sup()) * 10
    ident = res.sup() / scale

    dt = 0.005 / 8
    traj = simulate(theta, SolverConfig(dt=dt, t_end=0.54, snapshot_stride=8), diagnostics=False)
    exact = time_derivative(traj.at(0.5), 2).values
    errs = []
    for h in (0.04, 0.02, 0.01, 0.005):
        fd = (traj.at(0.5 + h).values - 2 * traj.at(0.5).values + traj.at(0.5 - h).values) / h**2
        errs.append(float(np.max(np.abs(fd - exact))))
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    ok = ident <= 1e-12 and bool(np.all(np.abs(orders - 2) <= 0.4))
    record(10, "time-derivative recursion", ok,
           f"identity {ident:.1e}, FD orders {np.round(orders, 3).tolist()}")


def test_11_integrator_orders(grid):
    theta = preset("two_mode", grid, amplitude=10.0)

    def run(dt, scheme):
        cfg = SolverConfig(dt=dt, t_end=0.5, scheme=scheme, snapshot_stride=10**6)
        return simulate(theta, cfg, diagnostics=False).states[-1].values

    ref = run(2.5e-4, "integrating_factor_rk4")
    found = {}
    for scheme, order in (("etd_rk2", 2), ("integrating_factor_rk4", 4)):
        e = [np.max(np.abs(run(dt, scheme) - ref)) for dt in (4e-3, 2e-3, 1e-3)]
        p = np.log2(np.array(e[:-1]) / e[1:])
        found[scheme] = (p, bool(np.all(np.abs(p - order) <= 0.2 * order)))
    ok = all(v[1] for v in found.values())
    record(11, "integrator orders", ok,
           "; ".join(f"{k} {np.round(v[0], 2).tolist()}" for k, v in found.items()))


def test_12_holder_monitor(small_run):
    times = np.array(small_run.times)
    vals = np.array([holder_seminorm(f, 0.25, 2048) for f in small_run.states])
    i0 = int(np.argmin(np.abs(times - 0.1)))
    ratio = float(np.max(vals[i0:] / vals[i0]))
    record(12, "Hoelder monitor", ratio <= 1 + 1e-3,
           f"max [theta(t)]_0.25 / [theta(0.1)]_0.25 over t in [0.1, 1] = {ratio:.6f}")


def test_13_determinism(tmp_path, grid):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("init.preset = random_band\ninit.j_lo = 1\ninit.j_hi = 4\nseed = 7\n"
                   "solver.dt = 1e-3\nsolver.t_end = 0.05\nsolver.snapshot_stride = 25\n")
    outs = []
    for name in ("a", "b"):
        code = cli.run(cfg, [f"output.dir={tmp_path / name}"], "simulate")
        assert code == 0
        outs.append({p.name: p.read_bytes() for p in sorted((tmp_path / name).iterdir())})
    same = outs[0] == outs[1] and len(outs[0]) >= 3
    v = np.random.default_rng(3).standard_normal((64, 63))
    back, t = fieldio.decode_field(fieldio.encode_field(Field(grid, v), 0.125))
    exact = back.values.tobytes() == v.tobytes() and t == 0.125
    record(13, "determinism and I/O", same and exact,
           f"{len(outs[0])} files byte-identical: {same}, FieldFile round trip bit-exact: {exact}")
