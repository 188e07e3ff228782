import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from sqg_halfplane.grid import (
    ExtendedField,
    Field,
    GridMismatchError,
    GridSpec,
    Spectrum,
    eigenvalue,
    even_extend,
    forward_coeffs,
    forward_transform,
    inverse_coeffs,
    inverse_transform,
    odd_extend,
    restrict,
)

from oracles import direct_forward, direct_inverse, odd_extension_loop

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def rel(a, b):
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)


# GridSpec -------------------------------------------------------------------------

def test_sample_geometry(grid):
    assert np.allclose(grid.x1, np.arange(64) * 2 * np.pi / 64)
    assert np.allclose(grid.x2, np.arange(1, 64) * np.pi / 64)
    assert grid.m2 == 128
    xd = grid.x2_doubled
    assert xd.min() > -np.pi and math.isclose(xd.max(), np.pi)


@pytest.mark.parametrize("kw", [dict(n1=0), dict(n1=7), dict(n2=0), dict(L1=-1.0),
                                dict(L2=0.0), dict(dealias_fraction=0),
                                dict(dealias_fraction=1.5)])
def test_gridspec_rejects(kw):
    with pytest.raises(ValueError):
        GridSpec(**kw)


def test_eigenvalue_triples(grid):
    assert eigenvalue(grid, 0, 1) == pytest.approx(1.0, abs=1e-15)
    assert eigenvalue(grid, 1, 1) == pytest.approx(math.sqrt(2), abs=1e-15)
    assert eigenvalue(grid, 3, 4) == pytest.approx(5.0, abs=1e-14)
    with pytest.raises(ValueError):
        eigenvalue(grid, 0, 0)


def test_eigenvalue_table_positive_and_readonly(grid):
    lam = grid.eigenvalues()
    assert lam.min() >= grid.lambda_min - 1e-15
    assert lam[3, 3] == pytest.approx(5.0)
    with pytest.raises(ValueError):
        lam[0, 0] = 1.0


# fields ---------------------------------------------------------------------------

def test_field_shape_checked(grid):
    with pytest.raises(GridMismatchError):
        Field(grid, np.zeros((3, 3)))
    a = Field.zeros(grid)
    with pytest.raises(GridMismatchError):
        a + Field.zeros(GridSpec(8, 7))


def test_nan_rejected(grid):
    v = np.zeros((64, 63))
    v[1, 1] = np.nan
    with pytest.raises(ValueError):
        odd_extend(Field(grid, v))
    with pytest.raises(ValueError):
        forward_transform(Field(grid, v))


# extensions -----------------------------------------------------------------------

def test_odd_extend_zero(grid):
    assert np.all(odd_extend(Field.zeros(grid)).values == 0)


def test_odd_extend_sine_is_itself(grid):
    f = Field.from_function(grid, lambda x1, x2: np.sin(x2))
    e = odd_extend(f)
    expect = np.sin(grid.x2_doubled)[None, :] * np.ones((64, 1))
    assert np.max(np.abs(e.values - expect)) < 1e-15


def test_odd_extend_matches_loop(rng):
    g = GridSpec(4, 3)
    v = rng.standard_normal((4, 3))
    e = odd_extend(Field(g, v))
    assert np.array_equal(e.values, odd_extension_loop(v))
    assert e.parity_defect("odd") == 0.0
    assert e.boundary_trace() == 0.0


def test_even_extend_constant_and_cosine(grid):
    one = even_extend(Field(grid, np.ones((64, 63))))
    assert np.max(np.abs(one.values - 1)) < 1e-11
    c = even_extend(Field.from_function(grid, lambda x1, x2: np.cos(x2)))
    expect = np.cos(grid.x2_doubled)[None, :]
    assert np.max(np.abs(c.values - expect)) < 1e-11


def test_even_extend_mirror_loop(rng):
    g = GridSpec(4, 3)
    v = rng.standard_normal((4, 3))
    e = even_extend(Field(g, v)).values
    m2 = 8
    for i in range(4):
        for j in range(1, 4):
            assert e[i, j] == v[i, j - 1]
            assert e[i, m2 - j] == v[i, j - 1]
    assert even_extend(Field(g, v)).parity_defect("even") < 1e-12


def test_restrict_inverts_extension(grid, rng):
    v = rng.standard_normal((64, 63))
    f = Field(grid, v)
    assert np.array_equal(restrict(odd_extend(f)).values, v)
    assert np.all(restrict(ExtendedField(grid, np.zeros((64, 128)))).values == 0)
    s = Field.from_function(grid, lambda x1, x2: np.sin(x2))
    assert np.array_equal(restrict(odd_extend(s)).values, s.values)


# transforms -------------------------------------------------------------------------

@pytest.mark.parametrize("shape", [(8, 7), (16, 15), (64, 63), (6, 10)])
def test_forward_matches_direct_sum(shape, rng):
    g = GridSpec(*shape)
    v = rng.standard_normal(shape)
    assert rel(forward_coeffs(v), direct_forward(v, g.L1, g.L2)) < 1e-12


@pytest.mark.parametrize("shape", [(8, 7), (64, 63)])
def test_inverse_matches_direct_sum(shape, rng):
    g = GridSpec(*shape)
    c = forward_coeffs(rng.standard_normal(shape))   # a Hermitian spectrum
    assert rel(inverse_coeffs(c), direct_inverse(c, g.L1, g.L2)) < 1e-12


def test_zero_transforms(grid):
    assert np.all(forward_transform(Field.zeros(grid)).coeffs == 0)
    assert np.all(inverse_transform(Spectrum(grid, np.zeros((64, 63)))).values == 0)


def test_every_eigenfunction_is_a_delta():
    g = GridSpec(8, 7)
    X1, X2 = g.mesh()
    for k0 in range(0, 4):
        for m0 in range(1, 8):
            f = np.cos(2 * np.pi * k0 * X1 / g.L1) * np.sin(np.pi * m0 * X2 / g.L2)
            c = forward_coeffs(f)
            expect = np.zeros((8, 7), dtype=complex)
            if k0 == 0:
                expect[0, m0 - 1] = 1.0
            else:
                expect[k0, m0 - 1] = 0.5
                expect[-k0, m0 - 1] = 0.5
            assert np.max(np.abs(c - expect)) < 1e-12
            back = inverse_transform(Spectrum(g, expect)).values
            assert np.max(np.abs(back - f)) < 1e-12


def test_inverse_warns_on_non_hermitian(grid):
    c = np.zeros((64, 63), dtype=complex)
    c[1, 0] = 1.0
    with pytest.warns(UserWarning, match="Hermitian"):
        inverse_transform(Spectrum(grid, c))
    with pytest.warns(UserWarning, match="real"):
        inverse_transform(Spectrum(grid, c, reality=False))


def test_transform_rejects_other_grid(grid):
    with pytest.raises(GridMismatchError):
        Spectrum(grid, np.zeros((8, 7)))


@given(n1=st.integers(1, 32).map(lambda n: 2 * n), n2=st.integers(1, 63), seed=st.integers(0, 2**32 - 1))
def test_round_trip_property(n1, n2, seed):
    v = np.random.default_rng(seed).standard_normal((n1, n2))
    back = inverse_coeffs(forward_coeffs(v))
    assert np.max(np.abs(back - v)) <= 1e-12 * np.max(np.abs(v))


@given(a=finite, b=finite, seed=st.integers(0, 2**32 - 1))
def test_linearity_property(a, b, seed):
    rng = np.random.default_rng(seed)
    f, g = rng.standard_normal((2, 16, 15))
    lhs = forward_coeffs(a * f + b * g)
    rhs = a * forward_coeffs(f) + b * forward_coeffs(g)
    scale = max(1.0, abs(a) + abs(b))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


@given(v=arrays(float, (8, 7), elements=finite))
def test_parity_closure_property(v):
    g = GridSpec(8, 7)
    f = Field(g, v)
    assert np.array_equal(forward_coeffs(restrict(odd_extend(f)).values), forward_coeffs(v))


def test_spectrum_is_hermitian_for_real_fields(grid, rng):
    s = forward_transform(Field(grid, rng.standard_normal((64, 63))))
    assert s.hermitian_defect() < 1e-15
