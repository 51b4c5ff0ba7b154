from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clusterkit.integrals import McConfig
from clusterkit.potentials import NumericalError
from clusterkit.oz import (
    DivergenceError, GridError, NormalizationMismatch, OzGrid, RadialFunction, ball_overlap, census_identity,
    forward, inverse, jump_at, oz_order_check, oz_residual, oz_solve_h, radial_convolve,
)
from clusterkit.potentials import PairPotential

HS = PairPotential.hard_sphere()


def ball(dr=0.01, n=800, d=3, R=1.0):
    return RadialFunction.from_callable(lambda r: 1.0 * (r < R), dr, n, d, [R])


@pytest.mark.parametrize("d", [1, 3])
def test_transform_round_trip(d):
    a = RadialFunction.from_callable(lambda r: np.exp(-r**2) * np.cos(3 * r), 0.01, 1000, d)
    b = inverse(forward(a), a.n_points)
    assert np.max(np.abs(a.values - b.values)) < 1e-10


def test_gaussian_transform_3d():
    a = RadialFunction.from_callable(lambda r: np.exp(-r**2), 0.01, 1200, 3)
    s = forward(a)
    want = math.pi**1.5 * np.exp(-s.kappa**2 / 4)
    assert np.max(np.abs(s.values - want)) < 1e-8


def test_convolution_trivial_cases():
    a = ball()
    z = RadialFunction.zeros(a.dr, a.n_points)
    assert radial_convolve(a, z).sup() == 0
    assert radial_convolve(a, a, rho=0).sup() == 0


@pytest.mark.parametrize("d", [1, 3])
def test_ball_self_convolution(d):
    a = ball(d=d)
    conv = radial_convolve(a, a, jumps=[1.0])
    r = a.r
    want = ball_overlap(r, 1.0, 1.0, d)
    assert conv.values[0] == pytest.approx(4 * math.pi / 3 if d == 3 else 2.0, abs=1e-6)
    assert np.max(np.abs(conv.values - want)) < 1e-6


def test_jump_correction_matters():
    a = ball()
    raw = radial_convolve(a, a)
    fixed = radial_convolve(a, a, jumps=[1.0])
    exact = 4 * math.pi / 3
    assert abs(fixed.values[0] - exact) < abs(raw.values[0] - exact)


def test_jump_estimate():
    assert jump_at(ball(), 1.0) == pytest.approx(1.0)
    smooth = RadialFunction.from_callable(lambda r: r**2, 0.01, 100, 3)
    assert abs(jump_at(smooth, 0.5)) < 1e-12


def test_oz_solve_zero_cases():
    c = RadialFunction.from_callable(lambda r: -1.0 * (r < 1), 0.01, 800, 3, [1.0])
    assert np.array_equal(oz_solve_h(c, 0.0).values, c.values)
    z = RadialFunction.zeros(0.01, 800)
    assert oz_solve_h(z, 0.5).sup() == 0


def test_oz_residual_small():
    c = RadialFunction.from_callable(lambda r: -np.exp(-r**2), 0.01, 1500, 3)
    h, rep = oz_solve_h(c, 0.3, report=True)
    assert rep.residual_sup < 1e-8
    assert oz_residual(h, c, 0.3).sup() < 1e-8


def test_oz_with_jumps_residual():
    c = RadialFunction.from_callable(lambda r: -2.0 * (r < 1), 0.01, 1000, 3, [1.0])
    h, rep = oz_solve_h(c, 0.3, jumps=[1.0], report=True)
    assert rep.residual_sup < 1e-8


@settings(max_examples=15)
@given(st.floats(0.01, 0.4), st.floats(0.5, 2.0))
def test_oz_residual_property(rho, width):
    c = RadialFunction.from_callable(lambda r: -np.exp(-(r / width) ** 2), 0.02, 800, 3)
    h = oz_solve_h(c, rho)
    assert oz_residual(h, c, rho).sup() < 1e-8


def test_divergence():
    c = RadialFunction.from_callable(lambda r: 5.0 * np.exp(-r**2), 0.01, 800, 3)
    with pytest.raises(DivergenceError) as err:
        oz_solve_h(c, 1.0)
    assert isinstance(err.value, NumericalError)


def test_grid_validation():
    with pytest.raises(GridError):
        RadialFunction(0.01, np.zeros(4))
    with pytest.raises(GridError):
        RadialFunction(0.01, np.full(10, np.nan))
    with pytest.raises(GridError):
        RadialFunction(0.01, np.zeros(10), d=2)
    with pytest.raises(GridError):
        RadialFunction(0.01, np.zeros(10)) + RadialFunction(0.02, np.zeros(10))


def test_csv_round_trip():
    a = ball(n=20)
    text = a.to_csv("f", manifest_hash="abc")
    assert text.startswith("# manifest abc")
    b = RadialFunction.from_csv(text)
    assert np.array_equal(a.values, b.values) and b.dr == pytest.approx(a.dr)


def test_census_identity_values():
    assert census_identity(0) == (1, 1)
    assert census_identity(1) == (2, 2)
    for k in (2, 3):
        lhs, rhs = census_identity(k, with_labels=True)
        assert lhs == rhs
    assert census_identity(2) == (16, 13)


def test_order_zero_check():
    chk = oz_order_check(0, [0.0, 0.5, 1.5], HS)
    assert chk.passes and np.all(chk.residuals == 0)


def test_order_one_check():
    chk = oz_order_check(1, [0.0, 0.48, 1.28, 2.52], HS, McConfig(seed=3, n_samples=100_000), method="mc",
                         grid=OzGrid(dr=0.02, r_max=6.0))
    assert chk.passes, chk.to_dict()


def test_order_one_hard_rod_exact():
    rod = PairPotential.hard_rod()
    chk = oz_order_check(1, [0.0, 0.5, 1.5], rod, grid=OzGrid(dr=0.01, r_max=6.0))
    assert chk.passes and np.all(chk.mc_errors == 0)


def test_normalization_mismatch():
    with pytest.raises(NormalizationMismatch):
        oz_order_check(1, [0.5], HS, normalization="literal")
