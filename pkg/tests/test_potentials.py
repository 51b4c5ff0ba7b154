from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clusterkit.potentials import (
    PairPotential, PotentialError, ball_volume, c_beta, c_beta_analytic, c_beta_quadrature, mayer_f,
)

HS = PairPotential.hard_sphere()
SW = PairPotential.square_well(sigma=1.0, epsilon=0.7, lambda_range=1.5, beta=1.3)


def test_mayer_examples():
    assert mayer_f(HS, 0.5) == -1.0
    assert mayer_f(HS, 1.5) == 0.0
    assert mayer_f(SW, 1.2) == pytest.approx(math.expm1(1.3 * 0.7))
    assert mayer_f(SW, 1.6) == 0.0


@given(st.floats(0, 10), st.floats(0.1, 3), st.floats(0, 2), st.floats(1.01, 3))
def test_mayer_bounds(r, beta, eps, lam):
    p = PairPotential.square_well(1.0, eps, lam, beta)
    v = mayer_f(p, r)
    assert -1.0 <= v <= math.expm1(beta * eps) + 1e-12
    if r < 1.0:
        assert v == -1.0


def test_symmetry():
    r = np.linspace(0, 3, 31)
    assert np.array_equal(mayer_f(SW, r), mayer_f(SW, -r))


def test_c_beta_examples():
    assert c_beta(HS) == pytest.approx(4 / 3 * math.pi)
    assert c_beta(PairPotential.hard_rod(sigma=1.7)) == pytest.approx(3.4)
    want = 4 / 3 * math.pi + math.expm1(1.3 * 0.7) * 4 / 3 * math.pi * (1.5**3 - 1)
    assert c_beta(SW) == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("p", [HS, SW, PairPotential.hard_rod(0.8), PairPotential.square_well(d=1)])
def test_quadrature_agrees_with_analytic(p):
    assert c_beta_quadrature(p) == pytest.approx(c_beta_analytic(p), rel=1e-9)


def test_tabulated(tmp_path):
    r = np.linspace(0, 2, 41)
    v = 2.0 * (2 - r) ** 2
    f = tmp_path / "pot.csv"
    f.write_text("r,V\n" + "\n".join(f"{a},{b}" for a, b in zip(r, v)))
    p = PairPotential.from_table_csv(f)
    assert p.range == 2.0 and mayer_f(p, 2.5) == 0.0
    assert mayer_f(p, 1.0) == pytest.approx(math.expm1(-2.0))
    assert c_beta(p) > 0


@pytest.mark.parametrize("kw", [
    dict(kind="hard_sphere", d=1), dict(kind="hard_rod", d=3), dict(kind="hard_sphere", stability_B=1.0),
])
def test_invalid(kw):
    from clusterkit.potentials import Kind

    kind = Kind(kw.pop("kind"))
    with pytest.raises(PotentialError):
        PairPotential(kind, **kw)


def test_invalid_square_well():
    with pytest.raises(PotentialError):
        PairPotential.square_well(lambda_range=0.9)
    with pytest.raises(PotentialError):
        PairPotential.square_well(epsilon=-1)


def test_ball_volume():
    assert ball_volume(2.0, 1) == pytest.approx(4.0)
    assert ball_volume(1.0, 3) == pytest.approx(4 * math.pi / 3)
