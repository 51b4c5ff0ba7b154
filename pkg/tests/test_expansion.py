from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from clusterkit.expansion import (
    CoefficientTable, ExpansionError, activity_series, build_table, c2_coefficient, dissymmetry_check,
    geometric_tail, h_coefficient, radial_anchors, series_eval, virial_beta,
)
from clusterkit.graphs import SizeLimitError
from clusterkit.integrals import McConfig
from clusterkit.potentials import PairPotential
from clusterkit.reference import tonks_g

HS = PairPotential.hard_sphere()
ROD = PairPotential.hard_rod()


def test_h_literal_lowest_order():
    e = h_coefficient(2, 0, radial_anchors(0.5, 2, 3), HS, normalization="literal")
    assert e.value == pytest.approx(-0.5) and e.exact


def test_h_order_one_vanishes_beyond_two_sigma():
    assert h_coefficient(2, 1, radial_anchors(2.5, 2, 3), HS).value == 0.0


@pytest.mark.parametrize("m,want", [(1, -2), (2, Fraction(-3, 2)), (3, Fraction(-4, 3))])
def test_hard_rod_virials_exact(m, want):
    assert virial_beta(m, ROD).rational == want


def test_hard_sphere_beta1():
    assert virial_beta(1, HS).value == pytest.approx(-4 * math.pi / 3)


def test_hard_sphere_beta2_mc():
    # B3 = 5 pi^2 / 18 and beta_2 = -(3/2) B3
    b2 = -5 * math.pi**2 / 12
    e = virial_beta(2, HS, McConfig(seed=4, n_samples=400_000), method="mc")
    assert abs(e.value - b2) < 4 * e.std_error


def test_tonks_hard_rod_h_coefficients():
    # hard-rod h(r) = sum_k rho^k h_k(r); compare against the exact Tonks solution at small rho
    radii = [0.0, 0.5, 1.0, 1.5, 2.5]
    table = build_table("h2", 3, ROD, radii=radii)
    rho = 0.02
    sv = series_eval(table, rho)
    # r = sigma is evaluated from outside, where the coefficients are continuous
    want = tonks_g(np.array(radii) + 1e-12, rho) - 1
    assert np.allclose(sv.value, want, atol=5 * rho**4)


def test_tonks_contact_with_tail():
    table = build_table("h2", 3, ROD, radii=[1.0])
    sv = series_eval(table, 0.1)
    exact = 0.1 / 0.9
    assert abs(sv.value - exact) < 2e-4
    assert sv.tail_reliable and abs(sv.value + sv.tail_estimate - exact) < 1e-6


def test_c2_first_orders_hard_rod():
    assert c2_coefficient(0, radial_anchors(0.3, 2, 1), ROD).rational == -1
    # c_1(r) for rods is the overlap length f*f*f restricted to the core, 2 - r
    assert c2_coefficient(1, radial_anchors(0.5, 2, 1), ROD).rational == Fraction(-3, 2)
    assert c2_coefficient(1, radial_anchors(1.5, 2, 1), ROD).rational == 0


def test_white_swap_symmetry():
    pts = radial_anchors(0.7, 2, 1)
    a = h_coefficient(2, 2, pts, ROD).rational
    b = h_coefficient(2, 2, pts[::-1].copy(), ROD).rational
    assert a == b


def test_activity_series_hard_rods():
    # Tonks: z = xi e^xi with xi = rho/(1 - rho); reverting gives rho/z = sum_j (-(j+1))^j z^j / j!
    want = [Fraction((-(j + 1)) ** j, math.factorial(j)) for j in range(4)]
    assert list(activity_series(4, ROD)) == want == [1, -2, Fraction(9, 2), Fraction(-32, 3)]


def test_dissymmetry_exact_1d():
    rep = dissymmetry_check(3, ROD)
    assert rep.exact and rep.passes and all(r == 0 for r in rep.residuals)


def test_dissymmetry_mc_3d():
    rep = dissymmetry_check(2, HS, McConfig(seed=9, n_samples=100_000))
    assert not rep.exact and rep.passes


def test_table_round_trips():
    t = build_table("h2", 2, ROD, radii=[0.25, 1.25])
    t2 = CoefficientTable.from_json(t.to_json())
    assert t2.to_json() == t.to_json()
    rows = t.to_csv().strip().splitlines()
    assert rows[0].startswith("k,r,value,std_error") and len(rows) == 1 + 3 * 2


def test_series_eval_flags():
    t = build_table("virial", 1, ROD)
    sv = series_eval(t, 0.1)
    assert not sv.tail_reliable and "too few" in sv.note
    with pytest.raises(ExpansionError):
        series_eval(t, -0.1)
    with pytest.raises(ExpansionError):
        series_eval(CoefficientTable("h2", 1), 0.1)


def test_geometric_tail_exact_for_geometric_input():
    a = [0.5**k for k in range(6)]
    tail, ok, _ = geometric_tail(a)
    assert ok and tail == pytest.approx(0.5**6 / 0.5)


def test_size_cap():
    with pytest.raises(SizeLimitError):
        h_coefficient(2, 12, radial_anchors(0.5, 2, 3), HS)


def test_normalization_rejected():
    with pytest.raises(ExpansionError):
        h_coefficient(2, 0, radial_anchors(0.5, 2, 3), HS, normalization="weird")
