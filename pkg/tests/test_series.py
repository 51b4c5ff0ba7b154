from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from clusterkit.series import FormalSeries, SeriesError

fracs = st.fractions(min_value=-5, max_value=5, max_denominator=12)


def test_log_of_tonks_activity():
    s = FormalSeries([1, -2, Fraction(9, 2)])
    assert list(s.log()) == [0, -2, Fraction(5, 2)]


def test_exp_log_round_trip():
    s = FormalSeries([0, 1, 0, 0, 0])
    e = s.exp()
    assert list(e) == [1, 1, Fraction(1, 2), Fraction(1, 6), Fraction(1, 24)]
    assert list(e.log()) == list(s)


@given(st.lists(fracs, min_size=2, max_size=6), fracs.filter(lambda x: x != 0))
def test_reversion_is_compositional_inverse(tail, a1):
    s = FormalSeries([0, a1, *tail])
    inv = s.reversion()
    ident = s.compose(inv)
    assert list(ident) == [0, 1] + [0] * (s.order - 1)
    assert list(inv.compose(s)) == list(ident)


@given(st.lists(fracs, min_size=1, max_size=6).filter(lambda c: c[0] != 0))
def test_reciprocal(c):
    s = FormalSeries(c)
    assert list(s * s.reciprocal()) == [1] + [0] * s.order


@given(st.lists(fracs, min_size=1, max_size=5), st.lists(fracs, min_size=1, max_size=5))
def test_product_commutes(a, b):
    assert list(FormalSeries(a) * FormalSeries(b)) == list(FormalSeries(b) * FormalSeries(a))


def test_errors():
    with pytest.raises(SeriesError):
        FormalSeries([1, 2]).compose(FormalSeries([1, 1]))
    with pytest.raises(SeriesError):
        FormalSeries([2, 1]).log()
    with pytest.raises(SeriesError):
        FormalSeries([0, 0, 1]).reversion()
    with pytest.raises(SeriesError):
        FormalSeries([1]) + FormalSeries([1], var="rho")


def test_float_mode():
    s = FormalSeries([1.0, -2.0, 4.5])
    assert s.log().almost_equal(FormalSeries([0.0, -2.0, 2.5]), 1e-15)
    assert s(0.1) == pytest.approx(1 - 0.2 + 0.045)
