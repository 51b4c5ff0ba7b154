"""Truncated formal power series over exact rationals or floats."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class SeriesError(ValueError):
    pass


def _zero_like(x):
    return Fraction(0) if isinstance(x, (Fraction, int)) else 0.0


@dataclass(frozen=True)
class FormalSeries:
    """Coefficients ``c_0 .. c_K`` of a power series in ``var``, truncated at order ``K``."""

    coefficients: tuple
    var: str = "z"

    def __init__(self, coefficients: Sequence, var: str = "z"):
        coeffs = tuple(Fraction(c) if isinstance(c, int) else c for c in coefficients)
        if not coeffs:
            raise SeriesError("a series needs at least the constant term")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "var", var)

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, k: int):
        return self.coefficients[k]

    def __len__(self) -> int:
        return len(self.coefficients)

    def __iter__(self):
        return iter(self.coefficients)

    def truncate(self, order: int) -> FormalSeries:
        c = list(self.coefficients[: order + 1])
        c += [_zero_like(self.coefficients[0])] * (order + 1 - len(c))
        return FormalSeries(c, self.var)

    def _align(self, other) -> tuple[FormalSeries, FormalSeries]:
        if not isinstance(other, FormalSeries):
            other = FormalSeries([other], self.var)
            return self, other.truncate(self.order)
        if other.var != self.var:
            raise SeriesError(f"series in {self.var!r} and {other.var!r} do not mix")
        k = min(self.order, other.order)
        return self.truncate(k), other.truncate(k)

    def __add__(self, other) -> FormalSeries:
        a, b = self._align(other)
        return FormalSeries([x + y for x, y in zip(a, b)], self.var)

    __radd__ = __add__

    def __neg__(self) -> FormalSeries:
        return FormalSeries([-x for x in self], self.var)

    def __sub__(self, other) -> FormalSeries:
        return self + (-other if isinstance(other, FormalSeries) else -other)

    def __rsub__(self, other) -> FormalSeries:
        return (-self) + other

    def __mul__(self, other) -> FormalSeries:
        if not isinstance(other, FormalSeries):
            return FormalSeries([x * other for x in self], self.var)
        a, b = self._align(other)
        k = a.order
        out = []
        for n in range(k + 1):
            s = _zero_like(a[0] * b[0])
            for i in range(n + 1):
                s += a[i] * b[n - i]
            out.append(s)
        return FormalSeries(out, self.var)

    __rmul__ = __mul__

    def __pow__(self, m: int) -> FormalSeries:
        if m < 0:
            return self.reciprocal() ** (-m)
        out = FormalSeries([Fraction(1) if isinstance(self[0], Fraction) else 1.0], self.var).truncate(self.order)
        base = self
        while m:
            if m & 1:
                out = out * base
            base = base * base
            m >>= 1
        return out

    def reciprocal(self) -> FormalSeries:
        """Multiplicative inverse; needs a nonzero constant term."""
        if self[0] == 0:
            raise SeriesError("reciprocal needs a nonzero constant term")
        inv = [1 / self[0] if not isinstance(self[0], Fraction) else Fraction(1) / self[0]]
        for n in range(1, self.order + 1):
            s = sum((self[i] * inv[n - i] for i in range(1, n + 1)), _zero_like(self[0]))
            inv.append(-s * inv[0])
        return FormalSeries(inv, self.var)

    def derivative(self) -> FormalSeries:
        c = [k * self[k] for k in range(1, self.order + 1)] or [_zero_like(self[0])]
        return FormalSeries(c, self.var)

    def integral(self, constant=0) -> FormalSeries:
        exact = isinstance(self[0], Fraction)
        c = [Fraction(constant) if exact else float(constant)]
        for k in range(self.order + 1):
            c.append(self[k] / (Fraction(k + 1) if exact else k + 1))
        return FormalSeries(c, self.var)

    def log(self) -> FormalSeries:
        """Logarithm of a series with constant term 1."""
        if self[0] != 1:
            raise SeriesError("log needs constant term 1")
        if self.order == 0:
            return FormalSeries([_zero_like(self[0])], self.var)
        return (self.derivative() * self.reciprocal()).integral(0)

    def exp(self) -> FormalSeries:
        """Exponential of a series with zero constant term."""
        if self[0] != 0:
            raise SeriesError("exp needs zero constant term")
        exact = isinstance(self[0], Fraction)
        one = Fraction(1) if exact else 1.0
        out = [one]
        # E' = S' E  =>  n E_n = sum_{i=1}^n i S_i E_{n-i}
        for n in range(1, self.order + 1):
            s = sum((i * self[i] * out[n - i] for i in range(1, n + 1)), _zero_like(self[0]))
            out.append(s / (Fraction(n) if exact else n))
        return FormalSeries(out, self.var)

    def compose(self, inner: FormalSeries) -> FormalSeries:
        """``self(inner(x))``; the inner series must have zero constant term."""
        if inner[0] != 0:
            raise SeriesError("composition needs an inner series with zero constant term")
        k = min(self.order, inner.order)
        inner = inner.truncate(k)
        zero = _zero_like(self[0])
        out = FormalSeries([zero] * (k + 1), inner.var)
        for c in reversed(self.coefficients[: k + 1]):
            out = out * inner
            out = FormalSeries([out[0] + c, *out.coefficients[1:]], inner.var)
        return out

    def reversion(self) -> FormalSeries:
        """Compositional inverse of ``a_1 x + a_2 x^2 + ...`` with ``a_1 != 0``."""
        if self[0] != 0 or self.order < 1 or self[1] == 0:
            raise SeriesError("reversion needs zero constant term and nonzero linear term")
        exact = isinstance(self[1], Fraction)
        zero = _zero_like(self[1])
        one = Fraction(1) if exact else 1.0
        k = self.order
        inv = [zero, one / self[1]]
        for n in range(2, k + 1):
            trial = FormalSeries(inv + [zero], self.var)
            comp = self.compose(trial)
            inv.append(-comp[n] / self[1])
        return FormalSeries(inv, self.var)

    def __call__(self, x):
        total = _zero_like(self[0]) if not isinstance(x, float) else 0.0
        for c in reversed(self.coefficients):
            total = total * x + c
        return total

    def almost_equal(self, other: FormalSeries, tol: float = 0.0) -> bool:
        a, b = self._align(other)
        return all(abs(x - y) <= tol for x, y in zip(a, b))

    def __repr__(self) -> str:
        terms = ", ".join(str(c) for c in self.coefficients)
        return f"FormalSeries([{terms}], var={self.var!r})"


def exact_or_float(values: Sequence) -> list:
    """Keep rationals when every value is rational."""
    if all(isinstance(v, (Fraction, int)) for v in values):
        return [Fraction(v) for v in values]
    return [float(v) for v in values]


def factorial(n: int) -> int:
    return math.factorial(n)
