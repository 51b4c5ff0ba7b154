"""Pair potentials and their Mayer bonds."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy import integrate


class PotentialError(ValueError):
    pass


class NumericalError(ArithmeticError):
    pass


class Kind(enum.Enum):
    HARD_ROD = "hard_rod"
    HARD_SPHERE = "hard_sphere"
    SQUARE_WELL = "square_well"
    TABULATED = "tabulated"


def ball_volume(radius: float, d: int) -> float:
    """Volume of the d-ball of the given radius."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * radius**d


@dataclass(frozen=True)
class PairPotential:
    kind: Kind
    d: int = 3
    sigma: float = 1.0
    epsilon: float = 0.0
    lambda_range: float = 1.5
    beta: float = 1.0
    stability_B: float = 0.0
    table_r: tuple[float, ...] = field(default=(), repr=False)
    table_v: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.d not in (1, 3):
            raise PotentialError("only d = 1 and d = 3 are supported")
        if self.sigma <= 0 or self.beta <= 0:
            raise PotentialError("sigma and beta must be positive")
        if self.stability_B < 0:
            raise PotentialError("stability_B must be non-negative")
        if self.kind in (Kind.HARD_ROD, Kind.HARD_SPHERE):
            if self.stability_B != 0:
                raise PotentialError("purely repulsive potentials have stability_B = 0")
            if self.kind is Kind.HARD_ROD and self.d != 1:
                raise PotentialError("hard rods live in d = 1")
            if self.kind is Kind.HARD_SPHERE and self.d != 3:
                raise PotentialError("hard spheres live in d = 3")
        if self.kind is Kind.SQUARE_WELL:
            if self.epsilon < 0:
                raise PotentialError("epsilon must be >= 0")
            if self.lambda_range <= 1:
                raise PotentialError("lambda_range must exceed 1")
        if self.kind is Kind.TABULATED:
            r = np.asarray(self.table_r, dtype=float)
            v = np.asarray(self.table_v, dtype=float)
            if r.size < 2 or r.size != v.size:
                raise PotentialError("tabulated potential needs matching r, V columns")
            if np.any(np.diff(r) <= 0) or r[0] < 0:
                raise PotentialError("table r must be increasing and non-negative")
            if not np.all(np.isfinite(v)):
                raise PotentialError("table V must be finite")

    # constructors -----------------------------------------------------------

    @classmethod
    def hard_rod(cls, sigma: float = 1.0, beta: float = 1.0) -> PairPotential:
        return cls(Kind.HARD_ROD, d=1, sigma=sigma, beta=beta)

    @classmethod
    def hard_sphere(cls, sigma: float = 1.0, beta: float = 1.0) -> PairPotential:
        return cls(Kind.HARD_SPHERE, d=3, sigma=sigma, beta=beta)

    @classmethod
    def square_well(cls, sigma=1.0, epsilon=1.0, lambda_range=1.5, beta=1.0, d=3, stability_B=0.0):
        return cls(Kind.SQUARE_WELL, d=d, sigma=sigma, epsilon=epsilon, lambda_range=lambda_range,
                   beta=beta, stability_B=stability_B)

    @classmethod
    def tabulated(cls, r, v, d=3, beta=1.0, stability_B=0.0, sigma=None) -> PairPotential:
        r = tuple(float(x) for x in r)
        v = tuple(float(x) for x in v)
        return cls(Kind.TABULATED, d=d, sigma=sigma if sigma is not None else r[-1], beta=beta,
                   stability_B=stability_B, table_r=r, table_v=v)

    @classmethod
    def from_table_csv(cls, path: str | Path, **kw) -> PairPotential:
        rs, vs = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    rs.append(float(row[0]))
                    vs.append(float(row[1]))
                except ValueError:
                    continue  # header line
        return cls.tabulated(rs, vs, **kw)

    # geometry ---------------------------------------------------------------

    @property
    def hard_core(self) -> bool:
        return self.kind in (Kind.HARD_ROD, Kind.HARD_SPHERE, Kind.SQUARE_WELL)

    @property
    def core_radius(self) -> float:
        return self.sigma if self.hard_core else 0.0

    @property
    def range(self) -> float:
        """Distance beyond which the bond vanishes."""
        if self.kind is Kind.SQUARE_WELL:
            return self.lambda_range * self.sigma
        if self.kind is Kind.TABULATED:
            return self.table_r[-1]
        return self.sigma

    @property
    def discontinuities(self) -> tuple[float, ...]:
        if self.kind is Kind.SQUARE_WELL:
            return (self.sigma, self.lambda_range * self.sigma)
        if self.kind is Kind.TABULATED:
            return ()
        return (self.sigma,)

    @property
    def well_bond(self) -> float:
        return math.expm1(self.beta * self.epsilon)

    # evaluation -------------------------------------------------------------

    def energy(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        if self.kind is Kind.TABULATED:
            tr = np.asarray(self.table_r)
            v = np.interp(r, tr, np.asarray(self.table_v))
            return np.where(r <= tr[-1], v, 0.0)
        v = np.where(r < self.sigma, np.inf, 0.0)
        if self.kind is Kind.SQUARE_WELL:
            v = np.where((r >= self.sigma) & (r < self.lambda_range * self.sigma), -self.epsilon, v)
        return v

    def boltzmann(self, r):
        """e^{-beta V(r)}; zero inside a hard core."""
        with np.errstate(over="ignore"):
            return np.exp(-self.beta * self.energy(r))

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind.value, "d": self.d, "sigma": self.sigma, "epsilon": self.epsilon,
            "lambda": self.lambda_range, "beta": self.beta, "stability_B": self.stability_B,
        }
        if self.kind is Kind.TABULATED:
            out["table_r"] = list(self.table_r)
            out["table_v"] = list(self.table_v)
        return out


def mayer_f(p: PairPotential, r):
    """Mayer bond e^{-beta V(r)} - 1, exactly -1 on a hard core."""
    r_arr = np.abs(np.asarray(r, dtype=float))
    if p.kind is Kind.TABULATED:
        out = np.expm1(-p.beta * p.energy(r_arr))
    else:
        out = np.where(r_arr < p.sigma, -1.0, 0.0)
        if p.kind is Kind.SQUARE_WELL:
            out = np.where((r_arr >= p.sigma) & (r_arr < p.lambda_range * p.sigma), p.well_bond, out)
    if np.ndim(r) == 0:
        return float(out)
    return out


def mayer_f_exact(p: PairPotential, r: Fraction) -> Fraction:
    """Rational Mayer bond for hard rods/spheres (``-1`` inside the core, else ``0``)."""
    if p.kind not in (Kind.HARD_ROD, Kind.HARD_SPHERE):
        raise PotentialError("exact bonds only for hard cores")
    return Fraction(-1) if abs(Fraction(r)) < Fraction(p.sigma) else Fraction(0)


def _shell(r_in: float, r_out: float, d: int) -> float:
    return ball_volume(r_out, d) - ball_volume(r_in, d)


def c_beta_analytic(p: PairPotential) -> float:
    if p.kind in (Kind.HARD_ROD, Kind.HARD_SPHERE):
        return ball_volume(p.sigma, p.d)
    if p.kind is Kind.SQUARE_WELL:
        return ball_volume(p.sigma, p.d) + abs(p.well_bond) * _shell(p.sigma, p.lambda_range * p.sigma, p.d)
    raise PotentialError("no closed form for tabulated potentials")


def _radial_measure(r: float, d: int) -> float:
    return 2.0 if d == 1 else 4.0 * math.pi * r * r


def c_beta_quadrature(p: PairPotential, rtol: float = 1e-10) -> float:
    """Integrated |f| over R^d by adaptive quadrature between breakpoints."""
    pts = sorted({0.0, *p.discontinuities, p.range, *p.table_r})
    pts = [x for x in pts if x <= p.range]
    total, err_total = 0.0, 0.0
    for a, b in zip(pts, pts[1:]):
        if b <= a:
            continue
        val, err = integrate.quad(
            lambda r: abs(mayer_f(p, r)) * _radial_measure(r, p.d),
            a, b, epsabs=0.0, epsrel=rtol * 1e-2, limit=200,
        )
        total += val
        err_total += err
    if total and err_total > rtol * abs(total):
        raise NumericalError(f"C(beta) quadrature reached relative error {err_total / total:.3e} > {rtol:.1e}")
    return total


def c_beta(p: PairPotential) -> float:
    """C(beta) = integral of |e^{-beta V} - 1| over R^d."""
    if p.kind is Kind.TABULATED:
        return c_beta_quadrature(p)
    return c_beta_analytic(p)
