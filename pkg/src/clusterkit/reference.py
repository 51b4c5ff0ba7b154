"""Closed-form reference solutions used as independent oracles."""

from __future__ import annotations

import math

import numpy as np
from scipy import special


def tonks_g(r, rho: float, sigma: float = 1.0) -> np.ndarray:
    """Exact pair correlation of 1D hard rods.

    g(r) = (1/rho) sum_n xi^n (r - n sigma)^(n-1) / (n-1)! exp(-xi (r - n sigma)), r > n sigma,
    with xi = rho / (1 - rho sigma).
    """
    if not 0 <= rho * sigma < 1:
        raise ValueError("need 0 <= rho*sigma < 1")
    r = np.abs(np.asarray(r, dtype=float))
    xi = rho / (1 - rho * sigma)
    out = np.zeros_like(r)
    if rho == 0:
        return np.where(r > sigma, 1.0, 0.0)
    n_max = int(np.max(r) / sigma) + 1
    for n in range(1, n_max + 1):
        x = r - n * sigma
        on = x > 0
        if not np.any(on):
            continue
        xs = x[on]
        # log-space to keep large n stable
        logt = n * math.log(xi) + (n - 1) * np.log(xs) - special.gammaln(n) - xi * xs
        out[on] += np.exp(logt)
    return out / rho


def tonks_pressure(rho: float, sigma: float = 1.0) -> float:
    """beta P for hard rods."""
    return rho / (1 - rho * sigma)


def tonks_virial(m: int, sigma: float = 1.0) -> float:
    """beta_m for hard rods, -(m+1) sigma^m / m."""
    return -(m + 1) * sigma**m / m


def wertheim_c(r, eta: float, sigma: float = 1.0) -> np.ndarray:
    """Percus-Yevick direct correlation function of hard spheres (Wertheim/Thiele).

    c(x) = -a - b x - (eta a / 2) x^3 for x = r/sigma < 1, zero outside.
    """
    x = np.abs(np.asarray(r, dtype=float)) / sigma
    a = (1 + 2 * eta) ** 2 / (1 - eta) ** 4
    b = -6 * eta * (1 + eta / 2) ** 2 / (1 - eta) ** 4
    inside = -a - b * x - 0.5 * eta * a * x**3
    return np.where(x < 1, inside, 0.0)


def packing_fraction(rho: float, sigma: float = 1.0) -> float:
    return math.pi * rho * sigma**3 / 6


def density_from_packing(eta: float, sigma: float = 1.0) -> float:
    return 6 * eta / (math.pi * sigma**3)
