"""Percus-Yevick closure on a radial grid and its error against the density series."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .expansion import CoefficientTable, ExpansionError, GraphSum, h_coefficient, radial_anchors
from .integrals import McConfig
from .oz import DivergenceError, GridError, RadialFunction, forward, oz_solve_t, radial_convolve
from .potentials import NumericalError, PairPotential, mayer_f


class NonConvergenceError(NumericalError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(f"no convergence after {iterations} iterations (last change {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class DensityTooHighError(NumericalError):
    def __init__(self, min_denominator: float):
        super().__init__(f"1 - rho*c_hat reached {min_denominator:.3e}; density beyond the solver's reach")
        self.min_denominator = min_denominator


@dataclass(frozen=True)
class Grid:
    dr: float = 0.005
    n_points: int = 2400
    d: int = 3

    @property
    def r_max(self) -> float:
        return self.dr * (self.n_points - 1)


@dataclass(frozen=True)
class SolverConfig:
    mixing: float = 0.5
    max_iter: int = 10_000
    tol: float = 1e-10
    min_denominator: float = 1e-6

    def __post_init__(self):
        if not 0 < self.mixing <= 1:
            raise ValueError("mixing must be in (0, 1]")
        if self.max_iter < 1 or self.tol <= 0:
            raise ValueError("max_iter and tol must be positive")


@dataclass(frozen=True)
class ClosureFields:
    """t = c*h (indirect part), y cavity function, d closure defect, m = e d.

    ``e`` is the Boltzmann factor and ``f = e - 1`` on the same grid; the
    remaining correlation functions follow from these.
    """

    t: RadialFunction
    y: RadialFunction
    d: RadialFunction
    m: RadialFunction
    e: RadialFunction
    rho: float

    @property
    def f(self) -> RadialFunction:
        return self.e - 1.0

    @property
    def g(self) -> RadialFunction:
        return self.e * self.y

    @property
    def h(self) -> RadialFunction:
        return self.e * self.y - 1.0

    @property
    def c(self) -> RadialFunction:
        return self.h - self.t


@dataclass
class SolverDiagnostics:
    iterations: int
    residual: float
    last_change: float
    min_denominator: float
    history: list[float] = field(default_factory=list)
    monotone: bool = True

    def summary(self) -> dict:
        h = self.history
        picks = sorted({0, len(h) // 4, len(h) // 2, 3 * len(h) // 4, len(h) - 1}) if h else []
        return {
            "iterations": self.iterations,
            "residual": self.residual,
            "last_change": self.last_change,
            "min_denominator": self.min_denominator,
            "monotone": self.monotone,
            "history": [{"iteration": i + 1, "change": h[i]} for i in picks],
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)


def boltzmann_grid(p: PairPotential, grid: Grid) -> RadialFunction:
    return RadialFunction.from_callable(lambda r: mayer_f(p, r) + 1.0, grid.dr, grid.n_points, p.d,
                                        p.discontinuities)


def grid_jumps(p: PairPotential, grid: Grid) -> tuple[float, ...]:
    """Bond discontinuities that fall on grid nodes (the split nodes)."""
    out = []
    for x in p.discontinuities:
        j = round(x / grid.dr)
        if abs(j * grid.dr - x) < 1e-9 * grid.dr * max(j, 1):
            out.append(j * grid.dr)
    return tuple(out)


def _min_denominator(c: RadialFunction, rho: float) -> float:
    return float(np.min(1 - rho * forward(c).values))


def _check_grid(p: PairPotential, grid: Grid) -> None:
    if grid.d != p.d:
        raise GridError(f"grid is {grid.d}D but the potential lives in {p.d}D")
    if grid.r_max < 4 * p.range:
        raise GridError("grid too short for the potential range")


def combined2_residual(y: RadialFunction, e: RadialFunction, rho: float, d: RadialFunction | None = None,
                       jumps: Sequence[float] = ()) -> float:
    """sup |y - 1 - d - rho (f y) * (e y - 1)|."""
    f = e - 1.0
    rhs = radial_convolve(f * y, e * y - 1.0, rho, jumps) + 1.0
    if d is not None:
        rhs = rhs + d
    return (y - rhs).sup()


def py_solve(p: PairPotential, rho: float, grid: Grid | None = None, solver: SolverConfig | None = None, *,
             defect: Callable[[RadialFunction], RadialFunction] | None = None, scheme: str = "oz"):
    """Damped Picard iteration for y = 1 + d + rho (f y) * (e y - 1); PY sets d = 0.

    With ``scheme="oz"`` (default) each step solves the OZ relation for c = f y
    in transform space and sets y = 1 + t + d; the fixed point is the same, but
    the update stays stable where rho c_hat(0) < -3, which the plain
    convolution update (``scheme="direct"``) does not at mixing 0.5.
    ``defect`` maps the current t to a closure defect d and defaults to zero.
    Returns (fields, diagnostics).
    """
    if scheme not in ("oz", "direct"):
        raise ValueError("scheme must be 'oz' or 'direct'")
    grid = grid or Grid(d=p.d)
    solver = solver or SolverConfig()
    _check_grid(p, grid)
    if rho < 0:
        raise ValueError("rho must be non-negative")
    e = boltzmann_grid(p, grid)
    f = e - 1.0
    jumps = grid_jumps(p, grid)
    zero = RadialFunction.zeros(grid.dr, grid.n_points, p.d)
    y = zero + 1.0
    history: list[float] = []
    min_den = 1.0
    change = 0.0
    for it in range(1, solver.max_iter + 1):
        c = f * y
        if rho:
            min_den = min(min_den, _min_denominator(c, rho))
        if min_den < solver.min_denominator:
            raise DensityTooHighError(min_den)
        d = defect(y - 1.0) if defect else zero
        if scheme == "oz":
            try:
                t = oz_solve_t(c, rho, min_denominator=solver.min_denominator, jumps=jumps, h_guess=e * y - 1.0)
            except DivergenceError as exc:
                raise DensityTooHighError(exc.min_denominator) from None
        else:
            t = radial_convolve(c, e * y - 1.0, rho, jumps)
        y_new = t + 1.0 + d
        change = (y_new - y).sup()
        history.append(change)
        if not math.isfinite(change) or change > 1e12:
            raise DensityTooHighError(min_den)
        y = y * (1 - solver.mixing) + y_new * solver.mixing
        if change < solver.tol:
            break
    else:
        raise NonConvergenceError(solver.max_iter, change)
    d = defect(y - 1.0) if defect else zero
    t = y - 1.0 - d
    residual = combined2_residual(y, e, rho, d, jumps)
    monotone = all(b <= a * (1 + 1e-12) for a, b in zip(history, history[1:]))
    diag = SolverDiagnostics(it, residual, change, min_den, history, monotone)
    return ClosureFields(t=t, y=y, d=d, m=e * d, e=e, rho=rho), diag


def py_solve_t(p: PairPotential, rho: float, grid: Grid | None = None, solver: SolverConfig | None = None):
    """Cross-check path: iterate t <- rho c * (c + t) with c = f (1 + t)."""
    grid = grid or Grid(d=p.d)
    solver = solver or SolverConfig()
    _check_grid(p, grid)
    e = boltzmann_grid(p, grid)
    f = e - 1.0
    jumps = grid_jumps(p, grid)
    t = RadialFunction.zeros(grid.dr, grid.n_points, p.d)
    change = 0.0
    for it in range(1, solver.max_iter + 1):
        c = f * (t + 1.0)
        t_new = radial_convolve(c, c + t, rho, jumps)
        change = (t_new - t).sup()
        if not math.isfinite(change):
            raise DensityTooHighError(_min_denominator(c, rho))
        t = t * (1 - solver.mixing) + t_new * solver.mixing
        if change < solver.tol:
            break
    else:
        raise NonConvergenceError(solver.max_iter, change)
    zero = RadialFunction.zeros(grid.dr, grid.n_points, p.d)
    return ClosureFields(t=t, y=t + 1.0, d=zero, m=zero, e=e, rho=rho)


# ---------------------------------------------------------------------------
# closure defect


def _table_grid(table: CoefficientTable) -> float:
    r = np.asarray(table.radii)
    if r.size < 8 or r[0] != 0:
        raise GridError("defect needs a uniform radius table starting at 0 with >= 8 points")
    dr = r[1] - r[0]
    if not np.allclose(np.diff(r), dr, rtol=1e-9, atol=1e-12):
        raise GridError("table radii are not uniform")
    return float(dr)


def closure_defect(fields: ClosureFields, c2_table: CoefficientTable, rho: float, p: PairPotential) -> RadialFunction:
    """m(r) = c_series(r) - f(r) (1 + t(r)) on the table radii."""
    if c2_table.target != "c2":
        raise ExpansionError("closure_defect needs a c2 table")
    if c2_table.max_order < 2:
        raise ExpansionError("c2 table must reach order 2")
    dr = _table_grid(c2_table)
    n = len(c2_table.radii)
    c_series = np.zeros(n)
    for k in range(c2_table.max_order + 1):
        c_series += rho**k * c2_table.values(k)
    # pointwise f, matching how the table coefficients were sampled
    f = np.asarray(mayer_f(p, np.asarray(c2_table.radii)), dtype=float)
    t = fields.t.at(np.asarray(c2_table.radii))
    return RadialFunction(dr, c_series - f * (1 + t), p.d)


def defect_first_order(c2_table: CoefficientTable, p: PairPotential, grid: Grid) -> tuple[RadialFunction, np.ndarray]:
    """rho^1 coefficient of m: c_1 - f (f*f); returns it with the table errors."""
    dr = _table_grid(c2_table)
    n = len(c2_table.radii)
    fg = RadialFunction.from_callable(lambda r: mayer_f(p, r), grid.dr, grid.n_points, p.d, p.discontinuities)
    t1 = radial_convolve(fg, fg, 1.0, grid_jumps(p, grid))
    f = np.asarray(mayer_f(p, np.asarray(c2_table.radii)), dtype=float)
    m1 = c2_table.values(1) - f * t1.at(np.asarray(c2_table.radii))
    return RadialFunction(dr, m1, p.d), c2_table.errors(1)


# ---------------------------------------------------------------------------
# error order against the density series


@dataclass
class ErrorOrderReport:
    rhos: tuple[float, ...]
    errors: tuple[float, ...]
    noise: tuple[float, ...]
    slope: float
    slope_stderr: float
    band: tuple[float, float]
    threshold: float = 1.8

    @property
    def above_noise_floor(self) -> bool:
        return all(e > 4 * n for e, n in zip(self.errors, self.noise))

    @property
    def passes(self) -> bool:
        return self.slope >= self.threshold and self.above_noise_floor

    def to_dict(self) -> dict:
        return {
            "rho": list(self.rhos), "error": list(self.errors), "noise_floor": list(self.noise),
            "slope": self.slope, "slope_stderr": self.slope_stderr, "band95": list(self.band),
            "threshold": self.threshold, "above_noise_floor": self.above_noise_floor, "pass": self.passes,
        }


@dataclass
class DecayReport:
    """1D: PY is exact, so the gap to the series shrinks with the order K."""

    rho: float
    orders: tuple[int, ...]
    errors: tuple[float, ...]

    @property
    def passes(self) -> bool:
        return all(b < a for a, b in zip(self.errors, self.errors[1:]))

    def to_dict(self) -> dict:
        return {"rho": self.rho, "orders": list(self.orders), "error": list(self.errors), "pass": self.passes}


def default_error_radii(p: PairPotential, dr: float, step: float = 0.1, r_max: float = 3.0) -> list[float]:
    """Grid-aligned anchors away from the bond discontinuities."""
    jumps = [x / p.sigma for x in p.discontinuities] + [2.0]
    out = []
    for j in range(int(round(r_max / step)) + 1):
        r = round(j * step, 12)
        if any(abs(r - x) < 1e-9 for x in jumps):
            continue
        out.append(r * p.sigma)
    return [round(r / dr) * dr for r in out]


def series_coefficients(p: PairPotential, K: int, radii: Sequence[float], cfg: McConfig,
                        engine: GraphSum | None = None) -> tuple[np.ndarray, np.ndarray]:
    """h_k(r) and their errors for k = 0..K (OZ normalization)."""
    engine = engine or GraphSum(p, cfg)
    vals = np.zeros((K + 1, len(radii)))
    errs = np.zeros_like(vals)
    for k in range(K + 1):
        for i, r in enumerate(radii):
            est = h_coefficient(2, k, radial_anchors(r, 2, p.d), p, engine=engine, tag=i)
            vals[k, i] = est.value
            errs[k, i] = est.std_error
    return vals, errs


def _py_h_at(p: PairPotential, rho: float, grid: Grid, radii, solver: SolverConfig) -> np.ndarray:
    fields, _ = py_solve(p, rho, grid, solver)
    h = fields.h
    return np.array([h.values[h.node(r)] for r in radii])


def py_error_order(p: PairPotential, rho_list: Sequence[float], K: int = 2, cfg: McConfig | None = None, *,
                   grid: Grid | None = None, solver: SolverConfig | None = None,
                   radii: Sequence[float] | None = None) -> ErrorOrderReport:
    """Fit the slope of log sup|h_PY - h_series(K)| against log rho."""
    rho_list = sorted(float(r) for r in rho_list)
    if len(rho_list) < 3:
        raise ValueError("the slope fit needs at least 3 densities")
    if K < 2:
        raise ValueError("K must be >= 2")
    cfg = cfg or McConfig()
    grid = grid or Grid(d=p.d)
    solver = solver or SolverConfig()
    radii = list(radii) if radii is not None else default_error_radii(p, grid.dr)
    vals, errs = series_coefficients(p, K, radii, cfg)
    errors, noise = [], []
    for rho in rho_list:
        h_py = _py_h_at(p, rho, grid, radii, solver)
        powers = rho ** np.arange(K + 1)
        series = powers @ vals
        gap = np.abs(h_py - series)
        i = int(np.argmax(gap))
        errors.append(float(gap[i]))
        # noise of the series at the radius that sets the sup
        noise.append(float(np.sqrt(np.sum(powers**2 * errs[:, i] ** 2))))
    fit = stats.linregress(np.log(rho_list), np.log(errors))
    tq = stats.t.ppf(0.975, len(rho_list) - 2)
    band = (fit.slope - tq * fit.stderr, fit.slope + tq * fit.stderr)
    return ErrorOrderReport(tuple(rho_list), tuple(errors), tuple(noise), float(fit.slope), float(fit.stderr), band)


def py_series_decay(p: PairPotential, rho: float, orders: Sequence[int] = (1, 2, 3), cfg: McConfig | None = None, *,
                    grid: Grid | None = None, solver: SolverConfig | None = None,
                    radii: Sequence[float] | None = None) -> DecayReport:
    """1D replacement for the slope fit: sup gap between PY and the series at increasing K."""
    cfg = cfg or McConfig()
    grid = grid or Grid(d=p.d)
    solver = solver or SolverConfig()
    radii = list(radii) if radii is not None else default_error_radii(p, grid.dr)
    K = max(orders)
    vals, _ = series_coefficients(p, K, radii, cfg)
    h_py = _py_h_at(p, rho, grid, radii, solver)
    errs = []
    for k in orders:
        series = (rho ** np.arange(k + 1)) @ vals[: k + 1]
        errs.append(float(np.max(np.abs(h_py - series))))
    return DecayReport(rho, tuple(orders), tuple(errs))
