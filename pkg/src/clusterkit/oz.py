"""Radial grids, transforms, and the Ornstein-Zernike relation."""

from __future__ import annotations

import csv
import io
import json
import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import fft, signal

from .expansion import GraphSum, h_prefactor, radial_anchors
from .graphs import GraphClass, class_iso, count_graphs
from .integrals import McConfig, combine, overlap_volume
from .potentials import Kind, NumericalError, PairPotential, mayer_f


class GridError(ValueError):
    pass


class DivergenceError(NumericalError):
    def __init__(self, min_denominator: float):
        super().__init__(f"1 - rho*c_hat nearly vanishes on the transform grid (min |.| = {min_denominator:.3e})")
        self.min_denominator = min_denominator


class NormalizationMismatch(ValueError):
    pass


@dataclass(frozen=True)
class RadialFunction:
    """Values at r_j = j*dr, j = 0..n_points-1, of a radial function in R^d."""

    dr: float
    values: np.ndarray
    d: int = 3

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if not self.dr > 0:
            raise GridError("dr must be positive")
        if vals.ndim != 1 or vals.size < 8:
            raise GridError("need at least 8 grid points")
        if not np.all(np.isfinite(vals)):
            raise GridError("radial function has non-finite values")
        if self.d not in (1, 3):
            raise GridError("only d = 1 and d = 3 grids")

    @property
    def n_points(self) -> int:
        return self.values.size

    @property
    def r(self) -> np.ndarray:
        return self.dr * np.arange(self.n_points)

    @classmethod
    def zeros(cls, dr: float, n_points: int, d: int = 3) -> RadialFunction:
        return cls(dr, np.zeros(n_points), d)

    @classmethod
    def from_callable(cls, func: Callable, dr: float, n_points: int, d: int = 3,
                      discontinuities: Sequence[float] = ()) -> RadialFunction:
        """Sample ``func``; nodes sitting on a jump get the mean of both one-sided limits."""
        r = dr * np.arange(n_points)
        vals = np.asarray(func(r), dtype=float).copy()
        eps = 1e-9 * dr
        for x in discontinuities:
            j = int(round(x / dr))
            if 0 < j < n_points and abs(j * dr - x) < 1e-9 * dr * max(1, j):
                vals[j] = 0.5 * (float(func(np.array([x - eps]))[0]) + float(func(np.array([x + eps]))[0]))
        return cls(dr, vals, d)

    def same_grid(self, other: RadialFunction) -> bool:
        return self.d == other.d and self.n_points == other.n_points and math.isclose(self.dr, other.dr, rel_tol=1e-12)

    def _check(self, other: RadialFunction) -> None:
        if not self.same_grid(other):
            raise GridError("radial functions live on different grids")

    def __add__(self, other):
        if isinstance(other, RadialFunction):
            self._check(other)
            return RadialFunction(self.dr, self.values + other.values, self.d)
        return RadialFunction(self.dr, self.values + other, self.d)

    def __sub__(self, other):
        if isinstance(other, RadialFunction):
            self._check(other)
            return RadialFunction(self.dr, self.values - other.values, self.d)
        return RadialFunction(self.dr, self.values - other, self.d)

    def __mul__(self, other):
        if isinstance(other, RadialFunction):
            self._check(other)
            return RadialFunction(self.dr, self.values * other.values, self.d)
        return RadialFunction(self.dr, self.values * other, self.d)

    __rmul__ = __mul__

    def __neg__(self):
        return RadialFunction(self.dr, -self.values, self.d)

    def at(self, r) -> np.ndarray:
        return np.interp(r, self.r, self.values)

    def node(self, r: float) -> int:
        j = int(round(r / self.dr))
        if abs(j * self.dr - r) > 1e-9 * self.dr * max(1, j) or not 0 <= j < self.n_points:
            raise GridError(f"r = {r} is not a grid node")
        return j

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def l1(self) -> float:
        """Weighted L1 norm, integral of |a| over R^d."""
        w = 4 * np.pi * self.r**2 if self.d == 3 else 2 * np.ones(self.n_points)
        return float(np.sum(np.abs(self.values) * w) * self.dr)

    def to_csv(self, header: str = "value", manifest_hash: str | None = None) -> str:
        buf = io.StringIO()
        if manifest_hash:
            buf.write(f"# manifest {manifest_hash}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", header])
        for r, v in zip(self.r, self.values):
            w.writerow([repr(float(r)), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, d: int = 3) -> RadialFunction:
        rows = [row for row in csv.reader(io.StringIO(text)) if row and not row[0].startswith("#")]
        data = np.array([[float(x) for x in row[:2]] for row in rows[1:]])
        dr = data[1, 0] - data[0, 0]
        if not np.allclose(np.diff(data[:, 0]), dr, rtol=1e-9, atol=0):
            raise GridError("CSV grid is not uniform")
        return cls(float(dr), data[:, 1], d)


# ---------------------------------------------------------------------------
# transforms


@dataclass(frozen=True)
class Spectrum:
    """Transform of a radial function on the conjugate grid kappa_j = j*pi/(M dr)."""

    kappa: np.ndarray
    values: np.ndarray
    dr: float
    size: int  # padded real-space length M
    d: int


def forward(a: RadialFunction, pad: int = 2) -> Spectrum:
    """a_hat(kappa) = (4 pi / kappa) int r a(r) sin(kappa r) dr  (d=3), 2 int a cos(kappa r) dr (d=1)."""
    M = pad * a.n_points
    if a.d == 3:
        x = np.zeros(M - 1)
        x[: a.n_points - 1] = a.r[1:] * a.values[1:]
        kappa = np.pi * np.arange(1, M) / (M * a.dr)
        vals = 4 * np.pi * a.dr / kappa * (fft.dst(x, type=1) / 2)
        return Spectrum(kappa, vals, a.dr, M, 3)
    x = np.zeros(M + 1)
    x[: a.n_points] = a.values
    kappa = np.pi * np.arange(M + 1) / (M * a.dr)
    return Spectrum(kappa, a.dr * fft.dct(x, type=1), a.dr, M, 1)


def inverse(s: Spectrum, n_points: int) -> RadialFunction:
    if s.d == 3:
        dk = np.pi / (s.size * s.dr)
        y = fft.dst(s.kappa * s.values, type=1) / 2  # sum_j kappa_j a_j sin(pi i j / M), i = 1..M-1
        r = s.dr * np.arange(1, s.size)
        out = np.empty(s.size)
        out[1:] = dk / (2 * np.pi**2 * r) * y
        out[0] = dk / (2 * np.pi**2) * np.sum(s.kappa**2 * s.values)
        return RadialFunction(s.dr, out[:n_points], 3)
    out = fft.dct(s.values, type=1) / (2 * s.size * s.dr)
    return RadialFunction(s.dr, out[:n_points], 1)


def _raw_convolve(a: RadialFunction, b: RadialFunction) -> np.ndarray:
    if a.d == 1:
        full_a = np.concatenate([a.values[:0:-1], a.values])
        full_b = np.concatenate([b.values[:0:-1], b.values])
        return signal.fftconvolve(full_a, full_b, mode="same")[a.n_points - 1:] * a.dr
    sa, sb = forward(a), forward(b)
    out = inverse(Spectrum(sa.kappa, sa.values * sb.values, sa.dr, sa.size, 3), a.n_points).values.copy()
    out[0] = _even_extrapolate(out)
    return out


def ball_overlap(r, R1: float, R2: float, d: int) -> np.ndarray:
    """Volume of the intersection of balls of radii R1, R2 whose centres are r apart."""
    r = np.abs(np.asarray(r, dtype=float))
    if d == 1:
        return np.clip(np.minimum(R1, r + R2) - np.maximum(-R1, r - R2), 0.0, None)
    small = min(R1, R2)
    out = np.zeros_like(r)
    inside = r <= abs(R1 - R2)
    out[inside] = 4 * np.pi * small**3 / 3
    lens = (~inside) & (r < R1 + R2)
    x = r[lens]
    out[lens] = np.pi * (R1 + R2 - x) ** 2 * (x**2 + 2 * x * (R1 + R2) - 3 * (R1 - R2) ** 2) / (12 * x)
    return out


@functools.lru_cache(maxsize=64)
def _jump_error(x1: float, x2: float, dr: float, n: int, d: int) -> np.ndarray:
    """Grid convolution of two split-node ball indicators minus the exact overlap."""
    ind1 = RadialFunction.from_callable(lambda r: (r < x1) * 1.0, dr, n, d, (x1,))
    ind2 = RadialFunction.from_callable(lambda r: (r < x2) * 1.0, dr, n, d, (x2,))
    err = _raw_convolve(ind1, ind2) - ball_overlap(ind1.r, x1, x2, d)
    err.setflags(write=False)
    return err


def jump_at(a: RadialFunction, x: float) -> float:
    """a(x-) - a(x+), with one-sided limits extrapolated from the two nodes on each side."""
    j = a.node(x)
    if j < 2 or j + 2 >= a.n_points:
        raise GridError("jump too close to the grid ends")
    v = a.values
    return float((2 * v[j - 1] - v[j - 2]) - (2 * v[j + 1] - v[j + 2]))


def radial_convolve(a: RadialFunction, b: RadialFunction, rho: float = 1.0,
                    jumps: Sequence[float] = ()) -> RadialFunction:
    """rho * (a * b) on the grid of ``a``.

    Where both inputs jump, products of split-node values leave an O(dr)
    error near r = 0.  That error is bilinear in the two jumps, so for each
    pair of listed jump radii it is removed using the known grid error of
    convolving two ball indicators.
    """
    a._check(b)
    if rho == 0 or not np.any(a.values) or not np.any(b.values):
        return RadialFunction.zeros(a.dr, a.n_points, a.d)
    out = _raw_convolve(a, b)
    if jumps:
        out = out - jump_correction(a, b, jumps)
    return RadialFunction(a.dr, rho * out, a.d)


def _even_extrapolate(v: np.ndarray) -> float:
    """Value at r = 0 from r = dr, 2dr assuming a + b r^2.

    The spectral sum at the origin converges slowly when the inputs jump,
    while the convolution itself is smooth there.
    """
    return float((4 * v[1] - v[2]) / 3)


# ---------------------------------------------------------------------------
# solving h = c + rho c*h


@dataclass(frozen=True)
class OzReport:
    residual_sup: float
    residual_l1: float
    min_denominator: float

    def to_dict(self) -> dict:
        return {"residual_sup": self.residual_sup, "residual_l1": self.residual_l1,
                "min_denominator": self.min_denominator}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def oz_residual(h: RadialFunction, c: RadialFunction, rho: float, jumps: Sequence[float] = ()) -> RadialFunction:
    return h - c - radial_convolve(c, h, rho, jumps)


def jump_correction(a: RadialFunction, b: RadialFunction, jumps: Sequence[float]) -> np.ndarray:
    """Grid error of a*b caused by coinciding split nodes (bilinear in the jumps)."""
    out = np.zeros(a.n_points)
    for x1 in jumps:
        ja = jump_at(a, x1)
        if ja == 0:
            continue
        for x2 in jumps:
            jb = jump_at(b, x2)
            if jb:
                out = out + ja * jb * _jump_error(float(x1), float(x2), a.dr, a.n_points, a.d)
    return out


def _indirect(c: RadialFunction, rho: float, min_denominator: float, jumps: Sequence[float] = (),
              h_guess: RadialFunction | None = None) -> tuple[RadialFunction, float]:
    """t with t = rho c*(c + t) on the grid, jump-corrected.

    Writing K for the jump correction of rho c*h and u = t + K (the raw grid
    convolution), the OZ relation becomes u_hat = rho c_hat (c_hat - K_hat) / (1 - rho c_hat).
    K needs the jumps of h; they come from ``h_guess`` (t is continuous, so
    J_h = J_c when no guess is given).
    """
    sc = forward(c)
    den = 1 - rho * sc.values
    # 1 - rho c_hat must stay positive (S(k) > 0); a sign change can fall between kappa nodes
    mind = float(np.min(den))
    if mind < min_denominator:
        raise DivergenceError(mind)
    K = rho * jump_correction(c, h_guess if h_guess is not None else c, jumps) if jumps else np.zeros(c.n_points)
    kh = forward(RadialFunction(c.dr, K, c.d)).values if np.any(K) else 0.0
    u = inverse(Spectrum(sc.kappa, rho * sc.values * (sc.values - kh) / den, sc.dr, sc.size, sc.d), c.n_points)
    vals = u.values.copy()
    if c.d == 3:
        vals[0] = _even_extrapolate(vals)  # u is smooth at the origin even when c jumps
    return RadialFunction(c.dr, vals - K, c.d), mind


def oz_solve_t(c: RadialFunction, rho: float, *, min_denominator: float = 1e-6,
               jumps: Sequence[float] = (), h_guess: RadialFunction | None = None) -> RadialFunction:
    """Indirect correlation t = rho c*h for the h that solves OZ with this c."""
    if rho == 0 or not np.any(c.values):
        return RadialFunction.zeros(c.dr, c.n_points, c.d)
    return _indirect(c, rho, min_denominator, jumps, h_guess)[0]


def oz_solve_h(c: RadialFunction, rho: float, *, min_denominator: float = 1e-6,
               residual_tol: float = 1e-8, report: bool = False, jumps: Sequence[float] = ()):
    """h with h_hat = c_hat / (1 - rho c_hat), checked against the real-space residual."""
    if rho < 0:
        raise GridError("rho must be non-negative")
    if rho == 0 or not np.any(c.values):
        h = RadialFunction(c.dr, c.values.copy(), c.d)
        rep = OzReport(0.0, 0.0, 1.0)
        return (h, rep) if report else h
    t, mind = _indirect(c, rho, min_denominator, jumps)
    h = c + t
    for _ in range(8 if jumps else 0):  # make the jumps of h self-consistent
        t, _ = _indirect(c, rho, min_denominator, jumps, h)
        if (c + t - h).sup() < 1e-15:
            break
        h = c + t
    res = oz_residual(h, c, rho, jumps)
    rep = OzReport(res.sup(), res.l1(), mind)
    if rep.residual_sup > residual_tol:
        raise NumericalError(f"OZ residual {rep.residual_sup:.3e} exceeds {residual_tol:.1e}; enlarge the grid")
    return (h, rep) if report else h


# ---------------------------------------------------------------------------
# order-by-order check


def census_identity(k: int, with_labels: bool = False) -> tuple[int, int]:
    """Left and right sides of the labeled census split of articulation-free graphs.

    With ``with_labels`` the right side counts the choice of which black
    vertex is the first nodal point (k choices), which is what the split
    actually needs; without it the binomial form alone is returned.
    """
    lhs = count_graphs(2, k, GraphClass.ARTICULATION_FREE)
    rhs = count_graphs(2, k, GraphClass.TWO_CONNECTED)
    split = sum(math.comb(k - 1, l) * count_graphs(2, l, GraphClass.TWO_CONNECTED)
                * count_graphs(2, k - 1 - l, GraphClass.ARTICULATION_FREE) for l in range(k))
    return lhs, rhs + (k * split if with_labels else split)


def hard_sphere_low_orders(p: PairPotential) -> dict[tuple[str, int], Callable]:
    """Closed-form h_0, h_1, c_0, c_1 for hard spheres (radius sigma bonds)."""
    s = p.sigma

    def f(r):
        return np.where(np.asarray(r) < s, -1.0, 0.0)

    def lens(r):
        return np.array([overlap_volume(float(x), s, p.d) for x in np.atleast_1d(r)])

    return {
        ("h", 0): f, ("c", 0): f,
        ("c", 1): lambda r: f(r) * lens(r),
        ("h", 1): lambda r: f(r) * lens(r) + lens(r),
    }


@dataclass(frozen=True)
class OzGrid:
    dr: float = 0.01
    r_max: float = 8.0


@dataclass
class OzCheck:
    k: int
    radii: tuple[float, ...]
    residuals: np.ndarray
    errors: np.ndarray
    mc_errors: np.ndarray
    grid_errors: np.ndarray
    nodal: np.ndarray
    convolution: np.ndarray
    notes: list[str] = field(default_factory=list)

    @property
    def passes(self) -> bool:
        tol = 4 * self.errors + 1e-12
        return bool(np.all(np.abs(self.residuals) <= tol))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "checks": [
                {"r": r, "residual": float(res), "error": float(e), "mc_error": float(m), "grid_error": float(g),
                 "pass": bool(abs(res) <= 4 * e + 1e-12)}
                for r, res, e, m, g in zip(self.radii, self.residuals, self.errors, self.mc_errors, self.grid_errors)
            ],
            "pass": self.passes,
            "notes": self.notes,
        }


def _coefficient_grid(kind: str, order: int, p: PairPotential, dr: float, n: int, engine: GraphSum) -> RadialFunction:
    closed = hard_sphere_low_orders(p) if p.kind is Kind.HARD_SPHERE else {}
    if (kind, order) in closed:
        return RadialFunction.from_callable(closed[(kind, order)], dr, n, p.d, p.discontinuities)
    if order == 0:
        return RadialFunction.from_callable(lambda r: mayer_f(p, r), dr, n, p.d, p.discontinuities)
    cls = GraphClass.ARTICULATION_FREE if kind == "h" else GraphClass.TWO_CONNECTED
    vals = np.zeros(n)
    reach = (order + 1) * p.range
    for j in range(n):
        r = j * dr
        if r > reach + 1e-12:
            break
        est = engine.class_sum(2, order, cls, radial_anchors(r, 2, p.d), tag=10_000 + j)
        vals[j] = est.value / math.factorial(order)
    return RadialFunction(dr, vals, p.d)


def _node_jumps(p: PairPotential, dr: float) -> tuple[float, ...]:
    out = []
    for x in p.discontinuities:
        j = round(x / dr)
        if abs(j * dr - x) < 1e-9 * dr * max(j, 1):
            out.append(j * dr)
    return tuple(out)


def _convolution_sum(k: int, p: PairPotential, dr: float, n: int, engine: GraphSum) -> RadialFunction:
    total = RadialFunction.zeros(dr, n, p.d)
    jumps = _node_jumps(p, dr)
    for l in range(k):
        c_l = _coefficient_grid("c", l, p, dr, n, engine)
        h_m = _coefficient_grid("h", k - 1 - l, p, dr, n, engine)
        total = total + radial_convolve(c_l, h_m, 1.0, jumps)
    return total


def oz_order_check(k: int, radii: Sequence[float], p: PairPotential, cfg: McConfig | None = None, *,
                   grid: OzGrid = OzGrid(), normalization: str = "oz", method: str = "auto",
                   engine: GraphSum | None = None) -> OzCheck:
    """Order-k residual of h - c - rho c*h at each anchor separation.

    The nodal part h_k - c_k is summed graph by graph over the articulation-free
    graphs that are not two-connected.  The convolution of lower orders is done
    on the grid (jump-corrected); the difference from a grid at twice the
    spacing is taken as its discretization error and added in quadrature to
    the Monte Carlo error.
    """
    if h_prefactor(2, 0, normalization) != 1:
        raise NormalizationMismatch(
            "order-by-order OZ needs h and c with the same prefactor; use normalization='oz'")
    count_graphs(2, k, GraphClass.ARTICULATION_FREE)
    cfg = cfg or McConfig()
    engine = engine or GraphSum(cfg=cfg, p=p, method=method)
    nodal_graphs = [(g, m) for g, m in class_iso(2, k, GraphClass.ARTICULATION_FREE)
                    if not _is_two_connected(g)]
    radii = tuple(float(r) for r in radii)
    nodal, mc_err = [], []
    for i, r in enumerate(radii):
        pts = radial_anchors(r, 2, p.d)
        if not nodal_graphs:
            nodal.append(0.0)
            mc_err.append(0.0)
            continue
        est = combine([(engine.estimate(g, pts, tag=i), m) for g, m in nodal_graphs]).scaled(h_prefactor(2, k, normalization))
        nodal.append(est.value)
        mc_err.append(est.std_error)
    nodal = np.array(nodal)
    mc_err = np.array(mc_err)
    notes = []
    if k == 0:
        zeros = np.zeros(len(radii))
        return OzCheck(k, radii, zeros, zeros, zeros, zeros, nodal, zeros, ["order 0: h_0 = c_0 = f"])
    n_fine = int(round(grid.r_max / grid.dr)) + 1
    fine = _convolution_sum(k, p, grid.dr, n_fine, GraphSum(p, cfg, "auto"))
    coarse = _convolution_sum(k, p, 2 * grid.dr, (n_fine + 1) // 2, GraphSum(p, cfg, "auto"))
    conv = np.array([fine.values[fine.node(r)] for r in radii])
    conv_c = np.array([coarse.values[coarse.node(r)] for r in radii])
    grid_err = np.abs(conv - conv_c)
    residual = nodal - conv
    err = np.sqrt(mc_err**2 + grid_err**2)
    if np.any(err == 0):
        notes.append("some anchors have zero propagated error; they pass only on exact agreement")
    return OzCheck(k, radii, residual, err, mc_err, grid_err, nodal, conv, notes)


def _is_two_connected(g) -> bool:
    from .graphs import graph_in_class

    return graph_in_class(g, GraphClass.TWO_CONNECTED)
