"""Density-series coefficients assembled from graph activities."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .graphs import ColoredGraph, GraphClass, class_iso, count_graphs
from .integrals import MayerEstimate, McConfig, combine, zeta_bullet
from .potentials import PairPotential
from .series import FormalSeries

NORMALIZATIONS = ("oz", "literal")


class ExpansionError(ValueError):
    pass


def _check_norm(normalization: str) -> None:
    if normalization not in NORMALIZATIONS:
        raise ExpansionError(f"normalization must be one of {NORMALIZATIONS}")


def h_prefactor(n: int, k: int, normalization: str = "oz") -> Fraction:
    """1/k! (OZ-consistent) or 1/(n! k!) (as the h^(n) series is usually printed)."""
    _check_norm(normalization)
    if normalization == "literal":
        return Fraction(1, math.factorial(n) * math.factorial(k))
    return Fraction(1, math.factorial(k))


def radial_anchors(r: float, n: int, d: int) -> np.ndarray:
    """White positions: first at the origin, second at distance r on the x axis."""
    pts = np.zeros((n, d))
    if n >= 2:
        pts[1, 0] = r
    return pts


class GraphSum:
    """Per-iso-class activities, evaluated once and shared between coefficients.

    Each iso class draws its own random stream, so estimates of distinct
    classes are independent and their errors add in quadrature.
    """

    def __init__(self, p: PairPotential, cfg: McConfig | None = None, method: str = "auto"):
        self.p = p
        self.cfg = cfg or McConfig()
        self.method = method
        self._cache: dict[tuple, MayerEstimate] = {}

    def estimate(self, g: ColoredGraph, anchors: np.ndarray, tag: int = 0) -> MayerEstimate:
        key = (g.n_white, g.n_black, g.mask, tag, anchors.tobytes())
        if key not in self._cache:
            stream = (g.n_white, g.n_black, g.mask, tag)
            self._cache[key] = zeta_bullet(g, anchors, self.p, self.cfg, method=self.method, stream=stream)
        return self._cache[key]

    def class_terms(self, n: int, k: int, cls: GraphClass, anchors: np.ndarray, tag: int = 0):
        return [(self.estimate(rep, anchors, tag), mult) for rep, mult in class_iso(n, k, cls)]

    def class_sum(self, n: int, k: int, cls: GraphClass, anchors: np.ndarray, tag: int = 0) -> MayerEstimate:
        return combine(self.class_terms(n, k, cls, anchors, tag))


def _anchor_array(anchors, n: int, p: PairPotential) -> np.ndarray:
    pts = np.asarray(anchors, dtype=float)
    if p.d == 1 and pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape != (n, p.d):
        raise ExpansionError(f"expected {n} anchors in R^{p.d}")
    return pts


def h_coefficient(n: int, k: int, anchors, p: PairPotential, cfg: McConfig | None = None, *,
                  normalization: str = "oz", method: str = "auto", engine: GraphSum | None = None,
                  tag: int = 0) -> MayerEstimate:
    """Order-k coefficient of h^(n) at the given white positions."""
    if n < 2:
        raise ExpansionError("h_coefficient needs n >= 2")
    count_graphs(n, k, GraphClass.ARTICULATION_FREE)  # cap check
    engine = engine or GraphSum(p, cfg, method)
    pts = _anchor_array(anchors, n, p)
    return engine.class_sum(n, k, GraphClass.ARTICULATION_FREE, pts, tag).scaled(h_prefactor(n, k, normalization))


def c2_coefficient(k: int, anchors, p: PairPotential, cfg: McConfig | None = None, *,
                   method: str = "auto", engine: GraphSum | None = None, tag: int = 0) -> MayerEstimate:
    """Order-k coefficient of the direct correlation function (two-connected graphs, 1/k!)."""
    count_graphs(2, k, GraphClass.TWO_CONNECTED)
    engine = engine or GraphSum(p, cfg, method)
    pts = _anchor_array(anchors, 2, p)
    return engine.class_sum(2, k, GraphClass.TWO_CONNECTED, pts, tag).scaled(Fraction(1, math.factorial(k)))


def virial_beta(m: int, p: PairPotential, cfg: McConfig | None = None, *, method: str = "auto",
                engine: GraphSum | None = None) -> MayerEstimate:
    """beta_m = (1/m!) sum over two-connected graphs on m+1 vertices, one pinned at the origin."""
    if m < 1:
        raise ExpansionError("virial index m starts at 1")
    count_graphs(1, m, GraphClass.TWO_CONNECTED)
    engine = engine or GraphSum(p, cfg, method)
    pts = np.zeros((1, p.d))
    return engine.class_sum(1, m, GraphClass.TWO_CONNECTED, pts).scaled(Fraction(1, math.factorial(m)))


# ---------------------------------------------------------------------------
# coefficient tables


@dataclass
class CoefficientTable:
    """Per-order coefficients; scalar for ``virial``, sampled on radii otherwise."""

    target: str  # "h2", "c2" or "virial" (also "h<n>")
    max_order: int
    radii: tuple[float, ...] = ()
    entries: dict[int, list[MayerEstimate]] = field(default_factory=dict)
    graph_counts: dict[int, int] = field(default_factory=dict)
    normalization: str = "oz"
    provenance: dict = field(default_factory=dict)

    @property
    def is_scalar(self) -> bool:
        return self.target == "virial"

    def order(self, k: int) -> list[MayerEstimate]:
        try:
            return self.entries[k]
        except KeyError:
            raise ExpansionError(f"table has no order {k}") from None

    def values(self, k: int) -> np.ndarray:
        return np.array([e.value for e in self.order(k)])

    def errors(self, k: int) -> np.ndarray:
        return np.array([e.std_error for e in self.order(k)])

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "max_order": self.max_order,
            "radii": list(self.radii),
            "normalization": self.normalization,
            "conventions": {
                "oz": "h^(n) order k carries 1/k!; c^(2) order k carries 1/k!",
                "literal": "h^(n) order k carries 1/(n! k!); c^(2) order k carries 1/k!",
            },
            "graph_counts": {str(k): v for k, v in sorted(self.graph_counts.items())},
            "entries": {str(k): [e.to_dict() for e in v] for k, v in sorted(self.entries.items())},
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> CoefficientTable:
        data = json.loads(text)
        return cls(
            target=data["target"],
            max_order=int(data["max_order"]),
            radii=tuple(data["radii"]),
            entries={int(k): [MayerEstimate.from_dict(e) for e in v] for k, v in data["entries"].items()},
            graph_counts={int(k): int(v) for k, v in data["graph_counts"].items()},
            normalization=data.get("normalization", "oz"),
            provenance=data.get("provenance", {}),
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "r", "value", "std_error"])
        for k in sorted(self.entries):
            radii = self.radii if not self.is_scalar else ("",)
            for r, e in zip(radii, self.entries[k]):
                w.writerow([k, repr(float(r)) if r != "" else "", repr(e.value), repr(e.std_error)])
        return buf.getvalue()


def _target_class(target: str) -> tuple[int, GraphClass]:
    if target == "c2":
        return 2, GraphClass.TWO_CONNECTED
    if target == "virial":
        return 1, GraphClass.TWO_CONNECTED
    if target.startswith("h"):
        return int(target[1:] or 2), GraphClass.ARTICULATION_FREE
    raise ExpansionError(f"unknown table target {target!r}")


def build_table(target: str, max_order: int, p: PairPotential, cfg: McConfig | None = None, *,
                radii: Sequence[float] = (), normalization: str = "oz", method: str = "auto",
                engine: GraphSum | None = None, orders: Sequence[int] | None = None) -> CoefficientTable:
    cfg = cfg or McConfig()
    engine = engine or GraphSum(p, cfg, method)
    n, cls = _target_class(target)
    table = CoefficientTable(target, max_order, tuple(float(r) for r in radii), normalization=normalization,
                             provenance={"potential": p.to_dict(), "mc": cfg.to_dict(), "method": method})
    for k in orders if orders is not None else range(max_order + 1):
        if target == "virial":
            if k == 0:
                continue
            table.entries[k] = [virial_beta(k, p, engine=engine)]
            table.graph_counts[k] = count_graphs(1, k, cls)
            continue
        row = []
        for i, r in enumerate(table.radii):
            pts = radial_anchors(r, n, p.d)
            if target == "c2":
                row.append(c2_coefficient(k, pts, p, engine=engine, tag=i))
            else:
                row.append(h_coefficient(n, k, pts, p, engine=engine, normalization=normalization, tag=i))
        table.entries[k] = row
        table.graph_counts[k] = count_graphs(n, k, cls)
    return table


# ---------------------------------------------------------------------------
# evaluating a truncated series


@dataclass(frozen=True)
class SeriesValue:
    value: float | np.ndarray
    tail_estimate: float | np.ndarray
    std_error: float | np.ndarray
    tail_reliable: bool
    note: str = ""


def geometric_tail(contributions: Sequence[float], last: int = 4) -> tuple[float, bool, str]:
    """Fit |a_k| ~ C e^{-ck} over the trailing orders and sum the fitted tail."""
    a = np.abs(np.asarray(contributions, dtype=float))
    K = len(a) - 1
    if not np.any(a):
        return 0.0, True, "all coefficients vanish"
    use = min(last, K)
    if use < 2:
        return 0.0, False, "too few orders"
    ks = np.arange(K - use + 1, K + 1)
    vals = a[ks]
    mask = vals > 0
    if mask.sum() < 2:
        return 0.0, False, "too few nonzero orders"
    slope, intercept = np.polyfit(ks[mask], np.log(vals[mask]), 1)
    rate = -slope
    if rate <= 0:
        return float("inf"), False, "fitted decay rate is not positive"
    C = math.exp(intercept)
    tail = C * math.exp(-rate * (K + 1)) / (1 - math.exp(-rate))
    return tail, True, ""


def series_eval(table: CoefficientTable, rho: float, K: int | None = None, anchor: int | None = None) -> SeriesValue:
    """Sum rho^k coeff_k for k <= K with a fitted geometric tail estimate."""
    if not table.entries:
        raise ExpansionError("empty coefficient table")
    if rho <= 0:
        raise ExpansionError("rho must be positive")
    K = table.max_order if K is None else K
    orders = [k for k in range(K + 1) if k in table.entries]
    if not orders:
        raise ExpansionError("table has no orders up to K")
    missing = [k for k in range(min(orders), K + 1) if k not in table.entries]
    if missing:
        raise ExpansionError(f"table is missing orders {missing}")
    width = 1 if table.is_scalar else len(table.radii)
    idx = range(width) if anchor is None else [anchor]
    values, tails, errs = [], [], []
    reliable = True
    notes = set()
    for i in idx:
        contrib = []
        for k in range(K + 1):
            e = table.entries[k][i] if k in table.entries else None
            contrib.append(rho**k * e.value if e is not None else 0.0)
        errs.append(math.sqrt(sum((rho**k * table.entries[k][i].std_error) ** 2 for k in orders)))
        values.append(sum(contrib))
        tail, ok, note = geometric_tail(contrib)
        tails.append(tail)
        reliable &= ok
        if note:
            notes.add(note)
    if len(values) == 1:
        return SeriesValue(values[0], tails[0], errs[0], reliable, "; ".join(sorted(notes)))
    return SeriesValue(np.array(values), np.array(tails), np.array(errs), reliable, "; ".join(sorted(notes)))


# ---------------------------------------------------------------------------
# one-body identities


@dataclass
class LinearForm:
    """Coefficient written as a weighted sum of per-graph activities."""

    weights: dict[tuple, Fraction] = field(default_factory=dict)
    constant: Fraction = Fraction(0)

    def add(self, key: tuple, w: Fraction) -> None:
        self.weights[key] = self.weights.get(key, Fraction(0)) + w


def _activity_forms(K: int) -> list[LinearForm]:
    """rho/z = sum_j z^j (1/j!) sum over connected graphs with one white and j blacks."""
    forms = [LinearForm(constant=Fraction(1))]
    for j in range(1, K):
        lf = LinearForm()
        for rep, mult in class_iso(1, j, GraphClass.CONNECTED):
            lf.add((1, j, rep.mask), Fraction(mult, math.factorial(j)))
        forms.append(lf)
    return forms


def _virial_forms(K: int) -> list[LinearForm]:
    forms = [LinearForm()]
    for m in range(1, K + 1):
        lf = LinearForm()
        for rep, mult in class_iso(1, m, GraphClass.TWO_CONNECTED):
            lf.add((1, m, rep.mask), Fraction(mult, math.factorial(m)))
        forms.append(lf)
    return forms


def _evaluate_forms(forms: Sequence[LinearForm], values: dict[tuple, object]) -> list:
    out = []
    for lf in forms:
        total = lf.constant
        for key, w in lf.weights.items():
            total = total + w * values[key]
        out.append(total)
    return out


def _graph_values(keys, p: PairPotential, cfg: McConfig, method: str) -> dict[tuple, MayerEstimate]:
    engine = GraphSum(p, cfg, method)
    origin = np.zeros((1, p.d))
    return {key: engine.estimate(ColoredGraph(key[0], key[1], key[2]), origin) for key in keys}


def activity_series(K: int, p: PairPotential, cfg: McConfig | None = None, *, method: str = "auto") -> FormalSeries:
    """rho(z)/z as a formal series in the activity, orders 0..K-1."""
    if K < 1:
        raise ExpansionError("K must be >= 1")
    forms = _activity_forms(K)
    keys = {key for lf in forms for key in lf.weights}
    est = _graph_values(keys, p, cfg or McConfig(), method)
    exact = all(e.rational is not None for e in est.values())
    vals = {k: (e.rational if exact else e.value) for k, e in est.items()}
    coeffs = _evaluate_forms(forms, vals)
    if not exact:
        coeffs = [float(c) for c in coeffs]
    return FormalSeries(coeffs, "z")


def _dissymmetry_residual(K: int, act: list, betas: list) -> list:
    S = FormalSeries(act, "z")
    L = S.log()
    rho = FormalSeries([act[0] * 0] + list(act[:K]), "z")  # z * (rho/z)
    R = FormalSeries([act[0] * 0] * (K + 1), "z")
    power = FormalSeries([act[0] * 0 + 1] + [act[0] * 0] * K, "z")
    for m in range(1, K + 1):
        power = power * rho
        R = R + power * betas[m]
    return list((L - R).coefficients)


@dataclass(frozen=True)
class DissymmetryReport:
    residuals: tuple
    std_errors: tuple[float, ...]
    exact: bool

    @property
    def passes(self) -> bool:
        if self.exact:
            return all(r == 0 for r in self.residuals)
        return all(abs(float(r)) <= 4 * s + 1e-12 for r, s in zip(self.residuals, self.std_errors))

    def to_dict(self) -> dict:
        return {"residuals": [str(r) if self.exact else float(r) for r in self.residuals],
                "std_errors": list(self.std_errors), "exact": self.exact, "pass": self.passes}


def dissymmetry_check(K: int, p: PairPotential, cfg: McConfig | None = None, *, method: str = "auto") -> DissymmetryReport:
    """Residuals of log(rho/z) - sum_m beta_m rho^m, coefficient-wise in z, orders 0..K."""
    act_forms = _activity_forms(K + 1)
    vir_forms = _virial_forms(K)
    keys = sorted({key for lf in act_forms + vir_forms for key in lf.weights})
    est = _graph_values(keys, p, cfg or McConfig(), method)
    exact = all(e.rational is not None for e in est.values())
    if exact:
        vals = {k: e.rational for k, e in est.items()}
        res = _dissymmetry_residual(K, _evaluate_forms(act_forms, vals), _evaluate_forms(vir_forms, vals))
        return DissymmetryReport(tuple(res), tuple(0.0 for _ in res), True)

    def residual_of(x: np.ndarray) -> np.ndarray:
        vals = {k: float(v) for k, v in zip(keys, x)}
        act = [float(a) for a in _evaluate_forms(act_forms, vals)]
        bet = [float(b) for b in _evaluate_forms(vir_forms, vals)]
        return np.array(_dissymmetry_residual(K, act, bet), dtype=float)

    x0 = np.array([est[k].value for k in keys])
    se = np.array([est[k].std_error for k in keys])
    res = residual_of(x0)
    var = np.zeros_like(res)
    for i in range(len(keys)):
        if se[i] == 0:
            continue
        h = 1e-6 * max(1.0, abs(x0[i]))
        xp, xm = x0.copy(), x0.copy()
        xp[i] += h
        xm[i] -= h
        grad = (residual_of(xp) - residual_of(xm)) / (2 * h)
        var += (grad * se[i]) ** 2
    return DissymmetryReport(tuple(float(r) for r in res), tuple(float(s) for s in np.sqrt(var)), False)


def coefficient_function(order: int, kind: str, p: PairPotential, radii: Sequence[float],
                         cfg: McConfig | None = None, engine: GraphSum | None = None,
                         closed_form: Callable | None = None) -> list[MayerEstimate]:
    """Order-``order`` coefficient of h^(2) (``kind='h'``) or c^(2) (``kind='c'``) on radii."""
    engine = engine or GraphSum(p, cfg)
    out = []
    for i, r in enumerate(radii):
        pts = radial_anchors(r, 2, p.d)
        if kind == "h":
            out.append(h_coefficient(2, order, pts, p, engine=engine, tag=i))
        elif kind == "c":
            out.append(c2_coefficient(order, pts, p, engine=engine, tag=i))
        else:
            raise ExpansionError("kind must be 'h' or 'c'")
    return out


# ---------------------------------------------------------------------------
# per-order decay of the density series


@dataclass
class TailDecayReport:
    rho: float
    orders: tuple[int, ...]
    contributions: tuple[float, ...]  # rho^k sup_r |h_k(r)|
    errors: tuple[float, ...]         # MC error at the maximizing radius, times rho^k

    @property
    def passes(self) -> bool:
        pairs = zip(zip(self.contributions, self.errors), zip(self.contributions[1:], self.errors[1:]))
        return all(b < a + 4 * math.hypot(ea, eb) for (a, ea), (b, eb) in pairs)

    def to_dict(self) -> dict:
        return {"rho": self.rho, "orders": list(self.orders), "contribution": list(self.contributions),
                "std_error": list(self.errors), "pass": self.passes}


def tail_decay(p: PairPotential, rho_c: float = 0.05, orders: Sequence[int] = (1, 2, 3),
               radii: Sequence[float] | None = None, cfg: McConfig | None = None) -> TailDecayReport:
    """Contributions rho^k ||h_k||_inf of the pair-correlation series at rho C(beta) = rho_c."""
    from .potentials import c_beta

    rho = rho_c / c_beta(p)
    if radii is None:
        radii = [p.sigma * x for x in np.arange(0.0, 3.01, 0.25) if abs(x - 1) > 1e-9 and abs(x - 2) > 1e-9]
    engine = GraphSum(p, cfg or McConfig())
    contrib, errs = [], []
    for k in orders:
        row = [h_coefficient(2, k, radial_anchors(r, 2, p.d), p, engine=engine, tag=i) for i, r in enumerate(radii)]
        vals = np.abs([e.value for e in row])
        i = int(np.argmax(vals))
        contrib.append(float(rho**k * vals[i]))
        errs.append(float(rho**k * row[i].std_error))
    return TailDecayReport(rho, tuple(orders), tuple(contrib), tuple(errs))
