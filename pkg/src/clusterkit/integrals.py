"""Graph activities: integrals of Mayer-bond products over black positions.

``zeta_bullet`` integrates the product of bonds of a graph over the positions
of its black vertices with the white vertices pinned at ``anchors``.  Small
cases are done in closed form; everything else goes through a tree-structured
importance sampler whose proposal follows a spanning tree of the graph.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exact1d import hard_rod_graph_integral
from .graphs import ColoredGraph, GraphDomainError
from .potentials import Kind, PairPotential, ball_volume, c_beta, mayer_f

DEFAULT_CHUNK = 1 << 15
EXACT_1D_MAX_BLACK = 3


class Method(enum.Enum):
    ANALYTIC = "analytic"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte_carlo"


class Proposal(enum.Enum):
    CORE_BALL = "core_ball"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class McConfig:
    seed: int = 0
    n_samples: int = 100_000
    proposal: Proposal = Proposal.CORE_BALL
    stratify_by_vertex: bool = False
    chunk: int = DEFAULT_CHUNK

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def with_samples(self, n_samples: int) -> McConfig:
        return McConfig(self.seed, n_samples, self.proposal, self.stratify_by_vertex, self.chunk)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "n_samples": self.n_samples, "proposal": self.proposal.value,
                "stratify_by_vertex": self.stratify_by_vertex, "chunk": self.chunk}


@dataclass(frozen=True)
class MayerEstimate:
    value: float
    std_error: float = 0.0
    n_samples: int = 0
    method: Method = Method.ANALYTIC
    exact: bool = True
    rational: Fraction | None = None
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be >= 0")
        if self.exact and self.std_error != 0:
            raise ValueError("exact estimates carry no statistical error")

    @classmethod
    def exact_value(cls, value, method: Method = Method.ANALYTIC) -> MayerEstimate:
        if isinstance(value, (Fraction, int)):
            return cls(float(value), 0.0, 0, method, True, Fraction(value))
        return cls(float(value), 0.0, 0, method, True)

    def scaled(self, factor) -> MayerEstimate:
        rational = None
        if self.rational is not None and isinstance(factor, (Fraction, int)):
            rational = self.rational * factor
        return MayerEstimate(float(self.value * factor), abs(float(factor)) * self.std_error, self.n_samples,
                             self.method, self.exact, rational, self.flags)

    def to_dict(self) -> dict:
        out = {"value": self.value, "std_error": self.std_error, "n_samples": self.n_samples,
               "method": self.method.value, "exact": self.exact}
        if self.rational is not None:
            out["rational"] = str(self.rational)
        if self.flags:
            out["flags"] = list(self.flags)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> MayerEstimate:
        rational = Fraction(data["rational"]) if "rational" in data else None
        return cls(float(data["value"]), float(data["std_error"]), int(data["n_samples"]),
                   Method(data["method"]), bool(data["exact"]), rational, tuple(data.get("flags", ())))


def combine(terms: Sequence[tuple[MayerEstimate, float | Fraction]]) -> MayerEstimate:
    """Weighted sum of independent estimates; errors add in quadrature."""
    value = 0.0
    var = 0.0
    n = 0
    exact = True
    rational: Fraction | None = Fraction(0)
    methods = set()
    flags: set[str] = set()
    for est, w in terms:
        value += float(w) * est.value
        var += (float(w) * est.std_error) ** 2
        n += est.n_samples
        exact &= est.exact
        methods.add(est.method)
        flags.update(est.flags)
        if rational is not None and est.rational is not None and isinstance(w, (int, Fraction)):
            rational += w * est.rational
        else:
            rational = None
    if rational is not None:
        value = float(rational)
    if Method.MONTE_CARLO in methods:
        method = Method.MONTE_CARLO
    elif Method.QUADRATURE in methods:
        method = Method.QUADRATURE
    else:
        method = Method.ANALYTIC
    return MayerEstimate(value, math.sqrt(var), n, method, exact, rational if exact else None, tuple(sorted(flags)))


def finite_volume_factor(N: int, volume: float, n: int) -> float:
    """N(N-1)...(N-n+1) / volume^n, and 0 when n > N."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if volume <= 0:
        raise ValueError("volume must be positive")
    if n > N:
        return 0.0
    out = 1.0
    for i in range(n):
        out *= (N - i) / volume
    return out


# ---------------------------------------------------------------------------
# closed forms


def overlap_volume(r: float, radius: float, d: int) -> float:
    """Volume of the intersection of two d-balls of equal radius at distance r."""
    if r >= 2 * radius:
        return 0.0
    if d == 1:
        return 2 * radius - r
    if d == 3:
        return math.pi * (4 * radius + r) * (2 * radius - r) ** 2 / 12.0
    raise ValueError("d must be 1 or 3")


def _as_points(anchors, d: int) -> np.ndarray:
    pts = np.asarray(anchors, dtype=float)
    if d == 1 and pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[1] != d:
        raise GraphDomainError(f"anchors must be points in R^{d}")
    return pts


def _dist(a: np.ndarray, b: np.ndarray, box: float | None) -> np.ndarray:
    diff = a - b
    if box is not None:
        diff = diff - box * np.round(diff / box)
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _white_factor(g: ColoredGraph, pts: np.ndarray, p: PairPotential, box: float | None) -> float:
    out = 1.0
    n = g.n_white
    for i, j in g.edges:
        if i <= n and j <= n:
            out *= mayer_f(p, float(_dist(pts[i - 1], pts[j - 1], box)))
    return out


def _single_bond_integral(p: PairPotential) -> tuple[float, Method]:
    if p.kind in (Kind.HARD_ROD, Kind.HARD_SPHERE):
        return -ball_volume(p.sigma, p.d), Method.ANALYTIC
    if p.kind is Kind.SQUARE_WELL:
        shell = ball_volume(p.lambda_range * p.sigma, p.d) - ball_volume(p.sigma, p.d)
        return -ball_volume(p.sigma, p.d) + p.well_bond * shell, Method.ANALYTIC
    from scipy import integrate

    measure = (lambda r: 2.0) if p.d == 1 else (lambda r: 4 * math.pi * r * r)
    pts = sorted(set(p.table_r))
    val = 0.0
    for a, b in zip(pts, pts[1:]):
        val += integrate.quad(lambda r: mayer_f(p, r) * measure(r), a, b, epsabs=0, epsrel=1e-12)[0]
    return val, Method.QUADRATURE


def _closed_form(g: ColoredGraph, pts: np.ndarray, p: PairPotential, box: float | None):
    """Closed-form value when one is available, else ``None``."""
    if g.n_black == 0:
        return _white_factor(g, pts, p, box), Method.ANALYTIC
    if g.n_black != 1 or box is not None:
        return None
    black = g.n_vertices
    nbrs = sorted(g.adjacency[black])
    wf = _white_factor(g, pts, p, box)
    if len(nbrs) == 1:
        val, method = _single_bond_integral(p)
        return wf * val, method
    if len(nbrs) == 2 and p.kind in (Kind.HARD_ROD, Kind.HARD_SPHERE):
        r = float(_dist(pts[nbrs[0] - 1], pts[nbrs[1] - 1], None))
        return wf * overlap_volume(r, p.sigma, p.d), Method.ANALYTIC
    return None


def _exact_1d(g: ColoredGraph, anchors, p: PairPotential) -> Fraction:
    sigma = Fraction(p.sigma)
    xs = [Fraction(float(a)) / sigma for a in np.ravel(np.asarray(anchors, dtype=float))]
    return hard_rod_graph_integral(g, xs) * sigma**g.n_black


# ---------------------------------------------------------------------------
# Monte Carlo


def spanning_tree(g: ColoredGraph) -> list[tuple[int, int]]:
    """(black, parent) pairs in placement order, breadth first from the whites."""
    placed = set(g.whites)
    order: list[tuple[int, int]] = []
    frontier = sorted(g.whites)
    while frontier:
        nxt = []
        for u in frontier:
            for w in sorted(g.adjacency[u]):
                if w not in placed:
                    placed.add(w)
                    order.append((w, u))
                    nxt.append(w)
        frontier = nxt
    if len(placed) != g.n_vertices:
        raise GraphDomainError("graph is not connected")
    return order


@dataclass(frozen=True)
class _RadialMixture:
    """Piecewise-constant radial density proportional to |f|."""
    edges: tuple[float, ...]
    probs: tuple[float, ...]
    density: tuple[float, ...]  # proposal density value inside each shell


def _mixture(p: PairPotential) -> _RadialMixture:
    d = p.d
    if p.kind in (Kind.HARD_ROD, Kind.HARD_SPHERE):
        vol = ball_volume(p.sigma, d)
        return _RadialMixture((0.0, p.sigma), (1.0,), (1.0 / vol,))
    if p.kind is Kind.SQUARE_WELL:
        core = ball_volume(p.sigma, d)
        shell = ball_volume(p.lambda_range * p.sigma, d) - core
        wb = abs(p.well_bond)
        if wb == 0:
            return _RadialMixture((0.0, p.sigma), (1.0,), (1.0 / core,))
        total = core + wb * shell
        return _RadialMixture((0.0, p.sigma, p.lambda_range * p.sigma),
                              (core / total, wb * shell / total), (1.0 / total, wb / total))
    vol = ball_volume(p.range, d)
    return _RadialMixture((0.0, p.range), (1.0,), (1.0 / vol,))


def _unit_directions(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    if d == 1:
        return np.where(rng.random(n) < 0.5, -1.0, 1.0)[:, None]
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _uniforms(rng: np.random.Generator, n: int, stratify: bool) -> np.ndarray:
    if not stratify:
        return rng.random(n)
    return (rng.permutation(n) + rng.random(n)) / n


def _sample_displacements(rng, n, p, mix, proposal, stratify):
    """Draw displacements and their proposal densities."""
    d = p.d
    if proposal is Proposal.GAUSSIAN:
        s = 0.5 * p.range
        disp = rng.standard_normal((n, d)) * s
        dens = np.exp(-0.5 * np.sum(disp * disp, axis=1) / s**2) / (2 * math.pi * s * s) ** (d / 2)
        return disp, dens
    u_shell = rng.random(n)
    u_rad = _uniforms(rng, n, stratify)
    cum = np.cumsum(mix.probs)
    shell = np.minimum(np.searchsorted(cum, u_shell * cum[-1], side="right"), len(mix.probs) - 1)
    r_in = np.asarray(mix.edges[:-1])[shell]
    r_out = np.asarray(mix.edges[1:])[shell]
    r = (r_in**d + u_rad * (r_out**d - r_in**d)) ** (1.0 / d)
    disp = _unit_directions(rng, n, d) * r[:, None]
    return disp, np.asarray(mix.density)[shell]


def _stream_key(g: ColoredGraph) -> tuple[int, ...]:
    return (g.n_white, g.n_black, g.mask)


def monte_carlo(
    g: ColoredGraph,
    pts: np.ndarray,
    p: PairPotential,
    cfg: McConfig,
    stream: tuple[int, ...] = (),
    box: float | None = None,
) -> MayerEstimate:
    """Importance-sampled estimate of the graph integral.

    Each chunk draws from its own generator seeded by ``(seed, stream, chunk)``
    so the result does not depend on how chunks are scheduled.
    """
    tree = spanning_tree(g)
    mix = _mixture(p)
    if box is not None and 2 * p.range >= box:
        raise GraphDomainError("torus must be wider than twice the interaction range")
    n = g.n_white
    key = stream or _stream_key(g)
    total = 0.0
    mean = 0.0
    m2 = 0.0
    n_chunks = -(-cfg.n_samples // cfg.chunk)
    for c in range(n_chunks):
        size = min(cfg.chunk, cfg.n_samples - c * cfg.chunk)
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(*key, c)))
        pos: dict[int, np.ndarray] = {i + 1: np.broadcast_to(pts[i], (size, p.d)) for i in range(n)}
        weight = np.ones(size)
        for black, parent in tree:
            disp, dens = _sample_displacements(rng, size, p, mix, cfg.proposal, cfg.stratify_by_vertex)
            pos[black] = pos[parent] + disp
            weight /= dens
        for i, j in g.edges:
            if i <= n and j <= n:
                continue
            weight *= mayer_f(p, _dist(pos[i], pos[j], box))
        if n_chunks == 1:
            mean, m2, total = float(np.mean(weight)), float(np.sum((weight - np.mean(weight)) ** 2)), size
            continue
        cm = float(np.mean(weight))
        cm2 = float(np.sum((weight - cm) ** 2))
        delta = cm - mean
        new_total = total + size
        mean += delta * size / new_total
        m2 += cm2 + delta * delta * total * size / new_total
        total = new_total
    wf = _white_factor(g, pts, p, box)
    flags: tuple[str, ...] = ()
    if total < 2 or m2 == 0.0:
        flags = ("no_variance_estimate",)
    var = m2 / (total - 1) if total > 1 else 0.0
    se = math.sqrt(var / total) if total else 0.0
    return MayerEstimate(wf * mean, abs(wf) * se, int(total), Method.MONTE_CARLO, False, None, flags)


def zeta_bullet(
    g: ColoredGraph,
    anchors,
    p: PairPotential,
    cfg: McConfig | None = None,
    *,
    method: str = "auto",
    stream: tuple[int, ...] = (),
    box: float | None = None,
) -> MayerEstimate:
    """Integral over black positions of the bond product of ``g``.

    ``method`` is ``"auto"`` (closed form when available, else Monte Carlo)
    or ``"mc"`` to force sampling.  ``box`` switches to a periodic cube of that
    side with minimum-image distances.
    """
    if not g.is_connected():
        raise GraphDomainError("zeta_bullet needs a connected graph")
    if method not in ("auto", "mc"):
        raise ValueError("method must be 'auto' or 'mc'")
    cfg = cfg or McConfig()
    pts = _as_points(anchors, p.d)
    if len(pts) != g.n_white:
        raise GraphDomainError("need one anchor per white vertex")
    if method == "auto" or g.n_black == 0:
        if p.kind is Kind.HARD_ROD and g.n_black <= EXACT_1D_MAX_BLACK and box is None:
            return MayerEstimate.exact_value(_exact_1d(g, pts[:, 0], p))
        closed = _closed_form(g, pts, p, box)
        if closed is not None:
            val, m = closed
            return MayerEstimate.exact_value(val, m)
    return monte_carlo(g, pts, p, cfg, stream, box)


def tree_bound(g: ColoredGraph, p: PairPotential) -> float:
    """Crude envelope |zeta| <= C(beta)^k * max|f|^(extra edges) for sanity checks."""
    fmax = max(1.0, abs(p.well_bond)) if p.kind is Kind.SQUARE_WELL else 1.0
    if p.kind is Kind.TABULATED:
        fmax = float(np.max(np.abs(mayer_f(p, np.linspace(0, p.range, 2001)))))
    extra = len(g.edges) - g.n_black
    return c_beta(p) ** g.n_black * fmax ** max(extra, 0)
