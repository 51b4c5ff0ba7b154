"""Exact rational integration of hard-rod Mayer graphs in one dimension.

For rods of unit length every bond is ``-1`` on ``|x_i - x_j| < 1`` and zero
outside, so a graph integral is ``(-1)^{|E|}`` times the volume of a polytope
cut out by difference constraints.  The volume is computed by eliminating one
coordinate at a time: for each choice of active lower and upper bound the
integrand (a polynomial with rational coefficients) is integrated in closed
form and the remaining region is again a polytope.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .graphs import ColoredGraph

Affine = tuple  # (c_0, ..., c_{m-1}, const), meaning sum c_i x_i + const
Poly = dict  # {exponent tuple: Fraction}


class UnboundedRegion(ValueError):
    pass


def _poly_const(c, m: int) -> Poly:
    return {(0,) * m: Fraction(c)} if c else {}


def _poly_add(a: Poly, b: Poly, sign: int = 1) -> Poly:
    out = dict(a)
    for e, c in b.items():
        v = out.get(e, 0) + sign * c
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


def _poly_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            v = out.get(e, 0) + ca * cb
            if v:
                out[e] = v
            else:
                out.pop(e, None)
    return out


def _affine_as_poly(form: Affine, m: int) -> Poly:
    out: Poly = {}
    for i in range(m):
        if form[i]:
            e = [0] * m
            e[i] = 1
            out[tuple(e)] = Fraction(form[i])
    if form[m]:
        out[(0,) * m] = Fraction(form[m])
    return out


def _antiderivative_at(poly: Poly, m: int, bound: Affine) -> Poly:
    """Integrate ``poly`` in its last variable and substitute ``bound``.

    ``poly`` lives on ``m`` variables, the result on ``m - 1``.
    """
    sub = _affine_as_poly(bound, m - 1)
    powers: list[Poly] = [_poly_const(1, m - 1)]
    out: Poly = {}
    for e, c in poly.items():
        p = e[-1] + 1
        while len(powers) <= p:
            powers.append(_poly_mul(powers[-1], sub))
        term = {tuple(e[:-1]): c / p}
        out = _poly_add(out, _poly_mul(term, powers[p]))
    return out


def _normalize(form: Affine) -> Affine:
    """Scale so the leading nonzero coefficient is +-1, keeping the inequality sense."""
    for c in form[:-1]:
        if c:
            s = abs(c)
            return tuple(x / s for x in form)
    return form


def integrate_polytope(poly: Poly, constraints: Sequence[Affine], m: int) -> Fraction:
    """Integral of ``poly`` over ``{x in R^m : a(x) >= 0 for a in constraints}``."""
    if m == 0:
        if all(a[0] >= 0 for a in constraints):
            return poly.get((), Fraction(0))
        return Fraction(0)
    lowers, uppers, others = [], [], set()
    for a in constraints:
        c = a[m - 1]
        rest = a[: m - 1] + (a[m],)
        if c > 0:
            lowers.append(tuple(-x / c for x in rest))
        elif c < 0:
            uppers.append(tuple(x / -c for x in rest))
        else:
            if any(rest[:-1]):
                others.add(_normalize(rest))
            elif rest[-1] < 0:
                return Fraction(0)
    if not lowers or not uppers:
        raise UnboundedRegion("integration region is unbounded")
    lowers = sorted(set(lowers))
    uppers = sorted(set(uppers))
    total = Fraction(0)
    for i, lo in enumerate(lowers):
        for j, up in enumerate(uppers):
            branch = set(others)
            feasible = True
            new = [tuple(a - b for a, b in zip(lo, l2)) for l2 in lowers if l2 != lo]
            new += [tuple(a - b for a, b in zip(u2, up)) for u2 in uppers if u2 != up]
            new.append(tuple(a - b for a, b in zip(up, lo)))
            for form in new:
                if any(form[:-1]):
                    branch.add(_normalize(form))
                elif form[-1] < 0:
                    feasible = False
                    break
            if not feasible:
                continue
            integrand = _poly_add(_antiderivative_at(poly, m, up), _antiderivative_at(poly, m, lo), -1)
            if not integrand:
                continue
            total += integrate_polytope(integrand, _prune(branch, m - 1), m - 1)
    return total


def _prune(forms: set, m: int) -> list[Affine]:
    """Drop constraints implied by another with identical slope and a looser offset."""
    best: dict[tuple, Fraction] = {}
    for f in forms:
        key = f[:-1]
        if key not in best or f[-1] < best[key]:
            best[key] = f[-1]
    return [k + (v,) for k, v in best.items()]


def hard_rod_graph_integral(g: ColoredGraph, anchors: Sequence[Fraction]) -> Fraction:
    """Exact integral of the product of bonds of ``g`` over black positions.

    Lengths are in units of the rod length; ``anchors`` are the white
    positions.  Returns a rational number.
    """
    anchors = [Fraction(a) for a in anchors]
    if len(anchors) != g.n_white:
        raise ValueError("need one anchor per white vertex")
    n, m = g.n_white, g.n_black
    sign = -1 if len(g.edges) % 2 else 1
    constraints: list[Affine] = []
    for i, j in g.edges:
        if i <= n and j <= n:
            if abs(anchors[i - 1] - anchors[j - 1]) >= 1:
                return Fraction(0)
            continue
        # |x_j - y| < 1 as two half-spaces
        form = [Fraction(0)] * (m + 1)
        if i <= n:
            form[j - n - 1] = Fraction(1)
            form[m] = -anchors[i - 1]
        else:
            form[i - n - 1] = Fraction(1)
            form[j - n - 1] = Fraction(-1)
        constraints.append(tuple(form[:m]) + (form[m] + 1,))
        constraints.append(tuple(-x for x in form[:m]) + (1 - form[m],))
    if m == 0:
        return Fraction(sign)
    vol = integrate_polytope(_poly_const(1, m), _prune(set(constraints), m), m)
    return sign * vol
