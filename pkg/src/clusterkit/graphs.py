"""Bicolored labeled graphs: enumeration, vertex classification, polymer sums.

Vertices carry labels ``1..n+k``; the first ``n`` are white (fixed roots),
the remaining ``k`` are black (integrated field points).  A graph is stored as
an integer bitmask over the lexicographically ordered vertex pairs
``(1,2), (1,3), ..., (1,N), (2,3), ...``.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import json
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

DEFAULT_MAX_VERTICES = 9
CANCELLATION_MAX_VERTICES = 7
ISO_MAX_BLACK = 7
_CHUNK = 1 << 18


class SizeLimitError(ValueError):
    """Requested graph size exceeds a configured enumeration cap."""


class GraphDomainError(ValueError):
    pass


class GraphClass(enum.Enum):
    ALL = "all"
    CONNECTED = "conn"
    ARTICULATION_FREE = "af"
    TWO_CONNECTED = "two"

    @classmethod
    def parse(cls, text: str | GraphClass) -> GraphClass:
        if isinstance(text, GraphClass):
            return text
        aliases = {
            "all": cls.ALL,
            "conn": cls.CONNECTED,
            "connected": cls.CONNECTED,
            "af": cls.ARTICULATION_FREE,
            "articulation_free": cls.ARTICULATION_FREE,
            "two": cls.TWO_CONNECTED,
            "two_connected": cls.TWO_CONNECTED,
            "2c": cls.TWO_CONNECTED,
        }
        try:
            return aliases[text.lower()]
        except KeyError:
            raise ValueError(f"unknown graph class {text!r}") from None


@lru_cache(maxsize=None)
def pair_table(n_vertices: int) -> tuple[tuple[int, int], ...]:
    """Vertex pairs (1-based, i < j) in bit order."""
    return tuple(itertools.combinations(range(1, n_vertices + 1), 2))


@lru_cache(maxsize=None)
def _pair_index(n_vertices: int) -> dict[tuple[int, int], int]:
    return {p: b for b, p in enumerate(pair_table(n_vertices))}


@dataclass(frozen=True)
class ColoredGraph:
    n_white: int
    n_black: int
    mask: int

    def __post_init__(self):
        if self.n_white < 1:
            raise GraphDomainError("a graph needs at least one white vertex")
        if self.n_black < 0:
            raise GraphDomainError("negative black vertex count")
        if self.n_vertices < 2:
            raise GraphDomainError("single vertices are not graphs")
        if self.mask < 0 or self.mask >> len(pair_table(self.n_vertices)):
            raise GraphDomainError("edge mask out of range")

    @classmethod
    def from_edges(cls, n_white: int, n_black: int, edges: Iterable[Sequence[int]]) -> ColoredGraph:
        nv = n_white + n_black
        index = _pair_index(nv)
        mask = 0
        for e in edges:
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise GraphDomainError(f"self-loop at vertex {i}")
            if not (1 <= i <= nv and 1 <= j <= nv):
                raise GraphDomainError(f"edge {(i, j)} outside vertex range 1..{nv}")
            mask |= 1 << index[(min(i, j), max(i, j))]
        return cls(n_white, n_black, mask)

    @property
    def n_vertices(self) -> int:
        return self.n_white + self.n_black

    @property
    def whites(self) -> frozenset[int]:
        return frozenset(range(1, self.n_white + 1))

    @property
    def blacks(self) -> frozenset[int]:
        return frozenset(range(self.n_white + 1, self.n_vertices + 1))

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        pairs = pair_table(self.n_vertices)
        return tuple(p for b, p in enumerate(pairs) if self.mask >> b & 1)

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        nbrs: dict[int, set[int]] = {v: set() for v in range(1, self.n_vertices + 1)}
        for i, j in self.edges:
            nbrs[i].add(j)
            nbrs[j].add(i)
        return {v: frozenset(s) for v, s in nbrs.items()}

    def reach(self, start: Iterable[int], removed: Iterable[int] = ()) -> set[int]:
        removed = set(removed)
        seen = {v for v in start if v not in removed}
        stack = list(seen)
        adj = self.adjacency
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen and w not in removed:
                    seen.add(w)
                    stack.append(w)
        return seen

    def components(self, removed: Iterable[int] = ()) -> list[frozenset[int]]:
        removed = set(removed)
        left = [v for v in range(1, self.n_vertices + 1) if v not in removed]
        out: list[frozenset[int]] = []
        seen: set[int] = set()
        for v in left:
            if v in seen:
                continue
            comp = self.reach([v], removed)
            seen |= comp
            out.append(frozenset(comp))
        return out

    def is_connected(self) -> bool:
        return len(self.reach([1])) == self.n_vertices

    def to_dict(self) -> dict:
        return {"n_white": self.n_white, "n_black": self.n_black, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, data: dict) -> ColoredGraph:
        return cls.from_edges(int(data["n_white"]), int(data["n_black"]), data["edges"])

    def __repr__(self) -> str:
        return f"ColoredGraph(n_white={self.n_white}, n_black={self.n_black}, edges={list(self.edges)})"


# ---------------------------------------------------------------------------
# vertex classification


def classify_vertices(g: ColoredGraph) -> tuple[frozenset[int], frozenset[int], frozenset[int]]:
    """Return ``(cutpoints, articulation, nodal)`` label sets of a connected graph.

    A cutpoint is articulation when some piece left by its removal holds no
    white vertex.  Nodal vertices are the remaining cutpoints; every piece
    they leave holds a white vertex, so they separate a pair of whites.
    """
    if not g.is_connected():
        raise GraphDomainError("classify_vertices needs a connected graph")
    whites = g.whites
    cut, art = set(), set()
    for v in range(1, g.n_vertices + 1):
        pieces = g.components(removed=[v])
        if len(pieces) < 2:
            continue
        cut.add(v)
        if any(not (p & whites) for p in pieces):
            art.add(v)
    return frozenset(cut), frozenset(art), frozenset(cut - art)


def separates_whites(g: ColoredGraph, v: int) -> bool:
    """Whether some pair of white vertices other than ``v`` has every path through ``v``."""
    others = sorted(g.whites - {v})
    for a, b in itertools.combinations(others, 2):
        if b not in g.reach([a], removed=[v]):
            return True
    return False


def graph_in_class(g: ColoredGraph, cls: GraphClass | str) -> bool:
    cls = GraphClass.parse(cls)
    if cls is GraphClass.ALL:
        return True
    if not g.is_connected():
        return False
    if cls is GraphClass.CONNECTED:
        return True
    cut, art, _ = classify_vertices(g)
    if cls is GraphClass.ARTICULATION_FREE:
        return not art
    return not cut


# ---------------------------------------------------------------------------
# enumeration


def _check_cap(n_white: int, n_black: int, max_vertices: int | None) -> int:
    cap = DEFAULT_MAX_VERTICES if max_vertices is None else max_vertices
    if n_white < 1:
        raise GraphDomainError("n_white must be >= 1")
    if n_black < 0:
        raise GraphDomainError("n_black must be >= 0")
    if n_white + n_black < 2:
        raise GraphDomainError("need at least two vertices")
    if n_white + n_black > cap:
        raise SizeLimitError(
            f"{n_white + n_black} vertices exceeds the enumeration cap of {cap} (max_vertices)"
        )
    return cap


def _adjacency_arrays(masks: np.ndarray, nv: int) -> list[np.ndarray]:
    adj = [np.zeros_like(masks) for _ in range(nv)]
    for b, (i, j) in enumerate(pair_table(nv)):
        bit = (masks >> np.uint64(b)) & np.uint64(1)
        adj[i - 1] |= bit << np.uint64(j - 1)
        adj[j - 1] |= bit << np.uint64(i - 1)
    return adj


def _reach_arrays(adj: list[np.ndarray], start: np.ndarray, allowed: int) -> np.ndarray:
    nv = len(adj)
    allowed_u = np.uint64(allowed)
    reach = start & allowed_u
    for _ in range(nv - 1):
        grown = reach.copy()
        for v in range(nv):
            if not allowed >> v & 1:
                continue
            has_v = ((reach >> np.uint64(v)) & np.uint64(1)).astype(bool)
            grown[has_v] |= adj[v][has_v] & allowed_u
        if np.array_equal(grown, reach):
            break
        reach = grown
    return reach


def _class_filter(masks: np.ndarray, n_white: int, nv: int, cls: GraphClass) -> np.ndarray:
    if cls is GraphClass.ALL:
        return np.ones(masks.shape, dtype=bool)
    full = (1 << nv) - 1
    adj = _adjacency_arrays(masks, nv)
    start = np.full(masks.shape, 1, dtype=np.uint64)
    keep = _reach_arrays(adj, start, full) == np.uint64(full)
    if cls is GraphClass.CONNECTED:
        return keep
    white_bits = (1 << n_white) - 1
    for v in range(nv):
        allowed = full & ~(1 << v)
        lowest = allowed & -allowed
        rest = _reach_arrays(adj, np.full(masks.shape, lowest, dtype=np.uint64), allowed)
        is_cut = rest != np.uint64(allowed)
        if cls is GraphClass.TWO_CONNECTED:
            keep &= ~is_cut
            continue
        seeds = white_bits & allowed
        white_reach = _reach_arrays(adj, np.full(masks.shape, seeds, dtype=np.uint64), allowed)
        keep &= ~(is_cut & (white_reach != np.uint64(allowed)))
    return keep


def _iter_class_masks(n_white: int, n_black: int, cls: GraphClass) -> Iterator[np.ndarray]:
    nv = n_white + n_black
    n_masks = 1 << len(pair_table(nv))
    for lo in range(0, n_masks, _CHUNK):
        masks = np.arange(lo, min(lo + _CHUNK, n_masks), dtype=np.uint64)
        yield masks[_class_filter(masks, n_white, nv, cls)]


def enumerate_graphs(
    n_white: int,
    n_black: int,
    graph_class: GraphClass | str = GraphClass.ALL,
    max_vertices: int | None = None,
) -> Iterator[ColoredGraph]:
    """Yield every labeled graph of the class once, in increasing edge-mask order."""
    _check_cap(n_white, n_black, max_vertices)
    cls = GraphClass.parse(graph_class)
    for chunk in _iter_class_masks(n_white, n_black, cls):
        for m in chunk.tolist():
            yield ColoredGraph(n_white, n_black, int(m))


def count_graphs(
    n_white: int,
    n_black: int,
    graph_class: GraphClass | str = GraphClass.ALL,
    max_vertices: int | None = None,
) -> int:
    _check_cap(n_white, n_black, max_vertices)
    cls = GraphClass.parse(graph_class)
    if cls is GraphClass.ALL:
        return 1 << len(pair_table(n_white + n_black))
    return _cached_count(n_white, n_black, cls)


@lru_cache(maxsize=None)
def _cached_count(n_white: int, n_black: int, cls: GraphClass) -> int:
    return sum(int(c.size) for c in _iter_class_masks(n_white, n_black, cls))


@lru_cache(maxsize=64)
def graph_list(n_white: int, n_black: int, graph_class: GraphClass | str) -> tuple[ColoredGraph, ...]:
    return tuple(enumerate_graphs(n_white, n_black, graph_class))


def census(max_vertices: int, whites: Iterable[int] = (1, 2, 3)) -> list[dict]:
    rows = []
    for cls in GraphClass:
        for n in whites:
            for k in range(0, max_vertices - n + 1):
                if n + k < 2:
                    continue
                rows.append({"class": cls.value, "n": n, "k": k, "count": count_graphs(n, k, cls, max_vertices)})
    return rows


def census_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["class", "n", "k", "count"], lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def graphs_to_json(graphs: Iterable[ColoredGraph]) -> str:
    return json.dumps([g.to_dict() for g in graphs])


def graphs_from_json(text: str) -> list[ColoredGraph]:
    data = json.loads(text)
    if isinstance(data, dict):
        data = [data]
    return [ColoredGraph.from_dict(d) for d in data]


# ---------------------------------------------------------------------------
# isomorphism classes (whites fixed, blacks permuted)


def canonical_mask(g: ColoredGraph) -> int:
    if g.n_black > ISO_MAX_BLACK:
        raise SizeLimitError(f"canonical form limited to {ISO_MAX_BLACK} black vertices")
    index = _pair_index(g.n_vertices)
    n = g.n_white
    best = None
    for perm in itertools.permutations(range(n + 1, g.n_vertices + 1)):
        relabel = list(range(0, n + 1)) + list(perm)
        m = 0
        for i, j in g.edges:
            a, b = relabel[i], relabel[j]
            m |= 1 << index[(a, b) if a < b else (b, a)]
        if best is None or m < best:
            best = m
    return best


def iso_classes(graphs: Sequence[ColoredGraph]) -> list[tuple[ColoredGraph, int]]:
    """Group graphs by white-fixing, black-permuting isomorphism.

    Returns ``(representative, multiplicity)`` pairs in first-seen order; the
    representative is the canonical (minimal-mask) relabeling.
    """
    graphs = list(graphs)
    if not graphs:
        return []
    sizes = {(g.n_white, g.n_black) for g in graphs}
    if len(sizes) > 1:
        raise GraphDomainError(f"iso_classes needs graphs of one size, got {sorted(sizes)}")
    counts: dict[int, int] = {}
    for g in graphs:
        c = canonical_mask(g)
        counts[c] = counts.get(c, 0) + 1
    n, k = graphs[0].n_white, graphs[0].n_black
    return [(ColoredGraph(n, k, c), m) for c, m in counts.items()]


@lru_cache(maxsize=64)
def class_iso(n_white: int, n_black: int, graph_class: GraphClass | str) -> tuple[tuple[ColoredGraph, int], ...]:
    return tuple(iso_classes(graph_list(n_white, n_black, GraphClass.parse(graph_class))))


# ---------------------------------------------------------------------------
# polymer cancellation


def blocks(g: ColoredGraph) -> list[frozenset[int]]:
    """Vertex sets of the maximal 2-connected subgraphs (bridges included)."""
    adj = g.adjacency
    disc: dict[int, int] = {}
    low: dict[int, int] = {}
    stack: list[tuple[int, int]] = []
    out: list[frozenset[int]] = []
    counter = itertools.count()

    def visit(u: int, parent: int) -> None:
        disc[u] = low[u] = next(counter)
        for w in sorted(adj[u]):
            if w == parent:
                continue
            if w not in disc:
                stack.append((u, w))
                visit(w, u)
                low[u] = min(low[u], low[w])
                if low[w] >= disc[u]:
                    comp: set[int] = set()
                    while True:
                        e = stack.pop()
                        comp.update(e)
                        if e == (u, w):
                            break
                    out.append(frozenset(comp))
            elif disc[w] < disc[u]:
                stack.append((u, w))
                low[u] = min(low[u], disc[w])

    visit(1, 0)
    return out


def af_components(g: ColoredGraph) -> list[frozenset[int]]:
    """Split a connected graph at its articulation vertices.

    Blocks meeting at a cutpoint are merged when the pieces on both sides
    of that cutpoint contain white vertices, so the first component returned
    holds every white vertex whenever ``n_white >= 2``.
    """
    bl = blocks(g)
    parent = list(range(len(bl)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    whites = g.whites
    cut, _, _ = classify_vertices(g)
    for v in cut:
        at_v = [i for i, b in enumerate(bl) if v in b]
        pieces = g.components(removed=[v])
        white_side = []
        for i in at_v:
            piece = next(p for p in pieces if (bl[i] - {v}) & p)
            if piece & whites:
                white_side.append(i)
        for a, b in zip(white_side, white_side[1:]):
            parent[find(a)] = find(b)
    groups: dict[int, set[int]] = {}
    for i, b in enumerate(bl):
        groups.setdefault(find(i), set()).update(b)
    comps = [frozenset(s) for s in groups.values()]
    comps.sort(key=lambda c: (not (c & whites), min(c), sorted(c)))
    return comps


def _connected_unions(comps: Sequence[frozenset[int]]) -> list[frozenset[int]]:
    out = set()
    idx = range(len(comps))
    for r in range(1, len(comps) + 1):
        for sub in itertools.combinations(idx, r):
            if _is_glued(comps, sub):
                out.add(frozenset().union(*(comps[i] for i in sub)))
    return sorted(out, key=lambda s: (len(s), sorted(s)))


def _is_glued(comps: Sequence[frozenset[int]], sub: Sequence[int]) -> bool:
    sub = list(sub)
    seen = {sub[0]}
    frontier = [sub[0]]
    while frontier:
        a = frontier.pop()
        for b in sub:
            if b not in seen and comps[a] & comps[b]:
                seen.add(b)
                frontier.append(b)
    return len(seen) == len(sub)


@lru_cache(maxsize=None)
def ursell_coefficient(overlap_edges: frozenset[tuple[int, int]], n_nodes: int) -> int:
    """Sum of (-1)^|E(G)| over connected spanning subgraphs G of a graph on ``n_nodes``.

    All multiplicities are one here, so the ``1/I!`` factor is unity.
    """
    edges = sorted(overlap_edges)
    if n_nodes == 1:
        return 1
    total = 0
    for r in range(n_nodes - 1, len(edges) + 1):
        for sub in itertools.combinations(edges, r):
            if _spans_connected(sub, n_nodes):
                total += -1 if r % 2 else 1
    return total


def _spans_connected(edges: Sequence[tuple[int, int]], n_nodes: int) -> bool:
    parent = list(range(n_nodes))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    groups = n_nodes
    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            groups -= 1
    return groups == 1


def polymer_coefficient(polymers: Sequence[frozenset[int]]) -> int:
    """``c_I`` for a multi-index with unit multiplicities on ``polymers``."""
    overlaps = frozenset(
        (a, b)
        for a, b in itertools.combinations(range(len(polymers)), 2)
        if polymers[a] & polymers[b]
    )
    return ursell_coefficient(overlaps, len(polymers))


def admissible_multi_indices(g: ColoredGraph) -> list[tuple[frozenset[int], ...]]:
    """Multi-indices ``I ~ g`` entering the starred polymer sum.

    Polymers are vertex sets of connected unions of articulation-free
    components, taken with multiplicity one; they pairwise share at most one
    label, cover every component, one of them contains all white labels, and
    the label count matches ``|V0| + sum(|V| - 1)``.
    """
    comps = af_components(g)
    candidates = _connected_unions(comps)
    whites = g.whites
    nv = g.n_vertices
    out = []

    def extend(start: int, chosen: list[frozenset[int]], budget: int) -> None:
        if budget == 0:
            covered = frozenset().union(*chosen)
            if (
                covered == frozenset(range(1, nv + 1))
                and all(any(c <= p for p in chosen) for c in comps)
                and any(whites <= p for p in chosen)
            ):
                out.append(tuple(chosen))
            return
        for i in range(start, len(candidates)):
            p = candidates[i]
            cost = len(p) - 1
            if cost > budget:
                continue
            if any(len(p & q) > 1 for q in chosen):
                continue
            chosen.append(p)
            extend(i + 1, chosen, budget - cost)
            chosen.pop()

    extend(0, [], nv - 1)
    return out


def multiindex_cancellation_sum(g: ColoredGraph, max_vertices: int = CANCELLATION_MAX_VERTICES) -> int:
    """Brute-force ``sum* c_I`` over multi-indices compatible with ``g``."""
    if g.n_vertices > max_vertices:
        raise SizeLimitError(f"cancellation brute force limited to {max_vertices} vertices (max_vertices)")
    if not g.is_connected():
        raise GraphDomainError("cancellation sum needs a connected graph")
    return sum(polymer_coefficient(I) for I in admissible_multi_indices(g))
