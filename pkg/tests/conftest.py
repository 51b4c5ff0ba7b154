from __future__ import annotations

import itertools

import networkx as nx
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("ci", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


def nx_class_counts(n_white: int, n_black: int) -> dict[str, int]:
    """Brute-force class counts via networkx, independent of the bitmask code."""
    nv = n_white + n_black
    pairs = list(itertools.combinations(range(1, nv + 1), 2))
    whites = set(range(1, n_white + 1))
    counts = {"all": 0, "conn": 0, "af": 0, "two": 0}
    for mask in range(1 << len(pairs)):
        counts["all"] += 1
        G = nx.Graph()
        G.add_nodes_from(range(1, nv + 1))
        G.add_edges_from(p for i, p in enumerate(pairs) if mask >> i & 1)
        if not nx.is_connected(G):
            continue
        counts["conn"] += 1
        cuts = set(nx.articulation_points(G))
        art = False
        for v in cuts:
            H = G.copy()
            H.remove_node(v)
            if any(not (set(c) & whites) for c in nx.connected_components(H)):
                art = True
                break
        if not art:
            counts["af"] += 1
        if not cuts:
            counts["two"] += 1
    return counts


@pytest.fixture(scope="session")
def nx_counts():
    cache: dict = {}

    def get(n_white, n_black):
        if (n_white, n_black) not in cache:
            cache[(n_white, n_black)] = nx_class_counts(n_white, n_black)
        return cache[(n_white, n_black)]

    return get


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
