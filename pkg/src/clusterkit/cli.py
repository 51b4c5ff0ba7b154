"""Command-line front end.

Exit codes: 0 pass, 1 verification failure, 2 usage or config error,
3 numerical failure.  Errors are printed to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable, Sequence

from . import calibration, closures, expansion, graphs, oz
from .config import ConfigError, RunConfig, RunManifest, canonical_json, load_config
from .potentials import NumericalError, PairPotential, PotentialError

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
OZ_RADII = (0.0, 0.26, 0.5, 0.76, 1.26, 1.5, 1.76, 2.26, 2.5, 3.0)
PY_RHOS = (0.01, 0.02, 0.03, 0.04, 0.05)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would print plain text
        raise UsageError(message)


def _parallel_map(func: Callable, items: Sequence, threads: int) -> list:
    """Order-preserving map; results do not depend on the worker count."""
    if threads <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(func, items))


# ---------------------------------------------------------------------------
# output plumbing


class Output:
    """Writes data files tagged with the manifest digest, plus the manifest itself."""

    def __init__(self, out_dir: str | None, manifest: RunManifest):
        self.dir = Path(out_dir) if out_dir else None
        self.manifest = manifest
        self.files: list[str] = []
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)

    def write_csv(self, name: str, text: str) -> None:
        if not self.dir:
            return
        body = text if text.startswith("# manifest") else f"# manifest {self.manifest.digest}\n{text}"
        (self.dir / name).write_text(body)
        self.files.append(name)

    def write_json(self, name: str, obj: dict) -> None:
        if not self.dir:
            return
        data = {"manifest": self.manifest.digest, **obj}
        (self.dir / name).write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
        self.files.append(name)

    def close(self) -> None:
        if not self.dir:
            return
        self.manifest.record("outputs", files=sorted(self.files))
        self.manifest.finish()
        (self.dir / "manifest.json").write_text(self.manifest.to_json() + "\n")


def _report(out: Output, name: str, checks: list[dict], extra: dict | None = None) -> int:
    ok = all(c.get("pass", False) for c in checks)
    rep = {"checks": checks, "pass": ok, **(extra or {})}
    out.write_json(name, rep)
    print(json.dumps(rep, sort_keys=True, default=str))
    return EXIT_PASS if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# subcommands


def cmd_graphs(args, cfg: RunConfig, out: Output) -> int:
    if args.action == "count":
        cls = graphs.GraphClass.parse(args.graph_class)
        n = graphs.count_graphs(args.white, args.black, cls, max_vertices=args.max_vertices)
        print(n)
        if args.list:
            gs = list(graphs.enumerate_graphs(args.white, args.black, cls, max_vertices=args.max_vertices))
            text = graphs.graphs_to_json(gs)
            print(text)
            out.write_json(f"graphs_{args.white}_{args.black}_{cls.value}.json", {"graphs": json.loads(text)})
        return EXIT_PASS
    rows = graphs.census(args.max_vertices, tuple(args.whites))
    text = graphs.census_csv(rows)
    out.write_csv("census.csv", text)
    sys.stdout.write(text)
    return EXIT_PASS


def _radii(args, p: PairPotential) -> list[float]:
    if args.r is not None:
        return [float(x) * p.sigma for x in args.r]
    if args.r_grid:
        start, stop, step = (float(x) for x in args.r_grid.split(":"))
        n = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 12) * p.sigma for i in range(n)]
    return [1.5 * p.sigma]


def _table_column(job) -> list:
    target, k, r, i, p, mc, norm = job
    eng = expansion.GraphSum(p, mc)
    n = 2
    pts = expansion.radial_anchors(r, n, p.d)
    if target == "c2":
        return expansion.c2_coefficient(k, pts, p, engine=eng, tag=i)
    return expansion.h_coefficient(n, k, pts, p, engine=eng, normalization=norm, tag=i)


def cmd_coeff(args, cfg: RunConfig, out: Output) -> int:
    p = cfg.potential
    if args.target == "virial":
        m = args.m if args.m is not None else args.k
        if m is None:
            raise UsageError("virial needs --m")
        table = expansion.build_table("virial", m, p, cfg.mc, orders=[m])
    else:
        k = args.k if args.k is not None else 0
        radii = _radii(args, p)
        jobs = [(args.target, k, r, i, p, cfg.mc, cfg.normalization) for i, r in enumerate(radii)]
        col = _parallel_map(_table_column, jobs, args.threads)
        table = expansion.CoefficientTable(args.target, k, tuple(radii), {k: col},
                                           {k: graphs.count_graphs(2, k, graphs.GraphClass.TWO_CONNECTED
                                                                   if args.target == "c2" else
                                                                   graphs.GraphClass.ARTICULATION_FREE)},
                                           cfg.normalization,
                                           {"potential": p.to_dict(), "mc": cfg.mc.to_dict()})
    out.manifest.record("coeff", target=args.target)
    name = f"coeff_{args.target}"
    out.write_csv(name + ".csv", table.to_csv())
    out.write_json(name + ".json", table.to_dict())
    for kk, row in sorted(table.entries.items()):
        for r, e in zip(table.radii or ("",), row):
            rat = f" ({e.rational})" if e.rational is not None else ""
            where = f" r={r:g}" if r != "" else ""
            print(f"k={kk}{where} value={e.value:.12g} std_error={e.std_error:.3g}{rat}")
    return EXIT_PASS


def _oz_check(k: int, radii, cfg: RunConfig, method: str) -> oz.OzCheck:
    return oz.oz_order_check(k, radii, cfg.potential, cfg.mc, normalization=cfg.normalization, method=method)


def cmd_verify(args, cfg: RunConfig, out: Output) -> int:
    p = cfg.potential
    if args.check == "oz":
        radii = [r * p.sigma for r in (args.r or OZ_RADII)]
        rep = _oz_check(args.k, radii, cfg, "mc" if args.mc else "auto")
        d = rep.to_dict()
        return _report(out, f"verify_oz_k{args.k}.json", d["checks"], {"k": args.k, "notes": d["notes"]})
    if args.check == "dissymmetry":
        if args.exact_1d:
            p = PairPotential.hard_rod()
        rep = expansion.dissymmetry_check(args.order, p, cfg.mc)
        d = rep.to_dict()
        checks = [{"order": i, "residual": r, "std_error": s,
                   "pass": (r == "0") if rep.exact else abs(float(r)) <= 4 * s + 1e-12}
                  for i, (r, s) in enumerate(zip(d["residuals"], d["std_errors"]))]
        return _report(out, "verify_dissymmetry.json", checks, {"exact": rep.exact})
    if args.check == "cancellation":
        checks = []
        for nv in range(2, args.max_vertices + 1):
            n_bad = total = 0
            for nw in range(1, nv + 1):
                for g in graphs.enumerate_graphs(nw, nv - nw, graphs.GraphClass.CONNECTED):
                    total += 1
                    want = int(graphs.graph_in_class(g, graphs.GraphClass.ARTICULATION_FREE))
                    if graphs.multiindex_cancellation_sum(g) != want:
                        n_bad += 1
            checks.append({"vertices": nv, "graphs": total, "mismatches": n_bad, "pass": n_bad == 0})
        return _report(out, "verify_cancellation.json", checks)
    if args.check == "py-order":
        rhos = args.rho or list(PY_RHOS)
        if p.d == 1:
            rep = closures.py_series_decay(p, rhos[0], cfg=cfg.mc, grid=cfg.grid, solver=cfg.solver)
            return _report(out, "verify_py_order.json", [{"decay": rep.to_dict(), "pass": rep.passes}])
        rep = closures.py_error_order(p, [r / p.sigma**3 for r in rhos], args.K, cfg.mc, grid=cfg.grid,
                                      solver=cfg.solver)
        return _report(out, "verify_py_order.json", [{**rep.to_dict(), "pass": rep.passes}])
    if args.check == "calibration":
        rep = calibration.run_calibration(args.seeds, cfg.mc.n_samples, cfg.mc.seed)
        d = rep.to_dict()
        return _report(out, "verify_calibration.json", d["checks"],
                       {k: d[k] for k in ("n_seeds", "threshold", "coverage_1sigma", "coverage_2sigma")})
    if args.check == "tail":
        rep = expansion.tail_decay(p, args.rho_c, tuple(range(1, args.max_order + 1)), cfg=cfg.mc)
        return _report(out, "verify_tail.json", [rep.to_dict()])
    raise UsageError(f"unknown check {args.check}")


def cmd_oz(args, cfg: RunConfig, out: Output) -> int:
    if args.action == "check":
        radii = [r * cfg.potential.sigma for r in (args.r or OZ_RADII)]
        rep = _oz_check(args.k, radii, cfg, "mc" if args.mc else "auto")
        lines = ["r,residual,error,mc_error,grid_error"]
        for c in rep.to_dict()["checks"]:
            lines.append(f"{c['r']!r},{c['residual']!r},{c['error']!r},{c['mc_error']!r},{c['grid_error']!r}")
        out.write_csv(f"oz_check_k{args.k}.csv", "\n".join(lines) + "\n")
        return _report(out, f"oz_check_k{args.k}.json", rep.to_dict()["checks"])
    if not args.c:
        raise UsageError("oz solve needs --c FILE.csv")
    path = Path(args.c)
    if not path.exists():
        raise ConfigError(f"{path} not found")
    c = oz.RadialFunction.from_csv(path.read_text(), d=cfg.potential.d)
    h, rep = oz.oz_solve_h(c, args.rho, report=True)
    out.write_csv("h.csv", h.to_csv("h"))
    out.write_json("oz_solve.json", rep.to_dict())
    print(rep.to_json())
    return EXIT_PASS


def _py_one(job):
    p, rho, grid, solver = job
    fields, diag = closures.py_solve(p, rho, grid, solver)
    return rho, fields, diag


def cmd_py(args, cfg: RunConfig, out: Output) -> int:
    p = cfg.potential
    rhos = args.rho or [0.3 if p.d == 1 else 0.2]
    if args.action == "solve":
        rhos = rhos[:1]
    results = _parallel_map(_py_one, [(p, r, cfg.grid, cfg.solver) for r in rhos], args.threads)
    summary = []
    for rho, fields, diag in results:
        tag = f"rho{rho:g}"
        cols = {"g": fields.g, "h": fields.h, "c": fields.c, "t": fields.t}
        lines = ["r," + ",".join(cols)]
        for j, r in enumerate(fields.g.r):
            lines.append(",".join([repr(float(r))] + [repr(float(v.values[j])) for v in cols.values()]))
        out.write_csv(f"py_{tag}.csv", "\n".join(lines) + "\n")
        out.write_json(f"py_{tag}.json", {"rho": rho, "diagnostics": diag.summary()})
        summary.append({"rho": rho, **diag.summary()})
    print(json.dumps(summary, sort_keys=True))
    return EXIT_PASS


def cmd_identity(args, cfg: RunConfig, out: Output) -> int:
    if args.which == "census":
        checks = []
        for k in range(1, args.k + 1):
            lhs, rhs = oz.census_identity(k, with_labels=args.with_labels)
            checks.append({"k": k, "articulation_free": lhs, "split": rhs, "pass": lhs == rhs})
        return _report(out, "identity_census.json", checks, {"with_labels": args.with_labels})
    rep = expansion.dissymmetry_check(args.order, cfg.potential, cfg.mc)
    d = rep.to_dict()
    checks = [{"order": i, "residual": r, "std_error": s,
               "pass": (r == "0") if rep.exact else abs(float(r)) <= 4 * s + 1e-12}
              for i, (r, s) in enumerate(zip(d["residuals"], d["std_errors"]))]
    return _report(out, "identity_dissymmetry.json", checks, {"exact": rep.exact})


def cmd_rerun(args, cfg: RunConfig | None, out: Output | None) -> int:
    path = Path(args.manifest)
    if not path.exists():
        raise ConfigError(f"manifest {path} not found")
    man = RunManifest.from_json(path.read_text())
    argv = list(man.command)
    if "--out" in argv:
        i = argv.index("--out")
        del argv[i:i + 2]
    return main(argv + ["--out", args.out], _expect=man.config)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="INI config file")
    common.add_argument("--potential", help="potential file: INI with a [potential] section, or r,V table CSV")
    common.add_argument("--kind", help="potential kind (overrides config)")
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=float, help="Monte Carlo samples per graph class")
    common.add_argument("--normalization", choices=["oz", "literal"])
    common.add_argument("--dr", type=float)
    common.add_argument("--n-points", type=int)
    common.add_argument("--mixing", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iter", type=int)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--out", help="directory for data files and the manifest")

    ap = _Parser(prog="clusterkit", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("graphs", parents=[common])
    gs = g.add_subparsers(dest="action", required=True)
    gc = gs.add_parser("count", parents=[common])
    gc.add_argument("--white", type=int, required=True)
    gc.add_argument("--black", type=int, required=True)
    gc.add_argument("--class", dest="graph_class", default="all")
    gc.add_argument("--list", action="store_true")
    gc.add_argument("--max-vertices", type=int, default=graphs.DEFAULT_MAX_VERTICES)
    gn = gs.add_parser("census", parents=[common])
    gn.add_argument("--max-vertices", type=int, default=6)
    gn.add_argument("--whites", type=int, nargs="+", default=[1, 2, 3])

    c = sub.add_parser("coeff", parents=[common])
    c.add_argument("target", choices=["h2", "c2", "virial"])
    c.add_argument("--k", type=int)
    c.add_argument("--m", type=int)
    c.add_argument("--r", type=float, nargs="+", help="separations in units of sigma")
    c.add_argument("--r-grid", help="start:stop:step in units of sigma")

    v = sub.add_parser("verify", parents=[common])
    vs = v.add_subparsers(dest="check", required=True)
    vo = vs.add_parser("oz", parents=[common])
    vo.add_argument("--k", type=int, default=1)
    vo.add_argument("--r", type=float, nargs="+")
    vo.add_argument("--mc", action="store_true", help="sample order-k graphs even when closed forms exist")
    vd = vs.add_parser("dissymmetry", parents=[common])
    vd.add_argument("--order", type=int, default=3)
    vd.add_argument("--exact-1d", action="store_true")
    vc = vs.add_parser("cancellation", parents=[common])
    vc.add_argument("--max-vertices", type=int, default=6)
    vp = vs.add_parser("py-order", parents=[common])
    vp.add_argument("--rho", type=float, nargs="+", help="reduced densities rho sigma^d")
    vp.add_argument("--K", type=int, default=2)
    vk = vs.add_parser("calibration", parents=[common], help="MC coverage on integrals with known values")
    vk.add_argument("--seeds", type=int, default=200)
    vt = vs.add_parser("tail", parents=[common], help="per-order decay of the h series")
    vt.add_argument("--rho-c", type=float, default=0.05, help="rho * C(beta)")
    vt.add_argument("--max-order", type=int, default=3)

    o = sub.add_parser("oz", parents=[common])
    os_ = o.add_subparsers(dest="action", required=True)
    osv = os_.add_parser("solve", parents=[common])
    osv.add_argument("--c", help="CSV with columns r, c")
    osv.add_argument("--rho", type=float, required=True)
    och = os_.add_parser("check", parents=[common])
    och.add_argument("--k", type=int, default=1)
    och.add_argument("--r", type=float, nargs="+")
    och.add_argument("--mc", action="store_true")

    py = sub.add_parser("py", parents=[common])
    pys = py.add_subparsers(dest="action", required=True)
    for name in ("solve", "sweep"):
        pp = pys.add_parser(name, parents=[common])
        pp.add_argument("--rho", type=float, nargs="+")

    i = sub.add_parser("identity", parents=[common])
    isub = i.add_subparsers(dest="which", required=True)
    ic = isub.add_parser("census", parents=[common])
    ic.add_argument("--k", type=int, default=3)
    ic.add_argument("--with-labels", action="store_true", help="count the choice of nodal label")
    idy = isub.add_parser("dissymmetry", parents=[common])
    idy.add_argument("--order", type=int, default=3)

    r = sub.add_parser("rerun", help="repeat a run from its manifest.json")
    r.add_argument("manifest")
    r.add_argument("--out", required=True)
    return ap


HANDLERS = {"graphs": cmd_graphs, "coeff": cmd_coeff, "verify": cmd_verify, "oz": cmd_oz, "py": cmd_py,
            "identity": cmd_identity}


def _overrides(args) -> dict:
    ov = {
        "potential.kind": args.kind,
        "mc.seed": args.seed,
        "mc.samples": int(args.samples) if args.samples is not None else None,
        "expansion.normalization": args.normalization,
        "grid.dr": args.dr,
        "grid.n_points": args.n_points,
        "solver.mixing": args.mixing,
        "solver.tol": args.tol,
        "solver.max_iter": args.max_iter,
    }
    return ov


def _resolve_config(args) -> RunConfig:
    cfg_path = args.config
    ov = _overrides(args)
    if args.potential:
        pot = Path(args.potential)
        if not pot.exists():
            raise ConfigError(f"potential file {pot} not found")
        if pot.suffix.lower() == ".csv":
            ov["potential.kind"] = "tabulated"
            ov["potential.table"] = str(pot.resolve())
        else:
            import configparser

            cp = configparser.ConfigParser()
            cp.read(pot)
            if not cp.has_section("potential"):
                raise ConfigError(f"{pot} has no [potential] section")
            for k, val in cp["potential"].items():
                if ov.get(f"potential.{k}") is None:  # explicit flags win
                    ov[f"potential.{k}"] = val
    cfg = load_config(cfg_path, ov)
    if cfg.grid.d != cfg.potential.d:
        cfg.grid = replace(cfg.grid, d=cfg.potential.d)
    return cfg


def main(argv: Sequence[str] | None = None, *, _expect: dict | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if args.command == "rerun":
            return cmd_rerun(args, None, None)
        cfg = _resolve_config(args)
        if _expect is not None and canonical_json(cfg.snapshot()) != canonical_json(_expect):
            raise ConfigError("configuration differs from the manifest snapshot")
        argv_clean = list(argv)
        if "--out" in argv_clean:
            i = argv_clean.index("--out")
            del argv_clean[i:i + 2]
        if "--threads" in argv_clean:  # worker count never changes results
            i = argv_clean.index("--threads")
            del argv_clean[i:i + 2]
        manifest = RunManifest.start(argv_clean, cfg)
        out = Output(args.out, manifest)
        code = HANDLERS[args.command](args, cfg, out)
        out.close()
        return code
    except (UsageError, ConfigError, PotentialError, graphs.SizeLimitError, graphs.GraphDomainError,
            oz.GridError, expansion.ExpansionError, oz.NormalizationMismatch) as exc:
        _err(exc, EXIT_USAGE)
        return EXIT_USAGE
    except (NumericalError, FloatingPointError, ArithmeticError) as exc:
        _err(exc, EXIT_NUMERIC)
        return EXIT_NUMERIC
    except ValueError as exc:
        _err(exc, EXIT_USAGE)
        return EXIT_USAGE


def _err(exc: Exception, code: int) -> None:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")


if __name__ == "__main__":
    sys.exit(main())
