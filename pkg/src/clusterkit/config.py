"""Run configuration (INI file) and reproducibility manifests.

Schema, all keys optional::

    [potential]   kind = hard_sphere | hard_rod | square_well | tabulated
                  sigma, epsilon, lambda, beta, d, stability_B, table (CSV path)
    [mc]          seed, samples, proposal = core_ball | gaussian, stratify, chunk
    [expansion]   normalization = oz | literal
    [grid]        dr, n_points
    [solver]      mixing, max_iter, tol

Command-line flags override file values; ``CLUSTERKIT_SEED`` is used when
neither gives a seed.
"""

from __future__ import annotations

import configparser
import datetime as _dt
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .closures import Grid, SolverConfig
from .integrals import McConfig, Proposal
from .potentials import Kind, PairPotential

TOOL_VERSION = "0.1.0"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    potential: PairPotential = field(default_factory=PairPotential.hard_sphere)
    mc: McConfig = field(default_factory=McConfig)
    normalization: str = "oz"
    grid: Grid = field(default_factory=Grid)
    solver: SolverConfig = field(default_factory=SolverConfig)

    def snapshot(self) -> dict:
        return {
            "potential": self.potential.to_dict(),
            "mc": self.mc.to_dict(),
            "normalization": self.normalization,
            "grid": {"dr": self.grid.dr, "n_points": self.grid.n_points, "d": self.grid.d},
            "solver": {"mixing": self.solver.mixing, "max_iter": self.solver.max_iter, "tol": self.solver.tol},
        }


def _potential(sec: configparser.SectionProxy | dict, base: Path | None) -> PairPotential:
    kind = sec.get("kind", "hard_sphere")
    try:
        k = Kind(kind)
    except ValueError:
        raise ConfigError(f"unknown potential kind {kind!r}") from None
    sigma = float(sec.get("sigma", 1.0))
    beta = float(sec.get("beta", 1.0))
    if k is Kind.HARD_SPHERE:
        return PairPotential.hard_sphere(sigma, beta)
    if k is Kind.HARD_ROD:
        return PairPotential.hard_rod(sigma, beta)
    if k is Kind.SQUARE_WELL:
        return PairPotential.square_well(sigma, float(sec.get("epsilon", 1.0)), float(sec.get("lambda", 1.5)),
                                         beta, int(sec.get("d", 3)), float(sec.get("stability_B", 0.0)))
    table = sec.get("table")
    if not table:
        raise ConfigError("tabulated potential needs 'table'")
    path = Path(table)
    if base is not None and not path.is_absolute():
        path = base / path
    if not path.exists():
        raise ConfigError(f"potential table {path} not found")
    return PairPotential.from_table_csv(path, d=int(sec.get("d", 3)), beta=beta,
                                        stability_B=float(sec.get("stability_B", 0.0)))


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Read an INI file (if given) and apply ``overrides`` of the form {"section.key": value}."""
    cp = configparser.ConfigParser()
    base = None
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file {path} not found")
        cp.read(path)
        base = path.parent
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        sec, _, name = key.partition(".")
        if not cp.has_section(sec):
            cp.add_section(sec)
        cp.set(sec, name, str(value))
    for sec in ("potential", "mc", "expansion", "grid", "solver"):
        if not cp.has_section(sec):
            cp.add_section(sec)
    try:
        p = _potential(cp["potential"], base)
        mc = cp["mc"]
        seed = mc.get("seed", os.environ.get("CLUSTERKIT_SEED", "0"))
        mcc = McConfig(seed=int(seed), n_samples=int(float(mc.get("samples", 100_000))),
                       proposal=Proposal(mc.get("proposal", "core_ball")),
                       stratify_by_vertex=mc.getboolean("stratify", False),
                       chunk=int(mc.get("chunk", 1 << 15)))
        norm = cp["expansion"].get("normalization", "oz")
        if norm not in ("oz", "literal"):
            raise ConfigError("normalization must be 'oz' or 'literal'")
        g = cp["grid"]
        grid = Grid(dr=float(g.get("dr", 0.005)), n_points=int(g.get("n_points", 2400)), d=p.d)
        s = cp["solver"]
        solver = SolverConfig(mixing=float(s.get("mixing", 0.5)), max_iter=int(float(s.get("max_iter", 10_000))),
                              tol=float(s.get("tol", 1e-10)))
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(p, mcc, norm, grid, solver)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass
class RunManifest:
    """Everything needed to reproduce a run; ``digest`` ignores the timestamps."""

    command: list[str]
    config: dict
    seed: int
    tool_version: str = TOOL_VERSION
    started: str = ""
    finished: str = ""
    provenance: list[dict] = field(default_factory=list)

    @classmethod
    def start(cls, command: list[str], cfg: RunConfig) -> RunManifest:
        return cls(list(command), cfg.snapshot(), cfg.mc.seed, started=_now())

    @property
    def digest(self) -> str:
        core = {"command": self.command, "config": self.config, "seed": self.seed, "tool_version": self.tool_version}
        return hashlib.sha256(canonical_json(core).encode()).hexdigest()[:16]

    def record(self, operation: str, **details) -> None:
        self.provenance.append({"operation": operation, **details})

    def finish(self) -> None:
        self.finished = _now()

    def to_dict(self) -> dict:
        return {"manifest": self.digest, "command": self.command, "config": self.config, "seed": self.seed,
                "tool_version": self.tool_version, "started": self.started, "finished": self.finished,
                "provenance": self.provenance}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> RunManifest:
        d = json.loads(text)
        return cls(d["command"], d["config"], d["seed"], d["tool_version"], d.get("started", ""),
                   d.get("finished", ""), d.get("provenance", []))


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
