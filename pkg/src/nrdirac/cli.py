"""Command-line entry point: groundstate, branch, charge-curve, verify, oracle-shoot.

Exit codes: 0 success, 1 numerical failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .core import (ConvergenceError, DomainError, Grid, InvalidExponentError, Nonlinearity,
                   check_exponent)

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
FMT = "%.12e"

log = logging.getLogger("nrdirac")


class ConfigError(ValueError):
    """Invalid run configuration; maps to exit code 2."""


def code_version() -> str:
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:  # not installed, running from a checkout
        return "0.1.0"


# ---------------------------------------------------------------------------
# configuration


@dataclass
class GridConfig:
    t_max: float = 30.0
    n_points: int = 3001


@dataclass
class EpsSchedule:
    eps_max: float = 0.1
    eps_min: float = 0.005
    steps: int = 20
    spacing: str = "geometric"

    def values(self) -> list[float]:
        if self.spacing == "geometric":
            vals = np.geomspace(self.eps_max, self.eps_min, self.steps)
        else:
            vals = np.linspace(self.eps_max, self.eps_min, self.steps)
        return [float(v) for v in vals]


@dataclass
class RunConfig:
    n: int = 1
    k: float = 1.0
    m: float = 1.0
    terms: list = field(default_factory=list)
    grid: GridConfig = field(default_factory=GridConfig)
    eps_schedule: EpsSchedule = field(default_factory=EpsSchedule)
    gamma: float = 0.1
    output: str | None = None
    dump_profiles: str | None = None

    @property
    def nonlinearity(self) -> Nonlinearity:
        return Nonlinearity(self.k, tuple((float(c), float(K)) for c, K in self.terms))

    def make_grid(self) -> Grid:
        return Grid(self.grid.t_max, self.grid.n_points, self.n)

    def validate(self) -> "RunConfig":
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n!r}")
        if not (self.m > 0 and math.isfinite(self.m)):
            raise ConfigError(f"m must be positive, got {self.m}")
        try:
            self.nonlinearity
            check_exponent(self.n, self.k)
            self.make_grid()
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        s = self.eps_schedule
        if s.spacing not in ("linear", "geometric"):
            raise ConfigError(f"spacing must be linear or geometric, got {s.spacing!r}")
        if not (0 < s.eps_min < s.eps_max < self.m):
            raise ConfigError(
                f"need 0 < eps_min < eps_max < m, got eps_min={s.eps_min}, eps_max={s.eps_max}")
        if s.steps < 1:
            raise ConfigError("steps must be at least 1")
        if not self.gamma >= 0:
            raise ConfigError("gamma must be non-negative")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


def _build(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be an object")
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown field(s) in {where}: {', '.join(unknown)}")
    return cls(**data)


def config_from_dict(data: dict) -> RunConfig:
    data = dict(data)
    grid = _build(GridConfig, data.pop("grid", {}), "grid")
    sched = _build(EpsSchedule, data.pop("eps_schedule", {}), "eps_schedule")
    cfg = _build(RunConfig, data, "config")
    cfg.grid, cfg.eps_schedule = grid, sched
    return cfg


def load_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    cfg = config_from_dict(data)
    # flags override the file
    for name in ("n", "k", "m", "gamma", "output", "dump_profiles"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(args, "term", None):
        cfg.terms = [list(t) for t in args.term]
    for name in ("t_max", "n_points"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg.grid, name, val)
    for name in ("eps_max", "eps_min", "steps", "spacing"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg.eps_schedule, name, val)
    return cfg.validate()


# ---------------------------------------------------------------------------
# output helpers


def clean(obj):
    """Round floats through the fixed format; refuse NaN/Inf."""
    if isinstance(obj, dict):
        return {k: clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError("non-finite value in output")
        return float(FMT % x)
    return obj


def dumps(obj) -> str:
    return json.dumps(clean(obj), indent=2, allow_nan=False) + "\n"


def check_writable(path: str | Path) -> Path:
    path = Path(path)
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise ConfigError(f"output directory {parent} is not writable")
    if path.is_dir():
        raise ConfigError(f"output path {path} is a directory")
    return path


def atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: list[str], columns: list[np.ndarray]) -> str:
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    if not np.all(np.isfinite(data)):
        raise ValueError("non-finite value in output")
    rows = [",".join(header)]
    rows += [",".join(FMT % v for v in row) for row in data]
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_groundstate(cfg: RunConfig) -> int:
    from .groundstate import decay_constants, groundstate_residual, solve_groundstate

    out = check_writable(cfg.output or "groundstate.csv")
    gs = solve_groundstate(cfg.n, cfg.k, cfg.m, cfg.make_grid())
    atomic_write(out, csv_text(["r", "u", "du"], [gs.r, gs.u, gs.du]))
    summary = {"schema_version": SCHEMA_VERSION, "n": cfg.n, "k": cfg.k, "m": cfg.m,
               "u0": gs.u0, "residual": groundstate_residual(gs),
               "decay_constants": list(decay_constants(gs)), "output": str(out)}
    sys.stdout.write(dumps(summary))
    return EXIT_OK


def _profile_csv(p) -> str:
    g = p.grid
    return csv_text(["t", "V", "U", "Vhat", "Uhat", "tildeV", "tildeU"],
                    [g.t, p.V.values, p.U.values, p.vhat, p.uhat,
                     p.tilde_V.values, p.tilde_U.values])


def cmd_branch(cfg: RunConfig) -> int:
    from .analysis import cone_region_check, positivity_report
    from .groundstate import hat_pair, solve_groundstate
    from .solver import continue_branch

    out = check_writable(cfg.output or "branch.json")
    dump = Path(cfg.dump_profiles) if cfg.dump_profiles else None
    if dump is not None:
        dump.mkdir(parents=True, exist_ok=True)
    nl = cfg.nonlinearity
    hat = hat_pair(solve_groundstate(cfg.n, cfg.k, cfg.m, cfg.make_grid()))
    branch = continue_branch(cfg.eps_schedule.values(), hat, nl, gamma=cfg.gamma)
    T1 = max(2 * cfg.n, 5)
    records = []
    for i, (p, pt) in enumerate(zip(branch.profiles, branch.points)):
        records.append({
            "eps": pt.eps, "omega": pt.omega, "Q": pt.charge, "E": pt.energy,
            "norm_tilde_weighted": pt.norm_tilde_weighted, "iterations": p.iterations,
            "residual": p.residual, "positivity_pass": positivity_report(p).passed,
            "cone_pass": cone_region_check(p, T1),
        })
        if dump is not None:
            atomic_write(dump / f"profile_{i:03d}.csv", _profile_csv(p))
    doc = {"schema_version": SCHEMA_VERSION, "code_version": code_version(),
           "config": cfg.to_dict(), "truncated": branch.truncated,
           "failure": branch.failure, "points": records}
    atomic_write(out, dumps(doc))
    sys.stdout.write(dumps({"schema_version": SCHEMA_VERSION, "points": len(records),
                            "truncated": branch.truncated, "failure": branch.failure,
                            "output": str(out)}))
    return EXIT_FAIL if branch.truncated else EXIT_OK


def read_branch(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read branch file {path}: {exc}") from exc
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise ConfigError("branch file lacks schema_version")
    major = str(doc["schema_version"]).split(".")[0]
    if major != SCHEMA_VERSION.split(".")[0]:
        raise ConfigError(f"unsupported schema major version {doc['schema_version']}")
    for key in ("config", "points"):
        if key not in doc:
            raise ConfigError(f"branch file lacks {key!r}")
    return doc


def cmd_charge_curve(path: str, output: str | None) -> int:
    from .analysis import TooFewPointsError, vk_classify_arrays

    doc = read_branch(path)
    try:
        cfg = config_from_dict(doc["config"]).validate()
        pts = doc["points"]
        eps = np.array([p["eps"] for p in pts], dtype=float)
        omega = np.array([p["omega"] for p in pts], dtype=float)
        Q = np.array([p["Q"] for p in pts], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed branch file: {exc}") from exc
    if eps.size < 3:
        raise ConfigError(f"need at least 3 branch points for derivatives, got {eps.size}")
    out = check_writable(output or "charge_curve.csv")
    try:
        verdict = vk_classify_arrays(cfg.nonlinearity, cfg.n, eps, Q)
    except TooFewPointsError as exc:
        raise ConfigError(str(exc)) from exc
    dq = np.gradient(Q, omega, edge_order=2)
    atomic_write(out, csv_text(["omega", "Q", "dQ_domega"], [omega, Q, dq]))
    sys.stdout.write(dumps({"schema_version": SCHEMA_VERSION, "verdict": {
        "regime": verdict.regime, "expected_sign": verdict.expected_sign,
        "measured_sign": verdict.measured_sign,
        "slope": verdict.slope if math.isfinite(verdict.slope) else None},
        "output": str(out)}))
    return EXIT_OK


def cmd_verify(suite: str, as_json: bool) -> int:
    from .acceptance import SUITES, run_suite

    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; valid: {', '.join(SUITES)}")
    results = run_suite(suite)
    if as_json:
        report = {"schema_version": SCHEMA_VERSION, "suite": suite,
                  "passed": all(r.passed for r in results),
                  "criteria": [{"id": r.id, "title": r.title, "passed": r.passed,
                                "threshold": r.threshold, "measured": r.measured,
                                "seconds": r.seconds} for r in results]}
        sys.stdout.write(dumps(report))
    else:
        for r in results:
            sys.stdout.write(r.line() + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_oracle_shoot(cfg: RunConfig, eps: float) -> int:
    from .solver import solve_profile_shooting

    if not (0 < eps < cfg.m):
        raise ConfigError(f"eps must lie in (0, m), got {eps}")
    out = check_writable(cfg.output or "shooting.csv")
    p = solve_profile_shooting(eps, cfg.n, cfg.m, cfg.nonlinearity, cfg.make_grid())
    atomic_write(out, _profile_csv(p))
    sys.stdout.write(dumps({"schema_version": SCHEMA_VERSION, "eps": eps, "omega": p.omega,
                            "V0": p.V.values[0], "residual": p.residual,
                            "bisections": p.iterations, "output": str(out)}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_config_flags(p: argparse.ArgumentParser, schedule: bool = False) -> None:
    p.add_argument("--config", help="JSON run configuration; flags override it")
    p.add_argument("--n", type=int, help="spatial dimension")
    p.add_argument("--k", type=float, help="leading exponent")
    p.add_argument("--m", type=float, help="mass")
    p.add_argument("--term", type=float, nargs=2, action="append", metavar=("C", "K"),
                   help="perturbation term c|tau|^K (repeatable)")
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--n-points", dest="n_points", type=int)
    p.add_argument("--output", "-o")
    if schedule:
        p.add_argument("--eps-max", dest="eps_max", type=float)
        p.add_argument("--eps-min", dest="eps_min", type=float)
        p.add_argument("--steps", type=int)
        p.add_argument("--spacing", choices=["linear", "geometric"])
        p.add_argument("--gamma", type=float)
        p.add_argument("--dump-profiles", dest="dump_profiles", metavar="DIR")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nrdirac", description="Nonrelativistic solitary waves of the nonlinear Dirac equation")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("groundstate", help="NLS groundstate by shooting (CSV r,u,du)")
    _add_config_flags(p)
    p = sub.add_parser("branch", help="continue a Dirac branch in eps (JSON)")
    _add_config_flags(p, schedule=True)
    p = sub.add_parser("charge-curve", help="Q(omega), dQ/domega and VK verdict")
    p.add_argument("branch_json")
    p.add_argument("--output", "-o")
    p = sub.add_parser("verify", help="run acceptance criteria")
    p.add_argument("--suite", default="all")
    p.add_argument("--json", action="store_true")
    p = sub.add_parser("oracle-shoot", help="direct shooting profile at one eps")
    _add_config_flags(p)
    p.add_argument("--eps", type=float, required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad usage already
        return int(exc.code) if exc.code is not None else EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "groundstate":
            return cmd_groundstate(load_config(args))
        if args.command == "branch":
            return cmd_branch(load_config(args))
        if args.command == "charge-curve":
            return cmd_charge_curve(args.branch_json, args.output)
        if args.command == "verify":
            return cmd_verify(args.suite, args.json)
        if args.command == "oracle-shoot":
            return cmd_oracle_shoot(load_config(args), args.eps)
    except (ConfigError, InvalidExponentError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (ConvergenceError, DomainError, ArithmeticError, ValueError,
            np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_FAIL
    parser.error(f"unknown command {args.command}")
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
