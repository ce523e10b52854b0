"""Command-line experiment runner.

    lindcone run config.json [--out DIR] [--seed N] [--jobs N]
    lindcone describe model.json

Exit status of ``run``: 0 when every check passes, 2 when any check fails,
1 on a configuration or runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import verify
from .bounds import (
    default_nu_grid,
    fit_second_order,
    fmt,
    bounds_table,
    velocity_c_prime,
    write_bounds_csv,
)
from .evolve import PropagationOverflow, operator_norm
from .liouvillian import build_gprime
from .model import (
    CATALOG,
    LatticeModel,
    ModelError,
    StripError,
    build_hamiltonian,
    hermiticity_residual,
    load_model,
    model_from_dict,
    resized,
)

log = logging.getLogger("lindcone")

CONE_CHECKS = ("check_leakage_cone", "check_ball_bound", "check_dual_cone")
CONE_COLUMNS = ("t", "d_XY", "measured", "bound", "margin", "vacuous")
# parameters that name site sets and complex deformation parameters
SITE_PARAMS = ("X", "Y", "U", "V")
COMPLEX_PARAMS = ("zeta", "zeta_t", "zeta0", "key_zeta")
MODEL_FREE = ("check_subcp", "check_cs_trace")


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending field."""


@dataclass
class SuiteItem:
    check: str
    params: dict
    label: str


@dataclass
class ExperimentConfig:
    model: LatticeModel
    suite: list
    times: list
    seed: int = 0
    eps: float = 0.2
    nu_grid: list = field(default_factory=list)
    mu_grid: list = field(default_factory=list)
    output_dir: str = "results"


# ---------------------------------------------------------------------------
# config parsing


def _load_json(path: Path):
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def parse_sites(value, d: int, where: str) -> list:
    """Site-set syntax: a list, ``{"start", "stop"}`` or ``{"far_from", "min_distance"}``."""
    if isinstance(value, list):
        sites = value
    elif isinstance(value, dict) and "start" in value:
        sites = list(range(int(value["start"]), int(value.get("stop", d))))
    elif isinstance(value, dict) and "far_from" in value:
        centre, r = int(value["far_from"]), int(value["min_distance"])
        sites = [x for x in range(d) if abs(x - centre) >= r]
    else:
        raise ConfigError(f"{where}: expected a list of sites, {{start, stop}} or {{far_from, min_distance}}")
    try:
        sites = sorted({int(s) for s in sites})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: sites must be integers") from exc
    if not sites or sites[0] < 0 or sites[-1] >= d:
        raise ConfigError(f"{where}: sites must be a nonempty subset of 0..{d - 1}")
    return sites


def parse_complex(value, where: str) -> complex:
    if isinstance(value, dict):
        return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    try:
        return complex(value.replace(" ", "") if isinstance(value, str) else value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: not a complex number: {value!r}") from exc


def _check_times(times, where: str) -> list:
    if not isinstance(times, list) or not times:
        raise ConfigError(f"{where}: expected a nonempty list of times")
    try:
        times = [float(t) for t in times]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: times must be numbers") from exc
    if any(t < 0 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
        raise ConfigError(f"{where}: times must be nonnegative and strictly ascending")
    return times


def _check_grid(grid, a: float, where: str) -> list:
    if not isinstance(grid, list):
        raise ConfigError(f"{where}: expected a list")
    out = [float(v) for v in grid]
    for v in out:
        if not 0 < v < a:
            raise ConfigError(
                f"{where}: value {v} violates the strip constraint 0 < nu < a = {a}"
            )
    return out


def load_config(path: str | Path, seed: int | None = None, out: str | None = None) -> ExperimentConfig:
    path = Path(path)
    data = _load_json(path)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: the config must be a JSON object")
    unknown = set(data) - {"model", "suite", "times", "seed", "eps", "nu_grid", "mu_grid", "output_dir"}
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    if "model" not in data:
        raise ConfigError("missing field 'model'")
    try:
        spec = data["model"]
        if isinstance(spec, str):
            spec = _load_json((path.parent / spec).resolve())
        model = model_from_dict(spec)
    except (ModelError, StripError, TypeError, ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"model: {exc}") from exc

    eps = float(data.get("eps", 0.2))
    if not 0 < eps < 0.4:
        raise ConfigError(f"eps: must lie in (0, 0.4), got {eps}")
    a = model.decay_rate
    nu_grid = _check_grid(data["nu_grid"], a, "nu_grid") if "nu_grid" in data else default_nu_grid(model)
    mu_grid = _check_grid(data.get("mu_grid", []), a * (1 - 2.5 * eps), "mu_grid")
    times = _check_times(data.get("times", [0.5, 1.0, 2.0]), "times")

    suite = []
    for i, entry in enumerate(data.get("suite", [])):
        where = f"suite[{i}]"
        if isinstance(entry, str):
            entry = {"check": entry}
        if not isinstance(entry, dict) or "check" not in entry:
            raise ConfigError(f"{where}: expected a check name or {{check, params}}")
        name = entry["check"]
        if name not in verify.CHECKS:
            raise ConfigError(f"{where}.check: unknown check {name!r}; choose from {sorted(verify.CHECKS)}")
        params = dict(entry.get("params", {}))
        for key in SITE_PARAMS:
            if key in params:
                params[key] = parse_sites(params[key], model.n_sites, f"{where}.params.{key}")
        for key in COMPLEX_PARAMS:
            if key in params:
                params[key] = parse_complex(params[key], f"{where}.params.{key}")
        if "times" in params:
            params["times"] = _check_times(params["times"], f"{where}.params.times")
        for key in ("nu", "mu"):
            if key in params:
                limit = a if key == "nu" else a * (1 - 2.5 * eps)
                _check_grid([params[key]], limit, f"{where}.params.{key}")
        suite.append(SuiteItem(name, params, f"{i:02d}_{name}"))

    return ExperimentConfig(
        model=model,
        suite=suite,
        times=times,
        seed=int(data.get("seed", 0)) if seed is None else seed,
        eps=eps,
        nu_grid=nu_grid,
        mu_grid=mu_grid,
        output_dir=out or str(data.get("output_dir", "results")),
    )


# ---------------------------------------------------------------------------
# running


def _call(cfg: ExperimentConfig, item: SuiteItem) -> verify.CheckReport:
    fn = verify.CHECKS[item.check]
    params = dict(item.params)
    params.setdefault("seed", cfg.seed)
    if item.check in MODEL_FREE:
        return fn(**params)
    if item.check in ("check_leakage_cone", "check_dual_cone"):
        params.setdefault("eps", cfg.eps)
        if "mu" not in params:
            params["mu"] = cfg.mu_grid[0] if cfg.mu_grid else 0.2
    if item.check == "check_analyticity":
        params.setdefault("t", cfg.times[0])
    else:
        params.setdefault("times", cfg.times)
    try:
        return fn(cfg.model, **params)
    except TypeError as exc:
        raise ConfigError(f"{item.label}: bad parameters: {exc}") from exc


def cone_rows(report: verify.CheckReport) -> list:
    rows = []
    for s in report.samples:
        if "d_XY" not in s.meta:
            continue
        rows.append((s.meta["t"], s.meta["d_XY"], s.measured, s.bound, s.margin, s.vacuous))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return rows


def write_cone_csv(report: verify.CheckReport, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CONE_COLUMNS)
        for t, dxy, m, b, margin, vac in cone_rows(report):
            w.writerow([fmt(t), fmt(dxy), fmt(m), fmt(b), fmt(margin), "true" if vac else "false"])


def _run_item(cfg: ExperimentConfig, item: SuiteItem, out: Path) -> dict:
    report = _call(cfg, item)
    (out / f"{item.label}.json").write_text(report.to_json() + "\n")
    entry = {"check": item.check, "label": item.label, "verdict": report.verdict,
             "report": f"{item.label}.json", "n_samples": len(report.samples)}
    if item.check in CONE_CHECKS:
        write_cone_csv(report, out / f"{item.label}.csv")
        entry["curve"] = f"{item.label}.csv"
    for s in report.failures():
        log.error("%s failed: sample %s measured=%.6g bound=%.6g", item.label, s.digest, s.measured, s.bound)
    return entry


def run(cfg: ExperimentConfig, jobs: int = 1) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = bounds_table(cfg.model, cfg.eps, cfg.nu_grid, cfg.mu_grid)
    write_bounds_csv(rows, out / "bounds.csv")
    if jobs > 1 and len(cfg.suite) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(lambda it: _run_item(cfg, it, out), cfg.suite))
    else:
        entries = [_run_item(cfg, it, out) for it in cfg.suite]
    passed = all(e["verdict"] == "pass" for e in entries)
    summary = {"model": cfg.model.name, "seed": cfg.seed, "eps": cfg.eps,
               "checks": entries, "bounds": "bounds.csv",
               "verdict": "pass" if passed else "fail"}
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0 if passed else 2


# ---------------------------------------------------------------------------
# describe


def describe(model: LatticeModel) -> str:
    lines = [f"model: {model.name}", f"sites: {model.n_sites}", f"boundary: {model.boundary}"]
    kinds: dict = {}
    for j in model.jumps:
        kinds[j.kind] = kinds.get(j.kind, 0) + 1
    inventory = ", ".join(f"{n} {k}" for k, n in sorted(kinds.items())) or "none"
    lines.append(f"jumps: {len(model.jumps)} ({inventory})")
    a = model.decay_rate
    lines.append(f"decay rate a: {'finite range' if math.isinf(a) else fmt(a)}")
    lines.append(f"hermiticity residual: {hermiticity_residual(build_hamiltonian(model)):.3e}")
    lines.append(f"|G-tilde'|: {fmt(operator_norm(build_gprime(model)))}")
    lines.append("c'(nu) on the default grid:")
    for nu in default_nu_grid(model):
        lines.append(f"  nu={fmt(nu)}  c'={fmt(velocity_c_prime(model, nu).c_prime)}")
    if model.catalog is not None:
        nu = default_nu_grid(model)[2]
        big = resized(model, 2 * model.n_sites)
        c_d, c_2d = velocity_c_prime(model, nu).c_prime, velocity_c_prime(big, nu).c_prime
        lines.append(f"truncation gap at nu={fmt(nu)}: c'(d)={fmt(c_d)}  c'(2d)={fmt(c_2d)}  "
                     f"gap={fmt(c_2d - c_d)}")
    if model.catalog is not None and not np.ptp(model.potential):
        fit = fit_second_order(model)
        lines.append(f"small-nu slope: {fmt(fit['slope'])}  (fitted K={fmt(fit['K'])})")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lindcone", description="Light-cone bound verification for lattice Lindbladians")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a config-driven suite of checks")
    p_run.add_argument("config", help="experiment config (JSON)")
    p_run.add_argument("--out", default=None, help="output directory (overrides output_dir)")
    p_run.add_argument("--seed", type=int, default=None, help="seed (overrides the config)")
    p_run.add_argument("--jobs", type=int, default=1, help="suite items run concurrently")
    p_desc = sub.add_parser("describe", help="summarize a model file")
    p_desc.add_argument("model", help="model description (JSON) or a catalog name " + "/".join(CATALOG))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            if args.jobs < 1:
                raise ConfigError("--jobs must be >= 1")
            cfg = load_config(args.config, seed=args.seed, out=args.out)
            return run(cfg, jobs=args.jobs)
        if args.model in CATALOG:
            model = model_from_dict({"catalog": args.model})
        else:
            model = load_model(args.model)
        print(describe(model))
        return 0
    except PropagationOverflow as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ModelError, StripError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
