"""Command-line entry point.

Subcommands:
  run     integrate a scenario, writing monitors.csv, a final snapshot, and
          summary.json into the output directory
  verify  execute the verification suites from a suite config, writing
          report.json and results.jsonl
  sweep   cartesian sweep over (kappa, r0, r1, eps) axes; one run per point,
          aggregated sup-in-time functional table as sweep.csv
  report  render a monitors.csv into a human-readable summary table

Exit codes: 0 success; 1 verification/run check failure; 2 configuration
error; 3 positivity failure during integration. Configs are JSON files; the
QNSLAB_OUT environment variable may override the output directory (nothing
else is overridable from the environment).
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .functionals import DISSIPATION_KEYS
from .initdata import SCENARIOS, mollify, scenario, validate_initial
from .physics import (DESK_P0, DESK_SIGMA0, PAPER_P0, PAPER_SIGMA0, QnsParams,
                      State, check_constraints)
from .snapshots import read_field, write_field
from .timeloop import IntegratorConfig, integrate
from .verify import (DYNAMICS_CHECKS, IDENTITY_CHECKS, INEQUALITY_CHECKS,
                     SuiteConfig, run_suite)

MONITOR_COLUMNS = ("time", "mass", "energy", "bd_entropy", "mv", "rho_min",
                   "rho_max", "mass_balance_residual") + DISSIPATION_KEYS

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_POSITIVITY = 3


class ConfigError(ValueError):
    pass


def _load_config(path):
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def _out_dir(cfg, args):
    out = os.environ.get("QNSLAB_OUT") or args.out or cfg.get("out") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _build_params(cfg, mode):
    block = dict(cfg.get("params", {}))
    if mode == "paper":
        block.setdefault("p0", PAPER_P0)
        block.setdefault("sigma0", PAPER_SIGMA0)
        block["mode"] = "paper"
    else:
        block.setdefault("p0", DESK_P0)
        block.setdefault("sigma0", DESK_SIGMA0)
        block["mode"] = "desk"
    try:
        return QnsParams(**block)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid params block: {exc}") from exc


def _build_integrator(cfg):
    block = dict(cfg.get("integrator", {}))
    try:
        return IntegratorConfig(**block)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid integrator block: {exc}") from exc


def _build_initial(cfg, params):
    if "snapshot" in cfg:
        path = cfg["snapshot"]
        if not os.path.exists(path):
            raise ConfigError(f"snapshot not found: {path}")
        rho, _, time = read_field(path)
        vel_path = cfg.get("snapshot_velocity")
        if vel_path:
            vel, _, _ = read_field(vel_path)
        else:
            from .fields import VectorField
            vel = VectorField.zero(rho.grid)
        return State(rho, vel, form="u", time=time)
    name = cfg.get("scenario")
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; known: {SCENARIOS}")
    raw, _ = scenario(name, n=cfg.get("n", 128))
    if cfg.get("mollify", False) or np.min(raw.rho0.values) <= 0:
        if params.eps <= 0:
            raise ConfigError("mollification requires eps > 0")
        return mollify(raw, params.eps, params)
    return State(raw.rho0, raw.m0, form="u")


def _write_monitors(path, records):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MONITOR_COLUMNS)
        for r in records:
            row = [r.time, r.mass, r.energy, r.bd_entropy, r.mv,
                   r.rho_min, r.rho_max, r.mass_balance_residual]
            row += [r.dissipation[k] for k in DISSIPATION_KEYS]
            writer.writerow([repr(float(x)) for x in row])


def cmd_run(args):
    cfg = _load_config(args.config)
    out = _out_dir(cfg, args)
    mode = args.mode or cfg.get("mode", "desk")
    params = _build_params(cfg, mode)
    config = _build_integrator(cfg)
    initial = _build_initial(cfg, params)
    constraint_report = check_constraints(params)
    if params.strict or cfg.get("strict", False):
        for c in constraint_report.checks:
            if not (c.passed or c.informational):
                raise ConfigError(f"admissibility violated: {c.name} "
                                  f"(lhs={c.lhs:g}, rhs={c.rhs:g})")
    init_report = validate_initial(initial, params)
    traj = integrate(initial, params, config, check_strict=False)
    _write_monitors(os.path.join(out, "monitors.csv"), traj.records)
    if traj.states:
        final = traj.states[-1]
        write_field(os.path.join(out, "final_rho.dat"), final.rho,
                    "rho", final.time)
        write_field(os.path.join(out, "final_vel.dat"), final.vel,
                    "vel", final.time)
    final_rec = traj.records[-1]
    summary = {
        "status": traj.status,
        "final_time": final_rec.time,
        "final": {
            "mass": final_rec.mass, "energy": final_rec.energy,
            "bd_entropy": final_rec.bd_entropy, "mv": final_rec.mv,
            "rho_min": final_rec.rho_min, "rho_max": final_rec.rho_max,
        },
        "initial_norms": init_report.norms,
        "constraints": [{
            "name": c.name, "lhs": c.lhs, "rhs": c.rhs,
            "passed": c.passed, "informational": c.informational,
        } for c in constraint_report.checks],
        "mode": params.mode,
    }
    with open(os.path.join(out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"run: status={traj.status} t={final_rec.time:g} "
          f"mass={final_rec.mass:.6g} energy={final_rec.energy:.6g}")
    if traj.status.startswith("positivity-failure"):
        return EXIT_POSITIVITY
    if traj.status != "completed":
        return EXIT_CHECK_FAILURE
    return EXIT_OK


def _suite_config(cfg):
    kwargs = {}
    if "seeds" in cfg:
        kwargs["seeds"] = tuple(cfg["seeds"])
    elif "num_seeds" in cfg:
        kwargs["seeds"] = tuple(range(int(cfg["num_seeds"])))
    if "grids" in cfg:
        kwargs["grids"] = tuple(tuple(g) for g in cfg["grids"])
    for key in ("modes", "floor", "rel_tol", "canary"):
        if key in cfg:
            kwargs[key] = cfg[key]
    if "checks" in cfg:
        kwargs["checks"] = tuple(cfg["checks"])
    try:
        return SuiteConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid suite config: {exc}") from exc


def cmd_verify(args):
    cfg = _load_config(args.config)
    out = _out_dir(cfg, args)
    suites = cfg.get("suites", ["identity", "inequality"])
    defaults = {
        "identity": IDENTITY_CHECKS,
        "inequality": INEQUALITY_CHECKS,
        "dynamics": DYNAMICS_CHECKS,
    }
    overall = True
    for name in suites:
        if name not in defaults:
            raise ConfigError(f"unknown suite {name!r}")
        block = dict(cfg.get(name, {}))
        for key in ("seeds", "num_seeds", "grids", "modes", "floor",
                    "rel_tol", "canary", "checks"):
            if key in cfg and key not in block:
                block[key] = cfg[key]
        block.setdefault("checks", list(defaults[name]))
        sc = _suite_config(block)
        report = run_suite(name, sc)
        with open(os.path.join(out, f"{name}_report.json"), "w") as fh:
            fh.write(report.to_json() + "\n")
        with open(os.path.join(out, f"{name}_results.jsonl"), "w") as fh:
            fh.write(report.to_jsonl() + "\n")
        for agg in report.aggregates():
            status = "ok" if agg.failures == 0 else "FAIL"
            print(f"verify[{name}] {agg.check}: {agg.count} checks, "
                  f"{agg.failures} failures, worst margin "
                  f"{agg.worst_margin:.3e} (seed {agg.worst_seed}) [{status}]")
        overall &= report.overall_pass
    return EXIT_OK if overall else EXIT_CHECK_FAILURE


SWEEP_AXES = ("kappa", "r0", "r1", "eps")


def cmd_sweep(args):
    cfg = _load_config(args.config)
    out = _out_dir(cfg, args)
    mode = args.mode or cfg.get("mode", "desk")
    sweep = cfg.get("sweep", {})
    for key in sweep:
        if key not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {key!r}; "
                              f"allowed: {SWEEP_AXES}")
    axes = [(k, list(sweep[k])) for k in SWEEP_AXES if k in sweep]
    if not axes:
        axes = [("eps", [_build_params(cfg, mode).eps])]
    points = list(itertools.product(*(vals for _, vals in axes)))
    names = [k for k, _ in axes]

    def one_point(point):
        sub = json.loads(json.dumps(cfg))
        sub.setdefault("params", {}).update(dict(zip(names, point)))
        try:
            params = _build_params(sub, mode)
            config = _build_integrator(sub)
            initial = _build_initial(sub, params)
            traj = integrate(initial, params, config, keep_states=False,
                             check_strict=False)
            recs = traj.records
            return {
                **dict(zip(names, point)),
                "status": traj.status,
                "sup_energy": max(r.energy for r in recs),
                "sup_bd_entropy": max(r.bd_entropy for r in recs),
                "sup_mv": max(r.mv for r in recs),
                "min_rho": min(r.rho_min for r in recs),
                "max_rho": max(r.rho_max for r in recs),
                "final_mass": recs[-1].mass,
            }
        except (ValueError, RuntimeError) as exc:
            return {**dict(zip(names, point)), "status": f"error: {exc}"}

    if args.threads and args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(one_point, points))
    else:
        rows = [one_point(p) for p in points]

    columns = names + ["status", "sup_energy", "sup_bd_entropy", "sup_mv",
                       "min_rho", "max_rho", "final_mass"]
    with open(os.path.join(out, "sweep.csv"), "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, restval="")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    failed = [r for r in rows if r["status"] != "completed"]
    print(f"sweep: {len(rows)} runs, {len(failed)} failed")
    return EXIT_CHECK_FAILURE if failed else EXIT_OK


def cmd_report(args):
    cfg = _load_config(args.config) if args.config else {}
    path = cfg.get("monitors") or args.monitors
    if not path or not os.path.exists(path):
        raise ConfigError(f"monitors CSV not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise ConfigError("monitors CSV is empty")
    cols = [c for c in MONITOR_COLUMNS if c in rows[0]]
    print(f"{'column':<28}{'initial':>15}{'final':>15}"
          f"{'sup':>15}{'time-integral':>17}")
    times = [float(r["time"]) for r in rows]
    for col in cols:
        if col == "time":
            continue
        vals = [float(r[col]) for r in rows]
        ti = float(np.trapezoid(vals, times)) if len(vals) > 1 else 0.0
        print(f"{col:<28}{vals[0]:>15.6e}{vals[-1]:>15.6e}"
              f"{max(vals):>15.6e}{ti:>17.6e}")
    return EXIT_OK


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="qnslab",
        description="Periodic-domain simulator and verification laboratory "
                    "for a regularized quantum Navier-Stokes system.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("verify", cmd_verify),
                     ("sweep", cmd_sweep), ("report", cmd_report)):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config path",
                       required=(name != "report"))
        p.add_argument("--out", help="output directory")
        p.add_argument("--mode", choices=("paper", "desk"),
                       help="constant set (overrides config)")
        p.add_argument("--threads", type=int, default=1)
        if name == "report":
            p.add_argument("--monitors", help="monitors.csv path")
        p.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
