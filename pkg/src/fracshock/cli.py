"""Command-line entry point.

Subcommands wrap the library experiments:

    simulate        one seeded trajectory, fields written as CSV/binary
    entropy-check   Monte Carlo entropy-inequality residuals
    contraction     coupled-path L1 contraction check
    viscosity-rate  vanishing-viscosity convergence-rate fit
    cont-dep        continuous dependence on the diffusion nonlinearity
    energy          uniform-in-viscosity energy boundedness
    selftest        fast invariant battery (operator identities, oracles,
                    statistical sanity, determinism)

Every experiment is reproducible from (config, seed); an omitted seed is
generated once, printed, and recorded in ``run.json``.  Exit status is 0
iff all pass criteria hold; module errors are emitted as JSON records on
stderr with exit status 2.
"""

import argparse
import json
import os
import secrets
import sys

import numpy as np

from . import __version__
from ._backend import BACKEND
from .config import (ConfigError, build_grid, build_problem,
                     build_solver_config, build_u0, default_config,
                     parse_config)
from .entropy import default_test_functions, entropy_report, residual_tolerance
from .estimates import (continuous_dependence, energy_report, l1_contraction,
                        viscosity_rate)
from .solver import resolve_dt, run, run_ensemble
from .stochastic import sample_path
from . import reports
from . import selftest as selftest_mod

SUBCOMMANDS = ("simulate", "entropy-check", "contraction", "viscosity-rate",
               "cont-dep", "energy", "selftest")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="fracshock",
        description="simulation and verification harness for stochastic "
                    "fractional conservation laws",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None,
                       help="path to a section.key = value config file")
        p.add_argument("--seed", type=int, default=None,
                       help="base seed (overrides experiment.seed)")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for ensemble members")
        p.add_argument("--out", default=None,
                       help="output directory (or FRACSHOCK_OUT)")
    return parser


def _resolve_out(args, cfg):
    out = args.out or os.environ.get("FRACSHOCK_OUT") or cfg["output.dir"]
    os.makedirs(out, exist_ok=True)
    return out


def _resolve_seed(args, cfg):
    if args.seed is not None:
        return int(args.seed), False
    if cfg["experiment.seed"] is not None:
        return int(cfg["experiment.seed"]), False
    seed = secrets.randbits(63)
    print(f"seed not supplied; generated seed = {seed}")
    return seed, True


def _path_seeds(base_seed, n_paths):
    return [base_seed * 1_000_003 + i for i in range(n_paths)]


def _write_run_json(out, cfg, command, seed):
    reports.write_json(os.path.join(out, "run.json"), {
        "command": command,
        "seed": seed,
        "version": __version__,
        "config": cfg.echo(),
    })


def _cmd_simulate(cfg, seed, out, threads):
    grid = build_grid(cfg)
    problem = build_problem(cfg)
    sc = build_solver_config(cfg)
    dt, n_steps = resolve_dt(problem, sc)
    path = sample_path(seed, n_steps, problem.n_modes, dt)
    times = np.linspace(0.0, sc.t_end, max(2, cfg["experiment.n_snapshots"]))
    traj = run(problem, sc, path, snapshot_times=times)
    formats = cfg["output.formats"]
    if "csv" in formats:
        reports.write_fields_csv(os.path.join(out, "fields_simulate.csv"),
                                 traj.times, traj.snapshots, grid.centers)
    if "binary" in formats:
        reports.write_fields_binary(os.path.join(out, "fields_simulate.bin"),
                                    traj.times, traj.snapshots)
    summary = {
        "experiment": "simulate",
        "dt": traj.dt,
        "n_steps": traj.n_steps,
        "times": traj.times,
        "l1": [grid.l1(u) for u in traj.snapshots],
        "l2_sq": [grid.l2_sq(u) for u in traj.snapshots],
        "tv": [grid.tv(u) for u in traj.snapshots],
        "mass": [grid.mass(u) for u in traj.snapshots],
        "u_absmax": traj.u_absmax,
        "pass": True,
    }
    reports.write_json(os.path.join(out, "report_simulate.json"), summary)
    return summary


def _cmd_entropy(cfg, seed, out, threads):
    problem = build_problem(cfg)
    sc = build_solver_config(cfg)
    seeds = _path_seeds(seed, cfg["experiment.n_paths"])
    _, ensemble = run_ensemble(problem, sc, seeds, snapshot_times="dense",
                               threads=threads, keep_trajectories=True)
    u0 = problem.u0
    k_lattice = np.linspace(float(u0.min()) - 0.1, float(u0.max()) + 0.1,
                            cfg["experiment.k_points"])
    phis = default_test_functions(sc.t_end)
    deltas = cfg["experiment.entropy_deltas"]
    residuals = entropy_report(ensemble, k_lattice, deltas, phis, sc.r_split)
    quantile = cfg["experiment.quantile"]
    scale = cfg["experiment.entropy_tol_scale"]
    records = []
    all_pass = True
    for res in residuals:
        tol = residual_tolerance(ensemble, res.delta, scale)
        ok_mean = res.value >= -(tol + 3.0 * res.std_error)
        frac = float(np.mean(res.per_path >= -tol))
        ok_quant = frac >= quantile
        ok = bool(ok_mean and ok_quant)
        all_pass &= ok
        records.append({
            "phi_id": res.phi_name, "k": res.k, "delta": res.delta,
            "r": res.r_split, "mean": res.value, "se": res.std_error,
            "terms": res.terms, "tol": tol, "path_fraction_ok": frac,
            "pass": ok,
        })
    report = {
        "experiment": "entropy-check",
        "n_paths": ensemble.n_paths,
        "dt": ensemble.dt,
        "cases": records,
        "pass": bool(all_pass),
    }
    reports.write_json(os.path.join(out, "report_entropy.json"), report)
    return report


def _cmd_contraction(cfg, seed, out, threads):
    grid = build_grid(cfg)
    problem = build_problem(cfg)
    sc = build_solver_config(cfg)
    u0 = build_u0(cfg, grid)
    v0 = build_u0(cfg, grid, center=cfg["problem.u0_center"]
                  + cfg["experiment.v0_shift"])
    seeds = _path_seeds(seed, cfg["experiment.n_paths"])
    report = l1_contraction(problem, u0, v0, sc, seeds,
                            tol=cfg["experiment.l1_tol"], threads=threads)
    reports.write_json(os.path.join(out, "report_contraction.json"), report)
    reports.write_table_csv(
        os.path.join(out, "report_contraction.csv"),
        ("t", "mean", "se", "bound"),
        zip(report["times"], report["mean"], report["se"], report["bound"]))
    return report


def _cmd_viscosity_rate(cfg, seed, out, threads):
    problem = build_problem(cfg)
    sc = build_solver_config(cfg)
    seeds = _path_seeds(seed, cfg["experiment.n_paths"])
    res = viscosity_rate(problem, sc, cfg["experiment.eps_list"], seeds,
                         slope_tol=cfg["experiment.slope_tol"],
                         ci_floor=cfg["experiment.ci_floor"],
                         boot_seed=seed ^ 0x5EED, threads=threads)
    fit = res.pop("rate_fit")
    report = {**fit.to_dict(), **{k: v for k, v in res.items() if k != "fit"}}
    reports.write_json(os.path.join(out, "report_viscosity_rate.json"), report)
    reports.write_table_csv(
        os.path.join(out, "report_viscosity_rate.csv"),
        ("epsilon", "mean", "se"),
        [(p["x"], p["mean"], p["se"]) for p in report["points"]])
    return report


def _cmd_cont_dep(cfg, seed, out, threads):
    problem = build_problem(cfg)
    sc = build_solver_config(cfg)
    seeds = _path_seeds(seed, cfg["experiment.n_paths"])
    res = continuous_dependence(problem, sc, cfg["experiment.delta_list"],
                                seeds, slope_tol=cfg["experiment.slope_tol"],
                                boot_seed=seed ^ 0xC0DE, threads=threads)
    fit = res.pop("rate_fit")
    report = {**fit.to_dict(), **{k: v for k, v in res.items() if k != "fit"}}
    reports.write_json(os.path.join(out, "report_cont_dep.json"), report)
    reports.write_table_csv(
        os.path.join(out, "report_cont_dep.csv"),
        ("perturbation", "mean", "se"),
        [(p["x"], p["mean"], p["se"]) for p in report["points"]])
    return report


def _cmd_energy(cfg, seed, out, threads):
    problem = build_problem(cfg)
    sc = build_solver_config(cfg)
    seeds = _path_seeds(seed, cfg["experiment.n_paths"])
    report = energy_report(problem, sc, cfg["experiment.eps_list"], seeds,
                           ratio_tol=cfg["experiment.energy_ratio_tol"],
                           threads=threads)
    reports.write_json(os.path.join(out, "report_energy.json"), report)
    reports.write_table_csv(
        os.path.join(out, "report_energy.csv"),
        ("epsilon", "sup_mean_l2_sq", "eps_int_grad_sq", "int_hlam_sq",
         "total"),
        [(r["epsilon"], r["sup_mean_l2_sq"], r["eps_int_grad_sq"],
          r["int_hlam_sq"], r["total"]) for r in report["rows"]])
    return report


_DRIVERS = {
    "simulate": _cmd_simulate,
    "entropy-check": _cmd_entropy,
    "contraction": _cmd_contraction,
    "viscosity-rate": _cmd_viscosity_rate,
    "cont-dep": _cmd_cont_dep,
    "energy": _cmd_energy,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config) if args.config else default_config()
    except ConfigError as exc:
        for violation in exc.violations:
            _error_record("ConfigError", violation)
        return 2
    except OSError as exc:
        _error_record("OSError", str(exc))
        return 2

    if args.command == "selftest":
        out = args.out or os.environ.get("FRACSHOCK_OUT")
        ok, results = selftest_mod.run_selftest()
        if out:
            os.makedirs(out, exist_ok=True)
            reports.write_json(os.path.join(out, "report_selftest.json"),
                               {"experiment": "selftest", "checks": results,
                                "pass": ok})
        return 0 if ok else 1

    seed, generated = _resolve_seed(args, cfg)
    out = _resolve_out(args, cfg)
    print(f"[fracshock] {args.command}: seed={seed} backend={BACKEND} "
          f"out={out}", file=sys.stderr)
    try:
        _write_run_json(out, cfg, args.command, seed)
        report = _DRIVERS[args.command](cfg, seed, out, max(1, args.threads))
    except (ValueError, RuntimeError) as exc:
        _error_record(type(exc).__name__, str(exc))
        return 2
    passed = bool(report.get("pass", False))
    print(f"[fracshock] {args.command}: {'PASS' if passed else 'FAIL'}",
          file=sys.stderr)
    return 0 if passed else 1


def _error_record(kind, message):
    json.dump({"error": kind, "message": message}, sys.stderr)
    sys.stderr.write("\n")


if __name__ == "__main__":
    sys.exit(main())
