"""Line-based run configuration: ``section.key = value`` per line.

Blank lines and lines starting with ``#`` are ignored.  Unknown keys are
rejected; validation collects every violation before failing, so a bad file
reports all its problems at once.
"""

from dataclasses import dataclass

import numpy as np

from .grid import PERIODIC, ZERO_EXTENSION, Grid
from .model import DIFFUSIONS, FLUXES, PROFILES
from .solver import ENGQUIST_OSHER, LAX_FRIEDRICHS, Problem, SolverConfig
from .stochastic import geometric_noise, space_dependent_noise


class ConfigError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.violations))


def _parse_bool(s):
    low = s.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_float_list(s):
    return [float(p) for p in s.replace(" ", "").split(",") if p]


def _parse_str_list(s):
    return [p for p in s.replace(" ", "").split(",") if p]


def _parse_dt(s):
    if s.strip().lower() == "auto":
        return None
    return float(s)


def _parse_seed(s):
    if s.strip().lower() in ("", "none", "auto"):
        return None
    return int(s)


# key -> (parser, default)
SCHEMA = {
    "problem.flux": (str, "burgers"),
    "problem.flux_clip": (float, 2.0),
    "problem.flux_speed": (float, 1.0),
    "problem.diffusion": (str, "ramp"),
    "problem.diffusion_threshold": (float, 0.25),
    "problem.diffusion_slope": (float, 1.0),
    "problem.noise": (str, "geometric"),
    "problem.noise_k": (float, 0.25),
    "problem.noise_modes": (int, 16),
    "problem.space_dependent": (_parse_bool, False),
    "problem.u0": (str, "bump"),
    "problem.u0_amplitude": (float, 1.0),
    "problem.u0_center": (float, 0.0),
    "problem.u0_width": (float, 2.0),
    "grid.n_cells": (int, 512),
    "grid.x_min": (float, -8.0),
    "grid.x_max": (float, 8.0),
    "grid.boundary": (str, PERIODIC),
    "solver.epsilon": (float, 0.0625),
    "solver.dt": (_parse_dt, None),
    "solver.t_end": (float, 0.5),
    "solver.cfl_safety": (float, 0.4),
    "solver.scheme": (str, ENGQUIST_OSHER),
    "solver.r_split": (float, 0.5),
    "solver.lambda": (float, 0.5),
    "solver.c_lambda": (float, 1.0),
    "solver.mollify": (_parse_bool, True),
    "experiment.name": (str, "simulate"),
    "experiment.seed": (_parse_seed, None),
    "experiment.n_paths": (int, 64),
    "experiment.n_snapshots": (int, 6),
    "experiment.eps_list": (_parse_float_list,
                            [2.0**-4, 2.0**-5, 2.0**-6, 2.0**-7]),
    "experiment.delta_list": (_parse_float_list,
                              [2.0**-2, 2.0**-3, 2.0**-4, 2.0**-5]),
    "experiment.entropy_deltas": (_parse_float_list, [0.05, 0.025]),
    "experiment.k_points": (int, 17),
    "experiment.v0_shift": (float, 0.5),
    "experiment.slope_tol": (float, 0.05),
    "experiment.ci_floor": (float, 0.3),
    "experiment.tv_tol": (float, 0.02),
    "experiment.l1_tol": (float, 0.02),
    "experiment.energy_ratio_tol": (float, 3.0),
    "experiment.entropy_tol_scale": (float, 1.0),
    "experiment.quantile": (float, 0.95),
    "output.dir": (str, "out"),
    "output.formats": (_parse_str_list, ["csv", "json"]),
}

_NAME_SETS = {
    "problem.flux": set(FLUXES),
    "problem.diffusion": set(DIFFUSIONS),
    "problem.noise": {"geometric", "geometric-xdep", "off"},
    "problem.u0": set(PROFILES),
    "grid.boundary": {PERIODIC, ZERO_EXTENSION},
    "solver.scheme": {ENGQUIST_OSHER, LAX_FRIEDRICHS},
    "experiment.name": {"simulate", "entropy-check", "contraction",
                        "viscosity-rate", "cont-dep", "energy", "selftest"},
    "output.formats": {"csv", "json", "binary"},
}


@dataclass
class RunConfig:
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def echo(self):
        """Canonical snapshot of every key (defaults filled in)."""
        out = {}
        for key in sorted(SCHEMA):
            v = self.values[key]
            out[key] = "auto" if (key == "solver.dt" and v is None) else v
        return out


def parse_config(path):
    """Read and validate a config file; raises ConfigError with every issue."""
    violations = []
    raw = {}
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                violations.append(f"line {ln}: expected 'section.key = value'")
                continue
            key, _, value = stripped.partition("=")
            key = key.strip()
            value = value.split("#", 1)[0].strip()
            if key not in SCHEMA:
                violations.append(f"line {ln}: unknown key {key!r}")
                continue
            if key in raw:
                violations.append(f"line {ln}: duplicate key {key!r}")
                continue
            parser, _ = SCHEMA[key]
            try:
                raw[key] = parser(value)
            except (ValueError, TypeError) as exc:
                violations.append(f"line {ln}: bad value for {key}: {exc}")

    values = {key: default for key, (_, default) in SCHEMA.items()}
    values.update(raw)
    violations.extend(validate(values))
    if violations:
        raise ConfigError(violations)
    return RunConfig(values)


def default_config():
    values = {key: default for key, (_, default) in SCHEMA.items()}
    return RunConfig(values)


def validate(values):
    v = []
    lam = values["solver.lambda"]
    if not 0.0 < lam < 1.0:
        v.append(f"solver.lambda must lie in the open interval (0, 1), got {lam}")
    space_dep = values["problem.space_dependent"] or \
        values["problem.noise"] == "geometric-xdep"
    if space_dep and lam >= 0.5:
        v.append(
            f"space-dependent noise is only admissible for lambda < 1/2, "
            f"got lambda={lam}"
        )
    for key, names in _NAME_SETS.items():
        val = values[key]
        vals = val if isinstance(val, list) else [val]
        for item in vals:
            if item not in names:
                v.append(f"{key}: unknown value {item!r} "
                         f"(choose from {sorted(names)})")
    if values["grid.n_cells"] < 4:
        v.append(f"grid.n_cells must be >= 4, got {values['grid.n_cells']}")
    if not values["grid.x_max"] > values["grid.x_min"]:
        v.append("grid.x_max must exceed grid.x_min")
    if not 0 < values["solver.cfl_safety"] <= 1:
        v.append("solver.cfl_safety must lie in (0, 1]")
    if values["solver.epsilon"] < 0:
        v.append("solver.epsilon must be nonnegative")
    if values["solver.t_end"] <= 0:
        v.append("solver.t_end must be positive")
    if values["solver.c_lambda"] <= 0:
        v.append("solver.c_lambda must be positive")
    if values["solver.dt"] is not None and values["solver.dt"] <= 0:
        v.append("solver.dt must be positive or 'auto'")
    dx = (values["grid.x_max"] - values["grid.x_min"]) / max(values["grid.n_cells"], 1)
    if values["solver.r_split"] < dx:
        v.append(f"solver.r_split={values['solver.r_split']} is below the "
                 f"cell width {dx:.6g}: the singular part would be empty")
    if values["experiment.n_paths"] < 1:
        v.append("experiment.n_paths must be >= 1")
    if not 0 < values["experiment.quantile"] <= 1:
        v.append("experiment.quantile must lie in (0, 1]")
    return v


def build_grid(cfg):
    return Grid.from_window(cfg["grid.n_cells"], cfg["grid.x_min"],
                            cfg["grid.x_max"], cfg["grid.boundary"])


def build_u0(cfg, grid, center=None):
    profile = PROFILES[cfg["problem.u0"]]
    c = cfg["problem.u0_center"] if center is None else center
    return profile(grid.centers, cfg["problem.u0_amplitude"], c,
                   cfg["problem.u0_width"])


def build_flux(cfg):
    name = cfg["problem.flux"]
    if name == "linear":
        return FLUXES[name](cfg["problem.flux_speed"])
    return FLUXES[name](cfg["problem.flux_clip"])


def build_diffusion(cfg):
    name = cfg["problem.diffusion"]
    if name == "ramp":
        return DIFFUSIONS[name](cfg["problem.diffusion_threshold"],
                                cfg["problem.diffusion_slope"])
    if name in ("identity", "saturating"):
        return DIFFUSIONS[name](cfg["problem.diffusion_slope"])
    return DIFFUSIONS[name]()


def build_noise(cfg):
    name = cfg["problem.noise"]
    if name == "off":
        return None
    if name == "geometric-xdep" or cfg["problem.space_dependent"]:
        return space_dependent_noise(cfg["problem.noise_k"],
                                     cfg["problem.noise_modes"])
    return geometric_noise(cfg["problem.noise_k"], cfg["problem.noise_modes"])


def build_problem(cfg, u0=None, grid=None):
    grid = grid if grid is not None else build_grid(cfg)
    u0 = u0 if u0 is not None else build_u0(cfg, grid)
    return Problem(grid, build_flux(cfg), build_diffusion(cfg),
                   build_noise(cfg), np.asarray(u0, dtype=np.float64),
                   cfg["solver.lambda"], cfg["solver.c_lambda"])


def build_solver_config(cfg):
    return SolverConfig(
        epsilon=cfg["solver.epsilon"],
        dt=cfg["solver.dt"],
        t_end=cfg["solver.t_end"],
        cfl_safety=cfg["solver.cfl_safety"],
        convective_scheme=cfg["solver.scheme"],
        r_split=cfg["solver.r_split"],
        mollify=cfg["solver.mollify"],
    )
