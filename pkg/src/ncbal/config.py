"""Run configuration: plain-text section format, presets, setup assembly.

Config files use sections ``[model] [mesh] [initial] [flux] [solver]
[stationary] [output]`` with ``key = value`` lines, ``#`` comments and
``true``/``false`` booleans.  Named initial-condition presets
(``lake_at_rest``, ``perturbed_lake``, ``dam_break``, ``hydrostatic_column``)
cover the standard scenarios so runs need no hand-built fields; the
``[stationary]`` section can set ``z0 = auto`` to place the lake surface from
the initial water volume.

The environment variable ``NCBAL_OUTPUT_DIR`` redirects relative output
paths.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .fluxes import make_flux
from .mesh import Mesh, build_structured_2d, build_uniform_1d, load_mesh, project_cell_averages
from .models import (
    LagrangianGas,
    PorousEuler,
    ShallowWater,
    StateBox,
    constant_Tp_family,
    hydrostatic_column_family,
    lake_at_rest_family,
    lake_level_from_volume,
)
from .solver import RunSetup

__all__ = ["ConfigError", "parse_config_text", "load_config", "build_run", "RunPlan"]

SECTIONS = ("model", "mesh", "initial", "flux", "solver", "stationary", "output")


class ConfigError(ValueError):
    """Unusable run configuration."""


def parse_config_text(text: str) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    current: dict[str, str] | None = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in SECTIONS:
                raise ConfigError(f"line {ln}: unknown section [{name}]")
            current = sections.setdefault(name, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value'")
        if current is None:
            raise ConfigError(f"line {ln}: key outside any section")
        key, value = line.split("=", 1)
        current[key.strip()] = value.strip()
    return sections


def load_config(path) -> dict[str, dict[str, str]]:
    try:
        with open(path) as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc


class _Section:
    def __init__(self, name: str, data: dict[str, str]):
        self.name = name
        self.data = data

    def get(self, key, default=None):
        return self.data.get(key, default)

    def require(self, key) -> str:
        if key not in self.data:
            raise ConfigError(f"[{self.name}] is missing the key '{key}'")
        return self.data[key]

    def get_float(self, key, default=None) -> float | None:
        val = self.data.get(key)
        if val is None:
            return default
        try:
            return float(val)
        except ValueError:
            raise ConfigError(f"[{self.name}] {key} = {val!r} is not a number") from None

    def get_int(self, key, default=None) -> int | None:
        val = self.data.get(key)
        if val is None:
            return default
        try:
            return int(val)
        except ValueError:
            raise ConfigError(f"[{self.name}] {key} = {val!r} is not an integer") from None

    def get_bool(self, key, default=False) -> bool:
        val = self.data.get(key)
        if val is None:
            return default
        if val not in ("true", "false"):
            raise ConfigError(f"[{self.name}] {key} must be 'true' or 'false'")
        return val == "true"

    def get_floats(self, key) -> tuple[float, ...]:
        raw = self.require(key)
        try:
            return tuple(float(v) for v in raw.split(","))
        except ValueError:
            raise ConfigError(f"[{self.name}] {key} = {raw!r} is not a number list") from None


@dataclass
class RunPlan:
    setup: RunSetup
    z0: float | None  # lake surface level when a lake family is configured
    diagnostics_path: str | None
    snapshot_dir: str | None


def _build_model(sec: _Section):
    kind = sec.require("kind")
    if kind == "sw1d":
        return ShallowWater(g=sec.get_float("g", 9.81), dim=1)
    if kind == "sw2d":
        return ShallowWater(g=sec.get_float("g", 9.81), dim=2)
    if kind == "porous_euler":
        return PorousEuler(gamma=sec.get_float("gamma", 1.4), c_v=sec.get_float("c_v", 1.0))
    if kind == "lagrangian":
        return LagrangianGas(gamma=sec.get_float("gamma", 1.4), c_v=sec.get_float("c_v", 1.0))
    raise ConfigError(f"[model] unknown kind {kind!r}")


def _build_mesh(sec: _Section, base_dir: str) -> Mesh:
    kind = sec.require("kind")
    if kind == "uniform_1d":
        return build_uniform_1d(
            sec.get_float("x_min", 0.0),
            sec.get_float("x_max", 1.0),
            sec.get_int("cells", 100),
            boundary=sec.get("boundary", "wall"),
        )
    if kind == "structured_2d":
        return build_structured_2d(
            sec.get_int("nx", 16),
            sec.get_int("ny", 16),
            sec.get_float("x_min", 0.0),
            sec.get_float("x_max", 1.0),
            sec.get_float("y_min", 0.0),
            sec.get_float("y_max", 1.0),
            element=sec.get("element", "quad"),
        )
    if kind == "file":
        path = os.path.join(base_dir, sec.require("path"))
        if not os.path.exists(path):
            raise ConfigError(f"[mesh] file not found: {path}")
        return load_mesh(path)
    raise ConfigError(f"[mesh] unknown kind {kind!r}")


def _alpha_field(sec: _Section, mesh: Mesh, base_dir: str) -> np.ndarray:
    kind = sec.get("bathymetry", "flat")
    order = sec.get_int("quadrature", 1)
    if kind == "flat":
        value = sec.get_float("alpha", 0.0)
        return np.full(mesh.n_cells, value)
    if kind == "step":
        lo = sec.get_float("alpha_left", 0.0)
        hi = sec.get_float("alpha_right", 0.25)
        x_step = sec.get_float("x_step", 0.5)
        fn = lambda x: np.where(x[:, 0] > x_step, hi, lo)
        return project_cell_averages(fn, mesh, order)
    if kind == "ramp":
        a0 = sec.get_float("alpha0", 0.0)
        slope = sec.get_float("slope", 0.25)
        fn = lambda x: a0 + slope * x[:, 0]
        return project_cell_averages(fn, mesh, order)
    if kind == "file":
        path = os.path.join(base_dir, sec.require("path"))
        if not os.path.exists(path):
            raise ConfigError(f"[initial] bathymetry file not found: {path}")
        vals = np.loadtxt(path)
        if vals.shape != (mesh.n_cells,):
            raise ConfigError(
                f"[initial] bathymetry file holds {vals.size} values for {mesh.n_cells} cells"
            )
        return vals
    raise ConfigError(f"[initial] unknown bathymetry kind {kind!r}")


def _initial_state(sec: _Section, model, mesh: Mesh, alpha: np.ndarray) -> np.ndarray:
    preset = sec.require("preset")
    x = mesh.centroids

    if preset == "lake_at_rest":
        if not isinstance(model, ShallowWater):
            raise ConfigError("[initial] lake_at_rest needs a shallow water model")
        z0 = sec.get_float("z0", 1.0)
        fam = lake_at_rest_family(model, z0, alpha)
        return fam.states.copy()

    if preset == "perturbed_lake":
        if not isinstance(model, ShallowWater):
            raise ConfigError("[initial] perturbed_lake needs a shallow water model")
        z0 = sec.get_float("z0", 1.0)
        amp = sec.get_float("amplitude", 0.1)
        width = sec.get_float("width", 0.08)
        cx = sec.get_float("center_x", sec.get_float("center", 0.3))
        h_eq = z0 - alpha
        if np.any(h_eq < model.h_min):
            raise ConfigError(
                "[initial] surface level z0 does not cover the bathymetry: "
                "the total water volume is insufficient to keep every cell wet"
            )
        if model.dim == 1:
            r2 = ((x[:, 0] - cx) / width) ** 2
        else:
            cy = sec.get_float("center_y", 0.3)
            r2 = ((x[:, 0] - cx) ** 2 + (x[:, 1] - cy) ** 2) / width**2
        h = h_eq * (1.0 + amp * np.exp(-r2))
        U0 = np.zeros((mesh.n_cells, model.n_comp))
        U0[:, 0] = h
        return U0

    if preset == "dam_break":
        if not isinstance(model, ShallowWater):
            raise ConfigError("[initial] dam_break needs a shallow water model")
        h_l = sec.get_float("h_left", 2.0)
        h_r = sec.get_float("h_right", 1.0)
        x_split = sec.get_float("x_split", 0.5)
        U0 = np.zeros((mesh.n_cells, model.n_comp))
        U0[:, 0] = np.where(x[:, 0] < x_split, h_l, h_r)
        return U0

    if preset == "hydrostatic_column":
        if isinstance(model, LagrangianGas):
            fam = hydrostatic_column_family(
                model,
                sec.get_float("u0", 0.0),
                sec.get_float("p_minus_alpha", 1.0),
                sec.get_float("temperature", 1.0),
                alpha,
            )
            return fam.states.copy()
        if isinstance(model, PorousEuler):
            fam = constant_Tp_family(
                model, sec.get_float("temperature", 1.0), sec.get_float("p0", 1.0), alpha
            )
            return fam.states.copy()
        raise ConfigError("[initial] hydrostatic_column needs a Lagrangian or porous Euler model")

    raise ConfigError(f"[initial] unknown preset {preset!r}")


def _stationary_family(sec: _Section, model, mesh: Mesh, alpha, U0):
    kind = sec.get("family", "none")
    if kind == "none":
        return None, None
    if kind == "lake_at_rest":
        if not isinstance(model, ShallowWater):
            raise ConfigError("[stationary] lake_at_rest needs a shallow water model")
        raw = sec.get("z0", "auto")
        if raw == "auto":
            volume = float(mesh.areas @ U0[:, 0])
            z0 = lake_level_from_volume(alpha, mesh.areas, volume, model.h_min)
        else:
            try:
                z0 = float(raw)
            except ValueError:
                raise ConfigError(f"[stationary] z0 = {raw!r} is not a number or 'auto'") from None
        return lake_at_rest_family(model, z0, alpha), z0
    if kind == "constant_Tp":
        if not isinstance(model, PorousEuler):
            raise ConfigError("[stationary] constant_Tp needs the porous Euler model")
        return (
            constant_Tp_family(
                model, sec.get_float("t0", 1.0), sec.get_float("p0", 1.0), alpha
            ),
            None,
        )
    if kind == "hydrostatic_column":
        if not isinstance(model, LagrangianGas):
            raise ConfigError("[stationary] hydrostatic_column needs the Lagrangian model")
        return (
            hydrostatic_column_family(
                model,
                sec.get_float("u0", 0.0),
                sec.get_float("p_minus_alpha", 1.0),
                sec.get_float("temperature", 1.0),
                alpha,
            ),
            None,
        )
    raise ConfigError(f"[stationary] unknown family {kind!r}")


def _resolve_output(path: str | None, base_dir: str) -> str | None:
    if path is None:
        return None
    out_base = os.environ.get("NCBAL_OUTPUT_DIR", base_dir)
    return path if os.path.isabs(path) else os.path.join(out_base, path)


def build_run(config: dict[str, dict[str, str]], base_dir: str = ".") -> RunPlan:
    """Assemble a full run from parsed config sections."""
    try:
        model = _build_model(_Section("model", config.get("model", {})))
        mesh = _build_mesh(_Section("mesh", config.get("mesh", {})), base_dir)
        init = _Section("initial", config.get("initial", {}))
        alpha = _alpha_field(init, mesh, base_dir)
        U0 = _initial_state(init, model, mesh, alpha)
        family, z0 = _stationary_family(
            _Section("stationary", config.get("stationary", {})), model, mesh, alpha, U0
        )

        sol = _Section("solver", config.get("solver", {}))
        box = None
        if "box_lo" in sol.data or "box_hi" in sol.data:
            lo = sol.get_floats("box_lo")
            hi = sol.get_floats("box_hi")
            if len(lo) != model.n_comp or len(hi) != model.n_comp:
                raise ConfigError(
                    f"[solver] box needs {model.n_comp} components for model {model.name}"
                )
            a_lo = sol.get_float("box_alpha_lo", float(np.min(alpha)))
            a_hi = sol.get_float("box_alpha_hi", float(np.max(alpha)))
            box = StateBox(lo, hi, a_lo, a_hi)
        zeta = sol.get_float("zeta", 0.1)
        if not (0.0 < zeta < 1.0):
            raise ConfigError("[solver] zeta must lie strictly between 0 and 1")
        conv_raw = sol.get("convergence_rtol", "1e-10")
        conv = None if conv_raw == "none" else float(conv_raw)
        threads = sol.get_int("threads", 1)
        if threads != 1:
            raise ConfigError("[solver] only threads = 1 is supported")

        out = _Section("output", config.get("output", {}))
        diagnostics_path = _resolve_output(out.get("diagnostics"), base_dir)
        snapshot_dir = _resolve_output(out.get("snapshot_dir"), base_dir)

        setup = RunSetup(
            model=model,
            mesh=mesh,
            flux=make_flux(_Section("flux", config.get("flux", {})).get("scheme", "rusanov")),
            U0=U0,
            alpha=alpha,
            box=box,
            family=family,
            cfl_mode=sol.get("cfl", "strengthened" if box is not None else "basic"),
            zeta=zeta,
            max_steps=sol.get_int("max_steps", 1000),
            t_end=sol.get_float("t_end"),
            convergence_rtol=conv,
            stop_on_stationary=sol.get_bool("stop_on_stationary", False),
            snapshot_every=out.get_int("snapshot_every", 0),
            debug_convex=sol.get_bool("debug_convex", False),
            diagnostics_path=diagnostics_path,
            snapshot_dir=snapshot_dir,
        )
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return RunPlan(setup=setup, z0=z0, diagnostics_path=diagnostics_path, snapshot_dir=snapshot_dir)
