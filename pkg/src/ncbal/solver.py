"""Explicit first-order finite volume time stepping.

``step`` advances every cell with the K view of its interface fluxes,

    u_K(t+dt) = u_K - dt/|K| sum_faces |e| g_view,

wall faces entering through virtual mirror ghosts (scalar components copied,
velocity reflected, same alpha).  The update equals the perimeter-weighted
convex combination of the one-face kernels at nu = dt |dK| / |K|, which is
asserted in debug mode.  Time steps come from the wave-speed CFL bound or
from its strengthened form that also caps dt by
(1 - zeta) (eta_lo / eta_hi) a^2 h / L_g, the regime in which every cell
satisfies the entropy inequality with a guaranteed dissipation margin.

Face iteration order is fixed by the mesh (sorted by cell id and local face
index) and per-cell gathering uses sequential accumulation, so identical
configurations produce bit-identical trajectories.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .csvio import write_diagnostics_csv, write_snapshot_csv
from .fluxes import SPEED_SAFETY, FluxValues
from .mesh import Mesh
from .models import StateBox, StationaryFamily, hessian_bounds

__all__ = [
    "SolverAbort",
    "ConfigurationError",
    "SolverState",
    "FaceData",
    "cfl_timestep",
    "mirror_ghosts",
    "evaluate_fluxes",
    "step",
    "RunSetup",
    "RunResult",
    "run",
]


class SolverAbort(RuntimeError):
    """Numerical failure: inadmissible or out-of-box state, with provenance."""

    def __init__(self, message: str, step: int, cell: int):
        super().__init__(f"step {step}, cell {cell}: {message}")
        self.step = step
        self.cell = cell


class ConfigurationError(ValueError):
    """The run setup is inconsistent (unreachable equilibrium, bad limits...)."""


@dataclass
class SolverState:
    step: int
    time: float
    U: np.ndarray  # (M, N)
    alpha: np.ndarray  # (M,)


@dataclass(frozen=True)
class FaceData:
    """Per-face quantities of one step, reused by the diagnostics layer."""

    interior: FluxValues
    f_K: np.ndarray  # physical flux of the K state through n
    f_L: np.ndarray  # physical flux of the L state through -n
    wall: FluxValues | None
    wall_f: np.ndarray | None
    L_g: float  # SPEED_SAFETY * max pair speed over all faces


def cfl_timestep(
    mesh: Mesh,
    L_g: float,
    mode: str = "basic",
    zeta: float | None = None,
    eta_bounds: tuple[float, float] | None = None,
) -> float:
    """Largest stable dt: min_K |K| / (L_g |dK|), optionally strengthened."""
    if L_g <= 0.0:
        raise ValueError("L_g must be positive")
    dt = float(np.min(mesh.areas / (L_g * mesh.perimeters)))
    if mode == "basic":
        return dt
    if mode != "strengthened":
        raise ValueError(f"unknown CFL mode {mode!r}")
    if zeta is None or not (0.0 < zeta < 1.0):
        raise ValueError("strengthened CFL needs zeta in (0, 1)")
    if eta_bounds is None:
        raise ValueError("strengthened CFL needs entropy Hessian bounds")
    eta_lo, eta_hi = eta_bounds
    return min(dt, (1.0 - zeta) * (eta_lo / eta_hi) * mesh.a_mesh**2 * mesh.h_mesh / L_g)


def mirror_ghosts(model, U: np.ndarray, mesh: Mesh) -> np.ndarray:
    """Ghost state per wall face: reflected velocity, same scalars and alpha."""
    if mesh.n_boundary_faces == 0:
        return np.zeros((0, model.n_comp))
    inner = U[mesh.bface_cells]
    return model.mirror_state(inner, mesh.bface_normals)


def evaluate_fluxes(model, flux, mesh: Mesh, U: np.ndarray, alpha: np.ndarray) -> FaceData:
    K = mesh.face_cells[:, 0]
    L = mesh.face_cells[:, 1]
    n = mesh.face_normals
    UK, UL = U[K], U[L]
    aK, aL = alpha[K], alpha[L]
    vals = flux.evaluate(model, UK, aK, UL, aL, n)
    f_K = model.flux(UK, aK, n)
    f_L = model.flux(UL, aL, -n)
    speeds = flux.pair_speed(model, UK, aK, UL, aL, n)
    lam_max = float(np.max(speeds)) if speeds.size else 0.0

    wall = None
    wall_f = None
    if mesh.n_boundary_faces:
        if any(tag != "wall" for tag in mesh.bface_tags):
            bad = [t for t in mesh.bface_tags if t != "wall"]
            raise ConfigurationError(f"unsupported boundary tags {sorted(set(bad))}")
        Uw = U[mesh.bface_cells]
        aw = alpha[mesh.bface_cells]
        ghosts = mirror_ghosts(model, U, mesh)
        nw = mesh.bface_normals
        wall = flux.evaluate(model, Uw, aw, ghosts, aw, nw)
        wall_f = model.flux(Uw, aw, nw)
        wspeeds = flux.pair_speed(model, Uw, aw, ghosts, aw, nw)
        if wspeeds.size:
            lam_max = max(lam_max, float(np.max(wspeeds)))

    return FaceData(
        interior=vals, f_K=f_K, f_L=f_L, wall=wall, wall_f=wall_f, L_g=SPEED_SAFETY * lam_max
    )


def _accumulate(mesh: Mesh, fd: FaceData, n_comp: int) -> np.ndarray:
    """Measure-weighted flux sum per cell, both views and wall faces."""
    dU = np.zeros((mesh.n_cells, n_comp))
    w = mesh.face_measures[:, None]
    np.add.at(dU, mesh.face_cells[:, 0], w * fd.interior.g_K)
    np.add.at(dU, mesh.face_cells[:, 1], w * fd.interior.g_L)
    if fd.wall is not None:
        np.add.at(dU, mesh.bface_cells, mesh.bface_measures[:, None] * fd.wall.g_K)
    return dU


def step(
    model,
    mesh: Mesh,
    flux,
    state: SolverState,
    dt: float,
    box: StateBox | None = None,
    facedata: FaceData | None = None,
    debug_convex: bool = False,
) -> tuple[SolverState, FaceData]:
    """One explicit update; returns the new state and the face data used."""
    fd = facedata or evaluate_fluxes(model, flux, mesh, state.U, state.alpha)
    dU = _accumulate(mesh, fd, model.n_comp)
    U_new = state.U - (dt / mesh.areas)[:, None] * dU

    if debug_convex:
        _assert_convex_combination(model, mesh, flux, state, dt, U_new)

    if not np.all(np.isfinite(U_new)):
        cell = int(np.flatnonzero(~np.all(np.isfinite(U_new), axis=1))[0])
        raise SolverAbort("non-finite state produced", state.step, cell)
    margin = model.admissibility_margin(U_new, state.alpha)
    if np.any(margin < 0.0):
        cell = int(np.argmin(margin))
        raise SolverAbort(
            f"state left the admissible set (margin {float(margin[cell]):.3e})",
            state.step,
            cell,
        )
    if box is not None:
        bad = box.violation_mask(U_new, state.alpha)
        if np.any(bad):
            cell = int(np.flatnonzero(bad)[0])
            raise SolverAbort(
                "state left the declared convexity box; Hessian bounds no longer certified",
                state.step,
                cell,
            )
    return SolverState(state.step + 1, state.time + dt, U_new, state.alpha), fd


def _assert_convex_combination(model, mesh, flux, state, dt, U_new) -> None:
    """Recompute the update as the perimeter-weighted mix of one-face kernels."""
    from .fluxes import intermediate_state

    recon = np.zeros_like(U_new)
    nu = dt * mesh.perimeters / mesh.areas
    for side in (0, 1):
        cells = mesh.face_cells[:, side]
        other = mesh.face_cells[:, 1 - side]
        n = mesh.face_normals if side == 0 else -mesh.face_normals
        mids = intermediate_state(
            model,
            flux,
            state.U[cells],
            state.alpha[cells],
            state.U[other],
            state.alpha[other],
            n,
            nu[cells],
        )
        w = (mesh.face_measures / mesh.perimeters[cells])[:, None]
        np.add.at(recon, cells, w * mids)
    if mesh.n_boundary_faces:
        cells = mesh.bface_cells
        ghosts = mirror_ghosts(model, state.U, mesh)
        mids = intermediate_state(
            model,
            flux,
            state.U[cells],
            state.alpha[cells],
            ghosts,
            state.alpha[cells],
            mesh.bface_normals,
            nu[cells],
        )
        w = (mesh.bface_measures / mesh.perimeters[cells])[:, None]
        np.add.at(recon, cells, w * mids)
    err = float(np.max(np.abs(recon - U_new)))
    if err > 1e-14 * max(1.0, float(np.max(np.abs(U_new)))):
        raise AssertionError(f"convex-combination reassembly mismatch: {err:.3e}")


# ---------------------------------------------------------------------------
# Trajectory orchestration
# ---------------------------------------------------------------------------


@dataclass
class RunSetup:
    model: object
    mesh: Mesh
    flux: object
    U0: np.ndarray
    alpha: np.ndarray
    box: StateBox | None = None
    family: StationaryFamily | None = None
    cfl_mode: str = "strengthened"
    zeta: float = 0.1
    max_steps: int = 1000
    t_end: float | None = None
    convergence_rtol: float | None = 1e-10
    stop_on_stationary: bool = False
    snapshot_every: int = 0
    track_states: bool = False
    debug_convex: bool = False
    diagnostics_path: str | None = None
    snapshot_dir: str | None = None


@dataclass
class RunResult:
    records: list
    final: SolverState
    status: str  # 'steps' | 'time' | 'converged' | 'stationary'
    eta_bounds: tuple[float, float] | None
    states: list = field(default_factory=list)  # (step, time, U) when tracked
    worst_residual: float = -np.inf
    worst_relative_residual: float = -np.inf
    snapshots_written: list = field(default_factory=list)

    @property
    def lyapunov_series(self) -> np.ndarray:
        return np.array([r.lyapunov for r in self.records])


def run(setup: RunSetup) -> RunResult:
    """Advance to a stopping criterion, emitting one diagnostics record per step."""
    from . import diagnostics as diag

    model = setup.model
    mesh = setup.mesh
    U = np.array(setup.U0, dtype=float, copy=True)
    alpha = np.asarray(setup.alpha, dtype=float)
    if U.shape != (mesh.n_cells, model.n_comp):
        raise ConfigurationError(
            f"initial state shape {U.shape} does not match mesh/model "
            f"({mesh.n_cells}, {model.n_comp})"
        )
    model.check_admissible(U, alpha)
    if setup.box is not None and not setup.box.contains(U, alpha):
        raise ConfigurationError("initial state lies outside the declared convexity box")

    eta_bounds = None
    if setup.cfl_mode == "strengthened":
        if setup.box is None:
            raise ConfigurationError("strengthened CFL needs a declared state box")
        eta_bounds = hessian_bounds(model, setup.box)

    # convergence toward the family needs matching conserved totals; a family
    # used only as a relative-entropy reference does not
    if setup.family is not None and setup.convergence_rtol is not None:
        diag.check_mass_compatibility(model, mesh, U, setup.family)

    state = SolverState(0, 0.0, U, alpha)
    records = [diag.initial_record(model, mesh, state, setup.family)]
    result = RunResult(records=records, final=state, status="steps", eta_bounds=eta_bounds)
    V0 = records[0].lyapunov

    if setup.track_states:
        result.states.append((0, 0.0, U.copy()))
    if setup.snapshot_dir is not None:
        _write_snapshot(result, mesh, state, setup)

    status = "steps"
    while state.step < setup.max_steps:
        fd = evaluate_fluxes(model, flux=setup.flux, mesh=mesh, U=state.U, alpha=alpha)
        dt = cfl_timestep(mesh, fd.L_g, setup.cfl_mode, setup.zeta, eta_bounds)
        if setup.t_end is not None:
            remaining = setup.t_end - state.time
            if remaining <= 0:
                status = "time"
                break
            dt = min(dt, remaining)
        new_state, fd = step(
            model,
            mesh,
            setup.flux,
            state,
            dt,
            box=setup.box,
            facedata=fd,
            debug_convex=setup.debug_convex,
        )
        rec = diag.step_record(
            model,
            mesh,
            state,
            new_state,
            fd,
            dt,
            zeta=setup.zeta,
            eta_bounds=eta_bounds,
            family=setup.family,
        )
        state = new_state
        records.append(rec)
        result.worst_residual = max(result.worst_residual, rec.worst_residual)
        if not np.isnan(rec.worst_relative_residual):
            result.worst_relative_residual = max(
                result.worst_relative_residual, rec.worst_relative_residual
            )
        if setup.track_states:
            result.states.append((state.step, state.time, state.U.copy()))
        if setup.snapshot_every and state.step % setup.snapshot_every == 0:
            _write_snapshot(result, mesh, state, setup)
        if (
            setup.family is not None
            and setup.convergence_rtol is not None
            and V0 > 0.0
            and rec.lyapunov <= setup.convergence_rtol * V0
        ):
            status = "converged"
            break
        if setup.stop_on_stationary and rec.max_stationarity <= 1e-13 * max(
            1.0, float(np.max(np.abs(state.U)))
        ):
            status = "stationary"
            break
        if setup.t_end is not None and state.time >= setup.t_end:
            status = "time"
            break
    result.final = state
    result.status = status

    if setup.snapshot_dir is not None:
        _write_snapshot(result, mesh, state, setup)
    if setup.diagnostics_path is not None:
        write_diagnostics_csv(records, model.n_comp, setup.diagnostics_path)
    return result


def _write_snapshot(result: RunResult, mesh, state: SolverState, setup: RunSetup) -> None:
    path = os.path.join(setup.snapshot_dir, f"snapshot_{state.step:06d}.csv")
    if path in result.snapshots_written:
        return
    write_snapshot_csv(mesh, state.U, state.alpha, path)
    result.snapshots_written.append(path)
