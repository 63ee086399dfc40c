"""Entropy and relative-entropy accounting along trajectories.

Per step this layer evaluates

* the cell entropy residual
  r_K = eta(u_K') - eta(u_K) + dt/|K| sum |e| G_view
  against the guaranteed dissipation
  D_K = -zeta eta_lo dt / (2 |K| L_g) sum |e| |g_view - f_view|^2 <= 0,
  which bounds it from above under the strengthened CFL step;

* the same budget for the relative entropy against a configured stationary
  family, with the shifted entropy flux G_H0 = G - H0 . g replacing G; the
  mesh-weighted total V = sum |K| h(u_K, v_K, alpha_K) is then a Lyapunov
  functional: nonincreasing, strictly decreasing off equilibrium;

* conservation totals, a sampled estimate of the propagation speed L_f of
  relative entropy, the finite-speed stability cone check, and the steady
  convergence report.

Wall faces enter every budget as ordinary interfaces against their mirror
ghost states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh
from .models import StateBox, StationaryFamily, relative_entropy
from .solver import ConfigurationError, FaceData, SolverState

__all__ = [
    "DiagnosticsRecord",
    "initial_record",
    "step_record",
    "cell_entropy_residuals",
    "relative_entropy_residuals",
    "shifted_entropy_flux",
    "lyapunov",
    "check_mass_compatibility",
    "estimate_Lf",
    "ConeReport",
    "stability_cone_check",
    "ConvergenceReport",
    "steady_convergence_report",
]


@dataclass(frozen=True)
class DiagnosticsRecord:
    step: int
    time: float
    dt: float
    masses: np.ndarray  # (N,) mesh-weighted component totals
    total_entropy: float
    lyapunov: float  # nan when no stationary family is configured
    worst_residual: float  # max_K (r_K - D_K), <= 0 up to round-off
    total_dissipation: float  # sum_K |K| |D_K|
    max_stationarity: float  # max_K |u' - u| / dt
    worst_relative_residual: float = float("nan")  # max_K relative-entropy residual


def _totals(mesh: Mesh, U: np.ndarray) -> np.ndarray:
    return mesh.areas @ U


def lyapunov(model, mesh: Mesh, U: np.ndarray, family: StationaryFamily, alpha) -> float:
    """Mesh-weighted relative entropy to the stationary field."""
    return float(mesh.areas @ relative_entropy(model, U, family.states, alpha))


def initial_record(model, mesh: Mesh, state: SolverState, family) -> DiagnosticsRecord:
    V = (
        lyapunov(model, mesh, state.U, family, state.alpha)
        if family is not None
        else float("nan")
    )
    return DiagnosticsRecord(
        step=0,
        time=0.0,
        dt=0.0,
        masses=_totals(mesh, state.U),
        total_entropy=float(mesh.areas @ model.entropy(state.U, state.alpha)),
        lyapunov=V,
        worst_residual=0.0,
        total_dissipation=0.0,
        max_stationarity=0.0,
        worst_relative_residual=0.0 if family is not None else float("nan"),
    )


def _face_sums(model, mesh: Mesh, old: SolverState, fd: FaceData):
    """Per-cell sums of |e| G_view and |e| |g_view - f_view|^2."""
    M = mesh.n_cells
    G_sum = np.zeros(M)
    q_sum = np.zeros(M)
    w = mesh.face_measures
    K = mesh.face_cells[:, 0]
    L = mesh.face_cells[:, 1]
    np.add.at(G_sum, K, w * fd.interior.G)
    np.add.at(G_sum, L, -w * fd.interior.G)
    np.add.at(q_sum, K, w * np.sum((fd.interior.g_K - fd.f_K) ** 2, axis=-1))
    np.add.at(q_sum, L, w * np.sum((fd.interior.g_L - fd.f_L) ** 2, axis=-1))
    if fd.wall is not None:
        bw = mesh.bface_measures
        np.add.at(G_sum, mesh.bface_cells, bw * fd.wall.G)
        np.add.at(q_sum, mesh.bface_cells, bw * np.sum((fd.wall.g_K - fd.wall_f) ** 2, axis=-1))
    return G_sum, q_sum


def cell_entropy_residuals(
    model,
    mesh: Mesh,
    old: SolverState,
    new: SolverState,
    fd: FaceData,
    dt: float,
    zeta: float,
    eta_lo: float,
) -> tuple[np.ndarray, np.ndarray]:
    """(r_K, D_K): entropy residual and its guaranteed dissipation bound."""
    if old.U.shape != new.U.shape:
        raise ValueError("states come from different meshes")
    G_sum, q_sum = _face_sums(model, mesh, old, fd)
    r = (
        model.entropy(new.U, new.alpha)
        - model.entropy(old.U, old.alpha)
        + dt / mesh.areas * G_sum
    )
    D = -zeta * eta_lo * dt / (2.0 * mesh.areas * fd.L_g) * q_sum
    return r, D


def shifted_entropy_flux(model, flux, family: StationaryFamily, UK, aK, UL, aL, n) -> np.ndarray:
    """G_H0 = G - H0 . g, conservative across the interface."""
    vals = flux.evaluate(model, UK, aK, UL, aL, n)
    return vals.G - vals.g_K @ family.H0


def relative_entropy_residuals(
    model,
    mesh: Mesh,
    old: SolverState,
    new: SolverState,
    fd: FaceData,
    dt: float,
    D: np.ndarray,
    family: StationaryFamily,
) -> np.ndarray:
    """Per-cell residual of the relative-entropy inequality, <= 0 up to slack.

    h(u', v, a) - h(u, v, a) + dt/|K| sum |e| (G - H0.g)_view - D_K
    """
    M = mesh.n_cells
    H0 = family.H0
    GH = np.zeros(M)
    w = mesh.face_measures
    K = mesh.face_cells[:, 0]
    L = mesh.face_cells[:, 1]
    np.add.at(GH, K, w * (fd.interior.G - fd.interior.g_K @ H0))
    np.add.at(GH, L, w * (-fd.interior.G - fd.interior.g_L @ H0))
    if fd.wall is not None:
        bw = mesh.bface_measures
        np.add.at(GH, mesh.bface_cells, bw * (fd.wall.G - fd.wall.g_K @ H0))
    dh = relative_entropy(model, new.U, family.states, new.alpha) - relative_entropy(
        model, old.U, family.states, old.alpha
    )
    return dh + dt / mesh.areas * GH - D


def step_record(
    model,
    mesh: Mesh,
    old: SolverState,
    new: SolverState,
    fd: FaceData,
    dt: float,
    zeta: float,
    eta_bounds: tuple[float, float] | None,
    family: StationaryFamily | None,
) -> DiagnosticsRecord:
    eta_lo = eta_bounds[0] if eta_bounds is not None else 0.0
    r, D = cell_entropy_residuals(model, mesh, old, new, fd, dt, zeta, eta_lo)
    V = float("nan")
    worst_rel = float("nan")
    if family is not None:
        V = lyapunov(model, mesh, new.U, family, new.alpha)
        worst_rel = float(
            np.max(relative_entropy_residuals(model, mesh, old, new, fd, dt, D, family))
        )
    return DiagnosticsRecord(
        step=new.step,
        time=new.time,
        dt=dt,
        masses=_totals(mesh, new.U),
        total_entropy=float(mesh.areas @ model.entropy(new.U, new.alpha)),
        lyapunov=V,
        worst_residual=float(np.max(r - D)),
        total_dissipation=float(mesh.areas @ np.abs(D)),
        max_stationarity=float(np.max(np.abs(new.U - old.U))) / dt,
        worst_relative_residual=worst_rel,
    )


def check_mass_compatibility(
    model, mesh: Mesh, U0: np.ndarray, family: StationaryFamily, rtol: float = 1e-10
) -> None:
    """The equilibrium must carry the same conserved totals as the initial data.

    Checked on every component whose source coefficient vanishes identically;
    otherwise the configured equilibrium is unreachable and the run is
    rejected.
    """
    cons = ~model.source_components
    t0 = _totals(mesh, U0)[cons]
    tv = _totals(mesh, family.states)[cons]
    scale = np.maximum(np.abs(t0), mesh.areas @ np.abs(U0[:, cons]))
    scale = np.maximum(scale, 1e-300)
    worst = float(np.max(np.abs(t0 - tv) / scale))
    if worst > rtol:
        raise ConfigurationError(
            f"stationary family is unreachable: conserved totals differ by {worst:.3e} "
            f"(relative), beyond {rtol:.1e}"
        )


# ---------------------------------------------------------------------------
# Propagation speed of relative entropy
# ---------------------------------------------------------------------------


def estimate_Lf(
    model,
    family_at,
    H0: np.ndarray,
    box: StateBox,
    n_samples: int = 20_000,
    seed: int = 0,
    margin: float = 0.1,
    h_floor: float = 1e-12,
) -> float:
    """Sampled bound L_f with |(F - H0.f)(u) - (F - H0.f)(v)| <= L_f h(u, v).

    ``family_at(alpha)`` returns the stationary state anchoring the quotient
    at each sampled alpha.  Pairs closer than ``h_floor`` in relative entropy
    are discarded; the supremum gets a relative safety margin.
    """
    rng = np.random.default_rng(seed)
    U, alpha = box.sample(rng, n_samples)
    V = family_at(alpha)
    if model.dim == 1:
        normals = np.where(rng.uniform(size=n_samples) < 0.5, -1.0, 1.0)
    else:
        theta = rng.uniform(0, 2 * np.pi, n_samples)
        normals = np.column_stack([np.cos(theta), np.sin(theta)])
    h = relative_entropy(model, U, V, alpha)
    keep = h >= h_floor
    if not np.any(keep):
        raise ValueError("every sampled pair sits below the relative-entropy floor")
    num_u = model.entropy_flux(U, alpha, normals) - model.flux(U, alpha, normals) @ H0
    num_v = model.entropy_flux(V, alpha, normals) - model.flux(V, alpha, normals) @ H0
    quot = np.abs(num_u - num_v)[keep] / h[keep]
    return float((1.0 + margin) * np.max(quot))


# ---------------------------------------------------------------------------
# Stability cone
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConeReport:
    passed: bool
    n_checked: int
    worst_margin: float  # min over steps of RHS - LHS (>= -tol passes)
    worst_step: int


def _cell_vertex_distances(mesh: Mesh, x0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(max, min) distance from x0 over each cell's vertices."""
    dmax = np.zeros(mesh.n_cells)
    dmin = np.zeros(mesh.n_cells)
    for c, nodes in enumerate(mesh.cell_nodes):
        d = np.linalg.norm(mesh.points[list(nodes)] - x0, axis=-1)
        dmax[c] = d.max()
        dmin[c] = d.min()
    return dmax, dmin


def stability_cone_check(
    model,
    mesh: Mesh,
    alpha: np.ndarray,
    family: StationaryFamily,
    states: list,
    x0,
    radius: float,
    L_f: float,
    tol_factor: float = 1e-10,
) -> ConeReport:
    """Relative entropy inside B(x0, R) stays below the initial amount inside
    the cone-grown ball B(x0, R + L_f t + 2 h_mesh), up to tol = tol_factor V0.

    ``states`` is the tracked trajectory [(step, time, U), ...]; cells count
    as inside when all their vertices are, as touched when their nearest
    vertex is.  Errors out if the grown ball leaves the domain.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    dmax, dmin = _cell_vertex_distances(mesh, x0)
    span = float(np.max(np.linalg.norm(mesh.points - x0, axis=-1)))
    h0 = relative_entropy(model, states[0][2], family.states, alpha)
    V0 = float(mesh.areas @ h0)
    tol = tol_factor * V0
    t_final = states[-1][1]
    if radius + L_f * t_final + 2.0 * mesh.h_mesh > span:
        raise ValueError(
            f"stability cone exits the domain: R + L_f t + 2h = "
            f"{radius + L_f * t_final + 2 * mesh.h_mesh:.4g} exceeds the domain span {span:.4g}"
        )
    inner = dmax <= radius
    worst = np.inf
    worst_step = -1
    for step_idx, t, U in states:
        grown = dmin <= radius + L_f * t + 2.0 * mesh.h_mesh
        lhs = float(mesh.areas[inner] @ relative_entropy(model, U[inner], family.states[inner], alpha[inner])) if np.any(inner) else 0.0
        rhs = float(mesh.areas[grown] @ h0[grown]) if np.any(grown) else 0.0
        margin = rhs + tol - lhs
        if margin < worst:
            worst = margin
            worst_step = step_idx
    return ConeReport(passed=worst >= 0.0, n_checked=len(states), worst_margin=worst, worst_step=worst_step)


# ---------------------------------------------------------------------------
# Steady convergence report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceReport:
    V0: float
    V_final: float
    decay_rate: float  # fitted geometric factor per step over the final half
    max_surface_error: float  # max |h + alpha - z0| (shallow water)
    max_velocity: float
    passed_lyapunov: bool
    passed_surface: bool
    passed_velocity: bool

    @property
    def passed(self) -> bool:
        return self.passed_lyapunov and self.passed_surface and self.passed_velocity


def steady_convergence_report(
    model,
    mesh: Mesh,
    result,
    family: StationaryFamily,
    z0: float | None = None,
    v_rtol: float = 1e-10,
    surface_rtol: float = 1e-6,
    velocity_tol: float = 1e-6,
) -> ConvergenceReport:
    V = result.lyapunov_series
    V0 = float(V[0])
    V_final = float(V[-1])
    # geometric fit log V = c + n log(rate) over the final half of the run
    tail = V[len(V) // 2 :]
    pos = tail > 0
    if pos.sum() >= 2:
        n_idx = np.arange(len(tail))[pos]
        coef = np.polyfit(n_idx, np.log(tail[pos]), 1)
        rate = float(np.exp(coef[0]))
    else:
        rate = 0.0
    U = result.final.U
    alpha = result.final.alpha
    if hasattr(model, "velocity"):
        vel = model.velocity(U)
        max_vel = float(np.max(np.linalg.norm(vel, axis=-1)))
        surf = float(np.max(np.abs(U[:, 0] + alpha - z0))) if z0 is not None else float("nan")
    else:
        max_vel = float(np.max(np.abs(U[:, 1])))
        surf = float("nan")
    passed_surface = True if z0 is None else surf <= surface_rtol * abs(z0)
    return ConvergenceReport(
        V0=V0,
        V_final=V_final,
        decay_rate=rate,
        max_surface_error=surf,
        max_velocity=max_vel,
        passed_lyapunov=V_final <= v_rtol * V0 if V0 > 0 else V_final == 0.0,
        passed_surface=passed_surface,
        passed_velocity=max_vel <= velocity_tol,
    )
