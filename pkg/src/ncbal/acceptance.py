"""Acceptance scenarios: the verification suite behind ``ncbal verify``.

Each scenario runs one acceptance criterion at its stated tolerance and
returns a :class:`CriterionResult`; the pytest acceptance module and the CLI
``verify`` command both drive these functions.  Suites:

* ``wellbalance``    discrete equilibria are exact fixed points (1D, 2D,
                     Lagrangian column) and the well-balancing contract
                     separates the hydrostatic flux from plain Rusanov
* ``entropy``        cell entropy inequality with its dissipation bound on a
                     dam break, the flux contract suite, the quadratic
                     relative-entropy sandwich
* ``lyapunov``       per-cell relative-entropy inequality, monotone Lyapunov
                     decay, and asymptotic convergence to the lake at rest
* ``conservation``   exact conservation of source-free components
* ``cone``           finite-speed stability cone for a compact perturbation
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics as diag
from .fluxes import (
    AcousticFlux,
    HydrostaticReconstructionFlux,
    RusanovFlux,
    SampleSpec,
    certify_contracts,
)
from .mesh import build_structured_2d, build_uniform_1d
from .models import (
    LagrangianGas,
    ShallowWater,
    StateBox,
    hessian_bounds,
    hydrostatic_column_family,
    lake_at_rest_family,
    lake_level_from_volume,
    relative_entropy,
)
from .solver import RunSetup, run

__all__ = ["CriterionResult", "SUITES", "run_suite", "summary_line"]


@dataclass
class CriterionResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    elapsed: float = 0.0


def summary_line(r: CriterionResult) -> str:
    status = "PASS" if r.passed else "FAIL"
    detail = " ".join(f"{k}={v:.3e}" if isinstance(v, float) else f"{k}={v}" for k, v in r.details.items())
    return f"{status} {r.name} {detail} ({r.elapsed:.1f}s)"


def _timed(fn):
    def wrapper(*args, **kwargs) -> CriterionResult:
        t0 = time.time()
        result = fn(*args, **kwargs)
        result.elapsed = time.time() - t0
        return result

    return wrapper


def _max_drift(states, U0: np.ndarray) -> float:
    return max(float(np.max(np.abs(U - U0))) for _, _, U in states)


def _mass_drift(records, components, state_scale: float = 0.0) -> float:
    """Worst drift of conserved totals, relative to the larger of the
    component's own total and the overall state scale (for totals that
    start at zero, like the momentum of a column at rest)."""
    masses = np.array([r.masses for r in records])
    base = masses[0]
    scale = np.maximum(np.abs(base), max(state_scale, 1e-30))
    rel = np.abs(masses - base) / scale
    return float(np.max(rel[:, components]))


def _state_scale(mesh, U0) -> float:
    return float(np.max(mesh.areas @ np.abs(U0)))


# ---------------------------------------------------------------------------
# Well-balancing
# ---------------------------------------------------------------------------


@_timed
def wellbalance_sw1d(steps: int = 1000) -> CriterionResult:
    model = ShallowWater(g=9.81, dim=1)
    mesh = build_uniform_1d(0.0, 1.0, 200)
    alpha = np.where(mesh.centroids[:, 0] > 0.5, 0.5, 0.0)
    fam = lake_at_rest_family(model, 1.0, alpha)
    setup = RunSetup(
        model=model,
        mesh=mesh,
        flux=HydrostaticReconstructionFlux(),
        U0=fam.states.copy(),
        alpha=alpha,
        box=StateBox((0.3, -0.3), (1.2, 0.3), 0.0, 0.5),
        family=fam,
        cfl_mode="basic",
        max_steps=steps,
        convergence_rtol=None,
        track_states=True,
    )
    result = run(setup)
    drift = _max_drift(result.states, fam.states)
    mass = _mass_drift(result.records, [0])
    return CriterionResult(
        "wellbalance.sw1d_step",
        drift <= 1e-12 and mass <= 1e-12,
        {"max_drift": drift, "mass_drift": mass, "limit": 1e-12, "steps": str(steps)},
    )


@_timed
def wellbalance_sw2d(steps: int = 1000) -> CriterionResult:
    model = ShallowWater(g=9.81, dim=2)
    mesh = build_structured_2d(32, 32)
    xy = mesh.centroids
    alpha = np.where((xy[:, 0] > 0.5) & (xy[:, 1] > 0.5), 0.5, 0.0)
    fam = lake_at_rest_family(model, 1.0, alpha)
    setup = RunSetup(
        model=model,
        mesh=mesh,
        flux=HydrostaticReconstructionFlux(),
        U0=fam.states.copy(),
        alpha=alpha,
        box=StateBox((0.3, -0.3, -0.3), (1.2, 0.3, 0.3), 0.0, 0.5),
        family=fam,
        cfl_mode="basic",
        max_steps=steps,
        convergence_rtol=None,
        track_states=True,
    )
    result = run(setup)
    drift = _max_drift(result.states, fam.states)
    mass = _mass_drift(result.records, [0])
    return CriterionResult(
        "wellbalance.sw2d_step_walls",
        drift <= 1e-12 and mass <= 1e-12,
        {"max_drift": drift, "mass_drift": mass, "limit": 1e-12, "steps": str(steps)},
    )


@_timed
def lagrangian_column(steps: int = 1000) -> CriterionResult:
    model = LagrangianGas()
    mesh = build_uniform_1d(0.0, 1.0, 100)
    alpha = mesh.centroids[:, 0].copy()  # unit gravity in mass coordinates
    fam = hydrostatic_column_family(model, 0.0, 1.0, 1.0, alpha)
    setup = RunSetup(
        model=model,
        mesh=mesh,
        flux=AcousticFlux(),
        U0=fam.states.copy(),
        alpha=alpha,
        box=StateBox((0.1, -0.5, 0.8), (0.5, 0.5, 1.6), 0.0, 1.0),
        family=fam,
        cfl_mode="basic",
        max_steps=steps,
        convergence_rtol=None,
        track_states=True,
    )
    result = run(setup)
    drift = _max_drift(result.states, fam.states)
    mass = _mass_drift(result.records, [0, 1, 2], _state_scale(mesh, fam.states))
    return CriterionResult(
        "wellbalance.lagrangian_column",
        drift <= 1e-12 and mass <= 1e-12,
        {"max_drift": drift, "mass_drift": mass, "limit": 1e-12, "steps": str(steps)},
    )


@_timed
def wb_contract_separation() -> CriterionResult:
    """Hydrostatic flux exactly well balanced; Rusanov demonstrably not."""
    model = ShallowWater(g=9.81, dim=1)
    box = StateBox((0.5, -1.0), (2.0, 1.0), 0.0, 0.4)
    spec = SampleSpec(
        box=box,
        n_samples=10_000,
        seed=0,
        contracts=("well_balancing",),
        stationary={"kind": "lake_at_rest", "z0": 2.5},
    )
    hyd = certify_contracts(HydrostaticReconstructionFlux(), model, spec).check("well_balancing")
    rus = certify_contracts(RusanovFlux(), model, spec).check("well_balancing")
    passed = hyd.passed and hyd.worst <= 1e-13 and (not rus.passed) and rus.worst > 1e-6
    return CriterionResult(
        "wellbalance.contract_separation",
        passed,
        {"hydrostatic_worst": hyd.worst, "rusanov_worst": rus.worst},
    )


# ---------------------------------------------------------------------------
# Entropy inequality and contracts
# ---------------------------------------------------------------------------


@_timed
def entropy_dissipation_dam_break(steps: int = 500) -> CriterionResult:
    model = ShallowWater(g=1.0, dim=1)
    mesh = build_uniform_1d(0.0, 1.0, 200, boundary="periodic")
    alpha = np.zeros(200)
    h = np.where(mesh.centroids[:, 0] < 0.5, 2.0, 1.0)
    U0 = np.column_stack([h, np.zeros(200)])
    setup = RunSetup(
        model=model,
        mesh=mesh,
        flux=RusanovFlux(),
        U0=U0,
        alpha=alpha,
        box=StateBox((0.8, -1.5), (2.2, 1.5), 0.0, 0.0),
        cfl_mode="strengthened",
        zeta=0.1,
        max_steps=steps,
        convergence_rtol=None,
    )
    result = run(setup)
    worst = result.worst_residual
    mass = _mass_drift(result.records, [0])
    return CriterionResult(
        "entropy.dissipation_bound_dam_break",
        worst <= 1e-12 and mass <= 1e-12,
        {"worst_residual": worst, "mass_drift": mass, "slack": 1e-12, "steps": str(steps)},
    )


@_timed
def flux_contract_suite(n_samples: int = 10_000) -> CriterionResult:
    """Consistency, conservation, admissibility, entropy stability and the
    dissipation gap for the Rusanov and hydrostatic fluxes."""
    model = ShallowWater(g=9.81, dim=1)
    flat = StateBox((0.5, -2.0), (2.0, 2.0), 0.0, 0.0)
    details = {}
    passed = True
    for flux in (RusanovFlux(), HydrostaticReconstructionFlux()):
        rep = certify_contracts(flux, model, SampleSpec(box=flat, n_samples=n_samples, seed=0))
        for chk in rep.checks:
            passed = passed and chk.passed
            details[f"{flux.name}.{chk.contract}"] = chk.worst
    return CriterionResult("entropy.flux_contracts", passed, details)


@_timed
def quadratic_sandwich(n_samples: int = 10_000) -> CriterionResult:
    model = ShallowWater(g=9.81, dim=1)
    rng = np.random.default_rng(2024)
    h = rng.uniform(0.5, 2.0, (2, n_samples))
    vel = rng.uniform(-1.0, 1.0, (2, n_samples))
    U = np.column_stack([h[0], h[0] * vel[0]])
    V = np.column_stack([h[1], h[1] * vel[1]])
    lo, hi = hessian_bounds(model, StateBox((0.5, -2.0), (2.0, 2.0)))
    hrel = relative_entropy(model, U, V, 0.0)
    d2 = np.sum((U - V) ** 2, axis=-1)
    lower_viol = int(np.sum(0.5 * lo * d2 > hrel))
    upper_viol = int(np.sum(hrel > 0.5 * hi * d2))
    return CriterionResult(
        "entropy.quadratic_sandwich",
        lower_viol == 0 and upper_viol == 0,
        {
            "lower_violations": str(lower_viol),
            "upper_violations": str(upper_viol),
            "eta_lo": lo,
            "eta_hi": hi,
        },
    )


# ---------------------------------------------------------------------------
# Lyapunov decay and asymptotic stability
# ---------------------------------------------------------------------------


def _perturbed_lake_1d(cells: int):
    model = ShallowWater(g=1.0, dim=1)
    mesh = build_uniform_1d(0.0, 1.0, cells)
    alpha = np.where(mesh.centroids[:, 0] > 0.5, 0.25, 0.0)
    x = mesh.centroids[:, 0]
    h = (1.0 - alpha) * (1.0 + 0.1 * np.exp(-(((x - 0.3) / 0.08) ** 2)))
    U0 = np.column_stack([h, np.zeros(cells)])
    z0 = lake_level_from_volume(alpha, mesh.areas, float(mesh.areas @ h))
    fam = lake_at_rest_family(model, z0, alpha)
    box = StateBox((0.6, -0.2), (1.2, 0.2), 0.0, 0.25)
    return model, mesh, alpha, U0, fam, z0, box


def _perturbed_lake_2d(n: int):
    model = ShallowWater(g=1.0, dim=2)
    mesh = build_structured_2d(n, n)
    xy = mesh.centroids
    alpha = np.where((xy[:, 0] > 0.5) & (xy[:, 1] > 0.5), 0.25, 0.0)
    r2 = ((xy[:, 0] - 0.3) ** 2 + (xy[:, 1] - 0.3) ** 2) / 0.08**2
    h = (1.0 - alpha) * (1.0 + 0.1 * np.exp(-r2))
    U0 = np.column_stack([h, np.zeros(mesh.n_cells), np.zeros(mesh.n_cells)])
    z0 = lake_level_from_volume(alpha, mesh.areas, float(mesh.areas @ h))
    fam = lake_at_rest_family(model, z0, alpha)
    box = StateBox((0.6, -0.2, -0.2), (1.2, 0.2, 0.2), 0.0, 0.25)
    return model, mesh, alpha, U0, fam, z0, box


@_timed
def relative_entropy_inequality(steps: int = 2000) -> CriterionResult:
    model, mesh, alpha, U0, fam, z0, box = _perturbed_lake_1d(50)
    setup = RunSetup(
        model=model,
        mesh=mesh,
        flux=HydrostaticReconstructionFlux(),
        U0=U0,
        alpha=alpha,
        box=box,
        family=fam,
        zeta=0.1,
        max_steps=steps,
        convergence_rtol=None,
    )
    result = run(setup)
    V = result.lyapunov_series
    dV = np.diff(V)
    nonincreasing = bool(np.all(dV <= 0.0))
    # strict decrease wherever the guaranteed dissipation is nonzero
    diss = np.array([r.total_dissipation for r in result.records[1:]])
    strict = bool(np.all(dV[diss > 0.0] < 0.0))
    worst = result.worst_relative_residual
    mass = _mass_drift(result.records, [0])
    return CriterionResult(
        "lyapunov.per_cell_inequality",
        worst <= 1e-12 and nonincreasing and strict and mass <= 1e-12,
        {
            "worst_relative_residual": worst,
            "nonincreasing": str(nonincreasing),
            "strictly_decreasing": str(strict),
            "mass_drift": mass,
            "steps": str(steps),
        },
    )


def _asymptotic(dim: int, max_steps: int = 50_000) -> CriterionResult:
    if dim == 1:
        model, mesh, alpha, U0, fam, z0, box = _perturbed_lake_1d(32)
    else:
        model, mesh, alpha, U0, fam, z0, box = _perturbed_lake_2d(16)
    setup = RunSetup(
        model=model,
        mesh=mesh,
        flux=HydrostaticReconstructionFlux(),
        U0=U0,
        alpha=alpha,
        box=box,
        family=fam,
        zeta=0.1,
        max_steps=max_steps,
        convergence_rtol=1e-10,
    )
    result = run(setup)
    rep = diag.steady_convergence_report(model, mesh, result, fam, z0=z0)
    V = result.lyapunov_series
    mass = _mass_drift(result.records, [0])
    passed = (
        result.status == "converged"
        and rep.passed
        and bool(np.all(np.diff(V) <= 0.0))
        and result.worst_relative_residual <= 1e-12
        and mass <= 1e-12
    )
    return CriterionResult(
        f"lyapunov.asymptotic_{dim}d",
        passed,
        {
            "status": result.status,
            "steps": str(result.final.step),
            "V_ratio": rep.V_final / rep.V0,
            "surface_error": rep.max_surface_error,
            "max_velocity": rep.max_velocity,
            "decay_rate": rep.decay_rate,
            "mass_drift": mass,
        },
    )


@_timed
def asymptotic_1d() -> CriterionResult:
    return _asymptotic(1)


@_timed
def asymptotic_2d() -> CriterionResult:
    return _asymptotic(2)


# ---------------------------------------------------------------------------
# Conservation
# ---------------------------------------------------------------------------


@_timed
def conservation_suite() -> CriterionResult:
    details = {}
    passed = True

    # dam break, periodic: mass
    res = entropy_dissipation_dam_break(steps=300)
    details["dam_break_mass"] = res.details["mass_drift"]
    passed = passed and res.details["mass_drift"] <= 1e-12

    # perturbed lake, walls: mass through mirror faces
    model, mesh, alpha, U0, fam, z0, box = _perturbed_lake_1d(32)
    r = run(
        RunSetup(
            model=model,
            mesh=mesh,
            flux=HydrostaticReconstructionFlux(),
            U0=U0,
            alpha=alpha,
            box=box,
            family=fam,
            max_steps=1000,
            convergence_rtol=None,
        )
    )
    drift = _mass_drift(r.records, [0])
    details["perturbed_lake_mass"] = drift
    passed = passed and drift <= 1e-12

    # Lagrangian column at rest: all three components
    res = lagrangian_column(steps=300)
    details["lagrangian_column_all"] = res.details["mass_drift"]
    passed = passed and res.details["mass_drift"] <= 1e-12

    # perturbed Lagrangian gas, flat potential, periodic: all three components
    model = LagrangianGas()
    mesh = build_uniform_1d(0.0, 1.0, 64, boundary="periodic")
    alpha = np.zeros(64)
    x = mesh.centroids[:, 0]
    tau = 0.4 + 0.02 * np.sin(2 * np.pi * x)
    vel = 0.02 * np.cos(2 * np.pi * x)
    e = np.full(64, 1.0)
    U0 = np.column_stack([tau, vel, e + tau * alpha + 0.5 * vel**2])
    r = run(
        RunSetup(
            model=model,
            mesh=mesh,
            flux=AcousticFlux(),
            U0=U0,
            alpha=alpha,
            box=StateBox((0.3, -0.2, 0.8), (0.5, 0.2, 1.2), 0.0, 0.0),
            cfl_mode="basic",
            max_steps=500,
            convergence_rtol=None,
        )
    )
    drift = _mass_drift(r.records, [0, 1, 2], _state_scale(mesh, U0))
    details["lagrangian_periodic_all"] = drift
    passed = passed and drift <= 1e-12

    return CriterionResult("conservation.exact", passed, details)


# ---------------------------------------------------------------------------
# Stability cone
# ---------------------------------------------------------------------------


@_timed
def stability_cone(steps: int = 500) -> CriterionResult:
    model = ShallowWater(g=1.0, dim=1)
    cells = 1000
    width = 25.0
    mesh = build_uniform_1d(0.0, width, cells, boundary="periodic")
    alpha = np.zeros(cells)
    x = mesh.centroids[:, 0]
    xc = width / 2
    inside = np.abs(x - xc) < 1.0
    h = 1.0 + np.where(inside, 0.2 * np.cos(0.5 * np.pi * (x - xc)) ** 2, 0.0)
    U0 = np.column_stack([h, np.zeros(cells)])
    fam = lake_at_rest_family(model, 1.0, alpha)
    box = StateBox((0.8, -0.4), (1.3, 0.4), 0.0, 0.0)
    setup = RunSetup(
        model=model,
        mesh=mesh,
        flux=RusanovFlux(),
        U0=U0,
        alpha=alpha,
        box=box,
        family=fam,
        zeta=0.1,
        max_steps=steps,
        convergence_rtol=None,
        track_states=True,
    )
    result = run(setup)

    def lake_at(a):
        states = np.zeros(np.shape(a) + (2,))
        states[..., 0] = 1.0 - np.asarray(a)
        return states

    L_f = diag.estimate_Lf(model, lake_at, fam.H0, box, seed=0)
    rep = diag.stability_cone_check(
        model, mesh, alpha, fam, result.states, x0=xc, radius=1.5, L_f=L_f
    )
    mass = _mass_drift(result.records, [0])
    return CriterionResult(
        "cone.compact_bump",
        rep.passed and mass <= 1e-12,
        {
            "L_f": L_f,
            "worst_margin": rep.worst_margin,
            "checked_steps": str(rep.n_checked),
            "mass_drift": mass,
        },
    )


SUITES = {
    "wellbalance": (wellbalance_sw1d, wellbalance_sw2d, lagrangian_column, wb_contract_separation),
    "entropy": (entropy_dissipation_dam_break, flux_contract_suite, quadratic_sandwich),
    "lyapunov": (relative_entropy_inequality, asymptotic_1d, asymptotic_2d),
    "conservation": (conservation_suite,),
    "cone": (stability_cone,),
}
SUITES["all"] = tuple(fn for name in ("wellbalance", "entropy", "lyapunov", "conservation", "cone") for fn in SUITES[name])


def run_suite(name: str) -> list[CriterionResult]:
    if name not in SUITES:
        raise KeyError(name)
    return [fn() for fn in SUITES[name]]
