import numpy as np
import pytest

from conftest import dam_break_setup, lake_setup, perturbed_lake_setup, step_alpha

from ncbal.fluxes import HydrostaticReconstructionFlux, RusanovFlux
from ncbal.mesh import build_structured_2d, build_uniform_1d
from ncbal.models import ShallowWater, StateBox, lake_at_rest_family
from ncbal.solver import (
    ConfigurationError,
    RunSetup,
    SolverAbort,
    SolverState,
    cfl_timestep,
    evaluate_fluxes,
    mirror_ghosts,
    run,
    step,
)


def test_cfl_basic_uniform_1d():
    mesh = build_uniform_1d(0.0, 1.0, 10)
    # |K| = dx, |dK| = 2: dt = dx / (2 L_g)
    assert cfl_timestep(mesh, 4.0) == pytest.approx(0.1 / 8.0)


def test_cfl_strengthened_uniform_1d():
    mesh = build_uniform_1d(0.0, 1.0, 10)
    # a = 1/2: dt <= (1 - zeta) ratio dx / (4 L_g)
    dt = cfl_timestep(mesh, 1.0, "strengthened", zeta=0.5, eta_bounds=(1.0, 2.0))
    assert dt == pytest.approx(min(0.1 / 2.0, 0.5 * 0.5 * 0.1 / 4.0))
    assert dt == pytest.approx(0.5 * 0.5 * 0.1 / 4.0)


def test_cfl_zeta_limit_shrinks_to_zero():
    mesh = build_uniform_1d(0.0, 1.0, 10)
    dts = [
        cfl_timestep(mesh, 1.0, "strengthened", zeta=z, eta_bounds=(1.0, 2.0))
        for z in (0.9, 0.99, 0.999999)
    ]
    assert dts[0] > dts[1] > dts[2]
    assert dts[2] < 1e-6


def test_cfl_strengthened_requires_bounds():
    mesh = build_uniform_1d(0.0, 1.0, 10)
    with pytest.raises(ValueError, match="bounds"):
        cfl_timestep(mesh, 1.0, "strengthened", zeta=0.5)
    with pytest.raises(ValueError, match="zeta"):
        cfl_timestep(mesh, 1.0, "strengthened", zeta=1.5, eta_bounds=(1.0, 2.0))


# ---------------------------------------------------------------------------
# Single steps
# ---------------------------------------------------------------------------


def test_lake_at_rest_is_fixed_point_of_step():
    setup = lake_setup()
    state = SolverState(0, 0.0, setup.U0.copy(), setup.alpha)
    fd = evaluate_fluxes(setup.model, setup.flux, setup.mesh, state.U, state.alpha)
    dt = cfl_timestep(setup.mesh, fd.L_g)
    new, _ = step(setup.model, setup.mesh, setup.flux, state, dt, facedata=fd)
    assert np.max(np.abs(new.U - state.U)) <= 1e-14


def test_constant_state_unchanged_any_flux():
    model = ShallowWater(g=9.81, dim=2)
    mesh = build_structured_2d(4, 4)
    U = np.tile([1.3, 0.2, -0.1], (mesh.n_cells, 1))
    alpha = np.zeros(mesh.n_cells)
    # periodic-free 2D box with walls reflects the velocity, so use a state
    # at rest for the wall case; interior closure is what this checks
    U = np.tile([1.3, 0.0, 0.0], (mesh.n_cells, 1))
    state = SolverState(0, 0.0, U, alpha)
    new, _ = step(model, mesh, RusanovFlux(), state, 1e-3)
    np.testing.assert_allclose(new.U, U, atol=1e-15)


def test_constant_state_unchanged_periodic_moving():
    model = ShallowWater(g=9.81, dim=1)
    mesh = build_uniform_1d(0.0, 1.0, 8, boundary="periodic")
    U = np.tile([1.1, 0.7], (8, 1))
    state = SolverState(0, 0.0, U, np.zeros(8))
    new, _ = step(model, mesh, RusanovFlux(), state, 1e-3)
    np.testing.assert_allclose(new.U, U, atol=1e-15)


def test_dam_break_step_conserves_mass_periodic():
    setup = dam_break_setup()
    state = SolverState(0, 0.0, setup.U0.copy(), setup.alpha)
    fd = evaluate_fluxes(setup.model, setup.flux, setup.mesh, state.U, state.alpha)
    dt = cfl_timestep(setup.mesh, fd.L_g)
    new, _ = step(setup.model, setup.mesh, setup.flux, state, dt, facedata=fd)
    m0 = setup.mesh.areas @ state.U[:, 0]
    m1 = setup.mesh.areas @ new.U[:, 0]
    assert abs(m1 - m0) <= 1e-13 * abs(m0)


def test_step_convex_combination_debug_assertion():
    setup = dam_break_setup()
    state = SolverState(0, 0.0, setup.U0.copy(), setup.alpha)
    fd = evaluate_fluxes(setup.model, setup.flux, setup.mesh, state.U, state.alpha)
    dt = cfl_timestep(setup.mesh, fd.L_g)
    step(setup.model, setup.mesh, setup.flux, state, dt, facedata=fd, debug_convex=True)


def test_step_aborts_outside_box():
    setup = dam_break_setup()
    tight = StateBox((1.9, -0.01), (2.2, 0.01), 0.0, 0.0)
    state = SolverState(0, 0.0, setup.U0.copy(), setup.alpha)
    with pytest.raises(SolverAbort, match="box"):
        step(setup.model, setup.mesh, setup.flux, state, 1e-3, box=tight)


def test_mirror_ghosts_still_water_pressure_flux():
    setup = lake_setup()
    ghosts = mirror_ghosts(setup.model, setup.U0, setup.mesh)
    np.testing.assert_allclose(ghosts, setup.U0[setup.mesh.bface_cells], atol=1e-15)
    fd = evaluate_fluxes(setup.model, setup.flux, setup.mesh, setup.U0, setup.alpha)
    # wall flux of still water: zero mass flux, pure pressure on momentum
    g = setup.model.g
    h = setup.U0[setup.mesh.bface_cells, 0]
    expected_mom = 0.5 * g * h * h * setup.mesh.bface_normals[:, 0]
    np.testing.assert_allclose(fd.wall.g_K[:, 0], 0.0, atol=1e-15)
    np.testing.assert_allclose(fd.wall.g_K[:, 1], expected_mom, atol=1e-14)


# ---------------------------------------------------------------------------
# Full runs
# ---------------------------------------------------------------------------


def test_zero_step_run_initial_record_only(tmp_path):
    setup = lake_setup(steps=0)
    setup.snapshot_dir = str(tmp_path / "snaps")
    result = run(setup)
    assert len(result.records) == 1
    assert result.records[0].step == 0
    assert len(result.snapshots_written) == 1


def test_lake_at_rest_run_records_frozen():
    setup = lake_setup(steps=300)
    result = run(setup)
    U0 = setup.U0
    assert np.max(np.abs(result.final.U - U0)) <= 1e-12
    V = result.lyapunov_series
    assert np.all(V <= 1e-14)
    masses = np.array([r.masses for r in result.records])
    np.testing.assert_allclose(masses, np.broadcast_to(masses[0], masses.shape), rtol=1e-13, atol=1e-14)


def test_perturbed_lake_lyapunov_monotone():
    setup, z0 = perturbed_lake_setup(steps=400)
    result = run(setup)
    V = result.lyapunov_series
    assert V[0] > 0
    assert np.all(np.diff(V) <= 0.0)
    assert result.worst_residual <= 1e-12
    assert result.worst_relative_residual <= 1e-12


def test_exact_conservation_over_run():
    setup = dam_break_setup(steps=200)
    result = run(setup)
    masses = np.array([r.masses for r in result.records])
    drift = np.abs(masses[:, 0] - masses[0, 0]) / abs(masses[0, 0])
    assert drift.max() <= 1e-12


def test_run_rejects_unreachable_family():
    setup = lake_setup()
    # shift the initial mass away from the family's total
    setup.U0 = setup.U0.copy()
    setup.U0[:, 0] *= 1.01
    with pytest.raises(ConfigurationError, match="unreachable"):
        run(setup)


def test_run_rejects_initial_state_outside_box():
    setup = lake_setup()
    setup.box = StateBox((0.9, -0.1), (1.1, 0.1), 0.0, 0.25)
    with pytest.raises(ConfigurationError, match="box"):
        run(setup)


def test_run_deterministic_records():
    a = run(lake_setup(steps=50))
    b = run(lake_setup(steps=50))
    assert len(a.records) == len(b.records)
    for ra, rb in zip(a.records, b.records):
        assert np.array_equal(ra.masses, rb.masses)
        assert ra.total_entropy == rb.total_entropy
        assert ra.lyapunov == rb.lyapunov
        assert ra.dt == rb.dt
        assert ra.worst_residual == rb.worst_residual
    np.testing.assert_array_equal(a.final.U, b.final.U)


def test_run_convergence_stop():
    setup, z0 = perturbed_lake_setup(cells=24, steps=50_000)
    setup.convergence_rtol = 1e-6
    result = run(setup)
    assert result.status == "converged"
    assert result.lyapunov_series[-1] <= 1e-6 * result.lyapunov_series[0]


def test_t_end_stop():
    setup = dam_break_setup(steps=10_000)
    setup.t_end = 0.01
    result = run(setup)
    assert result.status == "time"
    assert result.final.time == pytest.approx(0.01, abs=1e-12)


def test_snapshots_cadence(tmp_path):
    setup = lake_setup(steps=10)
    setup.snapshot_dir = str(tmp_path)
    setup.snapshot_every = 4
    result = run(setup)
    names = sorted(p.split("_")[-1] for p in result.snapshots_written)
    assert names == ["000000.csv", "000004.csv", "000008.csv", "000010.csv"]


def test_porous_euler_run_conserves_mass_and_energy():
    from ncbal.fluxes import RusanovFlux
    from ncbal.models import PorousEuler

    model = PorousEuler()
    mesh = build_uniform_1d(0.0, 1.0, 64, boundary="periodic")
    alpha = np.full(64, 1.0)
    x = mesh.centroids[:, 0]
    rho = 1.0 + 0.2 * np.sin(2 * np.pi * x)
    e = np.full(64, 2.0)
    U0 = np.column_stack([alpha * rho, np.zeros(64), alpha * rho * e])
    setup = RunSetup(
        model=model,
        mesh=mesh,
        flux=RusanovFlux(),
        U0=U0,
        alpha=alpha,
        box=StateBox((0.6, -0.6, 1.0), (1.4, 0.6, 3.2), 0.9, 1.1),
        cfl_mode="basic",
        max_steps=300,
        convergence_rtol=None,
    )
    result = run(setup)
    masses = np.array([r.masses for r in result.records])
    for comp in (0, 2):  # mass and energy carry no source
        drift = np.abs(masses[:, comp] - masses[0, comp]) / abs(masses[0, comp])
        assert drift.max() <= 1e-12
    # entropy total never increases under the dissipative flux
    eta = np.array([r.total_entropy for r in result.records])
    assert np.all(np.diff(eta) <= 1e-13)


def test_porous_euler_constant_Tp_state_is_near_fixed_point_on_flat_porosity():
    from ncbal.fluxes import RusanovFlux
    from ncbal.models import PorousEuler, constant_Tp_family

    model = PorousEuler()
    mesh = build_uniform_1d(0.0, 1.0, 32)
    alpha = np.full(32, 1.0)
    fam = constant_Tp_family(model, 1.0, 1.0, alpha)
    setup = RunSetup(
        model=model,
        mesh=mesh,
        flux=RusanovFlux(),
        U0=fam.states.copy(),
        alpha=alpha,
        box=StateBox((2.0, -0.5, 2.0), (3.0, 0.5, 3.0), 0.9, 1.1),
        cfl_mode="basic",
        family=fam,
        max_steps=200,
        convergence_rtol=None,
    )
    result = run(setup)
    # over flat porosity the conservative flux preserves the uniform state
    assert np.max(np.abs(result.final.U - fam.states)) <= 1e-13
