import numpy as np
import pytest

from ncbal.fluxes import HydrostaticReconstructionFlux, RusanovFlux
from ncbal.mesh import build_uniform_1d
from ncbal.models import ShallowWater, StateBox, lake_at_rest_family, lake_level_from_volume
from ncbal.solver import RunSetup


def step_alpha(mesh, height=0.25, x_step=0.5):
    return np.where(mesh.centroids[:, 0] > x_step, height, 0.0)


def lake_setup(cells=50, g=1.0, flux=None, steps=200, **kw):
    """Lake at rest over a bottom step, hydrostatic flux, walls."""
    model = ShallowWater(g=g, dim=1)
    mesh = build_uniform_1d(0.0, 1.0, cells)
    alpha = step_alpha(mesh)
    fam = lake_at_rest_family(model, 1.0, alpha)
    box = StateBox((0.4, -0.6), (1.4, 0.6), 0.0, 0.25)
    return RunSetup(
        model=model,
        mesh=mesh,
        flux=flux or HydrostaticReconstructionFlux(),
        U0=fam.states.copy(),
        alpha=alpha,
        box=box,
        family=fam,
        max_steps=steps,
        **kw,
    )


def perturbed_lake_setup(cells=50, g=1.0, amplitude=0.1, steps=500, **kw):
    """Lake at rest over a bottom step with a localized surface bump."""
    model = ShallowWater(g=g, dim=1)
    mesh = build_uniform_1d(0.0, 1.0, cells)
    alpha = step_alpha(mesh)
    x = mesh.centroids[:, 0]
    h = (1.0 - alpha) * (1.0 + amplitude * np.exp(-(((x - 0.3) / 0.08) ** 2)))
    U0 = np.column_stack([h, np.zeros(cells)])
    z0 = lake_level_from_volume(alpha, mesh.areas, float(mesh.areas @ h))
    fam = lake_at_rest_family(model, z0, alpha)
    # tight box around the trajectory: the eta_lo/eta_hi ratio directly
    # scales the strengthened CFL step
    box = StateBox((0.6, -0.2), (1.2, 0.2), 0.0, 0.25)
    return RunSetup(
        model=model,
        mesh=mesh,
        flux=HydrostaticReconstructionFlux(),
        U0=U0,
        alpha=alpha,
        box=box,
        family=fam,
        max_steps=steps,
        **kw,
    ), z0


def dam_break_setup(cells=100, g=1.0, steps=100, **kw):
    model = ShallowWater(g=g, dim=1)
    mesh = build_uniform_1d(0.0, 1.0, cells, boundary="periodic")
    alpha = np.zeros(cells)
    h = np.where(mesh.centroids[:, 0] < 0.5, 2.0, 1.0)
    U0 = np.column_stack([h, np.zeros(cells)])
    box = StateBox((0.8, -1.5), (2.2, 1.5), 0.0, 0.0)
    return RunSetup(
        model=model,
        mesh=mesh,
        flux=RusanovFlux(),
        U0=U0,
        alpha=alpha,
        box=box,
        max_steps=steps,
        **kw,
    )
