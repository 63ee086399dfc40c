import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from ncbal.models import (
    AdmissibilityError,
    LagrangianGas,
    PorousEuler,
    ShallowWater,
    StateBox,
    constant_Tp_family,
    hessian_bounds,
    hydrostatic_column_family,
    lake_at_rest_family,
    lake_level_from_volume,
    relative_entropy,
)

SW1 = ShallowWater(g=9.81, dim=1)
SW2 = ShallowWater(g=9.81, dim=2)
EUL = PorousEuler(gamma=1.4, c_v=1.0)
LAG = LagrangianGas(gamma=1.4, c_v=1.0)


def central_gradient(f, u, step=1e-6):
    """Independent finite-difference gradient of a scalar function of the state."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    for k in range(u.size):
        up = u.copy()
        um = u.copy()
        up[k] += step
        um[k] -= step
        out[k] = (f(up) - f(um)) / (2 * step)
    return out


def central_jacobian(f, u, step=1e-5):
    u = np.asarray(u, dtype=float)
    cols = []
    for k in range(u.size):
        up = u.copy()
        um = u.copy()
        up[k] += step
        um[k] -= step
        cols.append((np.asarray(f(up)) - np.asarray(f(um))) / (2 * step))
    return np.stack(cols, axis=-1)


# ---------------------------------------------------------------------------
# Physical flux and source coefficients
# ---------------------------------------------------------------------------


def test_sw1d_flux_still_water():
    # g h^2 / 2 = 9.81 / 2 by hand
    f = SW1.flux(np.array([1.0, 0.0]), 0.0, 1.0)
    np.testing.assert_allclose(f, [0.0, 4.905], rtol=0, atol=1e-15)


def test_sw1d_flux_dry_state_rejected():
    with pytest.raises(AdmissibilityError, match="h"):
        SW1.flux(np.array([0.0, 0.0]), 0.0, 1.0)


def test_lagrangian_flux_zero_when_p_equals_alpha():
    gamma = 1.4
    alpha = 0.4
    e = alpha / (gamma - 1.0)  # p = (gamma-1) e / tau = alpha at tau = 1
    u = np.array([1.0, 0.0, e + 1.0 * alpha])
    f = LAG.flux(u, alpha, 1.0)
    np.testing.assert_allclose(f, [0.0, 0.0, 0.0], atol=1e-14)


def test_sw2d_source_coefficient():
    u = np.array([2.0, 0.3, -0.1])
    s = SW2.source_coeff(u, 0.0)
    expected = np.zeros((3, 2))
    expected[1, 0] = 19.62
    expected[2, 1] = 19.62
    np.testing.assert_allclose(s, expected, atol=1e-14)


def test_porous_euler_source_coefficient():
    # pick a state with p = 1: rho e = 1 / (gamma - 1) = 2.5
    alpha = 2.0
    rho, vel = 1.0, 0.5
    e = 2.5 / rho
    U = np.array([alpha * rho, alpha * rho * vel, alpha * rho * (e + 0.5 * vel**2)])
    s = EUL.source_coeff(U, alpha)
    np.testing.assert_allclose(s[..., 0], [0.0, -1.0, 0.0], rtol=1e-14)


def test_lagrangian_source_identically_zero():
    u = np.array([1.0, 0.3, 2.0])
    np.testing.assert_array_equal(LAG.source_coeff(u, 0.2), np.zeros((3, 1)))


def test_flux_antisymmetric_in_normal_sw2d():
    rng = np.random.default_rng(7)
    U = np.column_stack([rng.uniform(0.5, 2, 20), rng.uniform(-1, 1, (20, 2)).reshape(20, -1)])
    n = rng.normal(size=(20, 2))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    np.testing.assert_allclose(SW2.flux(U, 0.0, n), -SW2.flux(U, 0.0, -n), atol=1e-14)


# ---------------------------------------------------------------------------
# Entropy pair
# ---------------------------------------------------------------------------


def test_sw1d_entropy_value():
    assert SW1.entropy(np.array([1.0, 0.0]), 0.5) == pytest.approx(9.81, abs=1e-14)


def test_sw1d_entropy_gradient_value():
    grad = SW1.entropy_gradient(np.array([1.0, 0.0]), 0.0)
    np.testing.assert_allclose(grad, [9.81, 0.0], atol=1e-15)


def test_entropy_flux_vanishes_at_rest():
    assert SW1.entropy_flux(np.array([1.3, 0.0]), 0.2, 1.0) == 0.0
    U = np.array([2.0, 0.0, 2.0 * 1.5])
    assert EUL.entropy_flux(U, 1.0, 1.0) == 0.0


def test_lagrangian_entropy_flux_identically_zero():
    u = np.array([0.7, 0.4, 3.0])
    assert LAG.entropy_flux(u, 0.3, 1.0) == 0.0
    assert LAG.entropy_flux(u, 0.3, -1.0) == 0.0


@pytest.mark.parametrize(
    "model,state,alpha",
    [
        (SW1, np.array([1.3, 0.4]), 0.3),
        (SW2, np.array([0.9, 0.2, -0.5]), 0.1),
        (EUL, np.array([2.0, 0.6, 4.0]), 1.7),
        (LAG, np.array([0.8, -0.3, 2.5]), 0.6),
    ],
)
def test_entropy_gradient_matches_finite_differences(model, state, alpha):
    grad = model.entropy_gradient(state, alpha)
    fd = central_gradient(lambda u: float(model.entropy(u, alpha)), state)
    np.testing.assert_allclose(grad, fd, rtol=1e-6, atol=1e-6)


@pytest.mark.parametrize(
    "model,state,alpha",
    [
        (SW1, np.array([1.3, 0.4]), 0.3),
        (SW2, np.array([0.9, 0.2, -0.5]), 0.1),
        (EUL, np.array([2.0, 0.6, 4.0]), 1.7),
        (LAG, np.array([0.8, -0.3, 2.5]), 0.6),
    ],
)
def test_entropy_hessian_matches_finite_differences(model, state, alpha):
    H = model.entropy_hessian(state, alpha)
    fd = central_jacobian(lambda u: model.entropy_gradient(u, alpha), state)
    np.testing.assert_allclose(H, fd, rtol=1e-5, atol=1e-5)
    np.testing.assert_allclose(H, np.swapaxes(H, -1, -2), atol=1e-13)


def _h2_states(model, rng, count):
    if isinstance(model, ShallowWater):
        h = rng.uniform(0.5, 2.0, count)
        q = rng.uniform(-1.0, 1.0, (count, model.dim))
        U = np.column_stack([h, q])
        alpha = rng.uniform(0.0, 0.5, count)
    elif isinstance(model, PorousEuler):
        alpha = rng.uniform(0.5, 2.0, count)
        rho = rng.uniform(0.5, 2.0, count)
        vel = rng.uniform(-0.5, 0.5, count)
        e = rng.uniform(0.5, 2.0, count)
        U = np.column_stack([alpha * rho, alpha * rho * vel, alpha * rho * (e + 0.5 * vel**2)])
    else:
        alpha = rng.uniform(0.0, 1.0, count)
        tau = rng.uniform(0.3, 1.5, count)
        vel = rng.uniform(-0.5, 0.5, count)
        e = rng.uniform(0.5, 2.0, count)
        U = np.column_stack([tau, vel, e + tau * alpha + 0.5 * vel**2])
    return U, alpha


@pytest.mark.parametrize("model", [SW1, SW2, EUL, LAG], ids=lambda m: m.name)
def test_entropy_flux_compatibility(model):
    # d_u eta . d_u f_i = d_u F_i under central differences, 1000 sampled states
    rng = np.random.default_rng(42)
    U, alpha = _h2_states(model, rng, 1000)
    dirs = np.eye(model.dim)
    for i in range(model.dim):
        n = dirs[i] if model.dim > 1 else 1.0
        worst = 0.0
        for u, a in zip(U, alpha):
            Jf = central_jacobian(lambda v: model.flux(v, a, n), u)
            dF = central_gradient(lambda v: float(model.entropy_flux(v, a, n)), u)
            lhs = model.entropy_gradient(u, a) @ Jf
            scale = max(1.0, float(np.max(np.abs(dF))))
            worst = max(worst, float(np.max(np.abs(lhs - dF))) / scale)
        assert worst <= 1e-6


@pytest.mark.parametrize("model", [SW1, SW2, EUL], ids=lambda m: m.name)
def test_entropy_flux_alpha_compatibility(model):
    # d_u eta . (d_alpha f_i + s_i) = d_alpha F_i, the alpha half of compatibility
    rng = np.random.default_rng(3)
    U, alpha = _h2_states(model, rng, 100)
    step = 1e-6
    for i in range(model.dim):
        n = np.eye(model.dim)[i] if model.dim > 1 else 1.0
        for u, a in zip(U, alpha):
            df_da = (model.flux(u, a + step, n) - model.flux(u, a - step, n)) / (2 * step)
            dF_da = (model.entropy_flux(u, a + step, n) - model.entropy_flux(u, a - step, n)) / (
                2 * step
            )
            s = model.source_coeff(u, a)[..., :, i]
            lhs = float(model.entropy_gradient(u, a) @ (df_da + s))
            assert lhs == pytest.approx(float(dF_da), rel=1e-5, abs=1e-5)


# ---------------------------------------------------------------------------
# Hessian bounds
# ---------------------------------------------------------------------------


def test_sw1d_hessian_at_unit_rest_state():
    H = SW1.entropy_hessian(np.array([1.0, 0.0]), 0.0)
    np.testing.assert_allclose(H, [[9.81, 0.0], [0.0, 1.0]], atol=1e-15)


def test_hessian_bounds_degenerate_box():
    box = StateBox((1.0, 0.0), (1.0, 0.0))
    lo, hi = hessian_bounds(SW1, box)
    assert lo == pytest.approx(0.9 * 1.0)
    assert hi == pytest.approx(1.1 * 9.81)


def test_hessian_bounds_box_touching_boundary_rejected():
    with pytest.raises(ValueError, match="admissible"):
        hessian_bounds(SW1, StateBox((0.0, 0.0), (1.0, 0.0)))


def test_hessian_bounds_cover_sampled_spectra():
    box = StateBox((0.5, -1.0), (2.0, 1.0), 0.0, 0.5)
    lo, hi = hessian_bounds(SW1, box)
    rng = np.random.default_rng(0)
    U, alpha = box.sample(rng, 2000)
    eigs = np.linalg.eigvalsh(SW1.entropy_hessian(U, alpha))
    assert lo <= eigs.min() and eigs.max() <= hi


# ---------------------------------------------------------------------------
# Relative entropy
# ---------------------------------------------------------------------------


def test_relative_entropy_identity():
    u = np.array([1.4, 0.3])
    assert relative_entropy(SW1, u, u, 0.7) == 0.0


def test_relative_entropy_height_jump():
    # g (h_u - h_v)^2 / 2 = 4.905 for a unit height jump at rest
    val = relative_entropy(SW1, np.array([2.0, 0.0]), np.array([1.0, 0.0]), 0.0)
    assert val == pytest.approx(4.905, abs=1e-13)


def test_relative_entropy_velocity_jump_alpha_independent():
    u = np.array([1.0, 1.0])
    v = np.array([1.0, 0.0])
    for alpha in (0.0, 0.3, -2.0):
        assert relative_entropy(SW1, u, v, alpha) == pytest.approx(0.5, abs=1e-14)


def test_sw_relative_entropy_alpha_translation_exact():
    rng = np.random.default_rng(5)
    U = np.column_stack([rng.uniform(0.5, 2, 50), rng.uniform(-1, 1, 50)])
    V = np.column_stack([rng.uniform(0.5, 2, 50), rng.uniform(-1, 1, 50)])
    a = rng.uniform(-1, 1, 50)
    np.testing.assert_array_equal(
        relative_entropy(SW1, U, V, a), relative_entropy(SW1, U, V, 0.0)
    )


def test_sw_relative_entropy_matches_defining_expression():
    rng = np.random.default_rng(11)
    U = np.column_stack([rng.uniform(0.5, 2, 200), rng.uniform(-1, 1, 200)])
    V = np.column_stack([rng.uniform(0.5, 2, 200), rng.uniform(-1, 1, 200)])
    alpha = rng.uniform(0, 0.5, 200)
    direct = (
        SW1.entropy(U, alpha)
        - SW1.entropy(V, alpha)
        - np.sum(SW1.entropy_gradient(V, alpha) * (U - V), axis=-1)
    )
    np.testing.assert_allclose(relative_entropy(SW1, U, V, alpha), direct, atol=1e-12)


@pytest.mark.parametrize("model", [EUL, LAG], ids=lambda m: m.name)
def test_relative_entropy_positive_definite(model):
    rng = np.random.default_rng(21)
    U, alpha = _h2_states(model, rng, 300)
    V, _ = _h2_states(model, rng, 300)
    if isinstance(model, LagrangianGas):
        # rebuild V against the same alpha so both states are admissible with it
        tau = rng.uniform(0.3, 1.5, 300)
        vel = rng.uniform(-0.5, 0.5, 300)
        e = rng.uniform(0.5, 2.0, 300)
        V = np.column_stack([tau, vel, e + tau * alpha + 0.5 * vel**2])
    h = relative_entropy(model, U, V, alpha)
    assert np.all(h > 0.0)
    np.testing.assert_allclose(relative_entropy(model, U, U, alpha), 0.0, atol=1e-14)


@settings(max_examples=200, deadline=None)
@given(
    hu=st.floats(0.5, 2.0),
    qu=st.floats(-1.0, 1.0),
    hv=st.floats(0.5, 2.0),
    qv=st.floats(-1.0, 1.0),
)
def test_relative_entropy_zero_iff_equal(hu, qu, hv, qv):
    # quadratic in the state difference, so differences below ~1e-160
    # underflow to an exact zero; keep the property above that floor
    assume(hu == hv or abs(hu - hv) > 1e-120)
    assume(qu == qv or abs(qu - qv) > 1e-120)
    u = np.array([hu, qu])
    v = np.array([hv, qv])
    h = float(relative_entropy(SW1, u, v, 0.0))
    assert h >= 0.0
    if hu != hv or qu != qv:
        assert h > 0.0


def test_quadratic_sandwich_with_certified_bounds():
    # eta_lo/2 |u-v|^2 <= h(u,v,alpha) <= eta_hi/2 |u-v|^2 on 10^4 samples
    rng = np.random.default_rng(2024)
    n = 10_000
    hs = rng.uniform(0.5, 2.0, (2, n))
    us = rng.uniform(-1.0, 1.0, (2, n))
    U = np.column_stack([hs[0], hs[0] * us[0]])
    V = np.column_stack([hs[1], hs[1] * us[1]])
    box = StateBox((0.5, -2.0), (2.0, 2.0))
    lo, hi = hessian_bounds(SW1, box)
    h = relative_entropy(SW1, U, V, 0.0)
    d2 = np.sum((U - V) ** 2, axis=-1)
    assert np.all(0.5 * lo * d2 <= h)
    assert np.all(h <= 0.5 * hi * d2)


# ---------------------------------------------------------------------------
# Stationary families
# ---------------------------------------------------------------------------


def test_lake_at_rest_states_and_H0():
    alpha = np.array([0.0, 0.5])
    fam = lake_at_rest_family(SW1, 1.0, alpha)
    np.testing.assert_allclose(fam.states, [[1.0, 0.0], [0.5, 0.0]])
    np.testing.assert_allclose(fam.H0, [9.81, 0.0])
    grad = SW1.entropy_gradient(fam.states, alpha)
    assert np.max(np.abs(grad - fam.H0)) <= 1e-12
    assert fam.H0[1] == 0.0


def test_lake_at_rest_dry_cell_rejected():
    with pytest.raises(ValueError, match="wet"):
        lake_at_rest_family(SW1, 0.4, np.array([0.0, 0.5]))


def test_constant_Tp_family_density():
    alpha = np.array([0.5, 1.0, 2.0])
    fam = constant_Tp_family(EUL, 2.0, 1.0, alpha)
    rho = 1.0 / ((1.4 - 1.0) * 1.0 * 2.0)
    np.testing.assert_allclose(fam.states[:, 0], alpha * rho, rtol=1e-15)
    np.testing.assert_array_equal(fam.states[:, 1], 0.0)
    grad = EUL.entropy_gradient(fam.states, alpha)
    assert np.max(np.abs(grad - fam.H0)) <= 1e-12
    assert fam.H0[1] == 0.0


def test_hydrostatic_column_family_constancy():
    alpha = np.linspace(0.0, 1.0, 11)
    fam = hydrostatic_column_family(LAG, 0.0, 1.0, 1.0, alpha)
    grad = LAG.entropy_gradient(fam.states, alpha)
    assert np.max(np.abs(grad - fam.H0)) <= 1e-12
    tau, vel, e, p = LAG._prim(fam.states, alpha)
    np.testing.assert_allclose(p - alpha, 1.0, rtol=1e-13)


def test_lake_level_from_volume():
    assert lake_level_from_volume(np.zeros(4), np.full(4, 0.25), 1.0) == pytest.approx(1.0)
    assert lake_level_from_volume(np.array([0.0, 0.5]), np.ones(2), 1.5) == pytest.approx(1.0)
    with pytest.raises(ValueError, match="insufficient"):
        lake_level_from_volume(np.array([0.0, 5.0]), np.ones(2), 1.0)


def test_mirror_state_reflection():
    u = np.array([1.0, 1.0, 0.0])
    ghost = SW2.mirror_state(u, np.array([1.0, 0.0]))
    np.testing.assert_allclose(ghost, [1.0, -1.0, 0.0], atol=1e-15)
    tangent = SW2.mirror_state(np.array([1.0, 0.0, 0.7]), np.array([1.0, 0.0]))
    np.testing.assert_allclose(tangent, [1.0, 0.0, 0.7], atol=1e-15)
