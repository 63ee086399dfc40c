"""Physical systems coupled to a frozen geometric field.

Each model couples N conserved quantities per cell to a stationary scalar
``alpha`` (bathymetry, porosity, or a potential in mass coordinates).  A model
bundles

* the directional physical flux ``f(u, alpha) . n``,
* the coefficients of the non-conservative source ``s_i(u, alpha)``,
* a convex entropy pair ``(eta, F)`` with closed-form gradient and Hessian,
* wave-speed bounds and mirror (wall) reflection,
* constructors for stationary families whose entropy variable is a constant
  vector ``H0`` vanishing on the source-carrying components.

All state arguments are numpy arrays with the component axis last, so every
operation works on a single state ``(N,)`` or a batch ``(M, N)`` alike.
Operations are pure functions of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_H_MIN = 1e-8

__all__ = [
    "AdmissibilityError",
    "DEFAULT_H_MIN",
    "StateBox",
    "ShallowWater",
    "PorousEuler",
    "LagrangianGas",
    "StationaryFamily",
    "relative_entropy",
    "hessian_bounds",
    "lake_at_rest_family",
    "constant_Tp_family",
    "hydrostatic_column_family",
    "lake_level_from_volume",
]


class AdmissibilityError(ValueError):
    """A state left the admissible set of its model."""


def _bad(mask: np.ndarray) -> str:
    idx = np.flatnonzero(np.atleast_1d(mask))
    shown = ", ".join(str(i) for i in idx[:5])
    more = "" if idx.size <= 5 else f" (+{idx.size - 5} more)"
    return f"at flat index {shown}{more}"


@dataclass(frozen=True)
class StateBox:
    """Axis-aligned compact box of states plus an alpha interval.

    Used to declare the region on which entropy-Hessian spectral bounds are
    certified, to sample states for flux-contract certification, and as the
    containment region the solver asserts along trajectories.
    """

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    alpha_lo: float = 0.0
    alpha_hi: float = 0.0

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("state box lo/hi lengths differ")
        if any(l > h for l, h in zip(self.lo, self.hi)):
            raise ValueError("state box has lo > hi")
        if self.alpha_lo > self.alpha_hi:
            raise ValueError("state box has alpha_lo > alpha_hi")

    @property
    def n_comp(self) -> int:
        return len(self.lo)

    def contains(self, U: np.ndarray, alpha) -> bool:
        U = np.asarray(U, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return bool(
            np.all(U >= lo)
            and np.all(U <= hi)
            and np.all(alpha >= self.alpha_lo)
            and np.all(alpha <= self.alpha_hi)
        )

    def violation_mask(self, U: np.ndarray, alpha) -> np.ndarray:
        """Per-row True where the state or alpha leaves the box."""
        U = np.atleast_2d(np.asarray(U, dtype=float))
        alpha = np.broadcast_to(np.asarray(alpha, dtype=float), U.shape[:-1])
        bad = np.any(U < np.asarray(self.lo), axis=-1)
        bad |= np.any(U > np.asarray(self.hi), axis=-1)
        bad |= (alpha < self.alpha_lo) | (alpha > self.alpha_hi)
        return bad

    def grid(self, points_per_axis: int = 10) -> tuple[np.ndarray, np.ndarray]:
        """Dense cartesian grid over state components and alpha."""
        axes = [np.linspace(l, h, points_per_axis) for l, h in zip(self.lo, self.hi)]
        axes.append(np.linspace(self.alpha_lo, self.alpha_hi, points_per_axis))
        mesh = np.meshgrid(*axes, indexing="ij")
        flat = [m.reshape(-1) for m in mesh]
        return np.stack(flat[:-1], axis=-1), flat[-1]

    def sample(self, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        U = rng.uniform(lo, hi, size=(size, self.n_comp))
        alpha = rng.uniform(self.alpha_lo, self.alpha_hi, size=size)
        return U, alpha


# ---------------------------------------------------------------------------
# Shallow water with bathymetry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShallowWater:
    """Shallow water over a non-flat bottom, in 1 or 2 space dimensions.

    State ``u = (h, h*U)`` with water height h and discharge h*U; alpha is the
    bottom altitude.  Entropy

        eta(u, alpha) = h|U|^2/2 + g h (h/2 + alpha)

    with entropy flux ``F . n = (U . n) (eta + g h^2/2)``.
    """

    g: float = 9.81
    dim: int = 1
    h_min: float = DEFAULT_H_MIN

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("shallow water supports dim 1 or 2")

    @property
    def n_comp(self) -> int:
        return self.dim + 1

    @property
    def name(self) -> str:
        return f"sw{self.dim}d"

    # components whose source coefficient is not identically zero
    @property
    def source_components(self) -> np.ndarray:
        m = np.zeros(self.n_comp, dtype=bool)
        m[1:] = True
        return m

    def _normal(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        if self.dim == 1 and (n.ndim == 0 or n.shape[-1] != 1):
            n = n[..., None]
        return n

    def admissibility_margin(self, U, alpha=None) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        return U[..., 0] - self.h_min

    def check_admissible(self, U, alpha=None) -> None:
        margin = self.admissibility_margin(U, alpha)
        if np.any(margin < 0.0) or not np.all(np.isfinite(np.asarray(U, dtype=float))):
            bad = ~(margin >= 0.0)
            raise AdmissibilityError(
                f"shallow water state inadmissible: h < h_min = {self.h_min} " + _bad(bad)
            )

    def velocity(self, U) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        return U[..., 1:] / U[..., :1]

    def flux(self, U, alpha, n) -> np.ndarray:
        """Physical flux dotted with the unit normal: (q.n, (q.n) U + g h^2/2 n)."""
        U = np.asarray(U, dtype=float)
        self.check_admissible(U)
        n = self._normal(n)
        h = U[..., 0]
        q = U[..., 1:]
        qn = np.sum(q * n, axis=-1)
        mom = qn[..., None] * (q / h[..., None]) + (0.5 * self.g * h * h)[..., None] * n
        return np.concatenate([qn[..., None], mom], axis=-1)

    def source_coeff(self, U, alpha) -> np.ndarray:
        """Coefficients s_i of the non-conservative term: s_i = (0, g h e_i)."""
        U = np.asarray(U, dtype=float)
        self.check_admissible(U)
        out = np.zeros(U.shape[:-1] + (self.n_comp, self.dim))
        gh = self.g * U[..., 0]
        for i in range(self.dim):
            out[..., 1 + i, i] = gh
        return out

    def entropy(self, U, alpha) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        self.check_admissible(U)
        alpha = np.asarray(alpha, dtype=float)
        h = U[..., 0]
        q2 = np.sum(U[..., 1:] ** 2, axis=-1)
        return 0.5 * q2 / h + self.g * h * (0.5 * h + alpha)

    def entropy_flux(self, U, alpha, n) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        n = self._normal(n)
        h = U[..., 0]
        un = np.sum(U[..., 1:] * n, axis=-1) / h
        return un * (self.entropy(U, alpha) + 0.5 * self.g * h * h)

    def entropy_gradient(self, U, alpha) -> np.ndarray:
        """d(eta)/du = (g(h+alpha) - |U|^2/2, U)."""
        U = np.asarray(U, dtype=float)
        self.check_admissible(U)
        alpha = np.asarray(alpha, dtype=float)
        h = U[..., 0]
        vel = U[..., 1:] / h[..., None]
        first = self.g * (h + alpha) - 0.5 * np.sum(vel**2, axis=-1)
        return np.concatenate([first[..., None], vel], axis=-1)

    def entropy_hessian(self, U, alpha) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        self.check_admissible(U)
        h = U[..., 0]
        q = U[..., 1:]
        N = self.n_comp
        H = np.zeros(U.shape[:-1] + (N, N))
        H[..., 0, 0] = np.sum(q**2, axis=-1) / h**3 + self.g
        for i in range(self.dim):
            H[..., 0, 1 + i] = -q[..., i] / h**2
            H[..., 1 + i, 0] = H[..., 0, 1 + i]
            H[..., 1 + i, 1 + i] = 1.0 / h
        return H

    def wave_speed(self, U, alpha, n) -> np.ndarray:
        """|U . n| + sqrt(g h), the directional wave-speed bound."""
        U = np.asarray(U, dtype=float)
        self.check_admissible(U)
        n = self._normal(n)
        h = U[..., 0]
        un = np.sum(U[..., 1:] * n, axis=-1) / h
        return np.abs(un) + np.sqrt(self.g * h)

    def mirror_state(self, U, n) -> np.ndarray:
        """Wall ghost: height copied, velocity reflected across the face normal."""
        U = np.asarray(U, dtype=float)
        n = self._normal(n)
        q = U[..., 1:]
        qn = np.sum(q * n, axis=-1)
        q_ref = q - 2.0 * qn[..., None] * n
        return np.concatenate([U[..., :1], q_ref], axis=-1)

    def relative_entropy(self, U, V, alpha) -> np.ndarray:
        """Exact algebraic form h_u |U_u - U_v|^2 / 2 + g (h_u - h_v)^2 / 2.

        Equal to eta(u) - eta(v) - d_u eta(v).(u - v); this form avoids the
        cancellation of the defining expression and is independent of alpha.
        """
        U = np.asarray(U, dtype=float)
        V = np.asarray(V, dtype=float)
        self.check_admissible(U)
        self.check_admissible(V)
        du = self.velocity(U) - self.velocity(V)
        dh = U[..., 0] - V[..., 0]
        return 0.5 * U[..., 0] * np.sum(du**2, axis=-1) + 0.5 * self.g * dh**2


# ---------------------------------------------------------------------------
# Compressible Euler equations in a porous medium (1D)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PorousEuler:
    """Compressible Euler flow through a porous medium, one-dimensional.

    State ``u = (a rho, a rho U, a rho E)`` where a = alpha > 0 is the
    porosity.  Ideal gas closure: p = (gamma-1) rho e, T = e / c_v,
    s = c_v ln(e tau^(gamma-1)).  Entropy eta(u, alpha) = -alpha rho s with
    entropy flux F = U eta.
    """

    gamma: float = 1.4
    c_v: float = 1.0

    dim: int = 1

    @property
    def n_comp(self) -> int:
        return 3

    @property
    def name(self) -> str:
        return "porous_euler"

    @property
    def source_components(self) -> np.ndarray:
        return np.array([False, True, False])

    def _normal(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        if n.ndim > 0 and n.shape[-1] == 1:
            n = n[..., 0]
        return n

    def _prim(self, U, alpha):
        U = np.asarray(U, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        rho = U[..., 0] / alpha
        vel = U[..., 1] / U[..., 0]
        E = U[..., 2] / U[..., 0]
        e = E - 0.5 * vel**2
        p = (self.gamma - 1.0) * rho * e
        return rho, vel, E, e, p

    def admissibility_margin(self, U, alpha) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        with np.errstate(all="ignore"):
            e = U[..., 2] / U[..., 0] - 0.5 * (U[..., 1] / U[..., 0]) ** 2
        return np.minimum(np.minimum(U[..., 0], e), np.broadcast_to(alpha, U.shape[:-1]))

    def check_admissible(self, U, alpha) -> None:
        U = np.asarray(U, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        if np.any(alpha <= 0.0):
            raise AdmissibilityError(
                "porous Euler: porosity must be positive " + _bad(~(alpha > 0))
            )
        if np.any(U[..., 0] <= 0.0):
            raise AdmissibilityError(
                "porous Euler: alpha*rho must be positive " + _bad(~(U[..., 0] > 0))
            )
        with np.errstate(all="ignore"):
            e = U[..., 2] / U[..., 0] - 0.5 * (U[..., 1] / U[..., 0]) ** 2
        if np.any(~(e > 0.0)):
            raise AdmissibilityError(
                "porous Euler: internal energy e must be positive " + _bad(~(e > 0))
            )

    def entropy_specific(self, tau, e) -> np.ndarray:
        return self.c_v * (np.log(e) + (self.gamma - 1.0) * np.log(tau))

    def flux(self, U, alpha, n) -> np.ndarray:
        """(a rho U, a rho U^2 + a p, a U (rho E + p)) . n"""
        self.check_admissible(U, alpha)
        U = np.asarray(U, dtype=float)
        n = self._normal(n)
        alpha = np.asarray(alpha, dtype=float)
        rho, vel, E, e, p = self._prim(U, alpha)
        ap = alpha * p
        out = np.stack(
            [U[..., 1], U[..., 1] * vel + ap, vel * (U[..., 2] + ap)], axis=-1
        )
        return out * n[..., None]

    def source_coeff(self, U, alpha) -> np.ndarray:
        """s_1 = (0, -p, 0): the momentum picks up -p d(alpha)/dx."""
        self.check_admissible(U, alpha)
        rho, vel, E, e, p = self._prim(U, alpha)
        out = np.zeros(np.asarray(U, dtype=float).shape[:-1] + (3, 1))
        out[..., 1, 0] = -p
        return out

    def entropy(self, U, alpha) -> np.ndarray:
        self.check_admissible(U, alpha)
        U = np.asarray(U, dtype=float)
        rho, vel, E, e, p = self._prim(U, alpha)
        return -U[..., 0] * self.entropy_specific(1.0 / rho, e)

    def entropy_flux(self, U, alpha, n) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        n = self._normal(n)
        vel = U[..., 1] / U[..., 0]
        return vel * n * self.entropy(U, alpha)

    def entropy_gradient(self, U, alpha) -> np.ndarray:
        """(gamma c_v - s - c_v U^2/(2e), c_v U / e, -c_v / e)."""
        self.check_admissible(U, alpha)
        rho, vel, E, e, p = self._prim(U, alpha)
        s = self.entropy_specific(1.0 / rho, e)
        cv = self.c_v
        return np.stack(
            [self.gamma * cv - s - 0.5 * cv * vel**2 / e, cv * vel / e, -cv / e],
            axis=-1,
        )

    def entropy_hessian(self, U, alpha) -> np.ndarray:
        """(1/alpha) x Hessian of -rho s at (rho, rho U, rho E) = u / alpha."""
        self.check_admissible(U, alpha)
        U = np.asarray(U, dtype=float)
        alpha = np.asarray(np.broadcast_to(np.asarray(alpha, dtype=float), U.shape[:-1]))
        w = U / alpha[..., None]
        rho = w[..., 0]
        j = w[..., 1]
        eps = w[..., 2] - 0.5 * j**2 / rho  # internal energy per volume
        cv = self.c_v
        H = np.zeros(U.shape[:-1] + (3, 3))
        H[..., 0, 0] = self.gamma * cv / rho + 0.25 * cv * j**4 / (rho**3 * eps**2)
        H[..., 0, 1] = -0.5 * cv * j**3 / (rho**2 * eps**2)
        H[..., 0, 2] = -cv / eps + 0.5 * cv * j**2 / (rho * eps**2)
        H[..., 1, 1] = cv / eps + cv * j**2 / (rho * eps**2)
        H[..., 1, 2] = -cv * j / eps**2
        H[..., 2, 2] = rho * cv / eps**2
        H[..., 1, 0] = H[..., 0, 1]
        H[..., 2, 0] = H[..., 0, 2]
        H[..., 2, 1] = H[..., 1, 2]
        return H / alpha[..., None, None]

    def wave_speed(self, U, alpha, n) -> np.ndarray:
        self.check_admissible(U, alpha)
        rho, vel, E, e, p = self._prim(U, alpha)
        n = self._normal(n)
        return np.abs(vel * n) + np.sqrt(self.gamma * p / rho)

    def mirror_state(self, U, n) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        return np.stack([U[..., 0], -U[..., 1], U[..., 2]], axis=-1)

    def relative_entropy(self, U, V, alpha) -> np.ndarray:
        return _relative_entropy_generic(self, U, V, alpha)


# ---------------------------------------------------------------------------
# Gas dynamics with a potential source, Lagrangian (mass) coordinates (1D)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LagrangianGas:
    """Gas dynamics with a potential written in mass coordinates.

    In the conservative variables ``u = (tau, U, W)`` with W = E + tau*alpha
    the system carries no source term and the flux is
    ``f(u, alpha) = (-U, p - alpha, (p - alpha) U)``.  For a constant gravity
    field, alpha is g_grav times the mass coordinate.  Entropy
    eta(u, alpha) = -s(tau, e) with e = W - tau*alpha - U^2/2; the physical
    entropy flux vanishes identically.
    """

    gamma: float = 1.4
    c_v: float = 1.0

    dim: int = 1

    @property
    def n_comp(self) -> int:
        return 3

    @property
    def name(self) -> str:
        return "lagrangian"

    @property
    def source_components(self) -> np.ndarray:
        return np.zeros(3, dtype=bool)

    def _normal(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        if n.ndim > 0 and n.shape[-1] == 1:
            n = n[..., 0]
        return n

    def _prim(self, U, alpha):
        U = np.asarray(U, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        tau = U[..., 0]
        vel = U[..., 1]
        e = U[..., 2] - tau * alpha - 0.5 * vel**2
        p = (self.gamma - 1.0) * e / tau
        return tau, vel, e, p

    def admissibility_margin(self, U, alpha) -> np.ndarray:
        tau, vel, e, p = self._prim(U, alpha)
        return np.minimum(tau, e)

    def check_admissible(self, U, alpha) -> None:
        tau, vel, e, p = self._prim(U, alpha)
        if np.any(~(tau > 0.0)):
            raise AdmissibilityError(
                "lagrangian gas: specific volume tau must be positive " + _bad(~(tau > 0))
            )
        if np.any(~(e > 0.0)):
            raise AdmissibilityError(
                "lagrangian gas: internal energy e must be positive " + _bad(~(e > 0))
            )

    def entropy_specific(self, tau, e) -> np.ndarray:
        return self.c_v * (np.log(e) + (self.gamma - 1.0) * np.log(tau))

    def flux(self, U, alpha, n) -> np.ndarray:
        """(-U, p - alpha, (p - alpha) U) . n"""
        self.check_admissible(U, alpha)
        U = np.asarray(U, dtype=float)
        n = self._normal(n)
        alpha = np.asarray(alpha, dtype=float)
        tau, vel, e, p = self._prim(U, alpha)
        pa = p - alpha
        return np.stack([-vel, pa, pa * vel], axis=-1) * n[..., None]

    def source_coeff(self, U, alpha) -> np.ndarray:
        self.check_admissible(U, alpha)
        return np.zeros(np.asarray(U, dtype=float).shape[:-1] + (3, 1))

    def entropy(self, U, alpha) -> np.ndarray:
        self.check_admissible(U, alpha)
        tau, vel, e, p = self._prim(U, alpha)
        return -self.entropy_specific(tau, e)

    def entropy_flux(self, U, alpha, n) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        n = self._normal(n)
        return np.zeros(np.broadcast_shapes(U.shape[:-1], n.shape))

    def entropy_gradient(self, U, alpha) -> np.ndarray:
        """((alpha - p)/T, U/T, -1/T) with T = e / c_v."""
        self.check_admissible(U, alpha)
        alpha_b = np.broadcast_to(np.asarray(alpha, dtype=float), np.asarray(U).shape[:-1])
        tau, vel, e, p = self._prim(U, alpha)
        cv = self.c_v
        return np.stack(
            [cv * alpha_b / e - cv * (self.gamma - 1.0) / tau, cv * vel / e, -cv / e],
            axis=-1,
        )

    def entropy_hessian(self, U, alpha) -> np.ndarray:
        """c_v/e^2 v v^T + diag(c_v(gamma-1)/tau^2, c_v/e, 0), v = (alpha, U, -1)."""
        self.check_admissible(U, alpha)
        U = np.asarray(U, dtype=float)
        alpha_b = np.broadcast_to(np.asarray(alpha, dtype=float), U.shape[:-1])
        tau, vel, e, p = self._prim(U, alpha)
        cv = self.c_v
        v = np.stack([alpha_b, vel, -np.ones_like(vel)], axis=-1)
        H = (cv / e**2)[..., None, None] * (v[..., :, None] * v[..., None, :])
        H[..., 0, 0] += cv * (self.gamma - 1.0) / tau**2
        H[..., 1, 1] += cv / e
        return H

    def wave_speed(self, U, alpha, n) -> np.ndarray:
        """Lagrangian sound speed sqrt(gamma p / tau); the advective speed is zero."""
        self.check_admissible(U, alpha)
        tau, vel, e, p = self._prim(U, alpha)
        return np.broadcast_to(
            np.sqrt(self.gamma * p / tau),
            np.broadcast_shapes(np.asarray(U).shape[:-1], self._normal(n).shape),
        ).copy()

    def mirror_state(self, U, n) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        return np.stack([U[..., 0], -U[..., 1], U[..., 2]], axis=-1)

    def relative_entropy(self, U, V, alpha) -> np.ndarray:
        return _relative_entropy_generic(self, U, V, alpha)


# ---------------------------------------------------------------------------
# Relative entropy and Hessian bounds
# ---------------------------------------------------------------------------


def _relative_entropy_generic(model, U, V, alpha) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    diff = U - V
    grad = model.entropy_gradient(V, alpha)
    return model.entropy(U, alpha) - model.entropy(V, alpha) - np.sum(grad * diff, axis=-1)


def relative_entropy(model, U, V, alpha) -> np.ndarray:
    """eta(u, alpha) - eta(v, alpha) - d_u eta(v, alpha) . (u - v), >= 0.

    Vanishes exactly when u equals v.  Models may provide an algebraically
    equivalent cancellation-free form (shallow water does).
    """
    return model.relative_entropy(U, V, alpha)


def hessian_bounds(
    model,
    box: StateBox,
    points_per_axis: int = 10,
    safety: tuple[float, float] = (0.9, 1.1),
) -> tuple[float, float]:
    """Certified spectral bounds of the entropy Hessian over a state box.

    Samples exact Hessian eigenvalues on a dense grid (``points_per_axis``
    per state component and per alpha) and applies the declared safety
    factors below/above.  The box must lie strictly inside the admissible
    set; a box touching its boundary raises.
    """
    if points_per_axis < 2:
        raise ValueError("points_per_axis must be at least 2")
    if box.n_comp != model.n_comp:
        raise ValueError(
            f"box has {box.n_comp} components, model {model.name} expects {model.n_comp}"
        )
    states, alphas = box.grid(points_per_axis)
    try:
        model.check_admissible(states, alphas)
    except AdmissibilityError as exc:
        raise ValueError(f"state box leaves the admissible set: {exc}") from exc
    eigs = np.linalg.eigvalsh(model.entropy_hessian(states, alphas))
    lo = float(eigs.min())
    hi = float(eigs.max())
    if lo <= 0.0:
        raise ValueError(f"entropy Hessian not positive definite on box (min eig {lo})")
    return safety[0] * lo, safety[1] * hi


# ---------------------------------------------------------------------------
# Stationary families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StationaryFamily:
    """A per-cell stationary field sharing the run's alpha, with constant
    entropy variable H0 vanishing on the source-carrying components."""

    kind: str
    H0: np.ndarray  # (N,)
    states: np.ndarray  # (M, N)
    params: dict = field(default_factory=dict)


def _verify_family(model, family: StationaryFamily, alpha, tol: float = 1e-12) -> None:
    grad = model.entropy_gradient(family.states, alpha)
    resid = float(np.max(np.abs(grad - family.H0)))
    if resid > tol:
        raise ValueError(
            f"stationary family '{family.kind}' violates entropy-variable constancy: "
            f"max residual {resid:.3e} > {tol:.1e}"
        )
    if np.any(family.H0[model.source_components] != 0.0):
        raise ValueError(
            f"stationary family '{family.kind}' has nonzero H0 on a source-carrying component"
        )


def lake_at_rest_family(model: ShallowWater, z0: float, alpha) -> StationaryFamily:
    """Lake at rest: h + alpha = z0 and U = 0, with H0 = (g z0, 0, ...)."""
    if not isinstance(model, ShallowWater):
        raise TypeError("lake_at_rest_family requires a shallow water model")
    alpha = np.asarray(alpha, dtype=float)
    h = z0 - alpha
    dry = h < model.h_min
    if np.any(dry):
        raise ValueError(
            f"surface level z0 = {z0} does not keep every cell wet: "
            f"dry cells {np.flatnonzero(dry)[:10].tolist()} "
            f"(max alpha = {alpha.max():.6g}); the total water volume is insufficient"
        )
    states = np.zeros(alpha.shape + (model.n_comp,))
    states[..., 0] = h
    H0 = np.zeros(model.n_comp)
    H0[0] = model.g * z0
    fam = StationaryFamily("lake_at_rest", H0, states, {"z0": float(z0)})
    _verify_family(model, fam, alpha)
    return fam


def constant_Tp_family(model: PorousEuler, T0: float, p0: float, alpha) -> StationaryFamily:
    """Porous Euler equilibrium: constant temperature and pressure, U = 0."""
    if not isinstance(model, PorousEuler):
        raise TypeError("constant_Tp_family requires a porous Euler model")
    if T0 <= 0 or p0 <= 0:
        raise ValueError("T0 and p0 must be positive")
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0):
        raise ValueError("porosity must be positive everywhere")
    e = model.c_v * T0
    rho = p0 / ((model.gamma - 1.0) * e)
    states = np.zeros(alpha.shape + (3,))
    states[..., 0] = alpha * rho
    states[..., 2] = alpha * rho * e
    s = model.entropy_specific(1.0 / rho, e)
    H0 = np.array([model.gamma * model.c_v - s, 0.0, -model.c_v / e])
    fam = StationaryFamily("constant_Tp", H0, states, {"T0": float(T0), "p0": float(p0)})
    _verify_family(model, fam, alpha)
    return fam


def hydrostatic_column_family(
    model: LagrangianGas, U0: float, P0: float, T0: float, alpha
) -> StationaryFamily:
    """Lagrangian hydrostatic equilibrium: U, p - alpha and T constant.

    Per cell: p = P0 + alpha, tau = (gamma-1) c_v T0 / p, e = c_v T0 and
    W = e + U0^2/2 + tau*alpha.
    """
    if not isinstance(model, LagrangianGas):
        raise TypeError("hydrostatic_column_family requires a Lagrangian gas model")
    if T0 <= 0:
        raise ValueError("T0 must be positive")
    alpha = np.asarray(alpha, dtype=float)
    p = P0 + alpha
    if np.any(p <= 0):
        raise ValueError("P0 + alpha must stay positive for a hydrostatic column")
    e = model.c_v * T0
    tau = (model.gamma - 1.0) * e / p
    states = np.stack([tau, np.full_like(tau, U0), e + 0.5 * U0**2 + tau * alpha], axis=-1)
    H0 = np.array([-P0 / T0, U0 / T0, -1.0 / T0])
    fam = StationaryFamily(
        "hydrostatic_column", H0, states, {"U0": float(U0), "P0": float(P0), "T0": float(T0)}
    )
    _verify_family(model, fam, alpha)
    return fam


def lake_level_from_volume(alpha, areas, volume: float, h_min: float = DEFAULT_H_MIN) -> float:
    """Surface level of the lake at rest holding the given total water volume.

    z0 = (V + sum |K| alpha_K) / sum |K|.  Raises when the volume is too
    small to keep every cell wet, listing the offending cells.
    """
    alpha = np.asarray(alpha, dtype=float)
    areas = np.asarray(areas, dtype=float)
    z0 = (volume + float(np.sum(areas * alpha))) / float(np.sum(areas))
    dry = z0 - alpha < h_min
    if np.any(dry):
        cells = np.flatnonzero(dry)
        raise ValueError(
            f"total water volume {volume:.6g} is insufficient: surface level {z0:.6g} "
            f"does not cover the bottom on cells {cells[:10].tolist()}"
            + ("" if cells.size <= 10 else f" (+{cells.size - 10} more)")
        )
    return float(z0)
