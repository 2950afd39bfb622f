"""Nonlinear terms of the rescaled system and an exponential integrator.

Products are formed on a 3/2-padded grid and truncated back, which removes
aliasing from quadratic terms exactly.  Compositions such as K1(a) are
evaluated pointwise on the padded grid and are only approximately dealiased.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .linear import LinearSymbol, ModePropagator
from .model import CoefficientFunctions, DerivedConstants, PhysicalModel, derive_constants
from .spectral import Grid, SpectralField, VectorField, grad, inverse_neg_laplacian, div as div_op
from .state import DensityFloorError, State

DENSITY_FLOOR = 0.1


class Padder:
    """Zero-padding transforms between an n-grid and its 3/2 extension."""

    def __init__(self, grid: Grid, factor: float = 1.5):
        self.grid = grid
        m = int(math.ceil(grid.n * factor / 2)) * 2
        self.m = m
        h = grid.n // 2
        # frequency -n/2 (the Nyquist slot) is dropped by the solver, so it maps anywhere harmlessly
        self._idx = np.concatenate([np.arange(h), np.arange(m - h, m)])
        self._ix = np.ix_(*([self._idx] * grid.d))
        self._keep = ~grid.nyquist_mask

    def values(self, coeffs: np.ndarray) -> np.ndarray:
        """Physical values on the padded grid; leading axes are batch axes."""
        d, m = self.grid.d, self.m
        lead = coeffs.shape[: coeffs.ndim - d]
        big = np.zeros(lead + (m,) * d, dtype=complex)
        big[(Ellipsis,) + self._ix] = coeffs * self._keep
        axes = tuple(range(len(lead), len(lead) + d))
        return np.fft.ifftn(big, axes=axes).real * m**d

    def coeffs(self, values: np.ndarray) -> np.ndarray:
        d, m = self.grid.d, self.m
        axes = tuple(range(values.ndim - d, values.ndim))
        big = np.fft.fftn(values, axes=axes) / m**d
        return big[(Ellipsis,) + self._ix] * self._keep


def _spectral_deriv(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    """Gradient of coefficient arrays: new axis of length d inserted before the grid axes."""
    xi = grid.xi
    lead = coeffs.ndim - grid.d
    c = np.expand_dims(coeffs, lead)
    x = xi.reshape((1,) * lead + xi.shape)
    return 1j * x * c


@dataclass
class _Fields:
    """Padded physical values of every derivative the nonlinear terms need."""

    a: np.ndarray
    grad_a: np.ndarray
    v: np.ndarray
    grad_v: np.ndarray  # [k, l] = d_l v_k
    hess_v: np.ndarray  # [k, l, m] = d_l d_m v_k
    lap_v: np.ndarray
    grad_div_v: np.ndarray
    div_v: np.ndarray
    theta: np.ndarray
    grad_theta: np.ndarray
    lap_theta: np.ndarray


class NonlinearTerms:
    """Evaluates f, g, k for one model and grid."""

    def __init__(self, grid: Grid, model: PhysicalModel, consts: DerivedConstants | None = None,
                 floor: float = DENSITY_FLOOR):
        self.grid = grid
        self.model = model
        self.consts = consts or derive_constants(model)
        self.cf = CoefficientFunctions(model, self.consts)
        self.pad = Padder(grid)
        self.floor = floor

    def _fields(self, state: State) -> _Fields:
        g, P = self.grid, self.pad
        ac, vc, tc = state.a.coeffs, state.v.coeffs, state.theta.coeffs
        dac = _spectral_deriv(g, ac)
        dvc = _spectral_deriv(g, vc)
        hvc = _spectral_deriv(g, dvc)
        dtc = _spectral_deriv(g, tc)
        k2 = g.kmag**2
        divc = np.einsum("kk...->...", dvc)
        a = P.values(ac)
        if 1.0 + a.min() < self.floor:
            raise DensityFloorError(f"density floor violated: min(1 + a) = {1.0 + a.min():.4g} < {self.floor}")
        return _Fields(
            a=a,
            grad_a=P.values(dac),
            v=P.values(vc),
            grad_v=P.values(dvc),
            hess_v=P.values(hvc),
            lap_v=P.values(-k2 * vc),
            grad_div_v=P.values(_spectral_deriv(g, divc)),
            div_v=P.values(divc),
            theta=P.values(tc),
            grad_theta=P.values(dtc),
            lap_theta=P.values(-k2 * tc),
        )

    # -- f ------------------------------------------------------------------

    def f(self, state: State) -> SpectralField:
        """-div(a v) with the product dealiased."""
        P = self.pad
        a = P.values(state.a.coeffs)
        v = P.values(state.v.coeffs)
        av = VectorField(self.grid, P.coeffs(a[None] * v))
        return -div_op(av)

    # -- g ------------------------------------------------------------------

    def _A_tilde(self, F: _Fields) -> np.ndarray:
        c = self.consts
        return c.mu_tilde * F.lap_v + c.lam_mu_tilde * F.grad_div_v

    def g_values(self, state: State, F: _Fields | None = None) -> np.ndarray:
        """g in padded physical space, product-rule expansion of the viscous divergence."""
        F = F or self._fields(state)
        cf, nu = self.cf, self.consts.nu
        a = F.a
        inv = 1.0 / (1.0 + a)
        adv = np.einsum("l...,kl...->k...", F.v, F.grad_v)
        out = -adv - cf.I(a) * self._A_tilde(F)
        out -= cf.K1(a) * F.grad_a + cf.K2(a) * F.grad_theta
        out -= F.theta * cf.dK3(a) * F.grad_a
        # div(2 mu~ D(v) + lam~ div v Id), D_kl = (d_l v_k + d_k v_l)/2
        D = 0.5 * (F.grad_v + np.swapaxes(F.grad_v, 0, 1))
        div_D = 0.5 * (np.einsum("kll...->k...", F.hess_v) + np.einsum("llk...->k...", F.hess_v))
        visc = 2 * cf.mu_tilde(a) * div_D
        visc += 2 * cf.dmu_tilde(a) * np.einsum("kl...,l...->k...", D, F.grad_a)
        visc += cf.lam_tilde(a) * F.grad_div_v + cf.dlam_tilde(a) * F.div_v * F.grad_a
        out += inv / nu * visc
        return out

    def g(self, state: State) -> VectorField:
        return VectorField(self.grid, self.pad.coeffs(self.g_values(state)))

    def g_parts(self, state: State) -> list[VectorField]:
        """The six groups: transport, pressure, viscous defect, viscous gradient, K2, K3."""
        F = self._fields(state)
        cf, nu = self.cf, self.consts.nu
        a = F.a
        inv = 1.0 / (1.0 + a)
        D = 0.5 * (F.grad_v + np.swapaxes(F.grad_v, 0, 1))
        parts = [
            -np.einsum("l...,kl...->k...", F.v, F.grad_v),
            -cf.K1(a) * F.grad_a,
            inv / nu * (cf.mu_tilde(a) * (F.lap_v + F.grad_div_v) + cf.lam_tilde(a) * F.grad_div_v)
            - cf.I(a) * self._A_tilde(F),
            inv / nu * (2 * cf.dmu_tilde(a) * np.einsum("kl...,l...->k...", D, F.grad_a)
                        + cf.dlam_tilde(a) * F.div_v * F.grad_a),
            -cf.K2(a) * F.grad_theta,
            -F.theta * cf.dK3(a) * F.grad_a,
        ]
        return [VectorField(self.grid, self.pad.coeffs(p)) for p in parts]

    # -- k ------------------------------------------------------------------

    def k_values(self, state: State, F: _Fields | None = None) -> np.ndarray:
        F = F or self._fields(state)
        cf, c = self.cf, self.consts
        a = F.a
        inv = 1.0 / (1.0 + a)
        out = -np.einsum("l...,l...->...", F.v, F.grad_theta)
        out -= c.beta * cf.I(a) * F.lap_theta
        out -= (cf.Ktilde1(a) + cf.Ktilde2(a) * F.theta) * F.div_v
        # div(kappa~ grad theta) by the product rule
        cond = cf.kappa_tilde(a) * F.lap_theta + cf.dkappa_tilde(a) * np.einsum("l...,l...->...", F.grad_a, F.grad_theta)
        out += inv / (c.nu * c.C_v) * cond
        D = 0.5 * (F.grad_v + np.swapaxes(F.grad_v, 0, 1))
        DD = np.einsum("kl...,kl...->...", D, D)
        out += c.dissipation_factor * (2 * cf.mu_over(a) * DD + cf.lam_over(a) * F.div_v**2)
        return out

    def k(self, state: State) -> SpectralField:
        return SpectralField(self.grid, self.pad.coeffs(self.k_values(state)))

    def k_terms(self, state: State) -> list[SpectralField]:
        """Term list: transport, coupling, conductivity gradient, k1, k2."""
        F = self._fields(state)
        cf, c = self.cf, self.consts
        a = F.a
        inv = 1.0 / (1.0 + a)
        V = F.grad_v
        contr = np.einsum("kl...,kl...->...", V, V) + np.einsum("kl...,lk...->...", V, V)
        tr = np.einsum("kk...->...", V)
        terms = [
            -np.einsum("l...,l...->...", F.v, F.grad_theta),
            -(cf.Ktilde1(a) + cf.Ktilde2(a) * F.theta) * F.div_v,
            cf.dkappa_tilde(a) * inv / (c.nu * c.C_v) * np.einsum("l...,l...->...", F.grad_a, F.grad_theta),
            cf.kappa_tilde(a) * inv / (c.nu * c.C_v) * F.lap_theta - c.beta * cf.I(a) * F.lap_theta,
            c.dissipation_factor * (cf.mu_over(a) * contr + cf.lam_over(a) * tr * tr),
        ]
        return [SpectralField(self.grid, self.pad.coeffs(t)) for t in terms]

    # -- combined -----------------------------------------------------------

    def rhs(self, state: State) -> np.ndarray:
        """Stacked (f, g, k) coefficients."""
        F = self._fields(state)
        P = self.pad
        fa = -div_op(VectorField(self.grid, P.coeffs(F.a[None] * F.v))).coeffs
        g = P.coeffs(self.g_values(state, F))
        k = P.coeffs(self.k_values(state, F))
        return np.concatenate([fa[None], g, k[None]])

    def max_speed(self, state: State) -> float:
        return float(np.abs(self.pad.values(state.v.coeffs)).max(initial=0.0))


def compute_f(state: State) -> SpectralField:
    P = Padder(state.grid)
    a = P.values(state.a.coeffs)
    v = P.values(state.v.coeffs)
    return -div_op(VectorField(state.grid, P.coeffs(a[None] * v)))


def compute_g(state: State, model: PhysicalModel) -> VectorField:
    return NonlinearTerms(state.grid, model).g(state)


def compute_k(state: State, model: PhysicalModel) -> SpectralField:
    return NonlinearTerms(state.grid, model).k(state)


def g_decomposition(state: State, model: PhysicalModel) -> list[VectorField]:
    return NonlinearTerms(state.grid, model).g_parts(state)


def k_term_list(state: State, model: PhysicalModel) -> list[SpectralField]:
    return NonlinearTerms(state.grid, model).k_terms(state)


def effective_velocity(state: State, tol: float = 1e-12) -> VectorField:
    """w = grad (-Delta)^{-1} (a - div v)."""
    a = state.a
    scale = max(float(np.abs(a.coeffs).max(initial=0.0)), 1e-300)
    if abs(a.coeffs[(0,) * state.grid.d]) > tol * scale:
        raise ValueError("effective velocity needs a mean-zero density perturbation")
    src = a - div_op(state.v)
    return grad(inverse_neg_laplacian(src))


# ---------------------------------------------------------------------------
# time stepping


class StepRejected(RuntimeError):
    pass


class Integrator:
    """Exponential second-order Runge-Kutta (ETD2RK) for the full system.

    The linear part is propagated exactly; N denotes (f, g, k)::

        A  = e^{hL} U + h phi1(hL) N(U)
        U+ = A + h phi2(hL) (N(A) - N(U))

    States that violate the density floor are retried with halved steps.
    """

    def __init__(self, grid: Grid, model: PhysicalModel, linear_only: bool = False,
                 floor: float = DENSITY_FLOOR, max_halvings: int = 6):
        self.grid = grid
        self.model = model
        self.consts = derive_constants(model)
        self.symbol = LinearSymbol.from_constants(self.consts, grid.d)
        self.terms = NonlinearTerms(grid, model, self.consts, floor)
        self.linear_only = linear_only
        self.max_halvings = max_halvings
        self.floor = floor
        self._props: dict[float, ModePropagator] = {}
        self.rejections = 0

    def propagator(self, h: float) -> ModePropagator:
        prop = self._props.get(h)
        if prop is None:
            if len(self._props) > 8:
                self._props.clear()
            prop = self._props[h] = ModePropagator(self.grid, self.symbol, h, with_phi=True)
        return prop

    def _N(self, U: np.ndarray) -> np.ndarray:
        if self.linear_only:
            return np.zeros_like(U)
        return self.terms.rhs(State.from_stacked(self.grid, U))

    def _raw_step(self, U: np.ndarray, h: float) -> np.ndarray:
        prop = self.propagator(h)
        EU = prop.apply(U, "E")
        if self.linear_only:
            return EU
        N0 = self._N(U)
        A = EU + h * prop.apply(N0, "phi1")
        NA = self._N(A)
        return A + h * prop.apply(NA - N0, "phi2")

    def _admissible(self, U: np.ndarray) -> bool:
        a = self.terms.pad.values(U[0])
        return bool(1.0 + a.min() >= self.floor)

    def step(self, state: State, dt: float) -> State:
        if dt <= 0:
            raise ValueError(f"time step must be positive, got {dt}")
        U = self._advance(state.stacked(), dt, 0)
        return State.from_stacked(self.grid, U, state.time + dt)

    def _advance(self, U: np.ndarray, h: float, depth: int) -> np.ndarray:
        try:
            out = self._raw_step(U, h)
            ok = self._admissible(out)
        except DensityFloorError:
            ok = False
        if ok:
            return out
        self.rejections += 1
        if depth >= self.max_halvings:
            raise DensityFloorError(f"density floor still violated after {depth} step halvings")
        half = self._advance(U, h / 2, depth + 1)
        return self._advance(half, h / 2, depth + 1)

    def stable_dt(self, state: State, cfl: float = 0.5, dt_max: float = 1.0) -> float:
        """Explicit bound from the nonlinear terms only; the linear part is exact."""
        dx = self.grid.dx
        vmax = self.terms.max_speed(state)
        dt = dt_max
        if vmax > 0:
            dt = min(dt, cfl * dx / vmax)
        a = self.terms.pad.values(state.a.coeffs)
        cf = self.terms.cf
        visc = float(np.max(np.abs(cf.mu_tilde(a)) + np.abs(cf.lam_tilde(a)) + np.abs(cf.kappa_tilde(a)))) / self.consts.nu
        visc += float(np.max(np.abs(cf.I(a)))) * max(1.0, self.consts.beta)
        if visc > 0:
            dt = min(dt, 0.25 * dx**2 / visc)
        return dt

    def run(self, state: State, t_end: float, dt: float, callback=None) -> State:
        """Fixed steps of size dt (last one shortened) until t_end."""
        n = max(1, int(math.ceil((t_end - state.time) / dt - 1e-9)))
        h = (t_end - state.time) / n
        for _ in range(n):
            state = self.step(state, h)
            if callback is not None:
                callback(state)
        return state


def step(state: State, dt: float, model: PhysicalModel, integrator: Integrator | None = None) -> State:
    integ = integrator or Integrator(state.grid, model)
    return integ.step(state, dt)
