"""Equation of state, transport coefficients and the rescaling constants.

Pressure is P(rho, T) = pi0(rho) + T * pi1(rho).  Viscosities and conductivity
may depend on density.  Everything downstream only needs the callables and
their first derivatives, which presets supply in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial

Fn = Callable[[np.ndarray], np.ndarray]


class ModelError(ValueError):
    """A physical model violating the viscosity or stability constraints."""


def _const(c: float) -> Fn:
    return lambda r: np.full_like(np.asarray(r, dtype=float), c)


@dataclass(frozen=True, eq=False)
class PhysicalModel:
    pi0: Fn
    pi1: Fn
    dpi0: Fn
    dpi1: Fn
    mu: Fn
    lam: Fn
    kappa: Fn
    dmu: Fn
    dlam: Fn
    dkappa: Fn
    C_v: float = 1.0
    rho_inf: float = 1.0
    T_inf: float = 1.0
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def pressure(self, rho, T):
        return self.pi0(rho) + T * self.pi1(rho)

    def dP_drho(self, rho, T):
        return self.dpi0(rho) + T * self.dpi1(rho)

    def dP_dT(self, rho):
        return self.pi1(rho)

    def describe(self) -> dict:
        return {"preset": self.name, **self.params}


@dataclass(frozen=True)
class DerivedConstants:
    nu: float
    nu_inf: float
    chi0: float
    beta: float
    gamma: float
    mu_tilde: float
    lam_mu_tilde: float
    mu_inf: float
    lam_inf: float
    kappa_inf: float
    C_v: float
    T_inf: float
    rho_inf: float

    @property
    def dissipation_factor(self) -> float:
        """Prefactor of the viscous heating terms in the temperature equation."""
        return 1.0 / (self.nu * self.chi0) * math.sqrt(1.0 / (self.T_inf * self.C_v))


def _f(fn: Fn, x: float) -> float:
    return float(np.asarray(fn(np.asarray(x, dtype=float))))


def derive_constants(model: PhysicalModel) -> DerivedConstants:
    """Evaluate the rescaling constants, rejecting models outside the admissible class."""
    r, T = model.rho_inf, model.T_inf
    if not (r > 0 and T > 0 and model.C_v > 0):
        raise ModelError("equilibrium density, temperature and C_v must be positive")
    mu_inf = _f(model.mu, r)
    lam_inf = _f(model.lam, r)
    kappa_inf = _f(model.kappa, r)
    nu = lam_inf + 2 * mu_inf
    if not mu_inf > 0:
        raise ModelError(f"require mu > 0 at equilibrium, got {mu_inf}")
    if not nu > 0:
        raise ModelError(f"require lambda + 2 mu > 0 at equilibrium, got {nu}")
    if not kappa_inf > 0:
        raise ModelError(f"require kappa > 0 at equilibrium, got {kappa_inf}")
    dPr = _f(lambda x: model.dP_drho(x, T), r)
    dPT = _f(model.pi1, r)
    if not dPr > 0:
        raise ModelError(f"linear stability: require dP/drho > 0 at equilibrium, got {dPr}")
    if not dPT > 0:
        raise ModelError(f"linear stability: require dP/dT = pi1 > 0 at equilibrium, got {dPT}")
    chi0 = dPr**-0.5
    return DerivedConstants(
        nu=nu,
        nu_inf=nu / r,
        chi0=chi0,
        beta=kappa_inf / (nu * model.C_v),
        gamma=chi0 / r * math.sqrt(T / model.C_v) * dPT,
        mu_tilde=mu_inf / nu,
        lam_mu_tilde=(lam_inf + mu_inf) / nu,
        mu_inf=mu_inf,
        lam_inf=lam_inf,
        kappa_inf=kappa_inf,
        C_v=model.C_v,
        T_inf=T,
        rho_inf=r,
    )


# Gauss-Legendre rule for the K3 primitive; the integrand is smooth for a > -1.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)


class CoefficientFunctions:
    """Composition coefficients of the rescaled system, as functions of a > -1."""

    def __init__(self, model: PhysicalModel, consts: DerivedConstants | None = None):
        self.model = model
        self.c = consts or derive_constants(model)
        c = self.c
        self._temp = c.chi0 * math.sqrt(c.T_inf / c.C_v)
        self._dPr_inf = _f(lambda x: model.dP_drho(x, c.T_inf), c.rho_inf)
        self._pi1_inf = _f(model.pi1, c.rho_inf)

    def _rho(self, a):
        return self.c.rho_inf * (1.0 + np.asarray(a, dtype=float))

    def I(self, a):
        a = np.asarray(a, dtype=float)
        return a / (1.0 + a)

    def K1(self, a):
        a = np.asarray(a, dtype=float)
        dPr = self.model.dP_drho(self._rho(a), self.c.T_inf)
        return dPr / ((1.0 + a) * self._dPr_inf) - 1.0

    def K2(self, a):
        a = np.asarray(a, dtype=float)
        return self._temp / self.c.rho_inf * (self.model.pi1(self._rho(a)) / (1.0 + a) - self._pi1_inf)

    # textually the same formula as K2
    Ktilde1 = K2

    def Ktilde2(self, a):
        a = np.asarray(a, dtype=float)
        return self.model.pi1(self._rho(a)) / (self.c.C_v * self.c.rho_inf * (1.0 + a))

    def dK3(self, a):
        a = np.asarray(a, dtype=float)
        return self._temp * self.model.dpi1(self._rho(a)) / (1.0 + a)

    def K3(self, a):
        a = np.asarray(a, dtype=float)
        z = 0.5 * a[..., None] * (1.0 + _GL_X)
        return 0.5 * a * np.sum(_GL_W * self.dK3(z), axis=-1)

    def mu_tilde(self, a):
        return self.model.mu(self._rho(a)) - self.c.mu_inf

    def lam_tilde(self, a):
        return self.model.lam(self._rho(a)) - self.c.lam_inf

    def kappa_tilde(self, a):
        return self.model.kappa(self._rho(a)) - self.c.kappa_inf

    def dmu_tilde(self, a):
        return self.c.rho_inf * self.model.dmu(self._rho(a))

    def dlam_tilde(self, a):
        return self.c.rho_inf * self.model.dlam(self._rho(a))

    def dkappa_tilde(self, a):
        return self.c.rho_inf * self.model.dkappa(self._rho(a))

    def mu_over(self, a):
        """mu(rho_inf (1 + a)) / (1 + a)."""
        return self.model.mu(self._rho(a)) / (1.0 + np.asarray(a, dtype=float))

    def lam_over(self, a):
        return self.model.lam(self._rho(a)) / (1.0 + np.asarray(a, dtype=float))

    def vanishing_at_zero(self) -> dict[str, float]:
        z = np.zeros(1)
        names = ["I", "K1", "K2", "K3", "Ktilde1", "mu_tilde", "lam_tilde", "kappa_tilde"]
        return {n: float(getattr(self, n)(z)[0]) for n in names}


# ---------------------------------------------------------------------------
# presets


def ideal_gas(R=1.0, C_v=1.0, rho_inf=1.0, T_inf=1.0, mu=1.0, lam=0.0, kappa=1.0) -> PhysicalModel:
    return PhysicalModel(
        pi0=_const(0.0),
        pi1=lambda r: R * np.asarray(r, dtype=float),
        dpi0=_const(0.0),
        dpi1=_const(R),
        mu=_const(mu),
        lam=_const(lam),
        kappa=_const(kappa),
        dmu=_const(0.0),
        dlam=_const(0.0),
        dkappa=_const(0.0),
        C_v=C_v,
        rho_inf=rho_inf,
        T_inf=T_inf,
        name="ideal",
        params=dict(R=R, C_v=C_v, rho_inf=rho_inf, T_inf=T_inf, mu=mu, lam=lam, kappa=kappa),
    )


def van_der_waals(
    alpha=0.1, b=1.0, delta=3.0, C_v=1.0, rho_inf=1.0, T_inf=1.0, mu=1.0, lam=0.0, kappa=1.0
) -> PhysicalModel:
    """pi0 = -alpha rho^2, pi1 = b rho / (delta - rho)."""
    return PhysicalModel(
        pi0=lambda r: -alpha * np.asarray(r, dtype=float) ** 2,
        pi1=lambda r: b * np.asarray(r, dtype=float) / (delta - np.asarray(r, dtype=float)),
        dpi0=lambda r: -2 * alpha * np.asarray(r, dtype=float),
        dpi1=lambda r: b * delta / (delta - np.asarray(r, dtype=float)) ** 2,
        mu=_const(mu),
        lam=_const(lam),
        kappa=_const(kappa),
        dmu=_const(0.0),
        dlam=_const(0.0),
        dkappa=_const(0.0),
        C_v=C_v,
        rho_inf=rho_inf,
        T_inf=T_inf,
        name="vdw",
        params=dict(alpha=alpha, b=b, delta=delta, C_v=C_v, rho_inf=rho_inf, T_inf=T_inf, mu=mu, lam=lam, kappa=kappa),
    )


def _poly(coefs) -> tuple[Fn, Fn]:
    p = Polynomial(np.asarray(coefs, dtype=float))
    dp = p.deriv()
    return (lambda r: p(np.asarray(r, dtype=float))), (lambda r: dp(np.asarray(r, dtype=float)))


def custom_poly(pi0=(0.0,), pi1=(0.0, 1.0), mu=(1.0,), lam=(0.0,), kappa=(1.0,), C_v=1.0, rho_inf=1.0, T_inf=1.0) -> PhysicalModel:
    """Polynomial coefficient lists, lowest degree first."""
    p0, dp0 = _poly(pi0)
    p1, dp1 = _poly(pi1)
    m, dm = _poly(mu)
    l, dl = _poly(lam)
    k, dk = _poly(kappa)
    return PhysicalModel(
        pi0=p0, pi1=p1, dpi0=dp0, dpi1=dp1, mu=m, lam=l, kappa=k, dmu=dm, dlam=dl, dkappa=dk,
        C_v=C_v, rho_inf=rho_inf, T_inf=T_inf, name="custom-poly",
        params=dict(pi0=list(pi0), pi1=list(pi1), mu=list(mu), lam=list(lam), kappa=list(kappa),
                    C_v=C_v, rho_inf=rho_inf, T_inf=T_inf),
    )


PRESETS = {"ideal": ideal_gas, "vdw": van_der_waals, "custom-poly": custom_poly}


def make_model(name: str, **params) -> PhysicalModel:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ModelError(f"unknown model preset {name!r}; choose from {sorted(PRESETS)}") from None
    try:
        model = factory(**params)
    except TypeError as exc:
        raise ModelError(f"invalid parameters for preset {name!r}: {exc}") from None
    derive_constants(model)
    return model
