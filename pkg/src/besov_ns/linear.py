"""Linearized system: symbols, exact per-mode semigroup, radial decay quadrature.

Unknowns are ordered (a, v_1..v_d, theta).  The symbol is isotropic, so
every mode splits into d - 1 transverse heat modes with rate mu_tilde |xi|^2 and
a 3x3 compressible block acting on (a, xi_hat . v, theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg
from scipy.special import gamma as gamma_fn, jv

from .littlewood_paley import LPPartition, phi
from .model import DerivedConstants
from .spectral import Grid, SpectralField
from .state import State

COND_LIMIT = 1e4


@dataclass(frozen=True)
class LinearSymbol:
    d: int
    mu_tilde: float
    lam_mu_tilde: float
    beta: float
    gamma: float

    @classmethod
    def from_constants(cls, consts: DerivedConstants, d: int = 3) -> "LinearSymbol":
        return cls(d, consts.mu_tilde, consts.lam_mu_tilde, consts.beta, consts.gamma)

    @property
    def longitudinal_viscosity(self) -> float:
        return self.mu_tilde + self.lam_mu_tilde

    def matrix(self, xi) -> np.ndarray:
        """Full (d+2)x(d+2) symbol at wavenumbers ``xi`` of shape (..., d)."""
        xi = np.asarray(xi, dtype=float)
        d = self.d
        if xi.shape[-1] != d:
            raise ValueError(f"wavenumber needs {d} components")
        k2 = np.sum(xi**2, axis=-1)
        M = np.zeros(xi.shape[:-1] + (d + 2, d + 2), dtype=complex)
        v = slice(1, d + 1)
        M[..., 0, v] = -1j * xi
        M[..., v, 0] = -1j * xi
        M[..., v, d + 1] = -1j * self.gamma * xi
        M[..., d + 1, v] = -1j * self.gamma * xi
        M[..., v, v] = -(
            self.mu_tilde * k2[..., None, None] * np.eye(d)
            + self.lam_mu_tilde * xi[..., :, None] * xi[..., None, :]
        )
        M[..., d + 1, d + 1] = -self.beta * k2
        return M

    def radial(self, rho) -> np.ndarray:
        """Compressible 3x3 block in (a, xi_hat . v, theta) at |xi| = rho."""
        rho = np.asarray(rho, dtype=float)
        M = np.zeros(rho.shape + (3, 3), dtype=complex)
        M[..., 0, 1] = M[..., 1, 0] = -1j * rho
        M[..., 1, 2] = M[..., 2, 1] = -1j * self.gamma * rho
        M[..., 1, 1] = -self.longitudinal_viscosity * rho**2
        M[..., 2, 2] = -self.beta * rho**2
        return M

    def transverse_rate(self, rho) -> np.ndarray:
        return self.mu_tilde * np.asarray(rho, dtype=float) ** 2

    def eigenvalues(self, xi) -> np.ndarray:
        return np.linalg.eigvals(self.matrix(xi))

    def radial_eigenvalues(self, rho) -> np.ndarray:
        return np.linalg.eigvals(self.radial(rho))


def assemble_symbol(xi, consts: DerivedConstants) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return LinearSymbol.from_constants(consts, xi.shape[-1]).matrix(xi)


# ---------------------------------------------------------------------------
# matrix exponentials


def expm_batch(M: np.ndarray, t: np.ndarray | float = 1.0) -> np.ndarray:
    """exp(t M) for a stack of matrices ``M`` (k, m, m) and times ``t`` (nt,).

    Returns shape (k, nt, m, m).  Diagonalization is used where the eigenvector
    basis is well conditioned, scaling-and-squaring elsewhere.
    """
    M = np.asarray(M, dtype=complex)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    k, m, _ = M.shape
    out = np.empty((k, t.size, m, m), dtype=complex)
    w, V = np.linalg.eig(M)
    cond = np.linalg.cond(V)
    good = np.isfinite(cond) & (cond < COND_LIMIT)
    if good.any():
        Vg, wg = V[good], w[good]
        Vinv = np.linalg.inv(Vg)
        ew = np.exp(wg[:, None, :] * t[None, :, None])
        out[good] = np.einsum("kij,ktj,kjl->ktil", Vg, ew, Vinv)
    for idx in np.flatnonzero(~good):
        out[idx] = scipy.linalg.expm(t[:, None, None] * M[idx][None])
    return out


def phi_functions(M: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """exp(hM), phi1(hM), phi2(hM) for a stack of small matrices via one augmented exponential."""
    k, m, _ = M.shape
    aug = np.zeros((k, 3 * m, 3 * m), dtype=complex)
    eye = np.eye(m)
    aug[:, :m, :m] = h * M
    aug[:, :m, m : 2 * m] = eye
    aug[:, m : 2 * m, 2 * m :] = eye
    big = scipy.linalg.expm(aug)
    return big[:, :m, :m], big[:, :m, m : 2 * m], big[:, :m, 2 * m :]


def scalar_phi_functions(z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """exp(z), phi1(z), phi2(z) for real z, with series near zero."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    e = np.exp(z)
    em1 = np.expm1(zs)
    p1 = np.where(small, 1 + z / 2 + z**2 / 6 + z**3 / 24 + z**4 / 120, em1 / zs)
    p2 = np.where(small, 0.5 + z / 6 + z**2 / 24 + z**3 / 120 + z**4 / 720, (em1 - zs) / zs**2)
    return e, p1, p2


# ---------------------------------------------------------------------------
# grid propagator


class ModePropagator:
    """Per-mode linear operators on a grid for a fixed step ``h``.

    Holds exp(hM) and, optionally, phi1(hM), phi2(hM) for every wavenumber.
    Matrices are computed once per distinct |xi| and gathered.  Nyquist planes
    are dropped.
    """

    def __init__(self, grid: Grid, symbol: LinearSymbol, h: float, with_phi: bool = False):
        if h < 0:
            raise ValueError(f"propagation time must be nonnegative, got {h}")
        if symbol.d != grid.d:
            raise ValueError("symbol and grid dimensions differ")
        self.grid, self.symbol, self.h = grid, symbol, h
        m = np.meshgrid(*([np.fft.fftfreq(grid.n, 1.0 / grid.n)] * grid.d), indexing="ij")
        key = sum(mi.astype(np.int64) ** 2 for mi in m).ravel()
        uniq, inv = np.unique(key, return_inverse=True)
        rho = np.sqrt(uniq) * grid.k_min
        self._inv = inv
        self._rho = rho
        M = symbol.radial(rho)
        kmag = grid.kmag.ravel()
        safe = np.where(kmag > 0, kmag, 1.0)
        self._xhat = np.where(kmag > 0, grid.xi.reshape(grid.d, -1) / safe, 0.0)
        self._keep = ~grid.nyquist_mask.ravel()
        zt = -symbol.transverse_rate(rho) * h
        if with_phi:
            E, P1, P2 = phi_functions(M, h)
            eT, p1T, p2T = scalar_phi_functions(zt)
            self.ops = {"E": (E, eT), "phi1": (P1, p1T), "phi2": (P2, p2T)}
        else:
            E = expm_batch(M, h)[:, 0]
            self.ops = {"E": (E, np.exp(zt))}

    def apply(self, U: np.ndarray, which: str = "E") -> np.ndarray:
        """Apply one operator to stacked coefficients (d+2, n, ..., n)."""
        B, bT = self.ops[which]
        d = self.grid.d
        flat = U.reshape(d + 2, -1)
        v = flat[1 : d + 1]
        c = np.sum(self._xhat * v, axis=0)
        vT = v - self._xhat * c
        comp = np.stack([flat[0], c, flat[d + 1]])
        Bm = B[self._inv]
        new = np.einsum("nij,jn->in", Bm, comp)
        vnew = self._xhat * new[1] + bT[self._inv] * vT
        out = np.concatenate([new[0:1], vnew, new[2:3]]) * self._keep
        return out.reshape(U.shape)


def semigroup_apply(U0: State, t: float, consts: DerivedConstants) -> State:
    """Exact linear evolution E(t) U0, mode by mode."""
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    sym = LinearSymbol.from_constants(consts, U0.grid.d)
    prop = ModePropagator(U0.grid, sym, t)
    return State.from_stacked(U0.grid, prop.apply(U0.stacked()), U0.time + t)


# ---------------------------------------------------------------------------
# block decay of the semigroup


@dataclass(frozen=True)
class Lemma31Result:
    c0: float
    C: float
    ratios: dict[int, float]
    spectral_rates: dict[int, float]

    @property
    def asymptotic_rate(self) -> float:
        return min(self.spectral_rates.values())


def _operator_norms(symbol: LinearSymbol, rho: np.ndarray, t: np.ndarray, component: str) -> np.ndarray:
    E = expm_batch(symbol.radial(rho), t)
    if component == "theta":
        return np.abs(E[..., 2, 2])
    norms = np.linalg.norm(E, ord=2, axis=(-2, -1))
    transverse = np.exp(-symbol.transverse_rate(rho)[:, None] * t[None, :])
    if symbol.d > 1:
        norms = np.maximum(norms, transverse)
    return norms


def verify_lemma31(
    js: Iterable[int],
    consts: DerivedConstants | LinearSymbol,
    part: LPPartition,
    C: float = 10.0,
    annulus: tuple[float, float] = (0.75, 8.0 / 3.0),
    n_rho: int = 33,
    n_t: int = 80,
    horizon: float = 100.0,
    component: str = "all",
    d: int = 3,
) -> Lemma31Result:
    """Fit one rate c0 with ||E(t) Delta_j U0|| <= C exp(-c0 2^{2j} t) ||Delta_j U0|| for j <= j0.

    The block bound is the sup over |xi| in the annulus of the operator norm of
    exp(t M(xi)), so it holds for every datum.  Sample times run log-uniformly
    to ``horizon * 2^{-2j}``.  ``spectral_rates`` report min over the annulus
    of -max Re(eig) / 2^{2j}, the large-time limit of the fitted rate.
    """
    js = list(js)
    for j in js:
        if j > part.j0:
            raise ValueError(f"block {j} lies above the low-frequency cutoff j0={part.j0}")
    symbol = consts if isinstance(consts, LinearSymbol) else LinearSymbol.from_constants(consts, d)
    tau = np.concatenate([[0.0], np.geomspace(1e-3, horizon, n_t)])
    tables, rates = {}, {}
    for j in js:
        scale = 4.0**j
        rho = 2.0**j * np.linspace(annulus[0], annulus[1], n_rho)
        tables[j] = (tau, _operator_norms(symbol, rho, tau / scale, component))
        ev = symbol.radial_eigenvalues(rho).real.max(axis=-1)
        if component != "theta" and symbol.d > 1:
            ev = np.maximum(ev, -symbol.transverse_rate(rho))
        if component == "theta":
            ev = -symbol.beta * rho**2
        rates[j] = float(np.min(-ev) / scale)

    def worst(c: float) -> dict[int, float]:
        # tau = 2^{2j} t, so the weight exp(c 2^{2j} t) is exp(c tau)
        return {j: float(np.max(nrm * np.exp(c * tt)[None, :])) for j, (tt, nrm) in tables.items()}

    if max(worst(0.0).values()) > C:
        return Lemma31Result(0.0, C, worst(0.0), rates)
    lo, hi = 0.0, 1.0
    while max(worst(hi).values()) <= C:
        lo, hi = hi, 2 * hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if max(worst(mid).values()) <= C:
            lo = mid
        else:
            hi = mid
    return Lemma31Result(lo, C, worst(lo), rates)


# ---------------------------------------------------------------------------
# radial quadrature


def sphere_area(d: int) -> float:
    return 2 * math.pi ** (d / 2) / gamma_fn(d / 2)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _composite_nodes(lo: float, hi: float, pieces: int) -> tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(lo, hi, pieces + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return x, w


def _graded_nodes(lo: float, hi: float, pieces: int, ratio: float = 1e-8):
    """Composite Gauss on a geometric grading toward ``lo`` (handles algebraic endpoint behaviour)."""
    if lo != 0.0:
        return _composite_nodes(lo, hi, pieces)
    edges = np.concatenate([[0.0], hi * np.geomspace(ratio, 1.0, pieces)])
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return x, w


class DivergentProfileError(ValueError):
    pass


def _component_variances(symbol: LinearSymbol, rho: np.ndarray, t: np.ndarray, amp2: np.ndarray) -> np.ndarray:
    """Expected |a|^2, |v|^2, |theta|^2 at radius rho for isotropic data of per-component variance amp2.

    Shape (n_rho, n_t, 3).
    """
    E = expm_batch(symbol.radial(rho), t)
    # Sigma(t) = E diag(amp2) E^H with identical variances on (a, c, theta)
    diag = np.sum(np.abs(E) ** 2, axis=-1) * amp2[:, None, None]
    trans = (symbol.d - 1) * amp2[:, None] * np.exp(-2 * symbol.transverse_rate(rho)[:, None] * t[None, :])
    out = diag.copy()
    out[..., 1] += trans
    return out.real


@dataclass
class RadialDecay:
    """Low-frequency block norms of E(t)U0 from radial quadrature.

    ``block_norms[c]`` has shape (n_t, n_j) for component c in (a, v, theta).
    """

    t: np.ndarray
    js: list[int]
    block_norms: np.ndarray  # (3, n_t, n_j)
    s_values: list[float]
    s1: float | None = None
    norms: dict[float, np.ndarray] = field(default_factory=dict)

    def besov(self, s: float, r: float = 1.0) -> np.ndarray:
        w = 2.0 ** (np.asarray(self.js) * s)
        per = self.block_norms * w[None, None, :]
        if math.isinf(r):
            return per.max(axis=-1).sum(axis=0)
        return (np.sum(per**r, axis=-1) ** (1.0 / r)).sum(axis=0)

    def weighted(self, s: float) -> np.ndarray:
        if self.s1 is None:
            raise ValueError("weighted norms need the data index s1")
        return np.sqrt(1 + self.t**2) ** ((self.s1 + s) / 2) * self.norms[s]


def radial_block_norms(
    profile: Callable[[np.ndarray], np.ndarray],
    t: Sequence[float],
    symbol: LinearSymbol,
    js: Iterable[int],
    tol: float = 1e-9,
    max_pieces: int = 1024,
) -> np.ndarray:
    """||Delta_j U(t)||_{L^2} for each component (a, v, theta); shape (3, n_t, n_j)."""
    t = np.asarray(t, dtype=float)
    js = list(js)
    d = symbol.d
    const = sphere_area(d) / (2 * math.pi) ** d
    out = np.zeros((3, t.size, len(js)))
    for col, j in enumerate(js):
        lo, hi = 0.75 * 2.0**j, 8.0 / 3.0 * 2.0**j
        prev = None
        pieces = 4
        while True:
            x, w = _composite_nodes(lo, hi, pieces)
            amp = np.asarray(profile(x), dtype=float)
            if not np.all(np.isfinite(amp)):
                raise DivergentProfileError(f"profile not finite on block {j}")
            var = _component_variances(symbol, x, t, amp**2)
            weight = const * w * phi(x * 2.0**-j) ** 2 * x ** (d - 1)
            cur = np.sqrt(np.einsum("n,ntc->ct", weight, var))
            if prev is not None:
                scale = cur.max(axis=1, keepdims=True)
                err = np.abs(cur - prev)
                if np.all(err <= tol * cur + 1e-300 + 1e-14 * scale):
                    break
                if pieces >= max_pieces:
                    break
            prev = cur
            pieces *= 2
        out[:, :, col] = cur
    return out


def radial_decay_quadrature(
    profile: Callable[[np.ndarray], np.ndarray],
    s_values: Sequence[float],
    t_grid: Sequence[float],
    consts: DerivedConstants | LinearSymbol,
    d: int = 3,
    j_low: int = -40,
    j0: int = 0,
    s1: float | None = None,
    tol: float = 1e-9,
) -> RadialDecay:
    """Low-frequency Besov norms (r = 1, p = 2) of E(t)U0 for isotropic random-phase data.

    ``profile`` is the radial amplitude |U0_hat|(rho) of each scalar component.
    Blocks ``j_low..j0`` are integrated independently of any grid.
    """
    symbol = consts if isinstance(consts, LinearSymbol) else LinearSymbol.from_constants(consts, d)
    t = np.asarray(t_grid, dtype=float)
    js = list(range(j_low, j0 + 1))
    bn = radial_block_norms(profile, t, symbol, js, tol=tol)
    rec = RadialDecay(t, js, bn, list(s_values), s1)
    for s in s_values:
        rec.norms[s] = rec.besov(s)
    return rec


def radial_l2_norm(
    profile: Callable[[np.ndarray], np.ndarray],
    t: Sequence[float],
    rate: float = 1.0,
    d: int = 3,
    rho_max: float | None = None,
    pieces: int = 256,
) -> np.ndarray:
    """||u(t)||_{L^2} for u_hat(t, xi) = profile(|xi|) exp(-rate |xi|^2 t) on R^d."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    rho_max = rho_max or 40.0
    x, w = _graded_nodes(0.0, rho_max, pieces)
    amp2 = np.asarray(profile(x), dtype=float) ** 2
    integrand = amp2[None, :] * np.exp(-2 * rate * x[None, :] ** 2 * t[:, None]) * x[None, :] ** (d - 1)
    return np.sqrt(sphere_area(d) / (2 * math.pi) ** d * integrand @ w)


# ---------------------------------------------------------------------------
# heat kernel


def power_gaussian_profile(d: int, q: float) -> Callable[[np.ndarray], np.ndarray]:
    """Radial data rho^{d/q - d} exp(-rho^2/2): Gaussian for q = 1, L^q-critical otherwise."""
    expo = d / q - d

    def prof(rho):
        rho = np.asarray(rho, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(rho > 0, rho**expo, 1.0 if expo == 0 else 0.0) * np.exp(-0.5 * rho**2)

    return prof


@lru_cache(maxsize=4)
def _hankel_kernel(d: int, k_max: float, y_max: float, n_k: int, n_y: int):
    """Nodes and the radial Fourier kernel in self-similar variables; independent of time."""
    k, wk = _graded_nodes(0.0, k_max, n_k // 16)
    y, wy = _graded_nodes(0.0, y_max, n_y // 16, ratio=1e-4)
    nu = d / 2 - 1
    ker = jv(nu, np.outer(y, k)) * k ** (d / 2) / np.where(y > 0, y, 1.0)[:, None] ** nu
    for arr in (k, wk, y, wy, ker):
        arr.flags.writeable = False
    return k, wk, y, wy, ker


def heat_lp_norm(
    profile: Callable[[np.ndarray], np.ndarray],
    t: float,
    p: float,
    d: int = 3,
    rate: float = 1.0,
    k_max: float = 9.0,
    y_max: float = 40.0,
    n_k: int = 4096,
    n_y: int = 2048,
) -> float:
    """||u(t)||_{L^p} of the radial heat solution via the Hankel transform.

    Works in self-similar variables k = rho sqrt(s), y = r / sqrt(s) with
    s = rate t + 1/2, so one fixed node set serves every time.
    """
    s = rate * t + 0.5
    sq = math.sqrt(s)
    k, wk, y, wy, ker = _hankel_kernel(d, k_max, y_max, n_k, n_y)
    rho = k / sq
    # the Gaussian factor of the profile is folded into s
    amp = np.asarray(profile(rho), dtype=float) * np.exp(0.5 * rho**2) * np.exp(-(k**2))
    u = (2 * math.pi) ** (-d / 2) * (ker @ (amp * wk))
    # back to physical scaling: rho = k / sqrt(s), r = y sqrt(s)
    u = u * s ** (-d / 2)
    if math.isinf(p):
        return float(np.abs(u).max())
    val = sphere_area(d) * np.sum(wy * np.abs(u) ** p * y ** (d - 1)) * s ** (d / 2)
    return float(val ** (1.0 / p))


def gaussian_heat_lp(t, p: float, d: int = 3, rate: float = 1.0) -> np.ndarray:
    """Closed form ||u(t)||_{L^p} for u_hat(0) = exp(-|xi|^2/2)."""
    var = 1 + 2 * rate * np.asarray(t, dtype=float)
    base = (2 * math.pi) ** (-d / 2) * var ** (-d / 2)
    if math.isinf(p):
        return base
    return base * (2 * math.pi * var / p) ** (d / (2 * p))


@dataclass(frozen=True)
class HeatRate:
    exponent: float
    expected: float
    r2: float


def heat_kernel_rate(
    p: float = 2.0,
    q: float = 1.0,
    d: int = 3,
    t_grid: Sequence[float] | None = None,
    profile: Callable[[np.ndarray], np.ndarray] | None = None,
    rate: float = 1.0,
) -> HeatRate:
    """Fit the L^p decay exponent of heat flow from L^q-type data.

    Data default to the family rho^{d/q - d} exp(-rho^2/2).  p = 2 uses
    Parseval; other p use the radial Hankel transform.
    """
    if p < 2:
        raise ValueError(f"heat rate comparison needs p >= 2, got {p}")
    if not 1 <= q <= p:
        raise ValueError(f"need 1 <= q <= p, got q={q}")
    t = np.geomspace(10.0, 1e4, 25) if t_grid is None else np.asarray(t_grid, dtype=float)
    prof = profile or power_gaussian_profile(d, q)
    if p == 2:
        vals = radial_l2_norm(prof, t, rate=rate, d=d)
    else:
        vals = np.array([heat_lp_norm(prof, ti, p, d=d, rate=rate) for ti in t])
    x, y = np.log(t), np.log(vals)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    r2 = 1 - np.sum(resid**2) / max(np.sum((y - y.mean()) ** 2), 1e-300)
    return HeatRate(float(slope), -(d / 2) * (1 / q - 1 / p), float(r2))


# ---------------------------------------------------------------------------
# parabolic regularity


def heat_duhamel(u0: SpectralField, times: np.ndarray, forcing: Sequence[SpectralField], mu: float = 1.0) -> list[SpectralField]:
    """Solve u_t - mu Delta u = f exactly per mode, f piecewise linear between samples."""
    times = np.asarray(times, dtype=float)
    if len(forcing) != times.size:
        raise ValueError("need one forcing snapshot per sample time")
    k2 = u0.grid.kmag**2
    out = [u0]
    u = u0.coeffs
    for i in range(times.size - 1):
        h = times[i + 1] - times[i]
        z = -mu * k2 * h
        e, p1, p2 = scalar_phi_functions(z)
        f0, f1 = forcing[i].coeffs, forcing[i + 1].coeffs
        # exact integral of exp((h - s) L) (f0 + s (f1 - f0)/h) over [0, h]
        u = e * u + h * p1 * f0 + h * p2 * (f1 - f0)
        out.append(u0._new(u))
    return out


def trapezoid_weights(times: np.ndarray) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    w = np.zeros(times.size)
    dt = np.diff(times)
    w[:-1] += dt / 2
    w[1:] += dt / 2
    return w


def parabolic_regularity_check(
    u0: SpectralField,
    times: Sequence[float],
    forcing: Sequence[SpectralField],
    sigma: float,
    rho1: float,
    rho2: float,
    part: LPPartition,
    r: float = 1.0,
    mu: float = 1.0,
) -> float:
    """LHS / RHS of the maximal-regularity estimate for heat flow with forcing (p = 2).

    LHS is the Chemin-Lerner norm in L~^rho1(B^{sigma + 2/rho1}); RHS is
    ||u0||_{B^sigma} + ||f||_{L~^rho2(B^{sigma - 2 + 2/rho2})}.
    """
    from .littlewood_paley import BesovParams, besov_norm, chemin_lerner_norm

    if rho2 > rho1:
        raise ValueError(f"need rho2 <= rho1, got rho1={rho1}, rho2={rho2}")
    times = np.asarray(times, dtype=float)
    sol = heat_duhamel(u0, times, forcing, mu)
    w = trapezoid_weights(times)
    w = np.where(w > 0, w, 1e-300)
    inv = lambda x: 0.0 if math.isinf(x) else 1.0 / x
    lhs = chemin_lerner_norm(sol, w, rho1, BesovParams(sigma + 2 * inv(rho1), 2, r), part)
    rhs = besov_norm(u0, BesovParams(sigma, 2, r), part)
    rhs += chemin_lerner_norm(list(forcing), w, rho2, BesovParams(sigma - 2 + 2 * inv(rho2), 2, r), part)
    if rhs == 0:
        raise ValueError("zero data and forcing: ratio undefined")
    return lhs / rhs


def radial_sobolev_norms(
    profile: Callable[[np.ndarray], np.ndarray],
    t: Sequence[float],
    consts: DerivedConstants | LinearSymbol,
    s: float = 0.0,
    rho_max: float = 8.0,
    d: int = 3,
    tol: float = 1e-8,
    max_pieces: int = 1 << 14,
) -> np.ndarray:
    """||Lambda^s (a, v, theta)(t)||_{L^2} summed over components, for isotropic data."""
    symbol = consts if isinstance(consts, LinearSymbol) else LinearSymbol.from_constants(consts, d)
    t = np.asarray(t, dtype=float)
    const = sphere_area(symbol.d) / (2 * math.pi) ** symbol.d
    pieces, prev = 64, None
    while True:
        x, w = _graded_nodes(0.0, rho_max, pieces)
        amp = np.asarray(profile(x), dtype=float)
        var = _component_variances(symbol, x, t, amp**2)
        weight = const * w * x ** (2 * s + symbol.d - 1)
        cur = np.sqrt(np.einsum("n,ntc->tc", weight, var)).sum(axis=1)
        if prev is not None and np.all(np.abs(cur - prev) <= tol * cur):
            return cur
        if pieces >= max_pieces:
            return cur
        prev, pieces = cur, 2 * pieces
