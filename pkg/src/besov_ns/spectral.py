"""Periodic-grid Fourier representation of fields and Fourier multipliers.

Whole space R^d is approximated by the torus [0, L)^d sampled on n points per
axis.  Coefficients follow one fixed normalization everywhere::

    c(xi) = n^{-d} * sum_x f(x) exp(-i xi . x)

so ``c = fftn(f) / n**d`` and ``f = ifftn(c) * n**d``.  Parseval then reads
``||f||_{L^2}^2 = L^d * sum |c|^2``.

Nyquist planes (index n/2 on some axis) carry no sign information for odd
symbols; multipliers are symmetrized there so real fields stay real.
Generators in this module never populate those planes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np

Symbol = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, complex, float]


@dataclass(frozen=True, eq=False)
class Grid:
    d: int
    n: int
    L: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.n < 8 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 8, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"torus length must be positive, got {self.L}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def volume(self) -> float:
        return self.L**self.d

    @property
    def k_min(self) -> float:
        """Lowest nonzero resolved frequency 2*pi/L."""
        return 2 * np.pi / self.L

    @property
    def k_nyquist(self) -> float:
        return np.pi * self.n / self.L

    @cached_property
    def k1d(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @cached_property
    def xi(self) -> np.ndarray:
        """Wavevectors, shape (d, n, ..., n)."""
        return np.stack(np.meshgrid(*([self.k1d] * self.d), indexing="ij"))

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(np.sum(self.xi**2, axis=0))

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        idx = np.meshgrid(*([np.arange(self.n)] * self.d), indexing="ij")
        mask = np.zeros(self.shape, dtype=bool)
        for i in idx:
            mask |= i == self.n // 2
        return mask

    @cached_property
    def coords(self) -> np.ndarray:
        x = np.arange(self.n) * self.dx
        return np.stack(np.meshgrid(*([x] * self.d), indexing="ij"))

    def mirror(self, arr: np.ndarray) -> np.ndarray:
        """Reindex the trailing d axes by idx -> -idx mod n."""
        axes = tuple(range(arr.ndim - self.d, arr.ndim))
        return np.roll(np.flip(arr, axis=axes), 1, axis=axes)

    def with_length(self, L: float) -> "Grid":
        return Grid(self.d, self.n, L)


def make_grid(d: int, n: int, L: float) -> Grid:
    return Grid(int(d), int(n), float(L))


def to_coeffs(grid: Grid, values: np.ndarray) -> np.ndarray:
    axes = tuple(range(values.ndim - grid.d, values.ndim))
    return np.fft.fftn(values, axes=axes) / grid.n**grid.d


def to_values(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    axes = tuple(range(coeffs.ndim - grid.d, coeffs.ndim))
    return np.fft.ifftn(coeffs, axes=axes).real * grid.n**grid.d


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: Grid
    coeffs: np.ndarray

    @classmethod
    def from_physical(cls, grid: Grid, values) -> "SpectralField":
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"expected shape {grid.shape}, got {values.shape}")
        return cls(grid, to_coeffs(grid, values))

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    def physical(self) -> np.ndarray:
        return to_values(self.grid, self.coeffs)

    @property
    def mean(self) -> float:
        return float(self.coeffs[(0,) * self.grid.d].real)

    def hermitian_defect(self) -> float:
        c = self.coeffs
        return float(np.max(np.abs(c - np.conj(self.grid.mirror(c))), initial=0.0))

    def _new(self, coeffs) -> "SpectralField":
        return SpectralField(self.grid, coeffs)

    def __add__(self, other):
        return self._new(self.coeffs + other.coeffs)

    def __sub__(self, other):
        return self._new(self.coeffs - other.coeffs)

    def __neg__(self):
        return self._new(-self.coeffs)

    def __mul__(self, scalar):
        return self._new(self.coeffs * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class VectorField:
    grid: Grid
    coeffs: np.ndarray  # shape (d, n, ..., n)

    @classmethod
    def from_components(cls, comps) -> "VectorField":
        comps = list(comps)
        return cls(comps[0].grid, np.stack([c.coeffs for c in comps]))

    @classmethod
    def from_physical(cls, grid: Grid, values) -> "VectorField":
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.d,) + grid.shape:
            raise ValueError(f"expected shape {(grid.d,) + grid.shape}, got {values.shape}")
        return cls(grid, to_coeffs(grid, values))

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros((grid.d,) + grid.shape, dtype=complex))

    @property
    def components(self) -> tuple[SpectralField, ...]:
        return tuple(SpectralField(self.grid, c) for c in self.coeffs)

    def physical(self) -> np.ndarray:
        return to_values(self.grid, self.coeffs)

    def _new(self, coeffs) -> "VectorField":
        return VectorField(self.grid, coeffs)

    def __add__(self, other):
        return self._new(self.coeffs + other.coeffs)

    def __sub__(self, other):
        return self._new(self.coeffs - other.coeffs)

    def __neg__(self):
        return self._new(-self.coeffs)

    def __mul__(self, scalar):
        return self._new(self.coeffs * scalar)

    __rmul__ = __mul__


Field = Union[SpectralField, VectorField]


def _symbol_values(grid: Grid, m: Symbol) -> np.ndarray:
    if callable(m):
        vals = np.asarray(m(grid.xi), dtype=complex)
    else:
        vals = np.asarray(m, dtype=complex)
    vals = np.broadcast_to(vals, grid.shape)
    if not np.all(np.isfinite(vals)):
        raise ValueError("multiplier is not finite on every resolved wavenumber")
    # On Nyquist planes xi and -xi share an index; keep the Hermitian part.
    sym = 0.5 * (vals + np.conj(grid.mirror(vals)))
    return np.where(grid.nyquist_mask, sym, vals)


def apply_multiplier(f: Field, m: Symbol) -> Field:
    """Multiply Fourier coefficients by ``m(xi)``; ``m`` receives the (d, ...) wavevector array."""
    vals = _symbol_values(f.grid, m)
    return f._new(f.coeffs * vals)


def _zero_mode(grid: Grid):
    return (0,) * grid.d


def lambda_s(f: Field, s: float) -> Field:
    """Lambda^s = |D|^s with the zero mode sent to zero."""
    grid = f.grid
    if s == 0:
        return f._new(f.coeffs.copy())
    zero = _zero_mode(grid)
    if s < 0:
        c0 = f.coeffs[(...,) + zero]
        scale = np.max(np.abs(f.coeffs), initial=0.0)
        if np.any(np.abs(c0) > 1e-13 * max(scale, 1e-300)):
            raise ValueError("negative-order Lambda^s requires a mean-zero field")
    k = grid.kmag.copy()
    k[zero] = 1.0
    m = k**s
    m[zero] = 0.0
    return apply_multiplier(f, m)


def grad(f: SpectralField) -> VectorField:
    grid = f.grid
    comps = [apply_multiplier(f, 1j * grid.xi[k]).coeffs for k in range(grid.d)]
    return VectorField(grid, np.stack(comps))


def div(v: VectorField) -> SpectralField:
    grid = v.grid
    out = sum(apply_multiplier(c, 1j * grid.xi[k]).coeffs for k, c in enumerate(v.components))
    return SpectralField(grid, out)


def laplacian(f: Field) -> Field:
    return apply_multiplier(f, -f.grid.kmag**2)


def curl(v: VectorField) -> VectorField:
    if v.grid.d != 3:
        raise ValueError("curl is defined here for d = 3 only")
    g = v.grid
    d = [[apply_multiplier(v.components[i], 1j * g.xi[k]).coeffs for k in range(3)] for i in range(3)]
    return VectorField(g, np.stack([d[2][1] - d[1][2], d[0][2] - d[2][0], d[1][0] - d[0][1]]))


def inverse_neg_laplacian(f: SpectralField) -> SpectralField:
    """(-Delta)^{-1}, defined on mean-zero fields."""
    return lambda_s(f, -2.0)


def leray_split(v: VectorField) -> tuple[VectorField, VectorField]:
    """Return (P v, Q v) with P the divergence-free and Q the gradient projector."""
    grid = v.grid
    k2 = grid.kmag**2
    zero = _zero_mode(grid)
    k2[zero] = 1.0
    comps = v.components
    q = []
    for k in range(grid.d):
        acc = np.zeros(grid.shape, dtype=complex)
        for l in range(grid.d):
            m = grid.xi[k] * grid.xi[l] / k2
            m[zero] = 0.0
            acc += apply_multiplier(comps[l], m).coeffs
        q.append(acc)
    Q = VectorField(grid, np.stack(q))
    return v - Q, Q


def lp_norm(f: Union[Field, np.ndarray], p: float, grid: Grid | None = None) -> float:
    """L^p norm by grid quadrature (vector fields use the pointwise Euclidean magnitude)."""
    if isinstance(f, (SpectralField, VectorField)):
        grid = f.grid
        vals = f.physical()
        if isinstance(f, VectorField):
            vals = np.sqrt(np.sum(vals**2, axis=0))
    else:
        vals = np.asarray(f)
        if grid is None:
            raise ValueError("grid required for raw arrays")
        if vals.ndim == grid.d + 1:
            vals = np.sqrt(np.sum(vals**2, axis=0))
    vals = np.abs(vals)
    if np.isinf(p):
        return float(vals.max(initial=0.0))
    return float((grid.dx**grid.d * np.sum(vals**p)) ** (1.0 / p))


def l2_norm_spectral(f: Field) -> float:
    """L^2 norm from coefficients (Parseval, identical to quadrature up to rounding)."""
    return float(np.sqrt(f.grid.volume * np.sum(np.abs(f.coeffs) ** 2)))


def dilate(f: Field, lam: float) -> Field:
    """Realize x -> f(lam x) by shrinking the torus: same samples, length L/lam."""
    g = f.grid.with_length(f.grid.L / lam)
    return type(f)(g, f.coeffs.copy())


def hermitian_phases(grid: Grid, rng: np.random.Generator, lead: tuple[int, ...] = ()) -> np.ndarray:
    """Unit-modulus random phases with exp(i phase(-xi)) = conj(exp(i phase(xi)))."""
    phase = rng.uniform(0.0, 2 * np.pi, size=lead + grid.shape)
    phase = 0.5 * (phase - grid.mirror(phase))
    return np.exp(1j * phase)


def random_field(
    grid: Grid,
    rng: np.random.Generator,
    envelope: Callable[[np.ndarray], np.ndarray] | None = None,
    k_max: float | None = None,
    vector: bool = False,
    k_min: float = 0.0,
) -> Field:
    """Random-phase real field with radial amplitude ``envelope(|xi|)``.

    Zero mode and Nyquist planes are left empty; ``k_max`` band-limits the field.
    """
    lead = (grid.d,) if vector else ()
    k = grid.kmag
    amp = np.ones(grid.shape) if envelope is None else np.asarray(envelope(np.where(k > 0, k, 1.0)), float)
    amp = np.where(k > 0, amp, 0.0)
    if k_max is not None:
        amp = np.where(k <= k_max, amp, 0.0)
    if k_min > 0:
        amp = np.where(k >= k_min, amp, 0.0)
    amp = np.where(grid.nyquist_mask, 0.0, amp)
    mags = rng.standard_normal(lead + grid.shape) ** 2 + 0.5
    mags = 0.5 * (mags + grid.mirror(mags))
    coeffs = amp * mags * hermitian_phases(grid, rng, lead)
    return VectorField(grid, coeffs) if vector else SpectralField(grid, coeffs)
