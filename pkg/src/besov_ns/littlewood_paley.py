"""Homogeneous Littlewood-Paley decomposition and Besov-type norms.

The low-pass profile ``chi`` equals 1 on [0, 3/4], 0 on [4/3, inf) and is a
C^infinity monotone step in between.  Blocks use ``phi(r) = chi(r/2) - chi(r)``
so that sum_j phi(2^-j r) telescopes to exactly 1 on the covered range.

Norms only see the blocks ``j_min..j_max`` of the partition; anything outside
is silently dropped (see :func:`uncovered_fraction`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .spectral import Field, Grid, SpectralField, VectorField, to_values

CHI_LO = 0.75
CHI_HI = 4.0 / 3.0


def _psi(x):
    out = np.zeros_like(x, dtype=float)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def chi(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    x = (CHI_HI - r) / (CHI_HI - CHI_LO)
    x = np.clip(x, 0.0, 1.0)
    a = _psi(x)
    b = _psi(1.0 - x)
    return a / (a + b)


def phi(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return chi(r / 2.0) - chi(r)


@dataclass(frozen=True)
class LPPartition:
    j_min: int
    j_max: int
    j0: int = 0

    def __post_init__(self):
        if not (self.j_min <= self.j0 <= self.j_max):
            raise ValueError(
                f"need j_min <= j0 <= j_max, got {self.j_min}, {self.j0}, {self.j_max}"
            )

    @property
    def blocks(self) -> range:
        return range(self.j_min, self.j_max + 1)

    @property
    def covered_range(self) -> tuple[float, float]:
        """Radii where the retained blocks sum to one (conservative)."""
        return 2.0**self.j_min * CHI_HI, 2.0**self.j_max * CHI_LO

    def chi(self, r):
        return chi(r)

    def phi(self, r):
        return phi(r)

    def block_symbol(self, j: int, kmag: np.ndarray) -> np.ndarray:
        return phi(kmag * 2.0**-j)

    def check_block(self, j: int):
        if not (self.j_min <= j <= self.j_max):
            raise ValueError(f"block {j} outside covered range [{self.j_min}, {self.j_max}]")

    def with_j0(self, j0: int) -> "LPPartition":
        return LPPartition(min(self.j_min, j0), max(self.j_max, j0), j0)


def build_partition(j_min: int, j_max: int, j0: int = 0) -> LPPartition:
    return LPPartition(int(j_min), int(j_max), int(j0))


def partition_for_grid(grid: Grid, j0: int = 0, margin: int = 0) -> LPPartition:
    """Smallest partition whose blocks sum to one on every resolved |xi| > 0."""
    r_lo = grid.k_min
    r_hi = grid.k_nyquist * math.sqrt(grid.d)
    j_min = math.floor(math.log2(r_lo / CHI_HI)) - margin
    j_max = math.ceil(math.log2(r_hi / 1.5)) + margin
    return LPPartition(min(j_min, j0), max(j_max, j0), j0)


@dataclass(frozen=True)
class BesovParams:
    s: float
    p: float = 2.0
    r: float = 1.0

    def __post_init__(self):
        if self.p < 1 or self.r < 1:
            raise ValueError(f"Besov exponents need p, r >= 1, got p={self.p}, r={self.r}")

    def s0(self, d: int) -> float:
        return 2 * d / self.p - d / 2


# ---------------------------------------------------------------------------
# blocks


def dyadic_block(f: Field, j: int, part: LPPartition) -> Field:
    part.check_block(j)
    return f._new(f.coeffs * part.block_symbol(j, f.grid.kmag))


def low_cut(f: Field, j: int, part: LPPartition | None = None) -> Field:
    return f._new(f.coeffs * chi(f.grid.kmag * 2.0**-j))


def decompose(f: Field, part: LPPartition) -> dict[int, Field]:
    return {j: dyadic_block(f, j, part) for j in part.blocks}


def uncovered_fraction(f: Field, part: LPPartition) -> float:
    """Share of L^2 mass living on wavenumbers the partition does not sum to one on."""
    k = f.grid.kmag
    weight = np.zeros_like(k)
    for j in part.blocks:
        weight += part.block_symbol(j, k)
    resid = np.abs(1.0 - weight)
    resid[(0,) * f.grid.d] = 0.0
    c2 = np.abs(f.coeffs) ** 2
    if c2.ndim > f.grid.d:
        c2 = c2.sum(axis=0)
    mass = c2.sum()
    if mass == 0:
        return 0.0
    return float(np.sum(c2 * np.minimum(resid, 1.0)) / mass)


def _field_lp(grid: Grid, coeffs: np.ndarray, p: float) -> float:
    if p == 2:
        return float(math.sqrt(grid.volume * np.sum(np.abs(coeffs) ** 2)))
    vals = to_values(grid, coeffs)
    if vals.ndim > grid.d:
        vals = np.sqrt(np.sum(vals**2, axis=0))
    vals = np.abs(vals)
    if math.isinf(p):
        return float(vals.max(initial=0.0))
    return float((grid.dx**grid.d * np.sum(vals**p)) ** (1.0 / p))


def block_norms(f: Field, part: LPPartition, p: float = 2.0, js: Iterable[int] | None = None) -> dict[int, float]:
    """``{j: ||Delta_j f||_{L^p}}``; p = 2 uses Parseval, others grid quadrature."""
    k = f.grid.kmag
    js = part.blocks if js is None else js
    out = {}
    for j in js:
        part.check_block(j)
        sym = part.block_symbol(j, k)
        if not sym.any():
            out[j] = 0.0
            continue
        out[j] = _field_lp(f.grid, f.coeffs * sym, p)
    return out


def _lr(values: Sequence[float], r: float) -> float:
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        return 0.0
    if math.isinf(r):
        return float(arr.max())
    return float(np.sum(arr**r) ** (1.0 / r))


def besov_from_blocks(bn: dict[int, float], s: float, r: float, js: Iterable[int] | None = None) -> float:
    js = bn.keys() if js is None else js
    return _lr([2.0 ** (j * s) * bn[j] for j in js], r)


Tuple = Union[Field, Sequence[Field]]


def _as_list(f: Tuple) -> list[Field]:
    if isinstance(f, (SpectralField, VectorField)):
        return [f]
    return list(f)


def besov_norm(f: Tuple, bp: BesovParams, part: LPPartition, js: Iterable[int] | None = None) -> float:
    """Homogeneous Besov norm over the partition's blocks.

    A tuple of fields gets the sum of the component norms.  The zero mode is
    never seen by any block.
    """
    js = list(part.blocks if js is None else js)
    total = 0.0
    for g in _as_list(f):
        bn = block_norms(g, part, bp.p, js)
        total += besov_from_blocks(bn, bp.s, bp.r, js)
    return total


def low_blocks(part: LPPartition) -> list[int]:
    return [j for j in part.blocks if j <= part.j0]


def high_blocks(part: LPPartition) -> list[int]:
    return [j for j in part.blocks if j >= part.j0 - 1]


def besov_norm_low(f: Tuple, bp: BesovParams, part: LPPartition) -> float:
    return besov_norm(f, bp, part, low_blocks(part))


def besov_norm_high(f: Tuple, bp: BesovParams, part: LPPartition) -> float:
    """High-frequency norm; starts at j0 - 1 so one block overlaps the low part."""
    return besov_norm(f, bp, part, high_blocks(part))


def _time_lrho(vals: np.ndarray, weights: np.ndarray, rho: float) -> np.ndarray:
    if math.isinf(rho):
        return vals.max(axis=0)
    return (np.sum(weights[:, None] * vals**rho, axis=0)) ** (1.0 / rho)


def _series_block_table(series, part, p, js):
    return np.array([[block_norms(f, part, p, js)[j] for j in js] for f in series])


def chemin_lerner_norm(
    series: Sequence[Field],
    weights: Sequence[float],
    rho: float,
    bp: BesovParams,
    part: LPPartition,
    js: Iterable[int] | None = None,
) -> float:
    """Block-wise time L^rho first, then the weighted l^r sum over blocks."""
    if len(series) == 0:
        raise ValueError("empty time series")
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(series),) or np.any(w <= 0):
        raise ValueError("need one positive quadrature weight per snapshot")
    js = list(part.blocks if js is None else js)
    table = _series_block_table(series, part, bp.p, js)
    per_block = _time_lrho(table, w, rho)
    return _lr([2.0 ** (j * bp.s) * x for j, x in zip(js, per_block)], bp.r)


def lebesgue_besov_norm(
    series: Sequence[Field], weights: Sequence[float], rho: float, bp: BesovParams, part: LPPartition
) -> float:
    """The ordinary L^rho_T(B^s_{p,r}) norm, for comparison with Chemin-Lerner."""
    if len(series) == 0:
        raise ValueError("empty time series")
    w = np.asarray(weights, dtype=float)
    vals = np.array([besov_norm(f, bp, part) for f in series])
    return float(_time_lrho(vals[:, None], w, rho)[0])


def derivative_tensor(f: SpectralField, k: int) -> np.ndarray:
    """All ordered k-th partial derivatives, stacked on a leading axis (physical space)."""
    grid = f.grid
    coeffs = [f.coeffs]
    for _ in range(k):
        coeffs = [c * 1j * grid.xi[i] for c in coeffs for i in range(grid.d)]
    # symmetrize odd symbols on Nyquist planes like apply_multiplier does
    coeffs = np.stack(coeffs)
    sym = 0.5 * (coeffs + np.conj(grid.mirror(coeffs)))
    coeffs = np.where(grid.nyquist_mask, sym, coeffs)
    return to_values(grid, coeffs)


def bernstein_ratio(f: SpectralField, j: int, k: int, p: float, b: float) -> float:
    """||D^k f||_{L^b} / (2^{j(k + d(1/p - 1/b))} ||f||_{L^p}) for f localized at scale 2^j."""
    grid = f.grid
    base = _field_lp(grid, f.coeffs, p)
    if base == 0:
        raise ValueError("Bernstein ratio of the zero field")
    vals = derivative_tensor(f, k)
    mag = np.sqrt(np.sum(vals**2, axis=0))
    if math.isinf(b):
        num = float(mag.max())
    else:
        num = float((grid.dx**grid.d * np.sum(mag**b)) ** (1.0 / b))
    inv = lambda q: 0.0 if math.isinf(q) else 1.0 / q
    return num / (2.0 ** (j * (k + grid.d * (inv(p) - inv(b)))) * base)
