"""The rescaled unknowns (a, v, theta) and the map from physical perturbations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DerivedConstants, PhysicalModel, derive_constants
from .spectral import Grid, SpectralField, VectorField


class DensityFloorError(ValueError):
    """Raised when 1 + a drops below the admissible floor."""


@dataclass(frozen=True, eq=False)
class State:
    a: SpectralField
    v: VectorField
    theta: SpectralField
    time: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.a.grid

    @classmethod
    def zeros(cls, grid: Grid, time: float = 0.0) -> "State":
        return cls(SpectralField.zeros(grid), VectorField.zeros(grid), SpectralField.zeros(grid), time)

    def stacked(self) -> np.ndarray:
        """Coefficients ordered (a, v_1, ..., v_d, theta) on a leading axis."""
        return np.concatenate([self.a.coeffs[None], self.v.coeffs, self.theta.coeffs[None]])

    @classmethod
    def from_stacked(cls, grid: Grid, coeffs: np.ndarray, time: float = 0.0) -> "State":
        d = grid.d
        return cls(
            SpectralField(grid, coeffs[0]),
            VectorField(grid, coeffs[1 : d + 1]),
            SpectralField(grid, coeffs[d + 1]),
            time,
        )

    def fields(self) -> tuple:
        return (self.a, self.v, self.theta)

    def min_density(self) -> float:
        return float(1.0 + self.a.physical().min())

    def hermitian_defect(self) -> float:
        c = self.stacked()
        return float(np.max(np.abs(c - np.conj(self.grid.mirror(c)))))

    def with_time(self, t: float) -> "State":
        return State(self.a, self.v, self.theta, t)


def _scales(consts: DerivedConstants) -> tuple[float, float, float]:
    """(length, time, temperature amplitude) factors of the change of unknowns."""
    length = consts.nu_inf * consts.chi0
    time = consts.nu_inf * consts.chi0**2
    temp = consts.chi0 * math.sqrt(consts.C_v / consts.T_inf)
    return length, time, temp


def rescale_from_physical(
    b: SpectralField, u: VectorField, E: SpectralField, model: PhysicalModel, time: float = 0.0
) -> State:
    """Map physical perturbations (density b, velocity u, temperature E) to (a, v, theta).

    The spatial dilation is realized by shrinking the torus; samples are reused.
    """
    consts = derive_constants(model)
    if 1.0 + b.physical().min() <= 0:
        raise DensityFloorError("density perturbation must satisfy 1 + b > 0")
    length, tscale, temp = _scales(consts)
    g = b.grid.with_length(b.grid.L / length)
    return State(
        SpectralField(g, b.coeffs.copy()),
        VectorField(g, consts.chi0 * u.coeffs),
        SpectralField(g, temp * E.coeffs),
        time / tscale,
    )


def physical_from_rescaled(state: State, model: PhysicalModel):
    """Inverse of :func:`rescale_from_physical`; returns (b, u, E, time)."""
    consts = derive_constants(model)
    length, tscale, temp = _scales(consts)
    g = state.grid.with_length(state.grid.L * length)
    return (
        SpectralField(g, state.a.coeffs.copy()),
        VectorField(g, state.v.coeffs / consts.chi0),
        SpectralField(g, state.theta.coeffs / temp),
        state.time * tscale,
    )
