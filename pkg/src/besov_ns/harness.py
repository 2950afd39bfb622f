"""Decay experiments: data synthesis, decay functionals, rate fitting.

Time weights use the Japanese bracket <t> = sqrt(1 + t^2).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .littlewood_paley import (
    BesovParams,
    LPPartition,
    block_norms,
    chi,
    high_blocks,
    low_blocks,
    partition_for_grid,
)
from .spectral import Grid, SpectralField, VectorField, grad, hermitian_phases
from .state import State


class ConfigError(ValueError):
    """Parameter combination outside the admissible range."""


def bracket(t):
    return np.sqrt(1.0 + np.asarray(t, dtype=float) ** 2)


@dataclass
class DecayConfig:
    d: int = 3
    p: float = 2.0
    s1: float = 1.5
    eps: float = 0.05
    s_grid: list[float] | None = None
    t_grid: list[float] | None = None
    fit_window: tuple[float, float] | None = None
    seed: int = 0
    j0: int = 0
    eps_zero: bool = False
    n_s: int = 9

    def __post_init__(self):
        d, p = self.d, self.p
        if d < 3:
            raise ConfigError(f"decay theory needs d >= 3, got d={d}")
        if not (2 <= p < d):
            raise ConfigError(f"require 2 <= p < d, got p={p}, d={d}")
        if p > 2 * d / (d - 2):
            raise ConfigError(f"require p <= 2d/(d-2) = {2 * d / (d - 2)}, got p={p}")
        if not (1 - d / 2 < self.s1 <= self.s0 + 1e-12):
            raise ConfigError(f"require 1 - d/2 < s1 <= s0 = {self.s0}, got s1={self.s1}")
        if self.eps_zero:
            self.eps = 0.0
        if self.eps < 0:
            raise ConfigError(f"eps must be nonnegative, got {self.eps}")
        if self.s_grid is None:
            self.s_grid = [float(x) for x in np.linspace(self.eps - self.s1, d / 2 + 1, self.n_s)]
        lo, hi = self.eps - self.s1, d / 2 + 1
        for s in self.s_grid:
            if not (lo - 1e-12 <= s <= hi + 1e-12):
                raise ConfigError(f"measurement regularity s={s} outside [eps - s1, d/2 + 1] = [{lo}, {hi}]")
        if self.t_grid is not None:
            tg = np.asarray(self.t_grid, dtype=float)
            if np.any(np.diff(tg) <= 0) or np.any(tg < 0):
                raise ConfigError("t_grid must be nonnegative and strictly increasing")

    @property
    def s0(self) -> float:
        return 2 * self.d / self.p - self.d / 2

    @property
    def alpha(self) -> float:
        return self.s1 + self.d / 2 + 0.5 - self.eps

    def to_dict(self) -> dict:
        out = asdict(self)
        out["alpha"] = self.alpha
        return out


# ---------------------------------------------------------------------------
# data


def data_envelope(s1: float, d: int, j0: int) -> Callable[[np.ndarray], np.ndarray]:
    """rho^{s1 - d/2} below 2^{j0}, smoothly switched off by 2^{j0} * 16/9."""
    rho0 = 2.0**j0

    def env(rho):
        rho = np.asarray(rho, dtype=float)
        safe = np.where(rho > 0, rho, 1.0)
        return np.where(rho > 0, safe ** (s1 - d / 2), 0.0) * chi(0.75 * rho / rho0)

    return env


def make_initial_data(cfg: DecayConfig, amplitude: float, grid: Grid, part: LPPartition | None = None) -> State:
    """Random-phase isotropic data with the low-frequency envelope of ``cfg``.

    Every mode has modulus equal to the envelope; phases are random and
    Hermitian-symmetric, so block norms are deterministic.  Components are
    scaled jointly so that the RMS of ``a`` equals ``amplitude``.
    """
    if amplitude < 0:
        raise ConfigError("amplitude must be nonnegative")
    if grid.d != cfg.d:
        raise ConfigError(f"grid dimension {grid.d} differs from config dimension {cfg.d}")
    part = part or partition_for_grid(grid, cfg.j0)
    if part.j_min > cfg.j0 - 1:
        raise ConfigError(f"grid cannot resolve blocks below j0={cfg.j0}; enlarge the torus")
    rng = np.random.default_rng(cfg.seed)
    env = data_envelope(cfg.s1, cfg.d, cfg.j0)(grid.kmag)
    env = np.where(grid.nyquist_mask, 0.0, env)
    phases = hermitian_phases(grid, rng, (cfg.d + 2,))
    coeffs = env * phases
    rms = math.sqrt(np.sum(np.abs(coeffs[0]) ** 2))
    scale = 0.0 if amplitude == 0 or rms == 0 else amplitude / rms
    return State.from_stacked(grid, coeffs * scale)


def rms(f: SpectralField) -> float:
    return float(math.sqrt(np.sum(np.abs(f.coeffs) ** 2) - abs(f.coeffs[(0,) * f.grid.d]) ** 2))


# ---------------------------------------------------------------------------
# measurement


def _bn(f, part, p, js):
    bn = block_norms(f, part, p, js)
    return np.array([bn[j] for j in js])


def _low_tuple(state: State, part: LPPartition, js) -> np.ndarray:
    """Per-block L^2 norms summed over (a, v, theta)."""
    return sum(_bn(f, part, 2.0, js) for f in state.fields())


def block_tables(state: State, cfg: DecayConfig, part: LPPartition) -> dict[str, np.ndarray]:
    """Per-block norms for every piece of the decay functional and energy norm."""
    lo, hi = low_blocks(part), high_blocks(part)
    p = cfg.p
    grad_a = grad(state.a)
    grad_v = VectorField(state.grid, np.concatenate([grad(c).coeffs for c in state.v.components]))
    return {
        "low": _low_tuple(state, part, lo),
        "high_grad_a_v": _bn(grad_a, part, p, hi) + _bn(state.v, part, p, hi),
        "high_theta": _bn(state.theta, part, p, hi),
        "high_grad_v_theta": _bn(grad_v, part, p, hi) + _bn(state.theta, part, p, hi),
        "high_a_grad_v_theta": _bn(state.a, part, p, hi) + _bn(grad_v, part, p, hi) + _bn(state.theta, part, p, hi),
    }


def _weights(js, s):
    return 2.0 ** (np.asarray(js, dtype=float) * s)


def measure(state: State, cfg: DecayConfig, part: LPPartition, t: float | None = None) -> dict[str, float]:
    """Instantaneous norms entering the decay functional at time ``t``."""
    t = state.time if t is None else t
    tab = block_tables(state, cfg, part)
    lo, hi = low_blocks(part), high_blocks(part)
    d, p = cfg.d, cfg.p
    row = {"t": float(t)}
    for s in cfg.s_grid:
        val = float(np.sum(_weights(lo, s) * tab["low"]))
        row[f"low_s={s:.4g}"] = val
        row[f"wlow_s={s:.4g}"] = float(bracket(t) ** ((cfg.s1 + s) / 2)) * val
    row["low_s0"] = float(np.sum(tab["low"]))
    row["high_grad_a_v"] = float(np.sum(_weights(hi, d / p - 1) * tab["high_grad_a_v"]))
    row["high_theta"] = float(np.sum(_weights(hi, d / p - 2) * tab["high_theta"]))
    row["high_grad_v_theta"] = float(np.sum(_weights(hi, d / p) * tab["high_grad_v_theta"]))
    wa = float(bracket(t) ** cfg.alpha)
    row["w_high_grad_a_v"] = wa * row["high_grad_a_v"]
    row["w_high_theta"] = wa * row["high_theta"]
    row["w_high_grad_v_theta"] = float(t) ** cfg.alpha * row["high_grad_v_theta"]
    row["low_energy"] = float(np.sum(_weights(lo, d / 2 - 1) * tab["low"]))
    row["low_dissipation"] = float(np.sum(_weights(lo, d / 2 + 1) * tab["low"]))
    row["high_dissipation"] = float(np.sum(_weights(hi, d / p) * tab["high_a_grad_v_theta"]))
    return row


@dataclass
class DecayRecord:
    columns: list[str]
    rows: list[dict[str, float]] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows])

    @property
    def t(self) -> np.ndarray:
        return self.column("t")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([repr(float(r[c])) for c in self.columns])
        return buf.getvalue()


class DecayTracker:
    """Running sup/integral bookkeeping of the decay functional and energy norm.

    Chemin-Lerner L~^infty pieces keep a per-block running sup before summing
    over blocks; L^1_t pieces accumulate by the trapezoid rule.
    """

    def __init__(self, cfg: DecayConfig, part: LPPartition):
        self.cfg, self.part = cfg, part
        self.lo, self.hi = low_blocks(part), high_blocks(part)
        self.sup_low = {s: 0.0 for s in cfg.s_grid}
        self.sup_blocks: dict[str, np.ndarray] = {}
        self.integrals = {"low_dissipation": 0.0, "high_dissipation": 0.0}
        self._last: dict[str, float] | None = None
        self.record: DecayRecord | None = None

    def update(self, state: State) -> dict[str, float]:
        cfg, lo, hi = self.cfg, self.lo, self.hi
        t = state.time
        if self._last is not None and t <= self._last["t"]:
            raise ValueError("sample times must increase")
        row = measure(state, cfg, self.part, t)
        tab = block_tables(state, cfg, self.part)
        wa, ta = float(bracket(t) ** cfg.alpha), float(t) ** cfg.alpha
        cur = {
            "D_grad_a_v": wa * tab["high_grad_a_v"],
            "D_theta": wa * tab["high_theta"],
            "D_grad_v_theta": ta * tab["high_grad_v_theta"],
            "X_low": tab["low"],
            "X_grad_a_v": tab["high_grad_a_v"],
            "X_theta": tab["high_theta"],
        }
        for k, v in cur.items():
            self.sup_blocks[k] = np.maximum(self.sup_blocks.get(k, 0.0), v)
        for s in cfg.s_grid:
            self.sup_low[s] = max(self.sup_low[s], row[f"wlow_s={s:.4g}"])
        if self._last is not None:
            dt = t - self._last["t"]
            for k in self.integrals:
                self.integrals[k] += 0.5 * dt * (row[k] + self._last[k])
        d, p = cfg.d, cfg.p
        sb = self.sup_blocks
        D = max(self.sup_low.values())
        D += float(np.sum(_weights(hi, d / p - 1) * sb["D_grad_a_v"]))
        D += float(np.sum(_weights(hi, d / p - 2) * sb["D_theta"]))
        D += float(np.sum(_weights(hi, d / p) * sb["D_grad_v_theta"]))
        X = float(np.sum(_weights(lo, d / 2 - 1) * sb["X_low"]))
        X += self.integrals["low_dissipation"]
        X += float(np.sum(_weights(hi, d / p - 1) * sb["X_grad_a_v"]))
        X += float(np.sum(_weights(hi, d / p - 2) * sb["X_theta"]))
        X += self.integrals["high_dissipation"]
        row["D_p"] = D
        row["X_p"] = X
        if self.record is None:
            self.record = DecayRecord(list(row.keys()))
        self.record.rows.append(row)
        self._last = row
        return row


def initial_norms(state: State, cfg: DecayConfig, part: LPPartition) -> dict[str, float]:
    """D_{p,0} and the high-frequency data norms bounding the decay functional."""
    lo, hi = low_blocks(part), high_blocks(part)
    tab = block_tables(state, cfg, part)
    low = tab["low"] * _weights(lo, -cfg.s1)
    return {
        "D_p0": float(low.max(initial=0.0)),
        "high_grad_a_v": float(np.sum(_weights(hi, cfg.d / cfg.p - 1) * tab["high_grad_a_v"])),
        "high_theta": float(np.sum(_weights(hi, cfg.d / cfg.p - 2) * tab["high_theta"])),
    }


# ---------------------------------------------------------------------------
# fitting


@dataclass(frozen=True)
class FitResult:
    exponent: float
    r2: float
    n: int

    @property
    def reliable(self) -> bool:
        return self.r2 >= 0.98


def fit_rate(t: Sequence[float], values: Sequence[float], window: tuple[float, float] | None = None) -> FitResult:
    """Least-squares slope of log(value) against log(t) on a late-time window.

    The default window is the last decade of ``t``.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(values, dtype=float)
    if window is None:
        window = (t.max() / 10, t.max())
    m = (t >= window[0] * (1 - 1e-12)) & (t <= window[1] * (1 + 1e-12)) & (t > 0)
    if m.sum() < 8:
        raise ValueError(f"need at least 8 samples in the fit window, got {int(m.sum())}")
    if np.any(y[m] <= 0):
        raise ValueError("fit window contains nonpositive values")
    x, ly = np.log(t[m]), np.log(y[m])
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * x + icpt)
    ss = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 if ss <= 1e-28 * max(1.0, np.sum(ly**2)) else float(1 - np.sum(resid**2) / ss)
    return FitResult(float(slope), r2, int(m.sum()))


@dataclass(frozen=True)
class CorollaryReport:
    target: float
    fitted: float
    r2: float
    tol: float

    @property
    def passed(self) -> bool:
        return abs(self.fitted - self.target) <= self.tol


def corollary_target(cfg: DecayConfig, r: float, s: float, component: str = "v") -> float:
    """Closed-form L^r decay exponent of Lambda^s applied to one unknown."""
    d, p = cfg.d, cfg.p
    if not (p <= r <= math.inf):
        raise ConfigError(f"require p <= r, got r={r}, p={p}")
    inv_r = 0.0 if math.isinf(r) else 1.0 / r
    s1t = cfg.s1 + d * (0.5 - 1.0 / p)
    lhs = s + d * (1.0 / p - inv_r)
    upper = d / p + (1 if component == "v" else 0)
    if not (-s1t < lhs <= upper + 1e-12):
        raise ConfigError(f"require -s1~ < s + d(1/p - 1/r) <= {upper}, got {lhs} with s1~={s1t}")
    return -(cfg.s1 + s) / 2 - (d / 2) * (0.5 - inv_r)


def verify_corollary(
    t: Sequence[float],
    values: Sequence[float],
    r: float,
    s: float,
    cfg: DecayConfig,
    component: str = "v",
    tol: float = 0.05,
    window: tuple[float, float] | None = None,
) -> CorollaryReport:
    target = corollary_target(cfg, r, s, component)
    fit = fit_rate(t, values, window or cfg.fit_window)
    return CorollaryReport(target, fit.exponent, fit.r2, tol)


# ---------------------------------------------------------------------------
# time-convolution inequality


@dataclass(frozen=True)
class ConvolutionResult:
    sup: float
    t_at_sup: float
    t: np.ndarray
    weighted: np.ndarray


_GX, _GW = np.polynomial.legendre.leggauss(16)


def _graded_half(a: float, b: float, pieces: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on [a, b] graded geometrically away from ``a`` (scale 1 near a, b - a far)."""
    span = b - a
    if span <= 0:
        return np.zeros(0), np.zeros(0)
    if span <= 1:
        edges = a + np.linspace(0, span, max(2, pieces // 4) + 1)
    else:
        edges = a + np.concatenate([[0.0], np.geomspace(min(1e-2, span / 2), span, pieces)])
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + half[:, None] * _GX).ravel(), (half[:, None] * _GW).ravel()


def convolution_integral(t: float, sigma1: float, sigma2: float, level: int = 0) -> float:
    """int_0^t <t - tau>^{-sigma1} <tau>^{-sigma2} d tau by graded composite Gauss."""
    if t <= 0:
        return 0.0
    pieces = 24 * 2**level
    x1, w1 = _graded_half(0.0, t / 2, pieces)
    x2, w2 = _graded_half(0.0, t / 2, pieces)
    x2 = t - x2  # graded toward tau = t
    x = np.concatenate([x1, x2])
    w = np.concatenate([w1, w2])
    return float(np.sum(w * bracket(t - x) ** -sigma1 * bracket(x) ** -sigma2))


def check_convolution_inequality(
    sigma1: float, sigma2: float, t_max: float = 1e3, level: int = 0, n_t: int = 121
) -> ConvolutionResult:
    """sup over t <= t_max of <t>^{sigma1} int_0^t <t-tau>^{-sigma1} <tau>^{-sigma2} d tau."""
    if not (0 <= sigma1 <= sigma2):
        raise ConfigError(f"require 0 <= sigma1 <= sigma2, got ({sigma1}, {sigma2})")
    if not sigma2 > 1:
        raise ConfigError(f"require sigma2 > 1, got sigma2={sigma2}")
    t = np.concatenate([[0.0], np.geomspace(1e-2, t_max, n_t - 1)])
    vals = np.array([convolution_integral(ti, sigma1, sigma2, level) for ti in t])
    weighted = vals * bracket(t) ** sigma1
    i = int(np.argmax(weighted))
    return ConvolutionResult(float(weighted[i]), float(t[i]), t, weighted)


# ---------------------------------------------------------------------------
# experiment runners


def linear_decay_run(
    cfg: DecayConfig,
    consts,
    s_values: Sequence[float] | None = None,
    t_grid: Sequence[float] | None = None,
    j_low: int = -40,
):
    """Low-frequency decay of the exact linear flow from the data envelope of ``cfg``."""
    from .linear import radial_decay_quadrature

    t = np.geomspace(1.0, 1e4, 41) if t_grid is None else np.asarray(t_grid, dtype=float)
    s_values = list(cfg.s_grid if s_values is None else s_values)
    env = data_envelope(cfg.s1, cfg.d, cfg.j0)
    return radial_decay_quadrature(env, s_values, t, consts, d=cfg.d, j_low=j_low, j0=cfg.j0, s1=cfg.s1)


@dataclass
class NonlinearRun:
    record: DecayRecord
    initial: dict[str, float]
    min_density: float
    rejections: int
    steps: int


def nonlinear_decay_run(
    cfg: DecayConfig,
    grid: Grid,
    model,
    amplitude: float,
    t_end: float,
    dt: float = 0.25,
    sample_times: Sequence[float] | None = None,
    part: LPPartition | None = None,
) -> NonlinearRun:
    """Evolve synthesized data with the full system and track the decay functional."""
    from .nonlinear import Integrator

    part = part or partition_for_grid(grid, cfg.j0)
    state = make_initial_data(cfg, amplitude, grid, part)
    integ = Integrator(grid, model)
    if sample_times is None:
        sample_times = np.concatenate([[0.25, 0.5, 1.0], np.geomspace(1.5, t_end, 25)])
    sample_times = [t for t in sample_times if 0 < t <= t_end]
    tracker = DecayTracker(cfg, part)
    tracker.update(state)
    min_rho = state.min_density()
    steps = 0
    for t in sample_times:
        n = max(1, int(math.ceil((t - state.time) / dt - 1e-9)))
        h = (t - state.time) / n
        for _ in range(n):
            state = integ.step(state, h)
            steps += 1
        min_rho = min(min_rho, state.min_density())
        tracker.update(state)
    return NonlinearRun(tracker.record, initial_norms(make_initial_data(cfg, amplitude, grid, part), cfg, part),
                        min_rho, integ.rejections, steps)
