"""Empirical constants for Besov product and composition estimates.

Each check draws random band-limited field pairs, evaluates LHS / RHS per
trial and reports the spread.  Fields are limited to |xi| < Nyquist / 2 so
pointwise products are exact on the grid.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .harness import ConfigError
from .littlewood_paley import LPPartition, block_norms, low_cut, partition_for_grid
from .model import CoefficientFunctions, make_model
from .spectral import Grid, SpectralField, lp_norm, make_grid, random_field

PROPOSITIONS = ("P2.2a", "P2.2b", "P2.2c", "P2.3", "P2.4a", "P2.4b", "E3.6", "E3.7", "E3.8", "E3.17", "P2.5")


@dataclass
class ProductCheckConfig:
    prop: str
    d: int = 3
    p: float = 2.0
    s1: float = 1.0
    sigma: float | None = None
    sigma1: float | None = None
    sigma2: float | None = None
    p1: float = 2.0
    p2: float = 2.0
    trials: int = 200
    n0: int | None = None
    j0: int = -2
    seed: int = 0
    spread_limit: float = 10.0

    def __post_init__(self):
        if self.prop not in PROPOSITIONS:
            raise ConfigError(f"unknown product check {self.prop!r}; choose from {PROPOSITIONS}")
        defaults = {
            "P2.2a": dict(sigma=1.0),
            "P2.2b": dict(sigma1=1.5, sigma2=0.5),
            "P2.2c": dict(sigma=1.5),
            "P2.3": dict(sigma1=1.0, sigma2=0.5),
            "P2.4a": dict(sigma=1.0),
            "P2.4b": dict(sigma=1.0),
            "P2.5": dict(sigma=1.0),
        }.get(self.prop, {})
        for k, v in defaults.items():
            if getattr(self, k) is None:
                setattr(self, k, v)
        if self.trials < 1:
            raise ConfigError("need at least one trial")
        self.validate()

    @property
    def p_star(self) -> float:
        inv = 0.5 - 1.0 / self.p
        return math.inf if inv == 0 else 1.0 / inv

    @property
    def s0(self) -> float:
        return 2 * self.d / self.p - self.d / 2

    @property
    def q(self) -> float | None:
        d = self.d
        if self.prop == "P2.2b":
            inv = 1 / self.p1 + 1 / self.p2 - self.sigma1 / d
        elif self.prop == "P2.2c":
            inv = 1 / self.p1 + 1 / self.p2 - self.sigma / d
        else:
            return None
        return math.inf if inv <= 0 else 1.0 / inv

    def validate(self):
        d, prop = self.d, self.prop
        p1, p2 = self.p1, self.p2
        if prop in ("P2.2a", "P2.4a", "P2.4b", "P2.5") and not self.sigma > 0:
            raise ConfigError(f"{prop}: require sigma > 0, got {self.sigma}")
        if prop == "P2.2b":
            s1, s2 = self.sigma1, self.sigma2
            ok = s1 + s2 > 0 and s1 <= d / p1 and s2 <= d / p2 and s1 >= s2 and 1 / p1 + 1 / p2 <= 1
            if not ok:
                raise ConfigError(
                    "P2.2b: require sigma1 + sigma2 > 0, sigma1 <= d/p1, sigma2 <= d/p2, sigma1 >= sigma2, 1/p1 + 1/p2 <= 1"
                )
            if self.q < 1:
                raise ConfigError("P2.2b: derived exponent q must be >= 1")
        if prop == "P2.2c":
            s = self.sigma
            if not (s > 0 and d / p1 + d / p2 - d <= s <= min(d / p1, d / p2)):
                raise ConfigError("P2.2c: require d/p1 + d/p2 - d <= sigma <= min(d/p1, d/p2), sigma > 0")
        if prop == "P2.3":
            s1, s2 = self.sigma1, self.sigma2
            ok = s1 + s2 >= 0 and s1 <= d / p1 and s2 < min(d / p1, d / p2) and 1 / p1 + 1 / p2 <= 1
            if not ok:
                raise ConfigError(
                    "P2.3: require sigma1 + sigma2 >= 0, sigma1 <= d/p1, sigma2 < min(d/p1, d/p2), 1/p1 + 1/p2 <= 1"
                )
        if prop in ("P2.4a", "P2.4b") and not (2 <= self.p <= 4):
            raise ConfigError(f"{prop}: require 2 <= p <= 4, got p={self.p}")
        if prop in ("E3.6", "E3.7", "E3.8", "E3.17"):
            if not (2 <= self.p < d and self.p <= 2 * d / (d - 2)):
                raise ConfigError(f"{prop}: require 2 <= p < d and p <= 2d/(d-2)")
            if not (1 - d / 2 < self.s1 <= self.s0):
                raise ConfigError(f"{prop}: require 1 - d/2 < s1 <= s0 = {self.s0}")
        if self.n0 is not None and not (0 <= self.n0 <= 4):
            raise ConfigError("N0 offset must lie in 0..4")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["p_star"] = self.p_star
        return out


@dataclass
class ProductStats:
    prop: str
    ratios: np.ndarray
    n0: int | None = None
    n0_scan: dict[int, dict] = field(default_factory=dict)
    spread_limit: float = 10.0

    @property
    def max(self) -> float:
        return float(np.max(self.ratios))

    @property
    def median(self) -> float:
        return float(np.median(self.ratios))

    @property
    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.ratios)))

    @property
    def spread(self) -> float:
        med = self.median
        return math.inf if med == 0 else self.max / med

    @property
    def passed(self) -> bool:
        return self.finite and self.spread <= self.spread_limit

    def summary(self) -> dict:
        out = {
            "prop": self.prop,
            "trials": int(self.ratios.size),
            "max": self.max,
            "median": self.median,
            "spread": self.spread,
            "finite": self.finite,
            "passed": self.passed,
        }
        if self.n0 is not None or self.n0_scan:
            out["n0"] = self.n0
            out["n0_scan"] = {str(k): v for k, v in self.n0_scan.items()}
        return out


# ---------------------------------------------------------------------------
# norms


class _Norms:
    def __init__(self, part: LPPartition):
        self.part = part

    def besov(self, f: SpectralField, s: float, p: float, r: float, js=None) -> float:
        js = list(self.part.blocks if js is None else js)
        bn = block_norms(f, self.part, p, js)
        vals = np.array([2.0 ** (j * s) * bn[j] for j in js])
        return float(vals.max(initial=0.0) if math.isinf(r) else np.sum(vals**r) ** (1 / r))

    def low(self, f: SpectralField, s: float, j0: int) -> float:
        """sup_{j <= j0} 2^{js} ||Delta_j f||_{L^2}."""
        js = [j for j in self.part.blocks if j <= j0]
        return self.besov(f, s, 2.0, math.inf, js)


def _mul(f: SpectralField, g: SpectralField) -> SpectralField:
    return SpectralField.from_physical(f.grid, f.physical() * g.physical())


def _high(f: SpectralField, j0: int) -> SpectralField:
    return f - low_cut(f, j0)


def default_grid() -> Grid:
    return make_grid(3, 32, 32 * math.pi)


def _random_pair(grid: Grid, rng: np.random.Generator, k_max: float) -> tuple[SpectralField, SpectralField]:
    """Two fields with random power-law envelopes rho^-kappa, kappa in [-0.5, 2.5]."""
    out = []
    for _ in range(2):
        kappa = rng.uniform(-0.5, 2.5)
        k_lo = rng.choice([0.0, 0.0, 2 * grid.k_min, 0.1])
        env = lambda k, kappa=kappa: k ** (-kappa)
        out.append(random_field(grid, rng, env, k_max=k_max, k_min=k_lo))
    return out[0], out[1]


def _composition_family() -> list[tuple[str, Callable[[np.ndarray], np.ndarray]]]:
    ideal = CoefficientFunctions(make_model("ideal"))
    vdw = CoefficientFunctions(make_model("vdw"))
    return [
        ("I", ideal.I),
        ("K1_vdw", vdw.K1),
        ("K2_vdw", vdw.K2),
        ("K3_vdw", vdw.K3),
        ("Ktilde1_ideal", ideal.Ktilde1),
    ]


def _trial_ratio(cfg: ProductCheckConfig, N: _Norms, f: SpectralField, g: SpectralField, n0: int | None, F=None) -> float:
    d, p, s1, j0 = cfg.d, cfg.p, cfg.s1, cfg.j0
    prop = cfg.prop
    if prop == "P2.2a":
        s = cfg.sigma
        lhs = N.besov(_mul(f, g), s, p, 1)
        rhs = lp_norm(f, math.inf) * N.besov(g, s, p, 1) + lp_norm(g, math.inf) * N.besov(f, s, p, 1)
    elif prop == "P2.2b":
        lhs = N.besov(_mul(f, g), cfg.sigma2, cfg.q, 1)
        rhs = N.besov(f, cfg.sigma1, cfg.p1, 1) * N.besov(g, cfg.sigma2, cfg.p2, 1)
    elif prop == "P2.2c":
        s = cfg.sigma
        lhs = N.besov(_mul(f, g), -s, cfg.q, math.inf)
        rhs = N.besov(f, s, cfg.p1, 1) * N.besov(g, -s, cfg.p2, math.inf)
    elif prop == "P2.3":
        lhs = N.besov(_mul(f, g), cfg.sigma1 + cfg.sigma2 - d / cfg.p1, cfg.p2, math.inf)
        rhs = N.besov(f, cfg.sigma1, cfg.p1, 1) * N.besov(g, cfg.sigma2, cfg.p2, math.inf)
    elif prop == "P2.4a":
        s = cfg.sigma
        gh = _high(g, j0)
        lhs = N.low(_mul(f, gh), -cfg.s0, j0)
        rhs = (N.besov(f, s, p, 1) + lp_norm(low_cut(f, j0 + n0), cfg.p_star)) * N.besov(gh, -s, p, math.inf)
    elif prop == "P2.4b":
        s = cfg.sigma
        fh = _high(f, j0)
        lhs = N.low(_mul(fh, g), -cfg.s0, j0)
        rhs = (N.besov(fh, s, p, 1) + lp_norm(low_cut(fh, j0 + n0), cfg.p_star)) * N.besov(g, -s, p, math.inf)
    elif prop == "E3.6":
        lhs = N.besov(_mul(f, g), -s1, 2, math.inf)
        rhs = N.besov(f, d / p, p, 1) * N.besov(g, -s1, 2, 1)
    elif prop == "E3.7":
        e = d / p - d / 2 - s1
        lhs = N.besov(_mul(f, g), e, 2, math.inf)
        rhs = N.besov(f, e, p, 1) * N.besov(g, d / p, 2, 1)
    elif prop == "E3.8":
        e = d / p - d / 2 - s1
        lhs = N.besov(_mul(f, g), e, 2, math.inf)
        rhs = N.besov(f, d / p - 1, p, 1) * N.besov(g, e + 1, 2, 1)
    elif prop == "E3.17":
        gh = _high(g, j0)
        lhs = N.low(_mul(f, gh), -cfg.s0, j0)
        rhs = N.besov(f, d / p - 1, p, 1) * N.besov(gh, 1 - d / p, p, 1)
    elif prop == "P2.5":
        s = cfg.sigma
        Ff = SpectralField.from_physical(f.grid, F(f.physical()))
        lhs = N.besov(Ff, s, p, 1)
        rhs = N.besov(f, s, p, 1)
    else:  # pragma: no cover - guarded by validation
        raise ConfigError(prop)
    if lhs == 0:
        return 0.0
    return lhs / rhs if rhs > 0 else math.inf


def product_estimate_ratio(
    cfg: ProductCheckConfig, part: LPPartition | None = None, grid: Grid | None = None
) -> ProductStats:
    """LHS / RHS statistics of one product or composition estimate over random trials."""
    grid = grid or default_grid()
    part = part or partition_for_grid(grid, min(cfg.j0, 0))
    N = _Norms(part)
    rng = np.random.default_rng(cfg.seed)
    k_max = 0.49 * grid.k_nyquist
    pairs = [_random_pair(grid, rng, k_max) for _ in range(cfg.trials)]
    if cfg.prop == "P2.5":
        fam = _composition_family()
        ratios = []
        for i, (f, _) in enumerate(pairs):
            f = f * (0.3 / lp_norm(f, math.inf))
            ratios.append(_trial_ratio(cfg, N, f, None, None, fam[i % len(fam)][1]))
        return ProductStats(cfg.prop, np.array(ratios), spread_limit=cfg.spread_limit)
    if cfg.prop in ("P2.4a", "P2.4b"):
        scan = {}
        offsets = [cfg.n0] if cfg.n0 is not None else list(range(5))
        chosen = None
        best = None
        for n0 in offsets:
            r = np.array([_trial_ratio(cfg, N, f, g, n0) for f, g in pairs])
            st = ProductStats(cfg.prop, r, n0, spread_limit=cfg.spread_limit)
            scan[n0] = {"max": st.max, "median": st.median, "spread": st.spread, "passed": st.passed}
            if best is None:
                best = st
            if chosen is None and st.passed:
                chosen, best = n0, st
        best.n0 = chosen
        best.n0_scan = scan
        return best
    ratios = np.array([_trial_ratio(cfg, N, f, g, None) for f, g in pairs])
    return ProductStats(cfg.prop, ratios, spread_limit=cfg.spread_limit)


def single_ratio(cfg: ProductCheckConfig, f: SpectralField, g: SpectralField, part: LPPartition, n0: int = 0) -> float:
    """Ratio for one explicit pair (used for oracle checks)."""
    F = _composition_family()[0][1] if cfg.prop == "P2.5" else None
    return _trial_ratio(cfg, _Norms(part), f, g, n0, F)
