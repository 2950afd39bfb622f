import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from besov_ns.harness import (
    ConfigError,
    DecayConfig,
    DecayTracker,
    bracket,
    check_convolution_inequality,
    convolution_integral,
    corollary_target,
    data_envelope,
    fit_rate,
    linear_decay_run,
    make_initial_data,
    measure,
    nonlinear_decay_run,
    rms,
    verify_corollary,
)
from besov_ns.littlewood_paley import block_norms, low_blocks, partition_for_grid
from besov_ns.model import derive_constants, ideal_gas
from besov_ns.nonlinear import Integrator
from besov_ns.spectral import make_grid
from besov_ns.state import State


class TestDecayConfig:
    def test_defaults(self):
        cfg = DecayConfig()
        assert cfg.s0 == pytest.approx(1.5)
        assert cfg.alpha == pytest.approx(1.5 + 1.5 + 0.5 - 0.05)
        assert len(cfg.s_grid) == 9
        assert cfg.s_grid[0] == pytest.approx(0.05 - 1.5)
        assert cfg.s_grid[-1] == pytest.approx(2.5)

    @pytest.mark.parametrize(
        "kw",
        [dict(d=2), dict(p=3.0), dict(p=1.5), dict(d=4, p=4.5), dict(s1=-0.5), dict(s1=1.6), dict(eps=-0.1),
         dict(s_grid=[3.0]), dict(t_grid=[1.0, 1.0])],
    )
    def test_rejects(self, kw):
        with pytest.raises(ConfigError):
            DecayConfig(**kw)

    def test_eps_zero(self):
        assert DecayConfig(eps=0.3, eps_zero=True).eps == 0.0

    def test_high_dimension_ok(self):
        cfg = DecayConfig(d=5, p=3.0, s1=0.5)
        assert cfg.s0 == pytest.approx(10 / 3 - 2.5)


class TestFitRate:
    @given(st.floats(-3, 1), st.floats(0.1, 10))
    def test_exact_power_law(self, k, c):
        t = np.geomspace(1, 1e3, 31)
        fit = fit_rate(t, c * t**k)
        assert fit.exponent == pytest.approx(k, abs=1e-10)
        assert fit.reliable
        assert fit.n == 11

    def test_window_and_errors(self):
        t = np.geomspace(1, 100, 20)
        y = np.where(t < 10, t**-1.0, 10.0 * t**-2.0)
        assert fit_rate(t, y, (10, 100)).exponent == pytest.approx(-2.0)
        with pytest.raises(ValueError):
            fit_rate(t, y, (50, 100))
        with pytest.raises(ValueError):
            fit_rate(t, -y)

    def test_noisy_unreliable(self):
        rng = np.random.default_rng(0)
        t = np.geomspace(1, 10, 30)
        assert not fit_rate(t, np.exp(rng.standard_normal(30)), (1, 10)).reliable


class TestCorollary:
    def test_closed_forms(self):
        cfg = DecayConfig()
        assert corollary_target(cfg, 2.0, 0.0) == pytest.approx(-0.75)
        assert corollary_target(cfg, math.inf, 0.0) == pytest.approx(-1.5)
        assert corollary_target(cfg, 6.0, 1.0) == pytest.approx(-1.25 - 0.5)

    def test_component_range(self):
        cfg = DecayConfig()
        # s + d/2 = 2.5 allowed for the velocity only
        corollary_target(cfg, 2.0, 2.5, "v")
        with pytest.raises(ConfigError):
            corollary_target(cfg, 2.0, 2.5, "a")
        with pytest.raises(ConfigError):
            corollary_target(cfg, 1.5, 0.0)
        with pytest.raises(ConfigError):
            corollary_target(cfg, 2.0, -1.5)

    def test_verify_on_exact_decay(self):
        cfg = DecayConfig()
        t = np.geomspace(1, 1e4, 41)
        rep = verify_corollary(t, 3 * t**-0.75, 2.0, 0.0, cfg)
        assert rep.passed and rep.target == pytest.approx(-0.75)
        assert not verify_corollary(t, t**-0.5, 2.0, 0.0, cfg).passed


class TestConvolution:
    @pytest.mark.parametrize("t,s1,s2", [(0.5, 0.5, 1.25), (50.0, 1.0, 1.5), (900.0, 1.2, 1.25)])
    def test_matches_adaptive_quadrature(self, t, s1, s2):
        f = lambda x: (1 + (t - x) ** 2) ** (-s1 / 2) * (1 + x**2) ** (-s2 / 2)
        ref, _ = quad(f, 0, t, limit=500, points=[t / 2])
        assert convolution_integral(t, s1, s2) == pytest.approx(ref, rel=1e-8)

    def test_zero_time(self):
        assert convolution_integral(0.0, 1.0, 2.0) == 0.0

    def test_refinement_stable(self):
        a = check_convolution_inequality(1.0, 1.5, 1e3, level=0)
        b = check_convolution_inequality(1.0, 1.5, 1e3, level=1)
        assert abs(a.sup - b.sup) <= 0.01 * b.sup
        assert np.all(np.isfinite(a.weighted))
        assert a.weighted[0] == 0.0

    def test_weighted_bounded_by_integral(self):
        # <t>^{s1} * conv <= 2^{s1} * int <tau>^{-s2} on the half near 0 plus the symmetric part
        r = check_convolution_inequality(0.5, 1.25, 1e3)
        total, _ = quad(lambda x: (1 + x**2) ** -0.625, 0, np.inf)
        assert r.sup <= 2 * 2**0.5 * total + 2 ** 1.25 * 2 * 1e3**0.5

    @pytest.mark.parametrize("pair", [(1.0, 1.0), (1.5, 1.2), (-0.1, 2.0)])
    def test_rejects(self, pair):
        with pytest.raises(ConfigError):
            check_convolution_inequality(*pair)


class TestData:
    def setup_method(self):
        self.cfg = DecayConfig(j0=-1, seed=3)
        self.grid = make_grid(3, 32, 16 * math.pi)

    def test_envelope(self):
        env = data_envelope(1.5, 3, 0)
        rho = np.array([0.0, 0.01, 0.5, 1.0, 1.8])
        vals = env(rho)
        assert vals[0] == 0
        assert vals[1] == pytest.approx(1.0)
        assert vals[2] == pytest.approx(1.0)
        assert vals[4] == 0

    def test_amplitude_symmetry_reproducible(self):
        s = make_initial_data(self.cfg, 1e-2, self.grid)
        assert rms(s.a) == pytest.approx(1e-2)
        assert s.hermitian_defect() < 1e-15
        assert np.array_equal(s.stacked(), make_initial_data(self.cfg, 1e-2, self.grid).stacked())
        assert np.all(s.stacked()[:, self.grid.kmag > 0.5 * 16 / 9] == 0)
        assert np.all(make_initial_data(self.cfg, 0.0, self.grid).stacked() == 0)

    def test_low_block_scaling(self):
        # unit-modulus envelope rho^{s1 - d/2}: 2^{-j s1} ||Delta_j a||_2 is roughly constant
        s = make_initial_data(self.cfg, 1.0, self.grid)
        part = partition_for_grid(self.grid, self.cfg.j0)
        bn = block_norms(s.a, part, 2.0, [-3, -2])
        w = [bn[j] * 2.0 ** (-j * self.cfg.s1) for j in (-3, -2)]
        assert w[0] / w[1] == pytest.approx(1.0, rel=0.2)

    def test_errors(self):
        with pytest.raises(ConfigError):
            make_initial_data(self.cfg, -1.0, self.grid)
        with pytest.raises(ConfigError):
            make_initial_data(self.cfg, 1.0, make_grid(2, 16, 1.0))
        with pytest.raises(ConfigError):
            make_initial_data(self.cfg, 1.0, make_grid(3, 16, 2 * math.pi))


class TestMeasurement:
    def setup_method(self):
        self.cfg = DecayConfig(j0=1, seed=1)
        self.grid = make_grid(3, 16, 16 * math.pi)
        self.part = partition_for_grid(self.grid, 1)
        self.state = make_initial_data(self.cfg, 1e-2, self.grid, self.part)

    def test_translation_invariance(self):
        shift = np.exp(-1j * np.tensordot(np.array([1.3, -0.4, 2.2]), self.grid.xi, axes=1))
        moved = State.from_stacked(self.grid, self.state.stacked() * shift)
        r0, r1 = measure(self.state, self.cfg, self.part), measure(moved, self.cfg, self.part)
        for k in r0:
            assert r1[k] == pytest.approx(r0[k], rel=1e-9, abs=1e-300)

    def test_low_columns(self):
        row = measure(self.state, self.cfg, self.part, t=3.0)
        lo = low_blocks(self.part)
        assert row["t"] == 3.0
        s = self.cfg.s_grid[2]
        assert row[f"wlow_s={s:.4g}"] == pytest.approx(float(bracket(3.0)) ** ((1.5 + s) / 2) * row[f"low_s={s:.4g}"])
        assert lo[-1] == self.cfg.j0

    def test_tracker_monotone(self):
        tracker = DecayTracker(self.cfg, self.part)
        integ = Integrator(self.grid, ideal_gas(), linear_only=True)
        s = self.state
        tracker.update(s)
        for _ in range(4):
            s = integ.step(s, 0.5)
            tracker.update(s)
        D, X = tracker.record.column("D_p"), tracker.record.column("X_p")
        assert np.all(np.diff(D) >= 0) and np.all(np.diff(X) >= 0)
        assert "D_p" in tracker.record.to_csv().splitlines()[0]
        with pytest.raises(ValueError):
            tracker.update(s)


class TestRuns:
    def test_linear_decay_exponent(self):
        cfg = DecayConfig()
        r = linear_decay_run(cfg, derive_constants(ideal_gas()), [0.0], np.geomspace(1, 1e4, 41))
        fit = fit_rate(r.t, r.norms[0.0], (100, 1e4))
        assert fit.exponent == pytest.approx(-0.75, abs=0.02)

    def test_short_nonlinear_run(self):
        cfg = DecayConfig(j0=1)
        grid = make_grid(3, 16, 16 * math.pi)
        run = nonlinear_decay_run(cfg, grid, ideal_gas(), 1e-2, 2.0, dt=0.5, sample_times=[0.5, 1.0, 2.0])
        assert run.rejections == 0
        assert run.steps == 4
        assert len(run.record.rows) == 4
        assert run.min_density > 0.9
        assert run.initial["D_p0"] > 0
