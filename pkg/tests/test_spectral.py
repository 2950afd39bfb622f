import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from besov_ns.spectral import (
    Grid,
    SpectralField,
    VectorField,
    apply_multiplier,
    curl,
    dilate,
    div,
    grad,
    inverse_neg_laplacian,
    l2_norm_spectral,
    lambda_s,
    laplacian,
    leray_split,
    lp_norm,
    make_grid,
    random_field,
    to_coeffs,
    to_values,
)


class TestGrid:
    def test_frequencies(self):
        g = make_grid(3, 16, 4 * math.pi)
        assert g.k_min == pytest.approx(0.5)
        assert g.k_nyquist == pytest.approx(4.0)
        assert g.shape == (16, 16, 16)
        assert g.volume == pytest.approx((4 * math.pi) ** 3)

    @pytest.mark.parametrize("d,n,L", [(4, 16, 1.0), (3, 15, 1.0), (3, 4, 1.0), (3, 16, 0.0)])
    def test_rejects_bad_grids(self, d, n, L):
        with pytest.raises(ValueError):
            Grid(d, n, L)

    def test_mirror_negates_indices(self):
        g = make_grid(2, 8, 1.0)
        xi = g.xi
        assert np.allclose(g.mirror(xi[0])[~g.nyquist_mask], -xi[0][~g.nyquist_mask])


class TestTransforms:
    @given(st.integers(0, 10_000))
    def test_round_trip(self, seed):
        g = make_grid(2, 16, 3.0)
        vals = np.random.default_rng(seed).standard_normal(g.shape)
        assert np.allclose(to_values(g, to_coeffs(g, vals)), vals, atol=1e-12)

    @given(st.integers(0, 10_000))
    def test_parseval(self, seed):
        g = make_grid(3, 8, 5.0)
        f = SpectralField.from_physical(g, np.random.default_rng(seed).standard_normal(g.shape))
        assert l2_norm_spectral(f) == pytest.approx(lp_norm(f, 2), rel=1e-12)

    def test_constant_lp_norm(self):
        g = make_grid(3, 8, 2.0)
        f = SpectralField.from_physical(g, np.full(g.shape, 3.0))
        assert lp_norm(f, 4) == pytest.approx(3.0 * 8.0 ** 0.25)
        assert lp_norm(f, math.inf) == pytest.approx(3.0)

    def test_shape_check(self):
        g = make_grid(2, 8, 1.0)
        with pytest.raises(ValueError):
            SpectralField.from_physical(g, np.zeros((8, 9)))


class TestOperators:
    def setup_method(self):
        self.g = make_grid(3, 16, 2 * math.pi)
        x, y, z = self.g.coords
        self.x, self.y, self.z = x, y, z

    def test_grad_of_trig(self):
        f = SpectralField.from_physical(self.g, np.sin(2 * self.x) * np.cos(3 * self.y))
        gv = grad(f).physical()
        assert np.allclose(gv[0], 2 * np.cos(2 * self.x) * np.cos(3 * self.y), atol=1e-12)
        assert np.allclose(gv[1], -3 * np.sin(2 * self.x) * np.sin(3 * self.y), atol=1e-12)
        assert np.allclose(gv[2], 0, atol=1e-12)

    def test_laplacian_eigenfunction(self):
        f = SpectralField.from_physical(self.g, np.cos(self.x + 2 * self.z))
        assert np.allclose(laplacian(f).physical(), -5 * f.physical(), atol=1e-12)

    def test_div_grad_is_laplacian(self, rng):
        f = random_field(self.g, rng)
        assert np.allclose(div(grad(f)).coeffs, laplacian(f).coeffs, atol=1e-12)

    def test_curl_grad_and_div_curl(self, rng):
        f = random_field(self.g, rng)
        v = random_field(self.g, rng, vector=True)
        assert np.abs(curl(grad(f)).coeffs).max() < 1e-12
        assert np.abs(div(curl(v)).coeffs).max() < 1e-12

    def test_curl_of_shear(self):
        v = VectorField.from_physical(self.g, np.stack([np.sin(self.y), 0 * self.x, 0 * self.x]))
        c = curl(v).physical()
        assert np.allclose(c[2], -np.cos(self.y), atol=1e-12)

    def test_inverse_neg_laplacian(self):
        f = SpectralField.from_physical(self.g, np.cos(3 * self.x))
        assert np.allclose(inverse_neg_laplacian(f).physical(), np.cos(3 * self.x) / 9, atol=1e-12)

    def test_lambda_s_inverse_pair(self, rng):
        f = random_field(self.g, rng)
        back = lambda_s(lambda_s(f, 1.3), -1.3)
        assert np.allclose(back.coeffs, f.coeffs, atol=1e-12)

    def test_negative_order_needs_zero_mean(self):
        f = SpectralField.from_physical(self.g, 1.0 + np.cos(self.x))
        with pytest.raises(ValueError):
            lambda_s(f, -1.0)

    def test_nonfinite_multiplier(self, rng):
        f = random_field(self.g, rng)
        with np.errstate(divide="ignore"), pytest.raises(ValueError):
            apply_multiplier(f, lambda xi: 1.0 / xi[0])


class TestLeray:
    @given(st.integers(0, 10_000))
    def test_projector_properties(self, seed):
        g = make_grid(3, 8, 2 * math.pi)
        v = random_field(g, np.random.default_rng(seed), vector=True)
        P, Q = leray_split(v)
        assert np.allclose((P + Q).coeffs, v.coeffs, atol=1e-12)
        assert np.abs(div(P).coeffs).max() < 1e-12
        assert np.abs(curl(Q).coeffs).max() < 1e-12
        inner = np.sum(P.coeffs * np.conj(Q.coeffs)).real
        assert abs(inner) < 1e-10 * np.sum(np.abs(v.coeffs) ** 2)
        P2, _ = leray_split(P)
        assert np.allclose(P2.coeffs, P.coeffs, atol=1e-12)


class TestRandomField:
    def test_real_band_limited(self, rng):
        g = make_grid(3, 16, 2 * math.pi)
        f = random_field(g, rng, k_max=4.0)
        assert f.hermitian_defect() < 1e-14
        assert np.all(f.coeffs[g.kmag > 4.0] == 0)
        assert np.all(f.coeffs[g.nyquist_mask] == 0)
        assert f.coeffs[0, 0, 0] == 0
        assert np.abs(np.fft.ifftn(f.coeffs).imag).max() < 1e-14

    def test_seed_reproducible(self):
        g = make_grid(2, 16, 1.0)
        a = random_field(g, np.random.default_rng(7))
        b = random_field(g, np.random.default_rng(7))
        assert np.array_equal(a.coeffs, b.coeffs)


class TestDilation:
    @pytest.mark.parametrize("lam", [2.0, 0.5, 3.0])
    def test_lp_scaling(self, lam, rng):
        g = make_grid(3, 8, 2 * math.pi)
        f = random_field(g, rng)
        h = dilate(f, lam)
        assert np.allclose(h.physical(), f.physical())
        for p in (2.0, 4.0):
            assert lp_norm(h, p) == pytest.approx(lam ** (-3 / p) * lp_norm(f, p), rel=1e-12)
        assert h.grid.k_min == pytest.approx(lam * g.k_min)
