"""End-to-end acceptance suite; each test prints one PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from besov_ns.harness import (
    DecayConfig,
    check_convolution_inequality,
    data_envelope,
    fit_rate,
    linear_decay_run,
    nonlinear_decay_run,
    verify_corollary,
)
from besov_ns.linear import heat_kernel_rate, radial_sobolev_norms, verify_lemma31
from besov_ns.littlewood_paley import BesovParams, besov_norm, build_partition, partition_for_grid
from besov_ns.model import derive_constants, ideal_gas, van_der_waals
from besov_ns.nonlinear import Integrator, compute_g, compute_k, effective_velocity, g_decomposition, k_term_list
from besov_ns.products import PROPOSITIONS, ProductCheckConfig, product_estimate_ratio
from besov_ns.spectral import dilate, div, make_grid, random_field
from besov_ns.state import State
from besov_ns.harness import ConfigError

IDEAL = ideal_gas()


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail

    return emit


def random_state(grid, rng, amp, k_max):
    comps = []
    for _ in range(grid.d + 2):
        f = random_field(grid, rng, k_max=k_max)
        comps.append(f.coeffs * (amp / np.abs(f.physical()).max()))
    return State.from_stacked(grid, np.stack(comps))


def test_01_partition_of_unity(report):
    start = time.perf_counter()
    grid = make_grid(3, 64, 2 * math.pi)
    part = partition_for_grid(grid)
    k = grid.kmag
    total = sum(part.block_symbol(j, k) for j in part.blocks)
    lo, hi = part.covered_range
    mask = (k > 0) & ~grid.nyquist_mask & (k >= lo) & (k <= hi)
    dev = float(np.max(np.abs(total[mask] - 1)))
    elapsed = time.perf_counter() - start
    report(1, dev <= 1e-8 and elapsed < 10, f"max deviation {dev:.2e}, {elapsed:.1f} s")


def test_02_dyadic_scaling(report):
    grid = make_grid(3, 16, 8 * math.pi)
    f = random_field(grid, np.random.default_rng(2), k_max=0.45 * grid.k_nyquist)
    h = dilate(f, 2.0)
    part = build_partition(-5, 5, 0)
    errs = []
    for sigma in (-1.0, 0.0, 1.5):
        bp = BesovParams(sigma, 2, 1)
        errs.append(abs(besov_norm(h, bp, part) / besov_norm(f, bp, part) - 2.0 ** (sigma - 1.5)))
    report(2, max(errs) <= 1e-6, f"max |ratio - 2^(sigma - d/2)| = {max(errs):.2e}")


def test_03_heat_kernel_rate(report):
    start = time.perf_counter()
    res = heat_kernel_rate(2.0, 1.0, 3, np.geomspace(10, 1e4, 31))
    elapsed = time.perf_counter() - start
    ok = abs(res.exponent + 0.75) <= 0.03 and elapsed < 10
    report(3, ok, f"exponent {res.exponent:.4f} (target -0.75), {elapsed:.2f} s")


def test_04_block_decay_rate(report):
    start = time.perf_counter()
    res = verify_lemma31(range(-6, 1), derive_constants(IDEAL), build_partition(-8, 4, 0), C=10.0)
    elapsed = time.perf_counter() - start
    ok = res.c0 > 0 and max(res.ratios.values()) <= 10 + 1e-9 and elapsed < 30
    report(4, ok, f"c0 = {res.c0:.4f} with C = 10, {elapsed:.1f} s")


def test_05_linear_low_frequency_decay(report):
    start = time.perf_counter()
    consts = derive_constants(IDEAL)
    t = np.geomspace(1, 1e4, 41)
    lines, ok = [], True
    for s1, s in ((1.5, 0.0), (1.5, 1.0), (0.5, 0.0), (-0.4, 1.0)):
        cfg = DecayConfig(s1=s1)
        rec = linear_decay_run(cfg, consts, [s], t)
        fit = fit_rate(t, rec.norms[s], (100, 1e4))
        target = -(s1 + s) / 2
        ok &= abs(fit.exponent - target) <= 0.05
        lines.append(f"(s1={s1:g}, s={s:g}) {fit.exponent:.4f} vs {target:.3f}")
    elapsed = time.perf_counter() - start
    report(5, ok and elapsed < 120, "; ".join(lines) + f", {elapsed:.1f} s")


def test_06_corollary_endpoint(report):
    cfg = DecayConfig(s1=1.5)
    t = np.geomspace(1, 1e4, 41)
    vals = radial_sobolev_norms(data_envelope(1.5, 3, 0), t, derive_constants(IDEAL), s=0.0)
    rep = verify_corollary(t, vals, 2.0, 0.0, cfg, tol=0.05, window=(100, 1e4))
    report(6, rep.passed and rep.target == -0.75, f"exponent {rep.fitted:.4f} (target {rep.target:.3f})")


def test_07_nonlinear_desk_run(report):
    start = time.perf_counter()
    cfg = DecayConfig(s1=1.5, j0=2)
    grid = make_grid(3, 32, 32 * math.pi)
    run = nonlinear_decay_run(cfg, grid, IDEAL, 1e-2, 50.0, dt=0.25)
    t = run.record.t
    fit = fit_rate(t, run.record.column("low_s0"), (5, 50))
    D = run.record.column("D_p")
    i1 = int(np.argmin(np.abs(t - 1.0)))
    growth = float(np.max(D[i1:]) / D[i1])
    elapsed = time.perf_counter() - start
    ok_i = run.rejections == 0 and run.min_density > 0
    ok_ii = abs(fit.exponent + 0.75) <= 0.15
    ok_iii = growth <= 10
    detail = (f"rejections {run.rejections}, min density {run.min_density:.4f}; exponent {fit.exponent:.4f} "
              f"(target -0.75); D_p growth {growth:.4f}; {elapsed:.0f} s")
    report(7, ok_i and ok_ii and ok_iii and elapsed < 900, detail)


def test_08_dual_assembly(report):
    rng = np.random.default_rng(8)
    grid = make_grid(3, 16, 2 * math.pi)
    models = (IDEAL, van_der_waals(mu=0.7, lam=0.4, kappa=1.3))
    worst = 0.0
    for i in range(20):
        s = random_state(grid, rng, 0.2, 0.45 * grid.k_nyquist)
        m = models[i % 2]
        g, gp = compute_g(s, m).coeffs, sum(p.coeffs for p in g_decomposition(s, m))
        k, kp = compute_k(s, m).coeffs, sum(p.coeffs for p in k_term_list(s, m))
        worst = max(worst, np.abs(g - gp).max() / np.abs(g).max(), np.abs(k - kp).max() / np.abs(k).max())
    report(8, worst <= 1e-12, f"max relative mismatch {worst:.2e} over 20 states")


def test_09_effective_velocity(report):
    rng = np.random.default_rng(9)
    grid = make_grid(3, 16, 2 * math.pi)
    worst = 0.0
    for _ in range(20):
        s = random_state(grid, rng, 0.2, grid.k_nyquist)
        res = div(effective_velocity(s)) + (s.a - div(s.v))
        worst = max(worst, float(np.abs(res.physical()).max()))
    report(9, worst <= 1e-12, f"max |div w + a - div v| = {worst:.2e} over 20 states")


def test_10_convolution_inequality(report):
    lines, ok = [], True
    for s1, s2 in ((0.5, 1.25), (1.0, 1.5), (1.2, 1.25)):
        coarse = check_convolution_inequality(s1, s2, 1e3, level=0)
        fine = check_convolution_inequality(s1, s2, 1e3, level=1)
        rel = abs(coarse.sup - fine.sup) / fine.sup
        ok &= math.isfinite(fine.sup) and rel <= 0.01
        lines.append(f"({s1:g}, {s2:g}) sup {fine.sup:.4f} change {rel:.1e}")
    try:
        check_convolution_inequality(1.0, 1.0)
        rejected = False
    except ConfigError:
        rejected = True
    report(10, ok and rejected, "; ".join(lines) + f"; (1, 1) rejected: {rejected}")


def test_11_product_estimates(report):
    start = time.perf_counter()
    lines, ok = [], True
    for prop in PROPOSITIONS:
        st = product_estimate_ratio(ProductCheckConfig(prop, trials=200))
        ok &= st.passed and st.ratios.size >= 200
        extra = f" N0={st.n0}" if prop in ("P2.4a", "P2.4b") else ""
        ok &= prop not in ("P2.4a", "P2.4b") or (st.n0 is not None and st.n0 <= 4)
        lines.append(f"{prop} spread {st.spread:.2f}{extra}")
    elapsed = time.perf_counter() - start
    report(11, ok and elapsed < 300, "; ".join(lines) + f"; {elapsed:.0f} s")


def test_12_solver_order(report):
    grid = make_grid(3, 16, 4 * math.pi)
    s0 = random_state(grid, np.random.default_rng(7), 0.2, 3 * grid.k_min)

    def solve(n):
        integ = Integrator(grid, IDEAL)
        s = s0
        for _ in range(n):
            s = integ.step(s, 1.0 / n)
        return s.stacked()

    ref = solve(256)
    ratio = np.linalg.norm(solve(8) - ref) / np.linalg.norm(solve(16) - ref)
    report(12, 3.6 <= ratio <= 4.4, f"error reduction factor {ratio:.3f} under step halving")
