"""Acceptance criteria, one test each, run at their stated tolerances and time budgets.

Every test prints a single line ``CRITERION <n> PASS|FAIL: <measurements>``.
Run directly with ``python3 tests/test_acceptance.py`` for just those lines.
"""

import math
import sys
import time

import mpmath as mp
import numpy as np
import pytest

from finsler_kato.constants import ExtremalProfile, ProblemParams, cone_coefficient_A, sharp_constant_cone, sharp_constant_halfspace
from finsler_kato.extremal import (
    ExtremalSolution,
    FluxField,
    divergence_free_check,
    normal_derivative_check,
    pde_residual,
    pde_tolerance,
    point_from_polar,
)
from finsler_kato.finsler import FinslerNorm, ProductNorm
from finsler_kato.isotropic import EuclideanBump, isotropic_integrals
from finsler_kato.quadrature import QuadratureSpec, boundary_quadrature, volume_quadrature
from finsler_kato.testfunctions import bump, random_bump
from finsler_kato.verify import check_inequality_cone, check_inequality_halfspace, rayleigh_sweep


def announce(capsys, number, passed, detail, elapsed, budget):
    within = elapsed <= budget
    status = "PASS" if passed and within else "FAIL"
    line = f"CRITERION {number} {status}: {detail}; runtime {elapsed:.2f}s (budget {budget:g}s)"
    with capsys.disabled():
        print("\n" + line)
    return passed and within, line


def base_norms(N):
    n = N - 1
    return {
        "euclidean": FinslerNorm.euclidean(n),
        "pnorm3": FinslerNorm.p_norm(n, 3.0),
        "diag": FinslerNorm.weighted_quadratic(np.diag(np.arange(1.0, n + 1.0))),
    }


def test_criterion_1_constant_formula(capsys):
    start = time.perf_counter()
    k42 = sharp_constant_halfspace(4, 2)
    k32 = sharp_constant_halfspace(3, 2)
    elapsed = time.perf_counter() - start
    with mp.workdps(40):
        ref42 = 2 / mp.pi
        ref32 = 2 * mp.gamma(mp.mpf(3) / 4) ** 2 / mp.gamma(mp.mpf(1) / 4) ** 2
    e42 = abs(k42 / float(ref42) - 1.0)
    e32 = abs(k32 / float(ref32) - 1.0)
    ok, line = announce(capsys, 1, e42 <= 1e-11 and e32 <= 1e-11, f"K(4,2) rel err {e42:.1e}, K(3,2) rel err {e32:.1e} (tol 1e-11)", elapsed, 1.0)
    assert ok, line


def test_criterion_2_boundedness_dichotomy(capsys):
    start = time.perf_counter()
    ys = np.concatenate([np.linspace(0.0, 0.99, 100), 1.0 - np.logspace(-2, -6, 41)])
    y_end = 1.0 - 1e-6
    pairs = [(N, 2.0 + f * (N - 2)) for N in (4, 5, 6, 7) for f in (0.0, 0.2, 0.4, 0.6, 0.8)]
    worst_bounded = 0.0
    worst_ratio = math.inf
    for N, beta in pairs:
        prof = ExtremalProfile.halfspace(N, beta)
        envelope = float(np.max(np.abs(prof.w(ys))))
        worst_bounded = max(worst_bounded, envelope / abs(prof.w(0.0)))
        for shift in (0.1, -0.1):
            wrong = prof.with_k(prof.k + shift)
            worst_ratio = min(worst_ratio, abs(wrong.w(y_end)) / envelope)
    elapsed = time.perf_counter() - start
    passed = worst_bounded <= 100.0 and worst_ratio >= 10.0
    detail = f"{len(pairs)} pairs; bounded sup/|w(0)| <= {worst_bounded:.3g} (limit 100); min |w_(k+-0.1)(1-1e-6)| / envelope = {worst_ratio:.3g} (need >= 10)"
    ok, line = announce(capsys, 2, passed, detail, elapsed, 10.0)
    assert ok, line


def test_criterion_3_ode_residual(capsys):
    start = time.perf_counter()
    h = 1e-3
    thetas = np.linspace(0.01, math.pi / 2 - 0.05, 200)
    worst = 0.0
    for N in (3, 4, 5):
        for beta in (2.0, (2.0 + N) / 2.0):
            prof = ExtremalProfile.halfspace(N, beta)
            c = ProblemParams(N, beta).ode_coefficient
            f = [prof.f(thetas + k * h) for k in (-2, -1, 0, 1, 2)]
            d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
            d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
            res = np.abs(d2 - (N - 2) * np.tan(thetas) * d1 - c * f[2]) / np.maximum(1.0, np.abs(f[2]))
            worst = max(worst, float(res.max()))
    elapsed = time.perf_counter() - start
    ok, line = announce(capsys, 3, worst <= 1e-6, f"max scaled residual {worst:.2e} over 6 (N,beta) pairs (tol 1e-6)", elapsed, 10.0)
    assert ok, line


def test_criterion_4_pde_residual(capsys):
    start = time.perf_counter()
    rhos = np.linspace(0.5, 2.0, 10)
    thetas = np.linspace(0.1, 1.4, 10)
    direction = np.array([0.3, -0.5, 0.8])
    worst = {}
    for label, base, beta, rel in [
        ("euclidean b=2", FinslerNorm.euclidean(3), 2.0, 1e-4),
        ("euclidean b=3", FinslerNorm.euclidean(3), 3.0, 1e-4),
        ("diag(1,2,3) b=3", FinslerNorm.weighted_quadratic(np.diag([1.0, 2.0, 3.0])), 3.0, 1e-3),
    ]:
        sol = ExtremalSolution.halfspace(base, 4, beta)
        ratios = []
        for rho in rhos:
            for theta in thetas:
                x, t = point_from_polar(sol.product_norm, rho, theta, direction)
                res = pde_residual(sol, x, float(t))
                ratios.append(abs(res) / pde_tolerance(sol, x, float(t), rel))
        worst[label] = max(ratios)
    elapsed = time.perf_counter() - start
    detail = ", ".join(f"{k}: max |res|/tol {v:.2e}" for k, v in worst.items())
    ok, line = announce(capsys, 4, max(worst.values()) <= 1.0, detail + " on 10x10 grids", elapsed, 30.0)
    assert ok, line


def test_criterion_5_normal_derivative(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    worst = 0.0
    count = 0
    for i in range(20):
        N = (3, 4, 5)[i % 3]
        beta = 2.0 + (N - 2) * rng.uniform(0.0, 0.9)
        base = list(base_norms(N).values())[i % 3]
        sol = ExtremalSolution.halfspace(base, N, beta)
        x = rng.standard_normal(N - 1) * rng.uniform(0.3, 3.0)
        worst = max(worst, normal_derivative_check(sol, x).residual)
        count += 1
    elapsed = time.perf_counter() - start
    ok, line = announce(capsys, 5, worst <= 1e-5, f"{count} boundary points, max relative residual {worst:.2e} (tol 1e-5)", elapsed, 5.0)
    assert ok, line


def _flux_points():
    rng = np.random.default_rng(6)
    points = []
    for i in range(20):
        x = rng.standard_normal(3)
        t = rng.uniform(0.2, 2.0)
        h = rng.uniform(0.5, 2.0)
        points.append((i % 2, x, t, h))
    return points


def test_criterion_6_divergence_free_flux(capsys):
    start = time.perf_counter()
    bases = [FinslerNorm.euclidean(3), FinslerNorm.weighted_quadratic(np.diag([1.0, 2.0, 3.0]))]
    worst = 0.0
    weakest_control = math.inf
    for which, x, t, h in _flux_points():
        product = ProductNorm(bases[which])
        profile = ExtremalProfile.halfspace(4, 3.0)
        good = divergence_free_check(FluxField(ExtremalSolution(product, profile)), (x, t), h)
        wrong = divergence_free_check(FluxField(ExtremalSolution(product, profile.with_k(0.0))), (x, t), h)
        worst = max(worst, good.ratio)
        weakest_control = min(weakest_control, wrong.ratio)
    elapsed = time.perf_counter() - start
    flux_ok = worst <= 1e-3
    control_ok = weakest_control > 1e-1
    detail = (
        f"20 points, max |div F|/scale {worst:.2e} (tol 1e-3) {'ok' if flux_ok else 'too large'}; "
        f"wrong-k (k=0) control min ratio {weakest_control:.2e} (need > 1e-1) {'ok' if control_ok else 'NOT MET: k=0 also solves the equation, its flux is divergence-free'}"
    )
    ok, line = announce(capsys, 6, flux_ok and control_ok, detail, elapsed, 10.0)
    assert ok, line


def _bump_resolution(N):
    return (24, 16, 32) if N <= 4 else (24, 16, 16)


def test_criterion_7_inequality_holds(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    combos = [(N, beta, name) for N in (3, 4, 5) for beta in (2.0, 3.0) if beta < N for name in ("euclidean", "pnorm3", "diag")]
    norms = {N: base_norms(N) for N in (3, 4, 5)}
    worst = math.inf
    failures = 0
    for i in range(50):
        N, beta, name = combos[i % len(combos)]
        product = ProductNorm(norms[N][name])
        u = random_bump(product, rng)
        q = QuadratureSpec(u.support[0], u.support[1], *_bump_resolution(N))
        rep = check_inequality_halfspace(u, product, N, beta, q)
        failures += not rep.holds
        worst = min(worst, (rep.slack + rep.error_estimate) / rep.lhs_boundary)
    elapsed = time.perf_counter() - start
    detail = f"50 bumps over {len(combos)} (N,beta,norm) combinations, {failures} violations, min (slack+err)/lhs {worst:.3f}"
    ok, line = announce(capsys, 7, failures == 0, detail, elapsed, 300.0)
    assert ok, line


def test_criterion_8_sharpness(capsys):
    start = time.perf_counter()
    rows = rayleigh_sweep(FinslerNorm.euclidean(3), 4, 2.0, [1, 2, 3, 4], n_radial=64, n_angular=32, n_sphere=8)
    ratios = [r.ratio for r in rows]
    elapsed = time.perf_counter() - start
    decreasing = all(b < a for a, b in zip(ratios, ratios[1:]))
    passed = decreasing and ratios[-1] <= 1.03 and min(ratios) >= 1.0
    detail = "quotient/K(4,2) for j=1..4: " + ", ".join(f"{v:.5f}" for v in ratios) + f"; strictly decreasing {decreasing}; final within 3% {ratios[-1] <= 1.03}"
    ok, line = announce(capsys, 8, passed, detail, elapsed, 120.0)
    assert ok, line


def test_criterion_9_cone_consistency(capsys):
    start = time.perf_counter()
    pairs = [(3, 2.0), (3, 2.5), (4, 2.0), (4, 3.0), (5, 2.0), (5, 3.5), (7, 4.0)]
    worst_limit = max(abs(sharp_constant_cone(N, b, 1e-5) / sharp_constant_halfspace(N, b) - 1.0) for N, b in pairs)
    a_exact = all(cone_coefficient_A(N, b, 0.0) == 1.0 for N, b in pairs)
    rng = np.random.default_rng(9)
    alpha = math.pi / 6
    failures = 0
    worst = math.inf
    count = 0
    for N, beta in [(3, 2.0), (4, 2.0), (4, 3.0), (5, 3.0)]:
        for name, base in base_norms(N).items():
            product = ProductNorm(base)
            u = random_bump(product, rng)
            q = QuadratureSpec(u.support[0], u.support[1], *_bump_resolution(N))
            rep = check_inequality_cone(u, product, N, beta, alpha, q)
            failures += not rep.holds
            worst = min(worst, (rep.slack + rep.error_estimate) / rep.lhs_boundary)
            count += 1
    elapsed = time.perf_counter() - start
    passed = worst_limit <= 1e-4 and a_exact and failures == 0
    detail = f"max |K(N,1e-5,b)/K(N,b)-1| {worst_limit:.2e} (tol 1e-4); A(0)=1 exactly {a_exact}; cone suite at pi/6: {count} bumps, {failures} violations, min (slack+err)/lhs {worst:.3f}"
    ok, line = announce(capsys, 9, passed, detail, elapsed, 120.0)
    assert ok, line


def test_criterion_10_euclidean_reduction(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(10)
    worst = 0.0
    count = 0
    for N, res in [(3, (24, 32, 32)), (4, (24, 32, 32)), (5, (24, 28, 28))]:
        base = FinslerNorm.euclidean(N - 1)
        product = ProductNorm(base)
        for _ in range(2):
            r1 = float(rng.uniform(0.3, 1.0))
            r2 = r1 * float(rng.uniform(1.5, 4.0))
            v = 0.5 * rng.standard_normal(N)
            amp = float(rng.uniform(0.5, 2.0))
            u = bump(product, r1, r2, v, amp)
            q = QuadratureSpec(r1, r2, *res)

            def integrand(x, t, rho):
                gx, gt = u.gradient(x, t)
                return np.stack([base(gx) ** 2 + gt**2, u(x, t) ** 2 / rho**2], axis=-1)

            volume = volume_quadrature(integrand, base, N, q)
            trace = boundary_quadrature(lambda x, t, s: u(x, t) ** 2 / s, base, N, q)
            finsler = np.array([volume[0], volume[1], float(trace)])
            iso = np.array(isotropic_integrals(EuclideanBump(r1, r2, v, amp), N, r1, r2, *res))
            worst = max(worst, float(np.max(np.abs(finsler - iso) / np.abs(iso))))
            count += 1
    elapsed = time.perf_counter() - start
    ok, line = announce(capsys, 10, worst <= 1e-10, f"{count} bumps over N=3,4,5, max relative difference of the three integrals {worst:.2e} (tol 1e-10)", elapsed, 60.0)
    assert ok, line


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
