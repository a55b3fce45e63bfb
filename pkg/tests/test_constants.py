import csv
import io
import json
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from finsler_kato.constants import (
    ExtremalProfile,
    ProblemParams,
    SharpConstantReport,
    angular_derivative_at_zero,
    angular_solution,
    boundedness_coefficients,
    boundedness_residual,
    cone_coefficient_A,
    format_number,
    k_from_boundedness,
    sharp_constant_cone,
    sharp_constant_halfspace,
    sharp_constant_report,
)
from finsler_kato.errors import ParameterError

# mpmath, 30 digits (oracles.sharp_constant)
GOLDEN_K = {
    (3, 2.0): 0.22847329052223181,
    (4, 2.0): 0.63661977236758134,
    (5, 2.0): 1.0942198076132383,
    (4, 3.0): 0.5,
    (5, 3.0): 1.0,
    (6, 3.5): 1.4082912447176388,
    (7, 2.5): 2.042304477809142,
}

# mpmath, 30 digits (oracles.cone_constant / oracles.cone_A)
GOLDEN_CONE = {
    (4, 2.0, math.pi / 6): (0.37757938936174625, 0.76980035891950102),
    (5, 3.0, math.pi / 6): (0.57735026918962576, 0.66666666666666667),
    (4, 2.0, -0.3): (-0.47757191097825163, 0.84683677164911243),
    (3, 2.0, 0.7): (0.11344667798741392, 0.88920115239821469),
}

VALID = st.integers(3, 8).flatmap(lambda n: st.tuples(st.just(n), st.floats(2.0, n - 0.05)))


@pytest.mark.parametrize("key", sorted(GOLDEN_K))
def test_sharp_constant_golden(key):
    assert sharp_constant_halfspace(*key) == pytest.approx(GOLDEN_K[key], rel=1e-13)


def test_sharp_constant_hand_values():
    assert sharp_constant_halfspace(4, 2) == pytest.approx(2.0 / math.pi, rel=1e-14)
    expected = 2.0 * math.gamma(0.75) ** 2 / math.gamma(0.25) ** 2
    assert sharp_constant_halfspace(3, 2) == pytest.approx(expected, rel=1e-13)


def test_sharp_constant_vanishes_at_top_weight():
    assert 0.0 < sharp_constant_halfspace(5, 5 - 1e-6) < 1e-5
    values = [sharp_constant_halfspace(5, 5 - 2.0**-j) for j in range(1, 25)]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-6


@settings(max_examples=80, deadline=None, derandomize=True)
@given(VALID)
def test_sharp_constant_positive_and_matches_oracle(nb):
    N, beta = nb
    K = sharp_constant_halfspace(N, beta)
    assert K > 0.0 and math.isfinite(K)
    assert K == pytest.approx(float(oracles.sharp_constant(N, beta)), rel=1e-12)


@pytest.mark.parametrize("N, beta, alpha", [(2, 2, 0), (4, 1.5, 0), (4, 4, 0), (4, 2, 1.6), (4.5, 2, 0), ("x", 2, 0), (4, float("nan"), 0)])
def test_parameter_validation(N, beta, alpha):
    with pytest.raises(ParameterError):
        ProblemParams(N, beta, alpha)


def test_params_normalise_types():
    p = ProblemParams(4.0, 2, 0)
    assert isinstance(p.N, int) and isinstance(p.beta, float)
    assert p.hardy_coefficient == 0.0
    assert ProblemParams(5, 3).ode_coefficient == pytest.approx(9 / 4 - 1 / 4)


@settings(max_examples=60, deadline=None, derandomize=True)
@given(VALID)
def test_boundedness_condition_reproduces_constant(nb):
    # the Gamma formula and the y -> 1 cancellation condition are two routes to K
    N, beta = nb
    assert k_from_boundedness(N, beta) == pytest.approx(-sharp_constant_halfspace(N, beta), rel=1e-12)
    assert boundedness_residual(N, beta) <= 1e-10


def test_boundedness_coefficients_against_gamma_oracle():
    for N, beta in [(4, 2.0), (5, 2.0), (6, 3.0), (7, 2.5)]:
        (a1, b1, c1), (a2, b2, c2) = oracles.branch_params(N, beta)
        d = c1 - a1 - b1
        even = mp.gamma(c1) * mp.gamma(-d) / (mp.gamma(a1) * mp.gamma(b1))
        odd = mp.gamma(c2) * mp.gamma(-d) / (mp.gamma(a2) * mp.gamma(b2))
        c_even, c_odd = boundedness_coefficients(N, beta)
        assert c_even == pytest.approx(float(even), rel=1e-12)
        assert c_odd == pytest.approx(float(odd), rel=1e-12)


def test_boundedness_residual_detects_wrong_k():
    assert boundedness_residual(5, 2, k=0.0) == pytest.approx(1.0)
    assert boundedness_residual(5, 2, k=-sharp_constant_halfspace(5, 2) + 0.1) > 1e-2


def test_profile_at_zero_is_scale():
    prof = ExtremalProfile.halfspace(4, 2)
    assert angular_solution(prof, 0.0) == 1.0
    cone = ExtremalProfile.cone(4, 2, 0.4)
    assert cone.w(0.0) == pytest.approx(cone.scale, rel=1e-15)


@pytest.mark.parametrize("N, beta", [(3, 2.0), (4, 2.0), (5, 3.0), (6, 2.4), (7, 4.5)])
def test_profile_matches_mpmath(N, beta):
    prof = ExtremalProfile.halfspace(N, beta)
    K = oracles.sharp_constant(N, beta)
    for y in [0.0, 0.1, 0.5, 0.8, 0.99, 1 - 1e-6]:
        ref = float(oracles.w(N, beta, -K, y)) if y < 0.5 else float(oracles.w_bounded(N, beta, y))
        assert prof.w(y) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_bounded_profile_stays_small_near_one():
    prof = ExtremalProfile.halfspace(4, 2)
    assert abs(prof.w(1 - 1e-6)) <= 10.0 * abs(prof.w(0.5))


def test_wrong_branch_blows_up_with_gamma_coefficient():
    prof = ExtremalProfile.halfspace(5, 2).with_k(0.0)
    ys = 1.0 - np.logspace(-3, -7, 5)
    scaled = np.abs(prof.w(ys)) * (1.0 - ys)
    limit = float(mp.gamma(0.5) / mp.gamma(0.75) ** 2)
    assert scaled[-1] == pytest.approx(limit, rel=1e-5)
    assert np.all(np.diff(np.abs(scaled - limit)) < 0)


def test_w_prime_matches_finite_difference():
    prof = ExtremalProfile.halfspace(5, 3)
    for y in [0.05, 0.3, 0.6, 0.9]:
        h = 1e-6
        fd = (prof.w(y + h) - prof.w(y - h)) / (2 * h)
        assert prof.w_prime(y) == pytest.approx(fd, rel=1e-7)


@pytest.mark.parametrize("N, beta", [(3, 2.0), (4, 2.0), (4, 3.0), (5, 2.0), (6, 5.0), (8, 3.3)])
def test_angular_derivative_at_zero(N, beta):
    prof = ExtremalProfile.halfspace(N, beta)
    K = sharp_constant_halfspace(N, beta)
    assert abs(angular_derivative_at_zero(prof) + K) <= 1e-8
    # a one-sided difference of f agrees with the analytic limit
    h = 1e-7
    assert (prof.f(h) - prof.f(0.0)) / h == pytest.approx(-K, rel=1e-5)


def test_angular_derivative_examples():
    assert angular_derivative_at_zero(ExtremalProfile.halfspace(4, 2)) == pytest.approx(-2 / math.pi, rel=1e-14)
    assert angular_derivative_at_zero(ExtremalProfile.halfspace(3, 2)) == pytest.approx(-0.2284732905222318, rel=1e-13)


@pytest.mark.parametrize("N, beta", [(3, 2.0), (4, 3.0), (5, 2.0), (5, 4.0)])
def test_profile_solves_angular_ode(N, beta):
    prof = ExtremalProfile.halfspace(N, beta)
    c = ProblemParams(N, beta).ode_coefficient
    h = 1e-3
    for theta in np.linspace(0.01, math.pi / 2 - 0.05, 40):
        f = [prof.f(theta + k * h) for k in (-2, -1, 0, 1, 2)]
        d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
        res = d2 - (N - 2) * math.tan(theta) * d1 - c * f[2]
        assert abs(res) <= 1e-6 * max(1.0, abs(f[2]))


def test_cone_coefficient_examples():
    assert cone_coefficient_A(4, 2, 0.0) == 1.0
    assert cone_coefficient_A(7, 3.5, 0.0) == 1.0
    expected = float(mp.hyp2f1(0.5, 0.5, 0.5, 0.5) - (2 / mp.pi) * (mp.sqrt(2) / 2) * mp.hyp2f1(1, 1, 1.5, 0.5))
    assert cone_coefficient_A(4, 2, math.pi / 4) == pytest.approx(expected, rel=1e-13)
    assert cone_coefficient_A(4, 2, math.pi / 4) == pytest.approx(0.70710678118654752, rel=1e-13)


@pytest.mark.parametrize("key", sorted(GOLDEN_CONE))
def test_cone_golden(key):
    K_golden, A_golden = GOLDEN_CONE[key]
    assert sharp_constant_cone(*key) == pytest.approx(K_golden, rel=1e-12)
    assert cone_coefficient_A(*key) == pytest.approx(A_golden, rel=1e-13)


def test_cone_constant_two_derivative_routes():
    p = ProblemParams(4, 2, math.pi / 6)
    prof = ExtremalProfile(p, -sharp_constant_halfspace(4, 2))
    y = math.sin(p.alpha) ** 2
    h = 1e-5
    fd = (prof.w(y + h) - prof.w(y - h)) / (2 * h)
    assert abs(prof.w_prime(y) - fd) <= 1e-6 * abs(fd)


@settings(max_examples=40, deadline=None, derandomize=True)
@given(VALID, st.floats(0.01, 1.4))
def test_cone_parity(nb, alpha):
    N, beta = nb
    assert cone_coefficient_A(N, beta, -alpha) == cone_coefficient_A(N, beta, alpha)
    assert sharp_constant_cone(N, beta, -alpha) == pytest.approx(-sharp_constant_cone(N, beta, alpha), rel=1e-14)


@pytest.mark.parametrize("N, beta", [(3, 2.0), (4, 2.0), (5, 3.0), (7, 6.0)])
def test_cone_limit(N, beta):
    K = sharp_constant_halfspace(N, beta)
    assert sharp_constant_cone(N, beta, 0.0) == K
    assert abs(sharp_constant_cone(N, beta, 1e-5) - K) <= 1e-4 * K
    assert abs(sharp_constant_cone(N, beta, 1e-9) - K) <= 1e-8 * K


def test_report_fields_and_serialisation():
    rep = sharp_constant_report(4, 2, math.pi / 6)
    assert rep.A == pytest.approx(0.76980035891950102, rel=1e-13)
    data = json.loads(rep.to_json())
    assert data["N"] == 4 and data["K"] == float(format_number(rep.K))
    assert float(format_number(data["K"])) == data["K"]
    rows = list(csv.DictReader(io.StringIO(SharpConstantReport.csv_text([rep, sharp_constant_report(ProblemParams(3, 2))]))))
    assert [r["N"] for r in rows] == ["4", "3"]
    assert float(rows[1]["K"]) == pytest.approx(GOLDEN_K[(3, 2.0)], rel=1e-11)


def test_report_negative_alpha_diagnostic():
    rep = sharp_constant_report(4, 2, -0.3)
    assert rep.K < 0
    assert "sign" in rep.diagnostics
    assert "sign" not in sharp_constant_report(4, 2, 0.3).diagnostics


@settings(max_examples=200, deadline=None, derandomize=True)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_format_number_round_trips(x):
    text = format_number(x)
    assert format_number(float(text)) == text
    assert float(text) == pytest.approx(x, rel=1e-11, abs=0.0)
