import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize, special

from sardelay.errors import InvalidArgumentError
from sardelay.specfun import (
    f_breve_t,
    find_b_phi,
    fresnel,
    phi,
    phi_marginal_v2,
    sinc,
    sine_integral,
)

# 30-digit adaptive quadrature of the defining integral (mpmath), frozen
PHI_REFERENCE = {
    (2.0, 10.0): 0.48079588156401523861 + 0.096917223158582398797j,
    (0.3, -4.2): 0.88362637414923205679 - 0.31490942845692989507j,
    (7.5, 250.0): 0.093602242882745078304 + 0.057117730450954230229j,
    (-40.0, 900.0): 0.033637102127840948596 - 0.048787059530887448871j,
    (0.0, 1e-4): 0.9999999999375 + 8.3333333329613099232e-6j,
    (1.2, 5e-4): 0.77669923747497564932 + 0.000025153119378296533547j,
}
SI_2 = 1.60541297680269484857672
F_BREVE_3_7 = 2.9932690973407346771
B_PHI = 22.957715801385132183


def phi_quadrature(v1, v2, panels=4000, order=40):
    # composite Gauss-Legendre; resolves the integrand for |v1|, |v2| <= 1e4
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(-0.5, 0.5, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1] - edges[0])
    s = (mid + half * x).ravel()
    wt = np.tile(half * w, panels)
    return np.sum(wt * np.exp(2j * v1 * s + 1j * v2 * s * s))


def test_phi_origin():
    assert phi(0.0, 0.0) == pytest.approx(1.0, abs=1e-15)


def test_phi_sinc_zero():
    assert abs(phi(math.pi, 0.0)) <= 1e-15


@pytest.mark.parametrize("args,expected", list(PHI_REFERENCE.items()))
def test_phi_matches_reference(args, expected):
    assert abs(phi(*args) - expected) <= 1e-12


def test_phi_against_gauss_legendre_4000():
    x, w = np.polynomial.legendre.leggauss(4000)
    s = 0.5 * x
    oracle = np.sum(0.5 * w * np.exp(2j * 2.0 * s + 1j * 10.0 * s * s))
    assert abs(phi(2.0, 10.0) - oracle) <= 1e-10


@pytest.mark.parametrize("v1,v2", [
    (1e4, 1e4), (-1e4, 3e3), (123.4, -9876.5), (0.0, 1e4), (1e4, 0.0),
    (5e3, 2e-3), (0.7, 9e-4), (-2500.0, -2500.0), (33.0, 66.0),
])
def test_phi_large_arguments(v1, v2):
    assert abs(phi(v1, v2) - phi_quadrature(v1, v2)) <= 1e-10


def test_phi_vectorized_matches_scalar():
    v1 = np.array([0.0, 1.0, -3.0, 40.0])
    v2 = np.array([0.0, 2e-4, 17.0, -300.0])
    vec = phi(v1, v2)
    for k in range(4):
        assert vec[k] == phi(float(v1[k]), float(v2[k]))


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_phi_rejects_non_finite(bad):
    with pytest.raises(InvalidArgumentError):
        phi(bad, 1.0)
    with pytest.raises(InvalidArgumentError):
        phi(1.0, bad)
    with pytest.raises(InvalidArgumentError):
        phi_marginal_v2(bad)


def test_first_marginal_is_sinc():
    v1 = np.linspace(-50, 50, 10_000)
    assert np.max(np.abs(phi(v1, 0.0) - np.sinc(v1 / np.pi))) <= 1e-9


def test_sinc_at_zero():
    assert sinc(0.0) == 1.0
    assert sinc(np.array([0.0]))[0] == 1.0


def test_marginal_at_zero():
    assert phi_marginal_v2(0.0) == 1.0


@pytest.mark.parametrize("v2", [1.0, 10.0, 100.0, 0.5, 2.5e-4, 5e3])
def test_marginal_agrees_with_phi(v2):
    assert abs(phi_marginal_v2(v2) - phi(0.0, v2)) <= 1e-9
    assert abs(phi_marginal_v2(v2) - phi_quadrature(0.0, v2)) <= 1e-10


def test_marginal_fresnel_closed_form():
    # scipy's Cephes Fresnel integrals as an independent oracle
    v2 = np.linspace(0.01, 2000.0, 20_000)
    t = np.sqrt(v2 / (2 * np.pi))
    s_ref, c_ref = special.fresnel(t)
    expected = (c_ref + 1j * s_ref) / t
    assert np.max(np.abs(phi_marginal_v2(v2) - expected)) <= 1e-9
    assert np.max(np.abs(phi_marginal_v2(-v2) - np.conj(expected))) <= 1e-9


def test_marginal_sign_symmetry():
    assert phi_marginal_v2(-7.5) == pytest.approx(np.conj(phi_marginal_v2(7.5)), abs=1e-15)


def test_fresnel_matches_scipy():
    x = np.concatenate([np.linspace(-12, 12, 4001), [1e3, 3.3e4]])
    c, s = fresnel(x)
    s_ref, c_ref = special.fresnel(x)
    assert np.max(np.abs(c - c_ref)) <= 1e-12
    assert np.max(np.abs(s - s_ref)) <= 1e-12


def test_b_phi_value():
    b = find_b_phi()
    assert 22.0 <= b <= 24.0
    assert b == pytest.approx(B_PHI, abs=1e-6)


def test_b_phi_is_local_minimum():
    b = find_b_phi()
    assert abs(phi(0.0, b)) < abs(phi(0.0, b - 0.5))
    assert abs(phi(0.0, b)) < abs(phi(0.0, b + 0.5))


def test_b_phi_dense_scan_oracle():
    v = np.arange(1.0, 40.0, 1e-4)
    t = np.sqrt(v / (2 * np.pi))
    s_ref, c_ref = special.fresnel(t)
    mod = np.abs(c_ref + 1j * s_ref) / t
    interior = np.flatnonzero((mod[1:-1] < mod[:-2]) & (mod[1:-1] < mod[2:])) + 1
    k = interior[0]

    def modulus(x):
        tt = math.sqrt(x / (2 * math.pi))
        ss, cc = special.fresnel(tt)
        return abs(cc + 1j * ss) / tt

    res = optimize.minimize_scalar(
        modulus, bracket=(v[k - 1], v[k], v[k + 1]), method="golden", tol=1e-12)
    assert find_b_phi() == pytest.approx(res.x, abs=1e-6)


def test_sine_integral_values():
    assert sine_integral(0.0) == 0.0
    assert abs(sine_integral(1e6) - math.pi / 2) <= 2e-6
    assert abs(sine_integral(2.0) - SI_2) <= 1e-12


def test_sine_integral_quadrature_oracle():
    oracle, _ = integrate.quad(lambda x: np.sinc(x / np.pi), 0.0, 2.0, epsabs=1e-13, epsrel=1e-13)
    assert abs(sine_integral(2.0) - oracle) <= 1e-12


def test_f_breve_values():
    assert f_breve_t(0.0) == pytest.approx(math.pi / 2, abs=1e-15)
    assert abs(f_breve_t(20 * math.pi) - math.pi) <= 1e-2
    assert abs(f_breve_t(3.7) - F_BREVE_3_7) <= 1e-12


def _f_breve_quadrature(zeta, cutoff=1e4):
    # integral of sinc^2(zeta - x) over x in [0, cutoff] plus the 1/(2 u^2) tail
    f = lambda x: np.sinc((zeta - x) / np.pi) ** 2
    zeros = zeta + np.pi * np.arange(math.floor(-zeta / np.pi) + 1, math.ceil((cutoff - zeta) / np.pi))
    pts = np.concatenate(([0.0], zeros[(zeros > 0) & (zeros < cutoff)], [cutoff]))
    x, w = np.polynomial.legendre.leggauss(24)
    mid = 0.5 * (pts[1:] + pts[:-1])[:, None]
    half = 0.5 * (pts[1:] - pts[:-1])[:, None]
    total = float(np.sum(half * w * f(mid + half * x)))
    return total + 0.5 / (cutoff - zeta)


def test_f_breve_against_quadrature():
    zetas = np.linspace(-10 * np.pi, 40 * np.pi, 101)
    err = max(abs(f_breve_t(z) - _f_breve_quadrature(z)) for z in zetas)
    assert err <= 1e-6
    assert abs(f_breve_t(3.7) - _f_breve_quadrature(3.7)) <= 1e-6


def test_f_breve_plateau():
    assert abs(f_breve_t(1e4) - math.pi) <= 1e-3


def test_f_breve_bounded_below_on_positive_axis():
    z = np.linspace(0.0, 200.0, 200_001)
    assert np.all(f_breve_t(z) >= math.pi / 2 - 1e-12)


def test_parseval_identity():
    # integral over eta of phi(eta, a) conj(phi(eta, b)) = pi phi(0, a - b)
    x, w = np.polynomial.legendre.leggauss(20)
    edges = np.linspace(-500.0, 500.0, 20_001)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1] - edges[0])
    eta = (mid + half * x).ravel()
    wt = np.tile(half * w, len(edges) - 1)
    for a, b in [(0.0, 0.0), (5.0, -3.0), (23.0, 10.0)]:
        lhs = np.sum(wt * phi(eta, a) * np.conj(phi(eta, b)))
        rhs = math.pi * phi(0.0, a - b)
        assert abs(lhs - rhs) <= 0.01 * abs(rhs)


def test_phi_bounded_random_grid():
    rng = np.random.default_rng(7)
    v = rng.uniform(-1e3, 1e3, size=(2, 100_000))
    assert np.max(np.abs(phi(v[0], v[1]))) <= 1.0 + 1e-12


finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(finite, finite)
def test_phi_modulus_at_most_one(v1, v2):
    assert abs(phi(v1, v2)) <= 1.0 + 1e-12


@settings(max_examples=300, deadline=None)
@given(finite, finite)
def test_phi_reflection_symmetry(v1, v2):
    assert abs(phi(-v1, v2) - np.conj(phi(v1, -v2))) <= 1e-12
    assert abs(abs(phi(-v1, v2)) - abs(phi(v1, v2))) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-2e-3, max_value=2e-3), st.floats(min_value=-20, max_value=20))
def test_phi_continuous_across_switch(v2, v1):
    assert abs(phi(v1, v2) - phi_quadrature(v1, v2, panels=20, order=40)) <= 1e-12
