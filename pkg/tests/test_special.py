import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import eval_gegenbauer

from grushin.errors import ParameterError
from grushin.special import (
    gauss_jacobi,
    gegenbauer,
    gegenbauer_derivative_table,
    gegenbauer_log_norm2,
    gegenbauer_table,
    harmonic_dimension,
    harmonic_indices,
    harmonic_matrix,
    normalized_gegenbauer_table,
    omega_rule,
    sphere_harmonic,
)


def test_gegenbauer_examples():
    assert gegenbauer(0, 0.7, 0.3) == 1.0
    assert gegenbauer(2, 1.0, 0.5) == pytest.approx(0.0, abs=1e-15)
    x = sp.Symbol("x")
    lam = sp.Rational(1, 1)
    closed = sp.expand(sp.gegenbauer(2, lam, x))
    assert closed == 2 * lam * (1 + lam) * x**2 - lam
    assert float(closed.subs(x, sp.Rational(1, 2))) == 0.0


def test_gegenbauer_orthogonality_n2():
    lam = 0.5
    val, _ = quad(lambda x: gegenbauer(2, lam, x) * gegenbauer(4, lam, x) * (1 - x * x) ** (lam - 0.5), -1, 1)
    assert abs(val) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 6.0), st.floats(-1, 1))
def test_gegenbauer_closed_forms(lam, x):
    c = gegenbauer_table(3, lam, x)
    closed = [
        1.0,
        2 * lam * x,
        2 * lam * (1 + lam) * x**2 - lam,
        4 / 3 * lam * (1 + lam) * (2 + lam) * x**3 - 2 * lam * (1 + lam) * x,
    ]
    np.testing.assert_allclose(c, closed, rtol=1e-12, atol=1e-12 * max(1.0, lam**3))


@pytest.mark.parametrize("lam", [0.25, 0.5, 1.75, 3.0])
def test_gegenbauer_matches_scipy(lam):
    x = np.linspace(-1, 1, 33)
    for m in range(12):
        np.testing.assert_allclose(gegenbauer(m, lam, x), eval_gegenbauer(m, lam, x), rtol=1e-11, atol=1e-11)


@pytest.mark.parametrize("lam", [0.5, 0.75, 2.25])
def test_normalized_table_is_orthonormal(lam):
    rule = gauss_jacobi(40, lam - 0.5, lam - 0.5)
    P = normalized_gegenbauer_table(30, lam, rule.nodes)
    G = (P * rule.weights) @ P.T
    np.testing.assert_allclose(G, np.eye(31), atol=1e-12)
    norms = [math.exp(gegenbauer_log_norm2(n, lam)) for n in range(6)]
    direct = [quad(lambda x: eval_gegenbauer(n, lam, x) ** 2 * (1 - x * x) ** (lam - 0.5), -1, 1)[0] for n in range(6)]
    np.testing.assert_allclose(norms, direct, rtol=1e-9)


def test_gegenbauer_derivative():
    x = np.linspace(-0.9, 0.9, 7)
    h = 1e-6
    d = gegenbauer_derivative_table(5, 0.8, x)
    fd = (gegenbauer_table(5, 0.8, x + h) - gegenbauer_table(5, 0.8, x - h)) / (2 * h)
    np.testing.assert_allclose(d, fd, atol=1e-7)


def test_gegenbauer_rejects_bad_index():
    with pytest.raises(ParameterError):
        gegenbauer(2, 0.0, 0.1)
    with pytest.raises(ParameterError):
        gegenbauer(-1, 1.0, 0.1)


def test_harmonic_dimension():
    assert harmonic_dimension(3, 2) == 5
    assert harmonic_dimension(2, 0) == 1
    assert harmonic_dimension(2, 5) == 2
    for N in (3, 4, 5):
        for l in range(1, 8):
            closed = (N + 2 * l - 2) * math.factorial(N + l - 3) // (math.factorial(l) * math.factorial(N - 2))
            assert harmonic_dimension(N, l) == closed


def test_sphere_harmonic_constant_n2():
    om = np.array([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]])
    np.testing.assert_allclose(sphere_harmonic(2, 0, 0, om), 1 / math.sqrt(2 * math.pi))


def _independent_s2_rule(n=40):
    y, wy = np.polynomial.legendre.leggauss(n)
    M = 2 * n + 1
    az = 2 * math.pi * (np.arange(M) + 0.5) / M
    s = np.sqrt(1 - y * y)
    nodes = np.stack([np.outer(s, np.cos(az)).ravel(), np.outer(s, np.sin(az)).ravel(), np.repeat(y, M)], axis=1)
    return nodes, np.repeat(wy, M) * 2 * math.pi / M


@pytest.mark.parametrize("N", [2, 3])
def test_harmonic_gram_independent_rule(N):
    if N == 2:
        th = 2 * math.pi * (np.arange(101) + 0.3) / 101
        nodes, w = np.stack([np.cos(th), np.sin(th)], axis=1), np.full(101, 2 * math.pi / 101)
    else:
        nodes, w = _independent_s2_rule()
    idx, Y = harmonic_matrix(N, 8, nodes)
    G = (Y * w) @ Y.T
    assert np.max(np.abs(G - np.eye(len(idx)))) <= 1e-9


@pytest.mark.parametrize("N", [2, 3])
def test_omega_rule_exact_for_products(N):
    L = 8
    rule = omega_rule(N, L)
    idx, Y = harmonic_matrix(N, L, rule.nodes)
    G = (Y * rule.weights) @ Y.T
    np.testing.assert_allclose(G, np.eye(len(idx)), atol=1e-12)
    assert len(idx) == sum(harmonic_dimension(N, l) for l in range(L + 1))
    assert harmonic_indices(N, 2) == idx[: len(harmonic_indices(N, 2))]


def test_zonal_mode_general_n():
    rule = omega_rule(5, 6, zonal=True)
    Y = np.array([sphere_harmonic(5, l, 0, rule.nodes, zonal=True) for l in range(7)])
    np.testing.assert_allclose((Y * rule.weights) @ Y.T, np.eye(7), atol=1e-12)
    with pytest.raises(ParameterError):
        omega_rule(5, 6)


def test_gauss_jacobi_examples():
    r = gauss_jacobi(1, 0, 0)
    np.testing.assert_allclose(r.nodes, [0.0], atol=1e-15)
    np.testing.assert_allclose(r.weights, [2.0])
    r = gauss_jacobi(2, 0, 0)
    assert r.integrate(r.nodes**2) == pytest.approx(2 / 3, abs=1e-15)
    r = gauss_jacobi(20, 0.25, 0.25)
    ref, _ = quad(lambda x: 1.0, -1, 1, weight="alg", wvar=(0.25, 0.25), epsabs=1e-14, epsrel=1e-13)
    assert abs(r.integrate(np.ones(20)) - ref) <= 1e-12
    with pytest.raises(ParameterError):
        gauss_jacobi(4, -1.0, 0.0)
    with pytest.raises(ParameterError):
        gauss_jacobi(0, 0.0, 0.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 32), st.floats(-0.9, 3.0), st.floats(-0.9, 3.0))
def test_gauss_jacobi_monomial_exactness(n, a, b):
    rule = gauss_jacobi(n, a, b)
    for deg in (0, n, 2 * n - 1):
        ref, _ = quad(lambda x: x**deg, -1, 1, weight="alg", wvar=(b, a), epsabs=1e-13, epsrel=1e-12, limit=200)
        got = rule.integrate(rule.nodes**deg)
        assert abs(got - ref) <= 1e-10 * max(1.0, abs(ref), float(np.sum(np.abs(rule.weights))))
