"""Gegenbauer polynomials, real spherical harmonics and Gauss-Jacobi rules."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy.special import gammaln, roots_jacobi, roots_legendre, sph_harm_y

from .errors import ParameterError
from .gauge import sphere_area


@dataclass(frozen=True)
class GegenbauerParams:
    degree: int
    index: float

    def __post_init__(self):
        if self.degree < 0:
            raise ParameterError("Gegenbauer degree must be nonnegative")
        if not self.index > 0:
            raise ParameterError("Gegenbauer index must be positive")


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    a: float
    b: float

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def _check_index(lam):
    if not lam > 0:
        raise ParameterError(f"Gegenbauer index must be positive, got {lam}")


def gegenbauer(m: int, lam: float, x):
    """``C_m^lam(x)`` by the forward three-term recurrence."""
    _check_index(lam)
    if m < 0:
        raise ParameterError("Gegenbauer degree must be nonnegative")
    return gegenbauer_table(m, lam, x)[m]


def gegenbauer_table(m: int, lam: float, x) -> np.ndarray:
    """All of ``C_0^lam(x), ..., C_m^lam(x)`` stacked along axis 0."""
    _check_index(lam)
    x = np.asarray(x, dtype=float)
    out = np.empty((m + 1,) + x.shape)
    out[0] = 1.0
    if m >= 1:
        out[1] = 2.0 * lam * x
    for n in range(2, m + 1):
        out[n] = (2.0 * (n + lam - 1.0) * x * out[n - 1] - (n + 2.0 * lam - 2.0) * out[n - 2]) / n
    return out


def gegenbauer_log_norm2(n: int, lam: float) -> float:
    """log of ``int_{-1}^{1} C_n^lam(x)^2 (1-x^2)^(lam-1/2) dx``."""
    return (
        math.log(math.pi)
        + (1.0 - 2.0 * lam) * math.log(2.0)
        + gammaln(n + 2.0 * lam)
        - gammaln(n + 1.0)
        - math.log(n + lam)
        - 2.0 * gammaln(lam)
    )


def normalized_gegenbauer_table(m: int, lam: float, x) -> np.ndarray:
    """Gegenbauer polynomials scaled to unit norm under ``(1-x^2)^(lam-1/2)``.

    Uses the recurrence for the orthonormal family directly so that large
    degrees neither overflow nor lose accuracy.
    """
    _check_index(lam)
    x = np.asarray(x, dtype=float)
    out = np.empty((m + 1,) + x.shape)
    out[0] = math.exp(-0.5 * gegenbauer_log_norm2(0, lam))
    if m == 0:
        return out
    # monic-type recurrence coefficients for the orthonormal system:
    # x p_n = b_{n+1} p_{n+1} + b_n p_{n-1}
    def b(n):
        return 0.5 * math.sqrt(n * (n + 2.0 * lam - 1.0) / ((n + lam) * (n + lam - 1.0)))

    out[1] = x * out[0] / b(1)
    for n in range(1, m):
        out[n + 1] = (x * out[n] - b(n) * out[n - 1]) / b(n + 1)
    return out


def gegenbauer_derivative_table(m: int, lam: float, x) -> np.ndarray:
    """``d/dx C_n^lam`` for n = 0..m, via ``2 lam C_{n-1}^{lam+1}``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros((m + 1,) + x.shape)
    if m >= 1:
        out[1:] = 2.0 * lam * gegenbauer_table(m - 1, lam + 1.0, x)
    return out


@lru_cache(maxsize=4096)
def harmonic_dimension(N: int, l: int) -> int:
    """Dimension ``d_l`` of degree-l spherical harmonics on S^{N-1}.

    ``(N+2l-2) Gamma(N+l-2) / (Gamma(l+1) Gamma(N-1))``, with ``d_0 = 1``.
    """
    if l < 0:
        raise ParameterError("harmonic degree must be nonnegative")
    if l == 0:
        return 1
    if N == 2:
        return 2
    logd = math.log(N + 2 * l - 2) + gammaln(N + l - 2) - gammaln(l + 1) - gammaln(N - 1)
    return int(round(math.exp(logd)))


def sphere_laplacian_eigenvalue(N: int, l: int) -> int:
    return -l * (l + N - 2)


def _angles(N, omega):
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    # hyperspherical chart: z_N = cos(theta_1), and the
    # last angle is measured from e_2 toward e_1
    azimuth = np.arctan2(omega[:, 0], omega[:, 1])
    if N == 2:
        return azimuth, None
    polar = np.arccos(np.clip(omega[:, N - 1], -1.0, 1.0))
    return azimuth, polar


def _zonal(N, l, omega):
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    if N == 2:
        theta = np.arctan2(omega[:, 0], omega[:, 1])
        if l == 0:
            return np.full(theta.shape, 1.0 / math.sqrt(2.0 * math.pi))
        return np.cos(l * theta) / math.sqrt(math.pi)
    mu = (N - 2) / 2
    y = np.clip(omega[:, N - 1], -1.0, 1.0)
    p = normalized_gegenbauer_table(l, mu, y)[l]
    return p / math.sqrt(sphere_area(N - 1))


def sphere_harmonic(N: int, l: int, j: int, omega, zonal: bool = False):
    """Real orthonormal spherical harmonic ``Y_{l,j}`` on S^{N-1}.

    Full bases exist for N in {2, 3}.  ``zonal=True`` returns the normalized
    zonal harmonic of degree l (any N >= 2; ``j`` must be 0).
    """
    if zonal:
        if j != 0:
            raise ParameterError("zonal-only mode has a single harmonic per degree")
        return _zonal(N, l, omega)
    if N not in (2, 3):
        raise ParameterError("general-N harmonics unsupported; zonal-only mode available")
    d = harmonic_dimension(N, l)
    if not 0 <= j < d:
        raise ParameterError(f"harmonic index j={j} out of range for d_{l}={d}")
    azimuth, polar = _angles(N, omega)
    if N == 2:
        if l == 0:
            return np.full(azimuth.shape, 1.0 / math.sqrt(2.0 * math.pi))
        f = np.cos if j == 0 else np.sin
        return f(l * azimuth) / math.sqrt(math.pi)
    m = j - l
    y = sph_harm_y(l, abs(m), polar, azimuth)
    if m == 0:
        return y.real
    if m > 0:
        return math.sqrt(2.0) * y.real
    return math.sqrt(2.0) * y.imag


def harmonic_indices(N: int, L: int, zonal: bool = False):
    """All ``(l, j)`` pairs with ``l <= L``."""
    out = []
    for l in range(L + 1):
        d = 1 if zonal else harmonic_dimension(N, l)
        out.extend((l, j) for j in range(d))
    return out


def harmonic_matrix(N: int, L: int, omega, zonal: bool = False):
    """Rows are ``Y_{l,j}`` evaluated at the given unit vectors."""
    idx = harmonic_indices(N, L, zonal)
    return idx, np.array([sphere_harmonic(N, l, j, omega, zonal=zonal) for l, j in idx])


@lru_cache(maxsize=256)
def _gauss_jacobi_cached(n, a, b):
    x, w = roots_jacobi(n, a, b)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_jacobi(n: int, a: float, b: float) -> QuadratureRule:
    """n-point Gauss-Jacobi rule for the weight ``(1-x)^a (1+x)^b`` on [-1, 1]."""
    if n < 1:
        raise ParameterError("quadrature needs at least one node")
    if not (a > -1 and b > -1):
        raise ParameterError(f"Jacobi exponents must exceed -1, got a={a}, b={b}")
    x, w = _gauss_jacobi_cached(int(n), float(a), float(b))
    return QuadratureRule(x, w, float(a), float(b))


@dataclass(frozen=True)
class OmegaRule:
    """Quadrature on S^{N-1} exact for harmonics products up to degree ``2L``."""

    N: int
    L: int
    nodes: np.ndarray
    weights: np.ndarray
    zonal: bool


@lru_cache(maxsize=64)
def omega_rule(N: int, L: int, zonal: bool = False) -> OmegaRule:
    if N < 2:
        raise ParameterError("N must be at least 2")
    if N == 2:
        M = 2 * L + 2
        theta = 2.0 * math.pi * np.arange(M) / M
        nodes = np.stack([np.sin(theta), np.cos(theta)], axis=1)
        weights = np.full(M, 2.0 * math.pi / M)
    elif N == 3 and not zonal:
        y, wy = roots_legendre(L + 1)
        M = 2 * L + 2
        az = 2.0 * math.pi * np.arange(M) / M
        s = np.sqrt(1.0 - y * y)
        nodes = np.stack(
            [np.outer(s, np.sin(az)).ravel(), np.outer(s, np.cos(az)).ravel(), np.repeat(y, M)],
            axis=1,
        )
        weights = np.repeat(wy, M) * (2.0 * math.pi / M)
    else:
        if not zonal:
            raise ParameterError("general-N harmonics unsupported; zonal-only mode available")
        e = (N - 3) / 2
        rule = gauss_jacobi(L + 1, e, e)
        y = rule.nodes
        nodes = np.zeros((y.size, N))
        nodes[:, 0] = np.sqrt(1.0 - y * y)
        nodes[:, N - 1] = y
        weights = rule.weights * sphere_area(N - 1)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return OmegaRule(N, L, nodes, weights, zonal or N > 3)
