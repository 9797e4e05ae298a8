"""Non-isotropic gauge, degenerate weight and gauge-polar coordinates on R^N x R.

The gauge ``rho(z, t) = (|z|^4 + 4 t^2)^(1/4)`` is homogeneous of degree one
under the dilations ``(z, t) -> (lam z, lam^2 t)``.  Gauge-polar coordinates
``(rho, phi, omega)`` are defined by

    z = rho * sin(phi)^(1/2) * omega,    t = rho^2 / 2 * cos(phi),

with ``omega`` a unit vector of R^N and ``0 <= phi <= pi``.  In these
coordinates ``dz dt = 1/2 rho^(N+1) sin(phi)^((N-2)/2) drho dphi domega``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.special import gamma, roots_jacobi, roots_legendre

from .errors import DomainError, ParameterError


@dataclass(frozen=True)
class GaugePoint:
    z: np.ndarray
    t: float

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float).reshape(-1)
        if z.size < 2:
            raise ParameterError("GaugePoint needs N >= 2 horizontal coordinates")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "t", float(self.t))

    @property
    def N(self) -> int:
        return self.z.size


@dataclass(frozen=True)
class PolarPoint:
    rho: float
    phi: float
    omega: np.ndarray
    degenerate: bool = field(default=False, compare=False)

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float).reshape(-1)
        if self.rho < 0:
            raise ParameterError("rho must be nonnegative")
        if not (0.0 <= self.phi <= math.pi):
            raise ParameterError("phi must lie in [0, pi]")
        if abs(np.linalg.norm(omega) - 1.0) > 1e-12:
            raise ParameterError("omega must be a unit vector")
        object.__setattr__(self, "omega", omega)

    @property
    def N(self) -> int:
        return self.omega.size


@dataclass(frozen=True)
class GaugeBall:
    """Gauge ball ``{(z, t): (|z|^4 + 4|t - center_t|^2)^(1/4) < radius}``."""

    radius: float
    center_t: float = 0.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ParameterError("gauge ball radius must be positive")

    def contains(self, z, t) -> np.ndarray:
        z = np.atleast_2d(z)
        return gauge_rho_array(z, np.asarray(t) - self.center_t) < self.radius


def gauge_rho_array(z, t):
    """Vectorized gauge; ``z`` has shape (..., N), ``t`` shape (...)."""
    z = np.asarray(z, dtype=float)
    r2 = np.sum(z * z, axis=-1)
    return (r2 * r2 + 4.0 * np.asarray(t, dtype=float) ** 2) ** 0.25


def gauge_rho(p: GaugePoint) -> float:
    return float(gauge_rho_array(p.z, p.t))


def weight_psi(p: GaugePoint) -> float:
    """``psi = |z|^2 / rho^2``; equals ``sin(phi)`` in gauge-polar coordinates."""
    r2 = float(p.z @ p.z)
    denom = math.sqrt(r2 * r2 + 4.0 * p.t * p.t)
    if denom == 0.0:
        raise DomainError("gauge origin: psi undefined")
    return r2 / denom


def weight_psi_array(z, t):
    z = np.asarray(z, dtype=float)
    r2 = np.sum(z * z, axis=-1)
    denom = np.sqrt(r2 * r2 + 4.0 * np.asarray(t, dtype=float) ** 2)
    if np.any(denom == 0.0):
        raise DomainError("gauge origin: psi undefined")
    return r2 / denom


def to_polar(p: GaugePoint) -> PolarPoint:
    rho = gauge_rho(p)
    if rho == 0.0:
        raise DomainError("gauge origin has no polar representation")
    r = float(np.linalg.norm(p.z))
    # atan2 keeps full relative accuracy near both poles
    phi = math.atan2(r * r, 2.0 * p.t)
    if r == 0.0:
        omega = np.zeros(p.N)
        omega[0] = 1.0
        return PolarPoint(rho, phi, omega, degenerate=True)
    return PolarPoint(rho, phi, p.z / r)


def from_polar(q: PolarPoint) -> GaugePoint:
    z = q.rho * math.sqrt(math.sin(q.phi)) * q.omega
    t = 0.5 * q.rho**2 * math.cos(q.phi)
    return GaugePoint(z, t)


def to_polar_array(z, t):
    """Vectorized map to ``(rho, phi, omega)``; degenerate points get ``omega = e1``."""
    z = np.asarray(z, dtype=float)
    t = np.asarray(t, dtype=float)
    r = np.linalg.norm(z, axis=-1)
    rho = np.sqrt(np.sqrt(r**4 + 4.0 * t * t))
    if np.any(rho == 0.0):
        raise DomainError("gauge origin has no polar representation")
    phi = np.arctan2(r * r, 2.0 * t)
    omega = np.zeros_like(z)
    nz = r > 0
    omega[nz] = z[nz] / r[nz, None]
    omega[~nz, 0] = 1.0
    return rho, phi, omega


def from_polar_array(rho, phi, omega):
    rho = np.asarray(rho, dtype=float)
    phi = np.asarray(phi, dtype=float)
    z = (rho * np.sqrt(np.sin(phi)))[..., None] * np.asarray(omega, dtype=float)
    t = 0.5 * rho**2 * np.cos(phi)
    return z, t


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere S^{N-1} in R^N."""
    return 2.0 * math.pi ** (N / 2) / gamma(N / 2)


def polar_jacobian(rho, phi, N: int):
    """Density of ``dz dt`` with respect to ``drho dphi domega``."""
    return 0.5 * np.asarray(rho) ** (N + 1) * np.sin(phi) ** ((N - 2) / 2)


def ball_volume(ball: GaugeBall, N: int, resolution: int = 16) -> float:
    """Lebesgue volume of a gauge ball by tensor quadrature in polar coordinates.

    The radial factor uses Gauss-Legendre nodes on ``[0, r]``; the ``phi``
    factor ``sin(phi)^((N-2)/2) dphi`` becomes ``(1 - x^2)^((N-4)/4) dx`` in
    ``x = cos(phi)`` and is integrated by the matching Gauss-Jacobi rule.
    """
    if resolution < 8:
        raise ParameterError("ball_volume needs at least 8 nodes per axis")
    if N < 2:
        raise ParameterError("N must be at least 2")
    r = ball.radius
    x, w = roots_legendre(resolution)
    rho = 0.5 * r * (x + 1.0)
    radial = 0.5 * r * np.sum(w * 0.5 * rho ** (N + 1))
    a = (N - 4) / 4
    _, wphi = roots_jacobi(resolution, a, a)
    return float(radial * np.sum(wphi) * sphere_area(N))


def ball_volume_exact(radius: float, N: int) -> float:
    """Closed form ``r^(N+2)/(2(N+2)) * B(1/2, N/4) * |S^{N-1}|``."""
    phi_int = math.sqrt(math.pi) * gamma(N / 4) / gamma(N / 4 + 0.5)
    return radius ** (N + 2) / (2 * (N + 2)) * phi_int * sphere_area(N)
