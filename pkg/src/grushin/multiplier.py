"""Mellin multiplier a_s(eta, k), its dyadic band decomposition and kernel bounds.

The symbol is

    a_s(eta, k) = -(eta - iA)(eta - iB),
    A, B = s + (N+1)/2 -/+ sqrt(k(N+k) + s + (N+1)^2/4),

so that ``A*B = (s-k)(s+k+N)`` and ``|a_s|^2 = (eta^2 + A^2)(eta^2 + B^2)``.
A partition of unity ``Phi_0..Phi_m`` in the variable ``r = |eta - iA|``
splits ``1/a_s`` into band symbols ``b_s^beta``; each band yields a
convolution kernel in the Mellin variable whose L1 norm is measured here.
"""
from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import polygamma

from .errors import ParameterError


@dataclass(frozen=True)
class MultiplierParams:
    s: float
    N: int = 2

    def __post_init__(self):
        if self.N < 2:
            raise ParameterError("N must be at least 2")
        if not self.s > 100:
            raise ParameterError(f"s must exceed 100, got {self.s}")
        if abs(abs(self.s - math.floor(self.s) - 0.5)) > 1e-12:
            raise ParameterError(f"s must have distance 1/2 to the integers, got {self.s}")

    @property
    def m(self) -> int:
        return band_count(self.s)


def band_count(s: float) -> int:
    """Largest m with ``2^m <= s/10``."""
    m = int(math.floor(math.log2(s / 10.0)))
    while 2.0 ** (m + 1) <= s / 10.0:
        m += 1
    while 2.0**m > s / 10.0:
        m -= 1
    return m


def roots_AB(params: MultiplierParams, k):
    k = np.asarray(k, dtype=float)
    N, s = params.N, params.s
    c = s + (N + 1) / 2.0
    root = np.sqrt(k * (N + k) + s + (N + 1) ** 2 / 4.0)
    # A = (s-k)(s+k+N)/B avoids cancellation when k is close to s
    B = c + root
    A = (s - k) * (s + k + N) / B
    return A, B


def multiplier_a_s(params: MultiplierParams, eta, k):
    A, B = roots_AB(params, k)
    eta = np.asarray(eta, dtype=float)
    return -(eta - 1j * A) * (eta - 1j * B)


def multiplier_modulus(params: MultiplierParams, eta, k):
    A, B = roots_AB(params, k)
    e2 = np.asarray(eta, dtype=float) ** 2
    return np.sqrt((e2 + A * A) * (e2 + B * B))


def _smoothstep(x):
    """Quintic smoothstep with first and second derivatives (C^2 at both ends)."""
    x = np.clip(x, 0.0, 1.0)
    v = x**3 * (10.0 - 15.0 * x + 6.0 * x * x)
    d1 = 30.0 * x * x * (1.0 - x) ** 2
    d2 = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x)
    return v, d1, d2


@dataclass(frozen=True)
class BandFamily:
    """Telescoping partition ``Phi_0 = 1 - E_1``, ``Phi_b = E_b - E_{b+1}``, ``Phi_m = E_m``.

    ``E_b`` rises from 0 to 1 on ``[2^(b-2), 2^(b-1)]`` for ``b < m`` and on
    ``[s/40, 2^(m-1)]`` for ``b = m``.
    """

    s: float
    m: int
    ramps: tuple

    def _edge(self, b, r, order):
        if b < 1:
            return np.ones_like(r) if order == 0 else np.zeros_like(r)
        if b > self.m:
            return np.zeros_like(r)
        lo, hi = self.ramps[b - 1]
        w = hi - lo
        v = _smoothstep((r - lo) / w)
        return v[order] / w**order

    def phi(self, beta: int, r, order: int = 0):
        """``d^order Phi_beta / dr^order`` at r (order <= 2)."""
        if not 0 <= beta <= self.m:
            raise ParameterError(f"band index {beta} outside 0..{self.m}")
        r = np.asarray(r, dtype=float)
        return self._edge(beta, r, order) - self._edge(beta + 1, r, order)

    def support(self, beta: int):
        if beta == 0:
            return (0.0, self.ramps[0][1])
        lo = self.ramps[beta - 1][0]
        hi = self.ramps[beta][1] if beta < self.m else math.inf
        return (lo, hi)

    def derivative_constants(self, samples: int = 20001):
        """Measured ``max_beta sup_r |Phi_beta^(l)| 2^(beta l)`` for l = 0, 1, 2."""
        out = []
        for order in range(3):
            best = 0.0
            for beta in range(self.m + 1):
                lo, hi = self.support(beta)
                hi = min(hi, 2.0 ** (self.m + 1))
                r = np.linspace(max(lo, 1e-9), hi, samples)
                best = max(best, float(np.max(np.abs(self.phi(beta, r, order)))) * 2.0 ** (beta * order))
            out.append(best)
        return out


def partition_deviation(family: BandFamily, r) -> float:
    """``max |sum_beta Phi_beta(r) - 1|`` over the sample points r."""
    r = np.asarray(r, dtype=float)
    total = sum(family.phi(b, r) for b in range(family.m + 1))
    return float(np.max(np.abs(total - 1.0)))


def band_partition(params: MultiplierParams) -> BandFamily:
    m = params.m
    if m < 1:
        raise ParameterError("band partition needs m >= 1")
    ramps = [(2.0 ** (b - 2), 2.0 ** (b - 1)) for b in range(1, m)]
    ramps.append((params.s / 40.0, 2.0 ** (m - 1)))
    return BandFamily(params.s, m, tuple(ramps))


def band_symbol(params: MultiplierParams, family: BandFamily, beta: int, eta, k, order: int = 0):
    """``d^order/deta^order b_s^beta(eta, k)`` with ``b = Phi_beta(|eta - iA|)/a_s`` (order <= 2)."""
    A, B = roots_AB(params, k)
    eta = np.asarray(eta, dtype=float)
    r = np.sqrt(eta * eta + A * A)
    a = -(eta - 1j * A) * (eta - 1j * B)
    p0 = family.phi(beta, r, 0)
    if order == 0:
        return p0 / a
    p1 = family.phi(beta, r, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(r > 0, eta / r, 0.0)
        r2 = np.where(r > 0, A * A / r**3, 0.0)
    f1 = p1 * r1
    a1 = -(2.0 * eta - 1j * (A + B))
    if order == 1:
        return f1 / a - p0 * a1 / a**2
    if order != 2:
        raise ParameterError("band_symbol supports derivative order <= 2")
    p2 = family.phi(beta, r, 2)
    f2 = p2 * r1 * r1 + p1 * r2
    a2 = -2.0
    return f2 / a - 2.0 * f1 * a1 / a**2 + p0 * (2.0 * a1 * a1 / a**3 - a2 / a**2)


_GL_X, _GL_W = leggauss(48)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


def _panel_integral(f, lo, hi):
    """Gauss-Legendre integral of f(eta) over [lo_k, hi_k] for every k at once."""
    L = (hi - lo)[:, None]
    x = lo[:, None] + L * _GL_X[None, :]
    return np.sum(f(x) * _GL_W[None, :], axis=1) * L[:, 0]


def _tail_integral(f, lo, scale):
    """Integral over [lo_k, inf) via ``eta = lo + scale*u/(1-u)``."""
    u = _GL_X[None, :]
    x = lo[:, None] + scale[:, None] * u / (1.0 - u)
    jac = scale[:, None] / (1.0 - u) ** 2
    return np.sum(f(x) * jac * _GL_W[None, :], axis=1)


def _sub_panels(lo, hi, pieces=4):
    edges = [lo + (hi - lo) * i / pieces for i in range(pieces + 1)]
    return list(zip(edges[:-1], edges[1:]))


def eta_moments(params: MultiplierParams, family: BandFamily, beta: int, k):
    """``S_j(k) = int_R |d^j b_s^beta / deta^j| deta`` for j = 0, 2.

    The eta line is split where ``r = |eta - iA|`` crosses a ramp endpoint so
    every panel integrand is smooth.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    A, B = roots_AB(params, k)
    lo_r, hi_r = family.support(beta)
    marks = sorted({lo_r, hi_r} | {x for pair in family.ramps for x in pair})
    A2 = A * A
    cuts = [np.zeros_like(A)]
    for rb in marks:
        if math.isfinite(rb):
            cuts.append(np.sqrt(np.maximum(rb * rb - A2, 0.0)))
    cuts = np.sort(np.stack(cuts), axis=0)
    out = []
    for order in (0, 2):
        def f(eta):
            return np.abs(band_symbol(params, family, beta, eta, k[:, None], order))
        total = np.zeros_like(A)
        for i in range(cuts.shape[0] - 1):
            for lo, hi in _sub_panels(cuts[i], cuts[i + 1]):
                total += _panel_integral(f, lo, hi)
        if not math.isfinite(hi_r):
            total += _tail_integral(f, cuts[-1], np.abs(A) + B)
        out.append(2.0 * total)
    return out[0], out[1]


def _k_window(params: MultiplierParams, family: BandFamily, beta: int):
    """All k for which ``b_s^beta(., k)`` can be nonzero (finite for beta < m)."""
    hi_r = family.support(beta)[1]
    s = params.s
    span = int(math.ceil(2.0 * hi_r)) + 2
    k0 = max(0, int(math.floor(s)) - span)
    k1 = int(math.ceil(s)) + span
    k = np.arange(k0, k1 + 1)
    A, _ = roots_AB(params, k)
    return k[np.abs(A) <= hi_r]


@dataclass
class BandKernelReport:
    s: float
    beta: int
    m: int
    S0: float
    S2: float
    l1: float
    l1_majorant: float
    tail_bound: float
    k_count: int

    @property
    def scaled(self) -> float:
        return self.l1 * self.s


def band_kernel_l1(
    params: MultiplierParams,
    family: Optional[BandFamily] = None,
    beta: int = 0,
    k_factor: float = 8.0,
    majorant_constant: float = 1.0,
) -> BandKernelReport:
    """L1 norm of the measured convolution kernel of band ``beta``.

    Integrating by parts j times bounds the kernel by ``S_j/|r|^j``.  For
    ``beta < m`` the k-sum is taken first, ``f(r) = min(S0, S2/r^2)`` with
    ``S_j = sum_k S_j(k)``, whose L1 norm is ``4 sqrt(S0 S2)``.  For
    ``beta = m`` the bound is applied per k and summed, truncating at
    ``k <= k_factor * s`` with an integral-test remainder.  ``l1_majorant``
    is the L1 norm of the majorant ``C 2^beta / (s (1 + 2^beta r)^10)``
    (respectively ``sum_k C/((k+s)(1+(k+s)^2 r^2))``) for ``C = majorant_constant``.
    """
    family = family or band_partition(params)
    s, m = params.s, family.m
    if not 0 <= beta <= m:
        raise ParameterError(f"band index {beta} outside 0..{m}")
    if beta < m:
        k = _k_window(params, family, beta)
        S0, S2 = eta_moments(params, family, beta, k)
        S0, S2 = float(S0.sum()), float(S2.sum())
        l1 = 4.0 * math.sqrt(S0 * S2)
        maj = majorant_constant * 2.0 / (9.0 * s)
        return BandKernelReport(s, beta, m, S0, S2, l1, maj, 0.0, int(k.size))
    K = int(math.ceil(k_factor * s))
    k = np.arange(0, K + 1)
    S0, S2 = eta_moments(params, family, beta, k)
    per_k = 4.0 * np.sqrt(S0 * S2)
    # summand decays like c/(k+s)^2; bound the remainder by c/(K+s)
    tail_c = float(np.max((per_k * (k + s) ** 2)[-max(10, K // 10):]))
    tail = tail_c / (K + s)
    l1 = float(per_k.sum()) + tail
    maj = majorant_constant * math.pi * float(polygamma(1, s))
    return BandKernelReport(s, beta, m, float(S0.sum()), float(S2.sum()), l1, maj, tail, int(k.size))


def inverse_square_tail(s: float, K: int = 10**6):
    """``sum_{k>=0} 1/(k+s)^2`` by partial sum to K plus the integral-test bound ``1/(K+s)``."""
    k = np.arange(0, K + 1, dtype=float)
    partial = float(np.sum(1.0 / (k + s) ** 2))
    return partial, 1.0 / (K + s)


@dataclass
class DerivativeBoundReport:
    beta: int
    sup_first: float
    scaled_first: float
    sup_second: float
    scaled_second: float


def derivative_bound(params: MultiplierParams, family: BandFamily, beta: int, n_eta: int = 801):
    """Measured ``sup |d^j b_s^beta|`` scaled by ``s 2^beta 2^(j beta)`` for j = 1, 2."""
    if beta >= family.m:
        raise ParameterError("derivative_bound applies to beta < m")
    k = _k_window(params, family, beta)
    hi = family.support(beta)[1]
    eta = np.linspace(-hi, hi, n_eta)
    d1 = np.abs(band_symbol(params, family, beta, eta[None, :], k[:, None], 1))
    d2 = np.abs(band_symbol(params, family, beta, eta[None, :], k[:, None], 2))
    scale = params.s * 2.0**beta
    s1, s2 = float(d1.max()), float(d2.max())
    return DerivativeBoundReport(beta, s1, s1 * scale * 2.0**beta, s2, s2 * scale * 4.0**beta)


@dataclass
class ModulusReport:
    s: float
    c1: float
    c2: float
    samples: int
    upper_ok: bool

    @property
    def spread(self) -> float:
        return self.c2 / self.c1


def modulus_equivalence_check(params: MultiplierParams, k_max: Optional[int] = None, n_eta: int = 401):
    """Range of ``|a_s| / (|eta|+s+k)^2`` on the support of ``b_s^m``."""
    family = band_partition(params)
    s, N = params.s, params.N
    k_max = int(4 * s) if k_max is None else k_max
    k = np.arange(0, k_max + 1)[:, None]
    eta = np.concatenate([-np.geomspace(1e-3, 40 * s, n_eta // 2)[::-1], [0.0], np.geomspace(1e-3, 40 * s, n_eta // 2)])[None, :]
    A, B = roots_AB(params, k)
    r = np.sqrt(eta**2 + A**2)
    mask = family.phi(family.m, r) > 0
    mod = multiplier_modulus(params, eta, k)
    ratio = mod / (np.abs(eta) + s + k) ** 2
    upper = np.all(mod <= (np.abs(eta) + np.abs(A)) * (np.abs(eta) + B) * (1 + 1e-14)) and np.all(
        (np.abs(eta) + np.abs(A)) * (np.abs(eta) + B) <= (np.abs(eta) + s + k + N + 1) ** 2
    )
    sel = ratio[mask]
    return ModulusReport(s, float(sel.min()), float(sel.max()), int(sel.size), bool(upper))


def min_modulus_scan(params: MultiplierParams, k_max: int, etas):
    """Smallest ``|a_s(eta,k)| / (|s-k|(s+k+N))`` over the grid (at least 1 in exact arithmetic)."""
    k = np.arange(0, k_max + 1)[:, None]
    mod = multiplier_modulus(params, np.asarray(etas)[None, :], k)
    bound = np.abs(params.s - k) * (params.s + k + params.N)
    return float(np.min(mod / bound)), float(np.min(mod))


@dataclass
class SweepReport:
    s_values: list
    per_band: list
    aggregate: list
    aggregate_scaled: list
    band_scaled_max: list
    slope: float

    @property
    def band_spread(self) -> float:
        return max(self.band_scaled_max) / min(self.band_scaled_max)

    @property
    def aggregate_spread(self) -> float:
        return max(self.aggregate_scaled) / min(self.aggregate_scaled)


def kernel_sweep(s_values, N: int = 2) -> SweepReport:
    """Per-band and aggregate kernel norms for each s.

    ``aggregate_scaled`` is ``s * sum_beta ||f_s^beta|| / log2(s)``; ``slope``
    is its least-squares slope against ``log2(s)`` relative to its mean.
    """
    per_band, agg, agg_scaled, band_max = [], [], [], []
    for s in s_values:
        params = MultiplierParams(s, N)
        family = band_partition(params)
        reps = [band_kernel_l1(params, family, b) for b in range(family.m + 1)]
        per_band.append(reps)
        total = sum(r.l1 for r in reps)
        agg.append(total)
        agg_scaled.append(total * s / math.log2(s))
        band_max.append(max(r.scaled for r in reps))
    x = np.log2(np.asarray(s_values, dtype=float))
    y = np.asarray(agg_scaled)
    slope = float(np.polyfit(x, y, 1)[0]) / float(y.mean()) if len(s_values) > 1 else 0.0
    return SweepReport(list(s_values), per_band, agg, agg_scaled, band_max, slope)
