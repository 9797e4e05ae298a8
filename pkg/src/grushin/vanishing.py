"""Ball masses, vanishing-order fits, the psi-weighted equivalence, a Hölder
step with the weight psi, and Dini integrability.

Separable fields ``u = F(rho) G(sigma)`` factor every ball integral into a
radial and an angular piece:

    int_{B_r} |u|^p psi^w dz dt = 1/2 int_0^r rho^(N+1) |F|^p drho * int |G|^p sin^(w-1) dOmega.

Radial pieces are kept in log form since ``exp(-1/rho)`` underflows long
before the smallest default radius.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.special import betaln, logsumexp

from .carleman import harmonic_lp_integral
from .errors import DegenerateFamilyError, DivergenceError, ParameterError
from .gauge import sphere_area
from .solver import ModeField
from .spectral import ModeIndex, channel_gram, channel_lambda, channel_profiles, check_mode

DEFAULT_RADII = tuple(2.0**-i for i in range(1, 13))
INFINITE_ORDER_THRESHOLD = 40.0

_GL_X, _GL_W = leggauss(24)


@dataclass(frozen=True)
class RadialLaw:
    """Radial factor F given through ``log|F(e^y)|``.

    kinds: ``power`` (rho^a), ``exp`` (exp(-rho^-a)), ``bump``
    ((1 - (rho/a)^2)^4 inside rho < a), ``zero`` and ``custom`` (``log_abs``).
    """

    kind: str
    a: float = 0.0
    log_abs: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in ("power", "exp", "bump", "zero", "custom"):
            raise ParameterError(f"unknown radial law {self.kind!r}")
        if self.kind == "custom" and self.log_abs is None:
            raise ParameterError("custom radial law needs log_abs")
        if self.kind in ("exp", "bump") and self.a <= 0:
            raise ParameterError("exp and bump laws need a > 0")

    def log_value(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == "power":
            return self.a * y
        if self.kind == "exp":
            return -np.exp(-self.a * y)
        if self.kind == "zero":
            return np.full(y.shape, -np.inf)
        if self.kind == "bump":
            u = np.exp(2.0 * (y - math.log(self.a)))
            with np.errstate(divide="ignore"):
                return np.where(u < 1.0, 4.0 * np.log(np.clip(1.0 - u, 0.0, None)), -np.inf)
        return np.asarray(self.log_abs(y), dtype=float)

    def __call__(self, rho):
        with np.errstate(divide="ignore"):
            return np.exp(self.log_value(np.log(np.asarray(rho, dtype=float))))


@dataclass(frozen=True)
class AngularProfile:
    """Angular factor G: an eigenbasis mode, ``sin(phi)^c`` or zero."""

    kind: str
    mode: Optional[tuple] = None
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in ("mode", "sin_power", "zero"):
            raise ParameterError(f"unknown angular profile {self.kind!r}")

    def integral(self, N: int, p: float, w: float) -> float:
        """``int |G|^p sin(phi)^w dOmega``; raises DivergenceError on the exponent test."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "sin_power":
            m = self.c * p + w + N / 2.0
            if not m > -1:
                raise DivergenceError(f"angular integral diverges: sin exponent {m} <= -1", exponent=m)
            return sphere_area(N) * math.exp(betaln((m + 1) / 2, 0.5))
        k, l, j = check_mode(ModeIndex(*self.mode), N, zonal=N > 3)
        a = (N - 2) / 4.0 + l * p / 4.0 + w / 2.0
        if not a > -1:
            raise DivergenceError(f"angular integral diverges: (1-x^2) exponent {a} <= -1", exponent=a)
        n = (k - l) // 2
        if p == 2:
            return float(channel_gram(N, l, k, 2.0 * a - 2.0 * channel_lambda(N, l) + 1.0)[n, n])

        def f(x):
            return abs(channel_profiles(N, l, k, np.array([x]))[n, 0]) ** p

        val, _ = quad(f, -1.0, 1.0, weight="alg", wvar=(a, a), limit=400, epsabs=0.0, epsrel=1e-11)
        ylp = harmonic_lp_integral(N, l, j, p) if N in (2, 3) else harmonic_lp_integral(N, l, 0, p)
        return val * ylp


@dataclass(frozen=True)
class SeparableField:
    N: int
    radial: RadialLaw
    angular: AngularProfile
    coeff: float = 1.0

    @classmethod
    def power(cls, N: int, a: float, mode=(0, 0, 0)):
        return cls(N, RadialLaw("power", a), AngularProfile("mode", tuple(mode)))

    @classmethod
    def zero(cls, N: int):
        return cls(N, RadialLaw("zero"), AngularProfile("mode", (0, 0, 0)))

    def is_zero(self):
        return self.coeff == 0 or self.radial.kind == "zero" or self.angular.kind == "zero"


def log_radial_integral(law: RadialLaw, r: float, p: float, e: float, span: float = 2000.0) -> float:
    """``log int_0^r rho^e |F|^p drho``; DivergenceError when the origin end diverges."""
    if law.kind == "zero":
        return -math.inf
    if law.kind == "power":
        rate = e + 1 + p * law.a
        if rate <= 0:
            raise DivergenceError(f"radial integral diverges at 0: exponent {rate - 1} <= -1", exponent=rate - 1)
        return rate * math.log(r) - math.log(rate)
    y1 = math.log(r)

    def g(y):
        return (e + 1) * y + p * law.log_value(y)

    # panels graded toward the outer end, then uniform back to the origin side
    d = np.concatenate([[0.0], 1e-10 * 2.0 ** np.arange(0, 34)])
    d = d[d < 1.0]
    d = np.concatenate([d, np.arange(1.0, span + 1.0, 1.0)])
    edges = y1 - d
    a, b = edges[1:], edges[:-1]
    h = 0.5 * (b - a)
    ys = (0.5 * (a + b))[:, None] + h[:, None] * _GL_X[None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        vals = g(ys)
    if np.any(np.isnan(vals)):
        raise ParameterError("radial law not evaluable near the origin")
    peak = np.max(vals)
    if not np.isfinite(peak):
        return -math.inf
    tail = vals[-1, 0]
    if tail > peak - 50.0:
        slope = (vals[-1, -1] - vals[-1, 0]) / (ys[-1, -1] - ys[-1, 0])
        raise DivergenceError(
            f"radial integrand not decaying toward the origin (local exponent {slope - 1:.3g})", exponent=slope - 1
        )
    logw = np.log(h)[:, None] + np.log(_GL_W)[None, :]
    return float(logsumexp(vals + logw))


def _weight_power(weight) -> float:
    if weight in (None, "none"):
        return 0.0
    if weight == "psi":
        return 1.0
    if isinstance(weight, tuple) and weight[0] == "psi_power":
        return float(weight[1])
    raise ParameterError(f"unknown weight {weight!r}")


def log_ball_mass(u, r: float, weight="none") -> float:
    """``log int_{B_r} u^2 psi^w dz dt`` (``-inf`` for zero mass)."""
    if r <= 0:
        raise ParameterError("radius must be positive")
    w = _weight_power(weight)
    if isinstance(u, ModeField):
        if w == 0.0:
            m = u.mass(r)
        else:
            m = u.mass(r, extra=(lambda x: np.ones_like(x), w))
        return math.log(m) if m > 0 else -math.inf
    if u.is_zero():
        return -math.inf
    A = u.angular.integral(u.N, 2.0, w - 1.0)
    if A <= 0:
        return -math.inf
    R = log_radial_integral(u.radial, r, 2.0, u.N + 1.0)
    return math.log(0.5 * u.coeff**2 * A) + R


def ball_mass(u, r: float, weight="none") -> float:
    return math.exp(log_ball_mass(u, r, weight))


@dataclass
class OrderFit:
    radii: list
    log_masses: list
    slope: Optional[float]
    intercept: Optional[float]
    residual: Optional[float]
    weight: str
    infinite_order: bool
    window_slopes: list = field(default_factory=list)

    @property
    def masses(self):
        return [math.exp(m) for m in self.log_masses]

    def record(self) -> dict:
        return {
            "weight": self.weight,
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "infinite_order": self.infinite_order,
            "n_radii": len(self.radii),
            "r_min": min(self.radii),
            "r_max": max(self.radii),
            "last_window_slope": self.window_slopes[-1] if self.window_slopes else None,
        }


def _check_radii(radii):
    radii = [float(r) for r in radii]
    if len(radii) < 6:
        raise ParameterError("order fits need at least 6 radii")
    radii = sorted(radii, reverse=True)
    if radii[-1] <= 0 or len(set(radii)) != len(radii):
        raise ParameterError("radii must be distinct and positive")
    q = np.array(radii[1:]) / np.array(radii[:-1])
    if np.max(np.abs(q - q[0])) > 1e-9 * abs(q[0]):
        raise ParameterError("radii must form a geometric sequence")
    return radii


def order_fit(u, weight="none", radii: Sequence[float] = DEFAULT_RADII, threshold: float = INFINITE_ORDER_THRESHOLD, window: int = 4) -> OrderFit:
    """Least-squares slope of log mass against log r.

    Infinite order is declared when a mass vanishes, or when the slope over the
    smallest-radius window exceeds ``threshold`` and the window slopes increase
    toward the origin.  Any finite threshold is only a proxy.
    """
    radii = _check_radii(radii)
    label = weight if isinstance(weight, str) else f"psi_power={weight[1]}"
    logm = [log_ball_mass(u, r, weight) for r in radii]
    if any(not math.isfinite(m) for m in logm):
        return OrderFit(radii, logm, None, None, None, label, True)
    x = np.log(radii)
    y = np.array(logm)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ np.array([slope, icpt]) - y) ** 2)))
    wins = []
    for i in range(0, len(radii) - window + 1, max(1, window // 2)):
        xs, ys = x[i:i + window], y[i:i + window]
        wins.append(float(np.polyfit(xs, ys, 1)[0]))
    increasing = all(b > a for a, b in zip(wins, wins[1:]))
    inf_order = bool(wins and wins[-1] > threshold and increasing)
    return OrderFit(radii, logm, float(slope), float(icpt), resid, label, inf_order, wins)


@dataclass
class EquivalenceReport:
    unweighted: OrderFit
    weighted: OrderFit
    slope_difference: Optional[float]
    angular_ratio: Optional[float]

    def record(self) -> dict:
        return {
            "slope_unweighted": self.unweighted.slope,
            "slope_psi": self.weighted.slope,
            "slope_difference": self.slope_difference,
            "angular_ratio": self.angular_ratio,
            "infinite_order": self.unweighted.infinite_order and self.weighted.infinite_order,
        }


def equivalence_report(u: SeparableField, radii: Sequence[float] = DEFAULT_RADII) -> EquivalenceReport:
    """Order fits with and without psi for ``u = F(rho) G(sigma)``.

    ``angular_ratio`` is ``int G^2 sin^-1 dOmega / int G^2 dOmega``; the two
    masses differ by exactly this constant, so the slopes coincide.
    """
    if not isinstance(u, SeparableField):
        raise ParameterError("equivalence_report needs a separable field")
    ratio = None
    if u.radial.kind != "zero" and u.coeff != 0:
        a_psi = u.angular.integral(u.N, 2.0, 0.0)
        if a_psi <= 0:
            raise DegenerateFamilyError("angular factor has zero psi-weighted mass")
        ratio = u.angular.integral(u.N, 2.0, -1.0) / a_psi
    fu = order_fit(u, "none", radii)
    fw = order_fit(u, "psi", radii)
    diff = None if fu.slope is None or fw.slope is None else abs(fu.slope - fw.slope)
    return EquivalenceReport(fu, fw, diff, ratio)


@dataclass
class HolderReport:
    N: int
    r: float
    q: float
    lhs: float
    weighted_term: float
    weight_term: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12)

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else (0.0 if self.lhs == 0 else math.inf)

    def record(self) -> dict:
        return {"N": self.N, "r": self.r, "q": self.q, "lhs": self.lhs, "rhs": self.rhs,
                "weight_term": self.weight_term, "ratio": self.ratio, "holds": self.holds}


def critical_exponent(N: int) -> float:
    return 2.0 * (N + 2) / N


def holder_psi_check(u: SeparableField, r: float, q: float) -> HolderReport:
    """``int|u| <= (int |u|^q psi)^(1/q) (int psi^(-1/(q-1)))^((q-1)/q)`` on B_r.

    The window ``2 < q < 2(N+2)/N`` is enforced.
    """
    N = u.N
    qs = critical_exponent(N)
    if not 2 < q < qs:
        raise ParameterError(f"q must lie in (2, {qs}); the Hölder step needs q > 2")
    one = AngularProfile("sin_power", c=0.0)
    lw = math.log(0.5 * one.integral(N, 1.0, -1.0 - 1.0 / (q - 1))) + (N + 2) * math.log(r) - math.log(N + 2)
    if u.is_zero():
        return HolderReport(N, r, q, 0.0, 0.0, math.exp(lw), 0.0)
    c = abs(u.coeff)
    l1 = math.log(0.5 * c * u.angular.integral(N, 1.0, -1.0)) + log_radial_integral(u.radial, r, 1.0, N + 1.0)
    lq = math.log(0.5 * c**q * u.angular.integral(N, q, 0.0)) + log_radial_integral(u.radial, r, q, N + 1.0)
    lr = lq / q + lw * (q - 1) / q
    return HolderReport(N, r, q, math.exp(l1), math.exp(lq), math.exp(lw), math.exp(lr))


@dataclass(frozen=True)
class DiniProfile:
    """Modulus f on (0, R0]: ``power`` r^a, ``log_power`` |log(1/r)|^-a, or ``custom``."""

    kind: str
    a: float = 0.0
    f: Optional[Callable] = None

    def of_y(self, y):
        """f evaluated at r = exp(-y)."""
        y = np.asarray(y, dtype=float)
        if self.kind == "power":
            return np.exp(-self.a * y)
        if self.kind == "log_power":
            return np.abs(y) ** -self.a
        if self.kind == "custom":
            return np.asarray(self.f(np.exp(-y)), dtype=float)
        raise ParameterError(f"unknown Dini profile {self.kind!r}")


@dataclass
class DiniReport:
    classification: str
    value: float
    windows: list
    tail_exponent: Optional[float]

    def record(self) -> dict:
        return {"classification": self.classification, "value": self.value, "tail_exponent": self.tail_exponent,
                "n_windows": len(self.windows)}


def dini_check(profile: DiniProfile, R0: float = 0.5, n_windows: int = 40, tol: float = 0.02) -> DiniReport:
    """Classify ``int_0^R0 f(r)/r dr`` through windows ``[y0 2^m, y0 2^(m+1)]`` in y = log(1/r).

    The window sums behave like ``2^(m*gamma)`` for a log-power tail; the
    integral converges iff gamma < 0.  Faster decay (power moduli) shows up as
    ratios tending to zero.
    """
    if not 0 < R0 < 1:
        raise ParameterError("R0 must lie in (0, 1)")
    y0 = math.log(1.0 / R0)
    ymax = 700.0 if profile.kind == "custom" else math.inf
    edges = [y0]
    while len(edges) <= n_windows and 2 * edges[-1] <= ymax:
        edges.append(2 * edges[-1])
    probe = profile.of_y(np.geomspace(y0, edges[-1], 400))
    if not np.all(np.isfinite(probe)):
        raise ParameterError("modulus not evaluable near the origin")
    if np.any(probe < 0) or np.any(np.diff(probe) > 1e-12 * np.max(np.abs(probe))):
        raise ParameterError("modulus must be nonnegative and nondecreasing in r")
    wins = []
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = quad(lambda y: float(profile.of_y(y)), a, b, limit=200, epsabs=0.0, epsrel=1e-12)
        wins.append(val)
    tail = wins[-5:]
    if tail[0] == 0.0 or tail[-1] <= 1e-300:
        return DiniReport("dini", float(sum(wins)), wins, -math.inf)
    gam = float(np.polyfit(np.arange(len(tail)), np.log2(np.maximum(tail, 1e-300)), 1)[0])
    if gam < -tol:
        q = 2.0**gam
        return DiniReport("dini", float(sum(wins) + wins[-1] * q / (1 - q)), wins, gam)
    return DiniReport("not_dini", math.inf, wins, gam)
