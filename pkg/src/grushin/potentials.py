"""Potential classes with Hardy-type growth at the gauge origin.

    psi_hardy    |V| <= C psi^eps / rho^2                 (eps > 0)
    dini_hardy   |V| <= f(rho) / rho^2                    (f Dini integrable)
    odd_variant  |V| <= C sin(phi)^(1/4 + eps) / rho^2    (N odd, N >= 3)
    bounded      |V| <= C
    custom       any callable V(z, t)

A descriptor is itself the extremal member of its class (equality in the
bound), so ``verify_growth(desc)`` is a round-trip check.
"""
from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Callable, Optional

import numpy as np
from scipy.special import betaln

from .errors import DomainError, ParameterError
from .gauge import GaugePoint, from_polar_array, gauge_rho_array, sphere_area, weight_psi_array
from .vanishing import DiniProfile, dini_check

CLASSES = ("psi_hardy", "dini_hardy", "odd_variant", "bounded", "custom")


@dataclass(frozen=True)
class PotentialDescriptor:
    kind: str
    C: float = 1.0
    eps: float = 0.0
    f: Optional[DiniProfile] = None
    R0: float = 1.0
    func: Optional[Callable] = None
    N: Optional[int] = None

    def __post_init__(self):
        if self.kind not in CLASSES:
            raise ParameterError(f"unknown potential class {self.kind!r}")
        if self.R0 <= 0:
            raise ParameterError("R0 must be positive")
        if self.kind == "psi_hardy" and not self.eps > 0:
            raise ParameterError("psi_hardy needs eps > 0")
        if self.kind == "odd_variant":
            if not self.eps > 0:
                raise ParameterError("odd_variant needs eps > 0")
            if self.N is not None and (self.N < 3 or self.N % 2 == 0):
                raise ParameterError("odd_variant is defined for odd N >= 3")
        if self.kind == "dini_hardy":
            if self.f is None:
                raise ParameterError("dini_hardy needs a modulus f")
            if self.f.kind == "log_power" and self.R0 >= 1:
                raise ParameterError("log-power moduli need R0 < 1")
            y = np.geomspace(math.log(1.0 / min(self.R0, 0.999)) + 1e-9, 600.0, 300)
            vals = self.f.of_y(y)
            if np.any(~np.isfinite(vals)) or np.any(vals < 0) or np.any(np.diff(vals) > 1e-12 * np.max(vals)):
                raise ParameterError("dini_hardy modulus must be finite, nonnegative and nondecreasing")
        if self.kind == "custom" and self.func is None:
            raise ParameterError("custom potential needs func(z, t)")

    @property
    def sin_power(self) -> Optional[float]:
        """Exponent a when V = W(rho) sin(phi)^a exactly; None for custom."""
        return {"psi_hardy": self.eps, "odd_variant": 0.25 + self.eps, "dini_hardy": 0.0, "bounded": 0.0}.get(self.kind)

    def radial(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.kind in ("psi_hardy", "odd_variant"):
            return self.C / rho**2
        if self.kind == "dini_hardy":
            return self.f.of_y(-np.log(rho)) / rho**2
        if self.kind == "bounded":
            return np.full(rho.shape, float(self.C))
        raise ParameterError("custom potentials have no radial factor")

    def zonal(self):
        """The solver's ``ZonalPotential`` for separable classes."""
        from .solver import ZonalPotential

        if self.kind == "custom":
            raise ParameterError("custom potentials are not separable")
        return ZonalPotential(self.radial, self.sin_power, self.kind)


def evaluate_array(desc: PotentialDescriptor, z, t):
    z = np.asarray(z, dtype=float)
    t = np.asarray(t, dtype=float)
    rho = gauge_rho_array(z, t)
    if np.any(rho == 0.0):
        raise DomainError("potential is singular at the gauge origin")
    if desc.N is not None and z.shape[-1] != desc.N:
        raise ParameterError("point dimension does not match the descriptor")
    if desc.kind == "custom":
        return np.asarray(desc.func(z, t), dtype=float)
    if desc.kind == "odd_variant" and z.shape[-1] % 2 == 0:
        raise ParameterError("odd_variant is defined for odd N")
    psi = weight_psi_array(z, t)
    return desc.radial(rho) * psi ** desc.sin_power


def evaluate(desc: PotentialDescriptor, p: GaugePoint) -> float:
    return float(evaluate_array(desc, p.z[None, :], np.array([p.t]))[0])


def sample_cloud(N: int, R0: float, count: int = 100_000, seed: int = 0):
    """Half volume-uniform in rho, half log-uniform down to ``1e-6 R0``."""
    rng = np.random.default_rng(seed)
    h = count // 2
    rho = np.concatenate([R0 * rng.random(h) ** (1.0 / (N + 2)), R0 * 10.0 ** rng.uniform(-6, 0, count - h)])
    rho = np.clip(rho, 1e-300, None)
    phi = rng.uniform(0.0, math.pi, count)
    om = rng.normal(size=(count, N))
    om /= np.linalg.norm(om, axis=1, keepdims=True)
    return from_polar_array(rho, phi, om)


@dataclass
class GrowthReport:
    kind: str
    bound_kind: str
    samples: int
    max_ratio: float
    violations: int
    fitted_C: Optional[float] = None
    fitted_eps: Optional[float] = None

    @property
    def satisfied(self) -> bool:
        return self.violations == 0

    def record(self) -> dict:
        return {"kind": self.kind, "bound": self.bound_kind, "samples": self.samples, "max_ratio": self.max_ratio,
                "violations": self.violations, "satisfied": self.satisfied, "fitted_C": self.fitted_C,
                "fitted_eps": self.fitted_eps}


def verify_growth(desc: PotentialDescriptor, bound: Optional[PotentialDescriptor] = None, N: Optional[int] = None,
                  samples=None, count: int = 100_000, seed: int = 0, rtol: float = 1e-12) -> GrowthReport:
    """Check ``|V| <= bound`` on a seeded cloud in ``B_R0 \\ {0}``.

    ``bound`` defaults to the descriptor's own class.  Custom potentials also
    get ``(C, eps)`` from a log-regression of ``log(|V| rho^2)`` on ``log psi``
    with C the smallest constant admissible for that eps on the samples.
    """
    N = N or desc.N or 2
    if bound is not None and bound.kind == "custom":
        raise ParameterError("a custom potential cannot serve as a growth bound")
    R0 = desc.R0 if bound is None else min(desc.R0, bound.R0)
    z, t = samples if samples is not None else sample_cloud(N, R0, count, seed)
    v = np.abs(evaluate_array(desc, z, t))
    rho = gauge_rho_array(z, t)
    psi = weight_psi_array(z, t)
    C = eps = None
    if desc.kind == "custom":
        keep = (v > 0) & (psi > 1e-12)
        X = np.log(psi[keep])
        Y = np.log(v[keep] * rho[keep] ** 2)
        eps = float(np.polyfit(X, Y, 1)[0])
        C = float(np.max(v[keep] * rho[keep] ** 2 / psi[keep] ** eps))
    if bound is None and desc.kind == "custom":
        b = C * psi**eps / rho**2
        bound_kind = "fitted"
    else:
        bound = bound or desc
        b = evaluate_array(bound, z, t)
        bound_kind = bound.kind
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(b > 0, v / b, np.where(v > 0, np.inf, 0.0))
    viol = int(np.sum(v > b * (1 + rtol) + 1e-300))
    return GrowthReport(desc.kind, bound_kind, int(v.size), float(np.max(ratio)), viol, C, eps)


@dataclass
class IntegrabilityReport:
    kind: str
    r: float
    N: int
    radial_exponent: float
    finite: bool
    value: float

    def record(self) -> dict:
        return {"kind": self.kind, "r": self.r, "N": self.N, "radial_exponent": self.radial_exponent,
                "finite": self.finite, "value": self.value}


def _modulus_power(f: DiniProfile) -> float:
    """Power ``p`` with ``f(r) ~ r^p`` at the origin (0 for log moduli)."""
    if f.kind == "power":
        return f.a
    if f.kind == "log_power":
        return 0.0
    y = np.array([300.0, 600.0])
    p = float(-np.diff(np.log(np.maximum(f.of_y(y), 1e-300)))[0] / np.diff(y)[0])
    return 0.0 if abs(p) < 1e-2 else p


def membership_vs_Lr(desc: PotentialDescriptor, r: float, N: Optional[int] = None) -> IntegrabilityReport:
    """Is ``int_{B_R} |V|^r dz dt`` finite, ``R = min(1, R0)``?

    Separable classes factor as ``1/2 int rho^(N+1) W^r drho * int sin^(a r - 1) dOmega``.
    The radial exponent ``e`` of ``rho^(N+1) W^r`` at the origin decides:
    finite iff ``e > -1``; at ``e = -1`` a Dini modulus is settled by
    ``dini_check`` on ``f^r``.
    """
    N = N or desc.N or 2
    if desc.kind == "custom":
        raise ParameterError("membership test needs a separable class")
    if r <= 0:
        raise ParameterError("r must be positive")
    R = min(1.0, desc.R0)
    a = desc.sin_power * r - 1.0 + N / 2.0
    if not a > -1:
        return IntegrabilityReport(desc.kind, r, N, math.nan, False, math.inf)
    ang = sphere_area(N) * math.exp(betaln((a + 1) / 2, 0.5))
    if desc.kind == "bounded":
        e = N + 1.0
    elif desc.kind == "dini_hardy":
        e = N + 1.0 - 2.0 * r + r * _modulus_power(desc.f)
    else:
        e = N + 1.0 - 2.0 * r
    if e < -1 - 1e-12:
        return IntegrabilityReport(desc.kind, r, N, e, False, math.inf)
    from scipy.integrate import quad

    def integrand(x):
        return 0.5 * x ** (N + 1) * float(np.abs(desc.radial(np.array([x]))[0])) ** r

    if abs(e + 1) <= 1e-12:
        if desc.kind != "dini_hardy":
            return IntegrabilityReport(desc.kind, r, N, e, False, math.inf)
        if desc.f.kind == "log_power":
            fr = DiniProfile("log_power", desc.f.a * r)
        else:
            fr = DiniProfile("custom", f=lambda x: desc.f.of_y(-np.log(x)) ** r)
        rep = dini_check(fr, R0=R / 2)
        if rep.classification != "dini":
            return IntegrabilityReport(desc.kind, r, N, e, False, math.inf)
        outer, _ = quad(integrand, R / 2, R)
        return IntegrabilityReport(desc.kind, r, N, e, True, float((0.5 * rep.value + outer) * ang))
    val, _ = quad(integrand, 0.0, R, limit=400)
    return IntegrabilityReport(desc.kind, r, N, e, True, float(val * ang))
