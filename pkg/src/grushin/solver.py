"""Solutions of ``L u = V u`` on gauge annuli ``r0 < rho < r1``.

Fields are expanded as ``u = sum_k chi_k(rho) g_k(sigma)`` over the angular
eigenbasis.  In polar form ``L u = sin(phi) sum_k (T_k chi_k) g_k`` with

    T_k chi = chi'' + (N+1)/rho chi' - k(N+k)/rho^2 chi.

Two paths are provided: independent per-mode boundary value problems for
``V = sin(phi) W(rho)`` and a coupled Galerkin system for general zonal V.
Both use Chebyshev collocation in rho.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Callable, Optional
import warnings

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import BarycentricInterpolator

from .errors import DomainError, IllConditionedError, ParameterError, TruncationError
from .spectral import ModeIndex, SpectralCoefficients, channel_gram, channel_profiles, check_mode
from .special import sphere_harmonic

DEFAULT_RESOLUTION = 128
DEFAULT_MODES = 16
COND_LIMIT = 1e12


def cheb(n: int):
    """Chebyshev points ``cos(pi j/n)`` (descending) and the differentiation matrix."""
    if n < 1:
        raise ParameterError("Chebyshev resolution must be at least 1")
    j = np.arange(n + 1)
    x = np.cos(np.pi * j / n)
    c = np.where((j == 0) | (j == n), 2.0, 1.0) * (-1.0) ** j
    X = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (X + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    return x, D


def radial_grid(r0: float, r1: float, n: int):
    x, D = cheb(n)
    rho = 0.5 * (r1 - r0) * (x + 1.0) + r0
    D = D * (2.0 / (r1 - r0))
    return rho, D


@dataclass(frozen=True)
class ZonalPotential:
    """``V(rho, phi) = W(rho) * sin(phi)^power``; ``W=None`` means V = 0."""

    W: Optional[Callable] = None
    power: float = 0.0
    label: str = ""

    def __call__(self, rho, phi):
        if self.W is None:
            return np.zeros(np.broadcast_shapes(np.shape(rho), np.shape(phi)))
        return self.W(np.asarray(rho, dtype=float)) * np.sin(phi) ** self.power

    def radial(self, rho):
        if self.W is None:
            return np.zeros_like(np.asarray(rho, dtype=float))
        return np.asarray(self.W(np.asarray(rho, dtype=float)), dtype=float) * np.ones_like(rho)


def sin_potential(W: Callable, label: str = "") -> ZonalPotential:
    """The exactly separable form ``V = sin(phi) W(rho)``."""
    return ZonalPotential(W, 1.0, label)


@dataclass
class AnnulusProblem:
    N: int
    r0: float
    r1: float
    potential: ZonalPotential
    inner: SpectralCoefficients
    outer: SpectralCoefficients
    K: int = DEFAULT_MODES
    resolution: int = DEFAULT_RESOLUTION

    def __post_init__(self):
        if not 0 < self.r0 < self.r1:
            raise ParameterError("annulus needs 0 < r0 < r1")
        for data in (self.inner, self.outer):
            if data.N != self.N:
                raise ParameterError("boundary data dimension does not match N")
            if data.coeffs and max(i.k for i in data.coeffs) > self.K:
                raise ParameterError("truncation K below the boundary data degree")
        if self.resolution < 8:
            raise ParameterError("radial resolution must be at least 8")

    def channels(self):
        out = set()
        for data in (self.inner, self.outer):
            out.update((i.l, i.j) for i, c in data.items() if c != 0.0)
        return sorted(out)

    def boundary(self, l, j, ks):
        a = np.array([self.inner.coeffs.get(ModeIndex(k, l, j), 0.0) for k in ks])
        b = np.array([self.outer.coeffs.get(ModeIndex(k, l, j), 0.0) for k in ks])
        return a, b


@dataclass
class RadialModes:
    """Mode profiles ``chi_k`` sampled on Chebyshev nodes of ``[r0, r1]``."""

    N: int
    rho: np.ndarray
    D: np.ndarray
    channels: dict
    r0: float
    r1: float
    info: dict = field(default_factory=dict)

    def modes(self):
        for (l, j), (ks, chi) in sorted(self.channels.items()):
            for i, k in enumerate(ks):
                yield ModeIndex(k, l, j), chi[i]

    def interpolant(self, values, order: int = 0):
        v = values
        for _ in range(order):
            v = self.D @ v
        # closed-form Chebyshev-Lobatto weights; scipy's default uses a random node permutation
        n = self.rho.size - 1
        wi = (-1.0) ** np.arange(n + 1)
        wi[[0, n]] *= 0.5
        return BarycentricInterpolator(self.rho, v, wi=wi)

    def mode_values(self, idx, rho, order: int = 0):
        l, j = idx[1], idx[2]
        ks, chi = self.channels[(l, j)]
        return self.interpolant(chi[ks.index(idx[0])], order)(np.asarray(rho, dtype=float))

    def check_domain(self, radii):
        radii = np.asarray(radii, dtype=float)
        if np.any(radii < self.r0 - 1e-14) or np.any(radii > self.r1 + 1e-14):
            raise DomainError(f"radii outside the solution annulus [{self.r0}, {self.r1}]")

    def evaluate(self, rho, phi, omega):
        rho = np.asarray(rho, dtype=float)
        self.check_domain(rho)
        x = np.cos(phi)
        sl = np.sqrt(np.clip(np.sin(phi), 0.0, None))
        out = np.zeros(np.broadcast_shapes(rho.shape, np.shape(phi), np.shape(omega)[:-1]))
        for (l, j), (ks, chi) in self.channels.items():
            Y = sphere_harmonic(self.N, l, j, np.reshape(omega, (-1, self.N)), zonal=self.N > 3)
            Y = Y.reshape(np.shape(omega)[:-1])
            P = channel_profiles(self.N, l, max(ks), x)
            for i, k in enumerate(ks):
                out = out + self.interpolant(chi[i])(rho) * sl**l * P[(k - l) // 2] * Y
        return out


def _condition(A):
    try:
        return float(np.linalg.cond(A))
    except np.linalg.LinAlgError:
        return math.inf


def mode_ode_solve(
    N: int,
    k: int,
    W: Optional[Callable],
    r0: float,
    r1: float,
    a: float,
    b: float,
    resolution: int = DEFAULT_RESOLUTION,
):
    """Solve ``chi'' + (N+1)/rho chi' - k(N+k)/rho^2 chi = W chi``, ``chi(r0)=a``, ``chi(r1)=b``.

    Returns ``(rho, chi, D, cond)``.  A near-singular system (the homogeneous
    problem close to an eigenvalue) triggers a warning carrying the condition
    estimate.
    """
    rho, D = radial_grid(r0, r1, resolution)
    Wv = np.zeros_like(rho) if W is None else np.asarray(W(rho), dtype=float) * np.ones_like(rho)
    A = rho[:, None] ** 2 * (D @ D) + (N + 1) * rho[:, None] * D
    A = A - np.diag(k * (N + k) + rho**2 * Wv)
    rhs = np.zeros_like(rho)
    # node 0 is r1, node n is r0
    A[0, :] = 0.0
    A[0, 0] = 1.0
    rhs[0] = b
    A[-1, :] = 0.0
    A[-1, -1] = 1.0
    rhs[-1] = a
    cond = _condition(A)
    if cond > COND_LIMIT:
        warnings.warn(f"near-singular mode problem (k={k}): condition {cond:.3e}", RuntimeWarning)
    return rho, np.linalg.solve(A, rhs), D, cond


def solve_modes(problem: AnnulusProblem) -> RadialModes:
    """Per-mode path; requires ``V = sin(phi) W(rho)``."""
    pot = problem.potential
    if pot.W is not None and pot.power != 1.0:
        raise ParameterError("mode decoupling needs V = sin(phi) W(rho)")
    chans = {}
    rho = D = None
    conds = []
    for l, j in problem.channels():
        ks = list(range(l, problem.K + 1, 2))
        a, b = problem.boundary(l, j, ks)
        chi = []
        for i, k in enumerate(ks):
            rho, c, D, cond = mode_ode_solve(problem.N, k, pot.W, problem.r0, problem.r1, a[i], b[i], problem.resolution)
            chi.append(c)
            conds.append(cond)
        chans[(l, j)] = (ks, np.array(chi))
    if rho is None:
        rho, D = radial_grid(problem.r0, problem.r1, problem.resolution)
    return RadialModes(problem.N, rho, D, chans, problem.r0, problem.r1, {"condition": max(conds, default=1.0)})


def potential_gram(N: int, l: int, K: int, pot: ZonalPotential, rho, sin_shift: float = 0.0):
    """``int V(rho, .) sin^sin_shift g_k g_m dOmega`` for every rho: shape (len(rho), nk, nk)."""
    rho = np.asarray(rho, dtype=float)
    nk = (K - l) // 2 + 1
    if pot.W is None:
        return np.zeros((rho.size, nk, nk))
    G = channel_gram(N, l, K, pot.power + sin_shift)
    return pot.radial(rho)[:, None, None] * G[None, :, :]


def coupled_galerkin_solve(problem: AnnulusProblem, tail_limit: float = 0.01) -> RadialModes:
    """Galerkin system ``M T chi = V_mat chi`` per channel with Dirichlet data.

    ``M_mk = int sin(phi) g_k g_m dOmega`` and ``V_mat = int V g_k g_m dOmega``.
    Raises ``IllConditionedError`` above condition 1e12 and ``TruncationError``
    when the two highest modes carry more than ``tail_limit`` of the energy.
    """
    N, K = problem.N, problem.K
    rho, D = radial_grid(problem.r0, problem.r1, problem.resolution)
    n1 = rho.size
    chans = {}
    worst = 1.0
    energy_top = 0.0
    energy_all = 0.0
    for l, j in problem.channels():
        ks = list(range(l, K + 1, 2))
        nk = len(ks)
        M = channel_gram(N, l, K, 1.0)
        Vg = potential_gram(N, l, K, problem.potential, rho)
        D2 = D @ D
        A = np.zeros((nk * n1, nk * n1))
        for m in range(nk):
            rows = slice(m * n1, (m + 1) * n1)
            for i, k in enumerate(ks):
                cols = slice(i * n1, (i + 1) * n1)
                T = rho[:, None] ** 2 * D2 + (N + 1) * rho[:, None] * D - k * (N + k) * np.eye(n1)
                A[rows, cols] = M[m, i] * T - np.diag(rho**2 * Vg[:, m, i])
        a, b = problem.boundary(l, j, ks)
        rhs = np.zeros(nk * n1)
        for m in range(nk):
            for node, val in ((0, b[m]), (n1 - 1, a[m])):
                r = m * n1 + node
                A[r, :] = 0.0
                A[r, r] = 1.0
                rhs[r] = val
        cond = _condition(A)
        worst = max(worst, cond)
        if cond > COND_LIMIT:
            raise IllConditionedError(f"Galerkin system condition {cond:.3e} exceeds 1e12", condition=cond)
        chi = np.linalg.solve(A, rhs).reshape(nk, n1)
        chans[(l, j)] = (ks, chi)
        en = np.sum(chi**2, axis=1)
        energy_all += float(en.sum())
        energy_top += float(sum(e for k, e in zip(ks, en) if k >= K - 1))
    out = RadialModes(N, rho, D, chans, problem.r0, problem.r1, {"condition": worst})
    frac = energy_top / energy_all if energy_all > 0 else 0.0
    out.info["tail_fraction"] = frac
    if frac > tail_limit:
        raise TruncationError(f"top two modes carry {frac:.2%} of the energy", residual=frac)
    return out


def relative_l2_difference(u: RadialModes, v: RadialModes, n_quad: int = 96) -> float:
    """Relative ``L^2(annulus, dz dt)`` distance using mode orthogonality (sin^-1 Gram)."""
    num = den = 0.0
    x, w = leggauss(n_quad)
    r = 0.5 * (u.r1 - u.r0) * (x + 1) + u.r0
    w = 0.5 * (u.r1 - u.r0) * w * 0.5 * r ** (u.N + 1)
    keys = set(u.channels) | set(v.channels)
    for l, j in keys:
        ks = u.channels.get((l, j), v.channels.get((l, j)))[0]
        G = channel_gram(u.N, l, max(ks), -1.0)
        cu = np.array([u.interpolant(c)(r) for c in u.channels[(l, j)][1]]) if (l, j) in u.channels else 0
        cv = np.array([v.interpolant(c)(r) for c in v.channels[(l, j)][1]]) if (l, j) in v.channels else 0
        d = cu - cv
        d = np.zeros((len(ks), r.size)) + d
        cv = np.zeros((len(ks), r.size)) + cv
        num += float(np.einsum("ir,ij,jr,r->", d, G, d, w))
        den += float(np.einsum("ir,ij,jr,r->", cv, G, cv, w))
    return math.sqrt(num / den) if den > 0 else math.sqrt(num)


def mixing_residual(u: RadialModes, allowed_k) -> float:
    """Largest ``|chi_k|`` over modes whose degree is not in ``allowed_k``."""
    worst = 0.0
    for idx, chi in u.modes():
        if idx.k not in allowed_k:
            worst = max(worst, float(np.max(np.abs(chi))))
    return worst


def galerkin_residual(u: RadialModes, pot: ZonalPotential, K_test: Optional[int] = None, interior: float = 0.1):
    """Residual of ``L u - V u`` on interior radii, both projected and pointwise.

    ``projected``: max over modes m <= K_test of ``|<L u - V u, g_m>|`` relative
    to ``max |chi|``.  ``pointwise``: max over an interior (rho, phi) grid of
    ``|L u - V u|`` relative to ``max |u|``; ``l2``: the same in the ``dz dt``
    mean.  The unprojected values are limited by the angular truncation when V
    is not a polynomial in cos(phi) and sin(phi)^2.
    """
    N = u.N
    lo = u.r0 + interior * (u.r1 - u.r0)
    hi = u.r1 - interior * (u.r1 - u.r0)
    r = np.linspace(lo, hi, 41)
    scale = max(float(np.max(np.abs(chi))) for _, chi in u.modes())
    proj = 0.0
    point = 0.0
    num = den = 0.0
    phis = np.linspace(0.05, math.pi - 0.05, 61)
    xg, wg = leggauss(128)
    phq = 0.5 * math.pi * (xg + 1)
    wq = 0.5 * math.pi * wg * np.sin(phq) ** ((N - 2) / 2.0)
    for (l, j), (ks, chi) in u.channels.items():
        K = K_test or max(ks)
        M = channel_gram(N, l, max(ks), 1.0)
        V = potential_gram(N, l, max(ks), pot, r)
        c = np.array([u.interpolant(v)(r) for v in chi])
        d1 = np.array([u.interpolant(v, 1)(r) for v in chi])
        d2 = np.array([u.interpolant(v, 2)(r) for v in chi])
        T = np.array([d2[i] + (N + 1) / r * d1[i] - k * (N + k) / r**2 * c[i] for i, k in enumerate(ks)])
        res = np.einsum("mi,ir->mr", M, T) - np.einsum("rmi,ir->mr", V, c)
        keep = [m for m, k in enumerate(ks) if k <= K]
        proj = max(proj, float(np.max(np.abs(res[keep]))) / scale)
        x = np.cos(phis)
        P = channel_profiles(N, l, max(ks), x) * np.sin(phis) ** (l / 2.0)
        Lu = np.sin(phis)[None, :] * (T.T @ P)
        uu = c.T @ P
        Vu = pot(r[:, None], phis[None, :]) * uu
        point = max(point, float(np.max(np.abs(Lu - Vu))) / max(float(np.max(np.abs(uu))), 1e-300))
        Pq = channel_profiles(N, l, max(ks), np.cos(phq)) * np.sin(phq) ** (l / 2.0)
        uq = c.T @ Pq
        rq = np.sin(phq)[None, :] * (T.T @ Pq) - pot(r[:, None], phq[None, :]) * uq
        num += float(np.sum(rq**2 * wq))
        den += float(np.sum(uq**2 * wq))
    return {"projected": proj, "pointwise": point, "l2": math.sqrt(num / den) if den > 0 else 0.0}


# ---------------------------------------------------------------------------
# masses, doubling and Caccioppoli

@dataclass
class ModeField:
    """``u = sum chi_k(rho) g_k`` with callables ``chi(rho, order)``; masses integrate from ``lower``."""

    N: int
    modes: dict
    lower: float = 0.0
    upper: float = math.inf

    @classmethod
    def from_solution(cls, sol: RadialModes):
        modes = {}
        for idx, chi in sol.modes():
            interp = [sol.interpolant(chi, o) for o in range(2)]
            modes[idx] = (lambda r, o=0, f=interp: f[o](np.asarray(r, dtype=float)))
        return cls(sol.N, modes, sol.r0, sol.r1)

    @classmethod
    def power_mode(cls, N: int, a: float, idx, coeff: float = 1.0):
        idx = check_mode(ModeIndex(*idx), N, zonal=N > 3)

        def chi(r, order=0):
            r = np.asarray(r, dtype=float)
            if order == 0:
                return coeff * r**a
            return coeff * a * r ** (a - 1)

        return cls(N, {idx: chi})

    def channel_groups(self):
        out = {}
        for idx, f in self.modes.items():
            out.setdefault((idx.l, idx.j), []).append((idx.k, f))
        return out

    def _radial_integral(self, integrand, a, b, n=64):
        x, w = leggauss(n)
        r = 0.5 * (b - a) * (x + 1) + a
        return float(np.sum(0.5 * (b - a) * w * integrand(r)))

    def mass(self, r_outer, weight: str = "none", r_inner: Optional[float] = None, extra=None):
        """``int u^2 (weight) dz dt`` over ``r_inner < rho < r_outer``.

        ``weight`` is ``'none'`` or ``'psi'``.  ``extra=(W, power)`` adds the
        factor ``|W(rho)| sin^power``.
        """
        lo = self.lower if r_inner is None else r_inner
        if r_outer > self.upper + 1e-12 or lo < self.lower - 1e-12:
            raise DomainError(f"radius outside the field's domain [{self.lower}, {self.upper}]")
        shift = -1.0 if weight == "none" else 0.0
        total = 0.0
        for (l, j), items in self.channel_groups().items():
            ks = [k for k, _ in items]
            K = max(ks)
            all_ks = list(range(l, K + 1, 2))
            pos = [all_ks.index(k) for k in ks]
            if extra is None:
                G = channel_gram(self.N, l, K, shift)[np.ix_(pos, pos)]
                Wf = None
            else:
                W, pw = extra
                G = channel_gram(self.N, l, K, shift + pw)[np.ix_(pos, pos)]
                Wf = W

            def integrand(r, items=items, G=G, Wf=Wf):
                c = np.array([f(r) for _, f in items])
                val = 0.5 * r ** (self.N + 1) * np.einsum("ir,ij,jr->r", c, G, c)
                return val * (np.abs(Wf(r)) if Wf is not None else 1.0)

            total += self._split_integral(integrand, lo, r_outer)
        return total

    def _split_integral(self, integrand, a, b):
        if b <= a:
            return 0.0
        if a == 0.0:
            # geometric panels resolve power-law behaviour at the origin
            edges = [0.0] + list(b * 2.0 ** -np.arange(40, -1, -1))
        else:
            edges = list(np.linspace(a, b, 9))
        return sum(self._radial_integral(integrand, x0, x1) for x0, x1 in zip(edges[:-1], edges[1:]))

    def gradient_energy(self, r_inner, r_outer):
        """``int (|grad_z u|^2 + |z|^2 u_t^2) dz dt`` over the annulus (mode form)."""
        total = 0.0
        N = self.N
        for idx, f in self.modes.items():
            k = idx.k

            def integrand(r, f=f, k=k):
                return 0.5 * r ** (N + 1) * (f(r, 1) ** 2 + k * (N + k) * f(r) ** 2 / r**2)

            total += self._split_integral(integrand, r_inner, r_outer)
        return total


def horizontal_gradient_sq(u: Callable, z, t, h: float = 1e-4):
    """``|grad_z u|^2 + |z|^2 u_t^2`` by central differences of a Cartesian callable."""
    z = np.asarray(z, dtype=float)
    t = np.asarray(t, dtype=float)
    total = np.zeros(t.shape)
    for i in range(z.shape[-1]):
        e = np.zeros(z.shape[-1])
        e[i] = h
        total = total + ((u(z + e, t) - u(z - e, t)) / (2 * h)) ** 2
    ut = (u(z, t + h) - u(z, t - h)) / (2 * h)
    return total + np.sum(z * z, axis=-1) * ut**2


def polar_gradient_sq(field: ModeField, rho, phi, omega, h: float = 1e-6):
    """``sin(phi) u_rho^2 + 4 sin(phi)/rho^2 u_phi^2 + |grad_S u|^2/(rho^2 sin(phi))``."""
    rho = np.asarray(rho, dtype=float)
    phi = np.asarray(phi, dtype=float)
    omega = np.asarray(omega, dtype=float)
    N = field.N

    def ang(ph, om):
        vals = []
        for idx, _ in field.modes.items():
            k, l, j = idx
            x = np.cos(ph)
            p = channel_profiles(N, l, k, x)[(k - l) // 2] * np.sin(ph) ** (l / 2.0)
            Y = sphere_harmonic(N, l, j, om, zonal=N > 3)
            vals.append(p * Y)
        return np.array(vals)

    def unit(v):
        return v / np.linalg.norm(v, axis=-1, keepdims=True)

    g = ang(phi, omega)
    gphi = (ang(phi + h, omega) - ang(phi - h, omega)) / (2 * h)
    chis = np.array([f(rho) for f in field.modes.values()])
    dchis = np.array([f(rho, 1) for f in field.modes.values()])
    u_rho = np.sum(dchis * g, axis=0)
    u_phi = np.sum(chis * gphi, axis=0)
    gs2 = np.zeros(rho.shape)
    for i in range(N):
        e = np.zeros(N)
        e[i] = h
        d = (ang(phi, unit(omega + e)) - ang(phi, unit(omega - e))) / (2 * h)
        gs2 = gs2 + np.sum(chis * d, axis=0) ** 2
    s = np.sin(phi)
    return s * u_rho**2 + 4.0 * s / rho**2 * u_phi**2 + gs2 / (rho**2 * s)


@dataclass
class DoublingProfile:
    radii: list
    masses: list
    psi_masses: list
    ratios: list
    psi_ratios: list
    lower: float


def doubling_profile(field: ModeField, radii) -> DoublingProfile:
    """Masses ``int_{B_r} u^2`` (and with weight psi) and ratios ``mass(2r)/mass(r)``.

    For solver fields the balls are truncated at the annulus inner radius:
    masses are taken over ``lower < rho < r``.
    """
    radii = sorted(float(r) for r in radii)
    if radii[0] <= field.lower or 2 * radii[-1] > field.upper + 1e-12:
        raise DomainError(
            f"radii must satisfy {field.lower} < r and 2r <= {field.upper} for the doubling ratios"
        )
    m, mp, q, qp = [], [], [], []
    for r in radii:
        a, b = field.mass(r), field.mass(2 * r)
        ap, bp = field.mass(r, "psi"), field.mass(2 * r, "psi")
        m.append(a)
        mp.append(ap)
        q.append(b / a if a > 0 else None)
        qp.append(bp / ap if ap > 0 else None)
    return DoublingProfile(radii, m, mp, q, qp, field.lower)


@dataclass
class CaccioppoliReport:
    d: float
    lhs: float
    rhs_integral: float
    C: Optional[float]


def caccioppoli_check(field: ModeField, pot: Optional[ZonalPotential], d: float) -> CaccioppoliReport:
    """Smallest C with ``int_{d/2<rho<d} Gamma(u) <= C/d^2 int_{d/4<rho<2d} (1+|V|) u^2``."""
    if d / 4 < field.lower - 1e-12 or 2 * d > field.upper + 1e-12:
        raise DomainError("Caccioppoli annuli must lie inside the field's domain")
    lhs = field.gradient_energy(d / 2, d)
    rhs = field.mass(2 * d, r_inner=d / 4)
    if pot is not None and pot.W is not None:
        rhs += field.mass(2 * d, r_inner=d / 4, extra=(pot.W, pot.power))
    C = lhs * d * d / rhs if rhs > 0 else None
    return CaccioppoliReport(d, lhs, rhs, C)
