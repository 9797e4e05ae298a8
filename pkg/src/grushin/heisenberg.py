"""Heisenberg group H^n with coordinates (x, y, t) in R^n x R^n x R.

Horizontal fields

    X_i = d/dx_i + 2 y_i d/dt,        X_{n+j} = d/dy_j - 2 x_j d/dt,

satisfy ``[X_i, X_{n+j}] = -4 delta_ij d/dt``.  The rotation generator is
``T = sum_j (y_j d/dx_j - x_j d/dy_j)`` and for ``T u = 0`` the sub-Laplacian
reduces to ``Delta_z + c |z|^2 d^2/dt^2`` for a single constant c that is
calibrated here rather than assumed.

Functions are either sympy expressions (exact partials) or plain callables
``f(x, y, t)`` on arrays (central differences).  Every field has straight
integral curves, so ``X^2 u`` is a second directional derivative.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math
from typing import Callable, Optional

import numpy as np
import sympy as sp

from .errors import ParameterError

FD_STEP = 1e-3


@dataclass(frozen=True)
class HeisenbergPoint:
    x: tuple
    y: tuple
    t: float

    def __post_init__(self):
        if len(self.x) != len(self.y) or len(self.x) < 1:
            raise ParameterError("x and y must have the same length n >= 1")

    @property
    def n(self) -> int:
        return len(self.x)

    def array(self):
        return np.concatenate([self.x, self.y, [self.t]]).astype(float)


def group_law(p: HeisenbergPoint, q: HeisenbergPoint) -> HeisenbergPoint:
    x, y, t = np.array(p.x), np.array(p.y), p.t
    x2, y2, t2 = np.array(q.x), np.array(q.y), q.t
    return HeisenbergPoint(tuple(x + x2), tuple(y + y2), t + t2 + 2.0 * float(x2 @ y - x @ y2))


@lru_cache(maxsize=None)
def symbols(n: int):
    xs = sp.symbols(f"x1:{n + 1}", real=True)
    ys = sp.symbols(f"y1:{n + 1}", real=True)
    return xs, ys, sp.Symbol("t", real=True)


def _as_poly(n: int, expr):
    """Polynomials are held as ``sp.Poly``: differentiation stays cheap."""
    if isinstance(expr, sp.Poly):
        return expr
    xs, ys, t = symbols(n)
    expr = sp.sympify(expr)
    try:
        poly = sp.Poly(expr, *(xs + ys + (t,)))
    except sp.PolynomialError:
        return expr
    return poly if poly.domain.is_Numerical else expr


def _compile(n: int, expr):
    """Numeric evaluator; polynomials skip lambdify (code generation dominates the cost)."""
    xs, ys, t = symbols(n)
    gens = xs + ys + (t,)
    poly = expr if isinstance(expr, sp.Poly) else None
    if poly is None:
        return sp.lambdify((xs, ys, t), expr, "numpy")
    terms = poly.terms()
    powers = np.array([m for m, _ in terms], dtype=int).reshape(len(terms), len(gens))
    coeffs = np.array([float(c) for _, c in terms])

    def f(x, y, tt):
        out = 0.0
        cols = list(x) + list(y) + [tt]
        for pw, c in zip(powers, coeffs):
            term = c
            for v, e in zip(cols, pw):
                if e:
                    term = term * v**e
            out = out + term
        return out

    return f


class HFunction:
    """A function on H^n; symbolic when ``expr`` is given, numeric otherwise."""

    def __init__(self, n: int, expr=None, func: Optional[Callable] = None, label: str = ""):
        if (expr is None) == (func is None):
            raise ParameterError("give exactly one of expr and func")
        self.n = n
        self.expr = None if expr is None else _as_poly(n, expr)
        self.label = label or (str(expr.as_expr() if isinstance(expr, sp.Poly) else expr) if expr is not None else "callable")
        if self.expr is not None:
            self._f = _compile(n, self.expr)
        else:
            self._f = func

    @property
    def symbolic(self) -> bool:
        return self.expr is not None

    def __call__(self, x, y, t):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        t = np.asarray(t, dtype=float)
        if self.symbolic:
            out = self._f(tuple(np.moveaxis(x, -1, 0)), tuple(np.moveaxis(y, -1, 0)), t)
            return np.broadcast_to(np.asarray(out, dtype=float), t.shape).copy()
        return np.asarray(self._f(x, y, t), dtype=float)

# symbolic field actions

def _d(e, v, k=1):
    if isinstance(e, sp.Poly):
        return e.diff((v, k))
    return sp.diff(e, v, k)


def X_sym(n, i, e):
    xs, ys, t = symbols(n)
    return _d(e, xs[i]) + 2 * ys[i] * _d(e, t)


def Y_sym(n, j, e):
    xs, ys, t = symbols(n)
    return _d(e, ys[j]) - 2 * xs[j] * _d(e, t)


def T_sym(n, e):
    xs, ys, _ = symbols(n)
    return sum(ys[j] * _d(e, xs[j]) - xs[j] * _d(e, ys[j]) for j in range(n))


def sublaplacian_sym(n, e):
    return sum(X_sym(n, i, X_sym(n, i, e)) + Y_sym(n, i, Y_sym(n, i, e)) for i in range(n))


def reduced_sym(n, e, c):
    xs, ys, t = symbols(n)
    e = _as_poly(n, e)
    z2 = _as_poly(n, sum(v**2 for v in xs + ys))
    lap = sum((_d(e, v, 2) for v in xs + ys[1:]), _d(e, ys[0], 2))
    return lap + _as_poly(n, sp.Float(c)) * z2 * _d(e, t, 2)


# numeric directional stencils (4th order)

def _split(P, n):
    return P[..., :n], P[..., n:2 * n], P[..., 2 * n]


def _eval(u: HFunction, P):
    x, y, t = _split(P, u.n)
    return u(x, y, t)


def _d1(u, P, V, h):
    return (-_eval(u, P + 2 * h * V) + 8 * _eval(u, P + h * V) - 8 * _eval(u, P - h * V) + _eval(u, P - 2 * h * V)) / (12 * h)


def _d2(u, P, V, h):
    return (
        -_eval(u, P + 2 * h * V) + 16 * _eval(u, P + h * V) - 30 * _eval(u, P)
        + 16 * _eval(u, P - h * V) - _eval(u, P - 2 * h * V)
    ) / (12 * h * h)


def _field_directions(n, P):
    """Direction vectors of X_1..X_n, X_{n+1}..X_{2n} at each point (straight integral curves)."""
    x, y, _ = _split(P, n)
    out = []
    for i in range(n):
        V = np.zeros(P.shape)
        V[..., i] = 1.0
        V[..., 2 * n] = 2.0 * y[..., i]
        out.append(V)
    for j in range(n):
        V = np.zeros(P.shape)
        V[..., n + j] = 1.0
        V[..., 2 * n] = -2.0 * x[..., j]
        out.append(V)
    return out


def _points(n, x, y, t):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if x.shape[-1] != n or y.shape[-1] != n:
        raise ParameterError("sample coordinates do not match n")
    return np.concatenate([x, y, t[..., None]], axis=-1)


def _rot_direction(n, P):
    x, y, _ = _split(P, n)
    V = np.zeros(P.shape)
    V[..., :n] = y
    V[..., n:2 * n] = -x
    return V


def apply_T(u: HFunction, x, y, t, h: float = FD_STEP):
    """``T u`` at sample points (symbolic when possible)."""
    if u.symbolic:
        return HFunction(u.n, T_sym(u.n, u.expr))(x, y, t)
    P = _points(u.n, x, y, t)
    return _d1(u, P, _rot_direction(u.n, P), h)


def sublaplacian_apply(u: HFunction, x, y, t, h: float = FD_STEP):
    """``sum_i X_i^2 u`` at sample points."""
    if u.symbolic:
        return HFunction(u.n, sublaplacian_sym(u.n, u.expr))(x, y, t)
    P = _points(u.n, x, y, t)
    return sum(_d2(u, P, V, h) for V in _field_directions(u.n, P))


def reduced_apply(u: HFunction, x, y, t, c: float, h: float = FD_STEP):
    """``Delta_z u + c |z|^2 u_tt``."""
    if u.symbolic:
        return HFunction(u.n, reduced_sym(u.n, u.expr, c))(x, y, t)
    P = _points(u.n, x, y, t)
    n = u.n
    lap = 0.0
    for i in range(2 * n):
        V = np.zeros(P.shape)
        V[..., i] = 1.0
        lap = lap + _d2(u, P, V, h)
    V = np.zeros(P.shape)
    V[..., 2 * n] = 1.0
    z2 = np.sum(P[..., :2 * n] ** 2, axis=-1)
    return lap + c * z2 * _d2(u, P, V, h)


def bracket_residual(u: HFunction, x, y, t) -> float:
    """``max |[X_i, X_{n+j}] u + 4 delta_ij u_t|`` over all i, j and samples."""
    if not u.symbolic:
        raise ParameterError("bracket check expects a symbolic function")
    n = u.n
    _, _, tt = symbols(n)
    worst = 0.0
    for i in range(n):
        for j in range(n):
            e = X_sym(n, i, Y_sym(n, j, u.expr)) - Y_sym(n, j, X_sym(n, i, u.expr))
            if i == j:
                e = e + 4 * _d(u.expr, tt)
            worst = max(worst, float(np.max(np.abs(HFunction(n, e)(x, y, t)))))
    return worst


def rotate(x, y, theta):
    """``z -> e^{i theta} z`` with ``z = x + i y``."""
    c, s = math.cos(theta), math.sin(theta)
    return c * x - s * y, s * x + c * y


@dataclass
class TorusReport:
    max_T: float
    max_rotation: float
    tol: float

    @property
    def by_T(self) -> bool:
        return self.max_T <= self.tol

    @property
    def by_rotation(self) -> bool:
        return self.max_rotation <= self.tol

    @property
    def agree(self) -> bool:
        return self.by_T == self.by_rotation

    @property
    def invariant(self) -> bool:
        return self.by_T and self.by_rotation

    def record(self) -> dict:
        return {"max_T": self.max_T, "max_rotation": self.max_rotation, "by_T": self.by_T,
                "by_rotation": self.by_rotation, "agree": self.agree}


def is_torus_invariant(u: HFunction, x, y, t, tol: float = 1e-8, n_theta: int = 16) -> TorusReport:
    """Both characterizations: ``T u = 0`` and ``u(e^{i theta} z, t) = u(z, t)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    base = u(x, y, t)
    mt = float(np.max(np.abs(apply_T(u, x, y, t))))
    mr = 0.0
    for th in np.linspace(0.0, 2 * math.pi, n_theta, endpoint=False)[1:]:
        xr, yr = rotate(x, y, th)
        mr = max(mr, float(np.max(np.abs(u(xr, yr, t) - base))))
    return TorusReport(mt, mr, tol)


def calibrate_reduction_constant(n: int = 1):
    """c from ``u = t^2``: ``Delta_H t^2 = c |z|^2 * 2`` exactly."""
    xs, ys, t = symbols(n)
    lhs = sublaplacian_sym(n, t**2)
    z2 = sum(v**2 for v in xs + ys)
    c = sp.simplify(lhs / (2 * z2))
    if c.free_symbols:
        raise ParameterError(f"reduction coefficient is not constant: {c}")
    return float(c)


REDUCTION_CONSTANT = None


def reduction_constant() -> float:
    global REDUCTION_CONSTANT
    if REDUCTION_CONSTANT is None:
        REDUCTION_CONSTANT = calibrate_reduction_constant(1)
    return REDUCTION_CONSTANT


class NotInvariantError(ParameterError):
    """reduction_residual called on a function that is not torus invariant."""


@dataclass
class ReductionReport:
    c: float
    residual: float
    scale: float
    label: str

    @property
    def relative(self) -> float:
        return self.residual / self.scale if self.scale > 0 else self.residual

    def record(self) -> dict:
        return {"label": self.label, "c": self.c, "residual": self.residual, "scale": self.scale}


def reduction_residual(u: HFunction, x, y, t, c: Optional[float] = None, tol: float = 1e-8) -> ReductionReport:
    """``max |Delta_H u - (Delta_z u + c |z|^2 u_tt)|`` for torus-invariant u."""
    rep = is_torus_invariant(u, x, y, t, tol=tol * max(1.0, float(np.max(np.abs(u(x, y, t))))))
    if not rep.invariant:
        raise NotInvariantError(f"function {u.label} is not torus invariant (max |Tu| = {rep.max_T:.3e})")
    c = reduction_constant() if c is None else c
    a = sublaplacian_apply(u, x, y, t)
    b = reduced_apply(u, x, y, t, c)
    return ReductionReport(c, float(np.max(np.abs(a - b))), float(np.max(np.abs(a))), u.label)


def random_torus_family(n: int, count: int = 200, seed: int = 0):
    """Polynomials in (x, y, t); about half are built from rotation invariants only.

    Invariants: ``|z_j|^2``, t, and for n >= 2 ``x_1 y_2 - x_2 y_1`` and
    ``x_1 x_2 + y_1 y_2``.  Non-invariant members add a term of degree 1 or 2
    with coefficient at least 0.1.  Returns ``(functions, expected_invariant)``.
    """
    rng = np.random.default_rng(seed)
    xs, ys, t = symbols(n)
    inv = [xs[j] ** 2 + ys[j] ** 2 for j in range(n)] + [t]
    if n >= 2:
        inv += [xs[0] * ys[1] - xs[1] * ys[0], xs[0] * xs[1] + ys[0] * ys[1]]
    breakers = [xs[0], ys[0], xs[0] ** 2, xs[0] * ys[0], xs[0] * t, ys[0] ** 2 - xs[0] ** 2]
    if n >= 2:
        breakers += [xs[0] * xs[1], xs[1] * ys[0] + xs[0] * ys[1]]
    funcs, expected = [], []
    for m in range(count):
        e = sp.Integer(0)
        for _ in range(3):
            a, b = rng.integers(0, len(inv), 2)
            e += sp.Rational(int(rng.integers(-9, 10)), 4) * inv[a] * inv[b] + sp.Rational(int(rng.integers(-9, 10)), 4) * inv[a]
        want = bool(m % 2 == 0)
        if not want:
            mag = sp.Rational(int(rng.integers(1, 10)), 10) * (1 if rng.random() < 0.5 else -1)
            e += mag * breakers[int(rng.integers(0, len(breakers)))]
        if e == 0:
            e = inv[0]
        funcs.append(HFunction(n, e, label=f"family-{m}"))
        expected.append(want)
    return funcs, expected


def sample_points(n: int, count: int = 64, seed: int = 0, radius: float = 1.0):
    """Samples with ``0.2 <= |z| <= radius`` and ``|t| <= radius``."""
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(count, 2 * n))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    z *= rng.uniform(0.2, radius, size=(count, 1))
    return z[:, :n], z[:, n:], rng.uniform(-radius, radius, size=count)


def gauge_radial_crosscheck(n: int, profile=None, count: int = 40, seed: int = 0) -> ReductionReport:
    """``Delta_H u(z, t) = (L v)(z, t/2)`` for ``u(z, t) = v(z, t/2)``, v radial in the gauge.

    ``Delta_H u`` comes from the directional stencils; ``L v`` from the
    gauge-polar form of the Grushin operator (N = 2n).
    """
    from .carleman import AngularPart, RadialProfile, TestFunction, apply_grushin, cartesian_callable
    from .gauge import to_polar_array

    N = 2 * n
    profile = profile or RadialProfile("rho_bump", 1.0, 0.6)
    f = TestFunction(profile, AngularPart.mode(N, 0, 0, 0), "gauge-radial")
    v = cartesian_callable(f)
    u = HFunction(n, func=lambda x, y, t: v(np.concatenate([x, y], axis=-1), 0.5 * t), label="gauge-radial")
    x, y, t = sample_points(n, count, seed, radius=1.0)
    a = sublaplacian_apply(u, x, y, t)
    rho, phi, om = to_polar_array(np.concatenate([x, y], axis=-1), 0.5 * t)
    b = apply_grushin(f, rho, phi, om)
    return ReductionReport(reduction_constant(), float(np.max(np.abs(a - b))), float(np.max(np.abs(a))), u.label)
