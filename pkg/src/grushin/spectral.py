"""Grushin spherical harmonics on the gauge sphere and the projections P_k.

Functions on the gauge sphere ``Omega = {rho = 1}`` are sampled on a tensor
grid in ``(phi, omega)`` and integrated against ``dOmega = sin(phi)^(N/2)
dphi domega``.  The orthonormal eigenbasis of the angular operator is

    g_{k,l,j} = sin(phi)^(l/2) * p_n^{lam}(cos phi) * Y_{l,j}(omega),

with ``n = (k-l)/2``, ``lam = l/2 + N/4`` and ``p_n^{lam}`` the Gegenbauer
polynomial normalized under ``(1-x^2)^(lam-1/2)``.  All inner products are
evaluated channel by channel: an exact harmonic transform in ``omega``
followed by a Gauss-Jacobi rule in ``x = cos(phi)`` whose exponent matches
the parity of ``l``.  This makes Gram matrices and projections exact for
band-limited data.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import math
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import ModeIndexError, ParameterError, TruncationError
from .special import (
    gauss_jacobi,
    harmonic_dimension,
    harmonic_indices,
    harmonic_matrix,
    normalized_gegenbauer_table,
    omega_rule,
    sphere_harmonic,
)

DEFAULT_TRUNCATION = 24
TAIL_TOLERANCE = 1e-6


class ModeIndex(NamedTuple):
    k: int
    l: int
    j: int


def check_mode(idx: ModeIndex, N: int, zonal: bool = False) -> ModeIndex:
    k, l, j = idx
    if k < 0 or l < 0 or l > k or (k - l) % 2:
        raise ModeIndexError(f"invalid mode {tuple(idx)}: need 0 <= l <= k and l = k mod 2")
    d = 1 if zonal else harmonic_dimension(N, l)
    if not 0 <= j < d:
        raise ModeIndexError(f"invalid mode {tuple(idx)}: j must be < d_l = {d}")
    return ModeIndex(k, l, j)


def mode_indices(N: int, K: int, zonal: bool = False, k_min: int = 0):
    """All valid ``(k, l, j)`` with ``k_min <= k <= K``, ordered by k, l, j."""
    out = []
    for k in range(k_min, K + 1):
        for l in range(k % 2, k + 1, 2):
            d = 1 if zonal else harmonic_dimension(N, l)
            out.extend(ModeIndex(k, l, j) for j in range(d))
    return out


def eigenvalue(k: int, N: int) -> float:
    """Eigenvalue ``-k(N+k)/4`` of the angular operator on ``H_k``."""
    if k < 0:
        raise ParameterError("k must be nonnegative")
    return -k * (N + k) / 4.0


def channel_lambda(N: int, l: int) -> float:
    return l / 2.0 + N / 4.0


def channel_profiles(N: int, l: int, K: int, x) -> np.ndarray:
    """Rows ``p_n^{lam}(x)`` for ``k = l, l+2, ..., <= K`` (no ``sin^(l/2)`` factor)."""
    nmax = (K - l) // 2
    return normalized_gegenbauer_table(nmax, channel_lambda(N, l), x)


def channel_gram(N: int, l: int, K: int, sin_power: float = 0.0, K2: Optional[int] = None):
    """``int sin(phi)^sin_power g_{k,l} g_{k',l} dOmega`` for k, k' <= K (and K2).

    The weight is absorbed into the Jacobi exponent ``lam - 1/2 + sin_power/2``
    so the result is exact up to rounding.  Angular factors ``Y_{l,j}`` are
    orthonormal and drop out.
    """
    K2 = K if K2 is None else K2
    lam = channel_lambda(N, l)
    a = lam - 0.5 + 0.5 * sin_power
    if not a > -1:
        raise ParameterError(
            f"angular integral diverges: exponent {a} of (1-x^2) must exceed -1"
        )
    n = (max(K, K2) - l) // 2 + 2
    rule = gauss_jacobi(n, a, a)
    P1 = channel_profiles(N, l, K, rule.nodes)
    P2 = channel_profiles(N, l, K2, rule.nodes)
    return (P1 * rule.weights) @ P2.T


class _Block(NamedTuple):
    parity: Optional[int]
    x: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    rows: slice


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Tensor grid on the gauge sphere.

    ``layout='gauss'`` stores two phi blocks (Jacobi exponents matching even and
    odd harmonic degree); ``layout='uniform'`` stores one midpoint block and is
    used by the finite-difference operator.
    """

    N: int
    n_phi: int
    L: int
    layout: str = "gauss"
    zonal: bool = False
    blocks: tuple = field(init=False, repr=False)
    omega: object = field(init=False, repr=False)
    harmonics: list = field(init=False, repr=False)
    Y: np.ndarray = field(init=False, repr=False)
    W: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.N < 2:
            raise ParameterError("N must be at least 2")
        zonal = self.zonal or self.N > 3
        object.__setattr__(self, "zonal", zonal)
        om = omega_rule(self.N, self.L, zonal)
        idx, Y = harmonic_matrix(self.N, self.L, om.nodes, zonal=zonal)
        blocks = []
        base = (self.N - 2) / 4.0
        if self.layout == "gauss":
            start = 0
            for parity, a in ((0, base), (1, base - 0.5)):
                rule = gauss_jacobi(self.n_phi, a, a)
                x = rule.nodes
                w = rule.weights * (1.0 - x * x) ** (base - a)
                blocks.append(_Block(parity, x, np.arccos(x), w, slice(start, start + x.size)))
                start += x.size
        elif self.layout == "uniform":
            phi = (np.arange(self.n_phi) + 0.5) * math.pi / self.n_phi
            w = np.sin(phi) ** (self.N / 2) * math.pi / self.n_phi
            blocks.append(_Block(None, np.cos(phi), phi, w, slice(0, self.n_phi)))
        else:
            raise ParameterError(f"unknown grid layout {self.layout!r}")
        object.__setattr__(self, "blocks", tuple(blocks))
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "harmonics", idx)
        object.__setattr__(self, "Y", Y)
        W = np.zeros((sum(b.phi.size for b in blocks), len(idx)))
        for col, (l, _) in enumerate(idx):
            b = blocks[0] if self.layout == "uniform" else blocks[l % 2]
            W[b.rows, col] = b.weights
        object.__setattr__(self, "W", W)
        by_l = {}
        for col, (l, j) in enumerate(idx):
            by_l.setdefault(l, ([], []))
            by_l[l][0].append(col)
            by_l[l][1].append(j)
        object.__setattr__(self, "by_l", {l: (np.array(c), js) for l, (c, js) in by_l.items()})
        object.__setattr__(self, "Wu", blocks[0].weights[:, None] * om.weights[None, :])
        object.__setattr__(self, "hcol", {lj: c for c, lj in enumerate(idx)})
        object.__setattr__(self, "Yw", np.ascontiguousarray((Y * om.weights).T))

    @property
    def phi(self) -> np.ndarray:
        return np.concatenate([b.phi for b in self.blocks])

    @property
    def shape(self):
        return (sum(b.phi.size for b in self.blocks), self.omega.nodes.shape[0])

    def points(self):
        """Arrays ``phi`` of shape (P, M) and ``omega`` of shape (M, N)."""
        phi = np.repeat(self.phi[:, None], self.shape[1], axis=1)
        return phi, self.omega.nodes

    def block_for(self, l: int) -> _Block:
        if self.layout == "uniform":
            return self.blocks[0]
        return self.blocks[l % 2]

    def harmonic_transform(self, values) -> np.ndarray:
        """Coefficients ``int f(phi_i, .) Y_{l,j} domega`` for every phi row."""
        return np.asarray(values) @ self.Yw

    def sample(self, func: Callable) -> "SphereFunction":
        vals = np.asarray(func(self.phi[:, None], self.omega.nodes[None, :, :]), dtype=float)
        return SphereFunction(self, np.broadcast_to(vals, self.shape).copy(), source=func)

    def inner(self, f, g) -> float:
        if self.layout == "uniform":
            return float(np.sum(self.Wu * np.asarray(f) * np.asarray(g)))
        F = self.harmonic_transform(f)
        G = F if g is f else self.harmonic_transform(g)
        return float(np.sum(self.W * F * G))

    def check_resolution(self, K: int):
        if K > self.L:
            raise ParameterError(f"grid harmonic degree L={self.L} cannot resolve k={K}")
        if self.layout == "gauss" and self.n_phi < K // 2 + 1:
            raise ParameterError(f"grid with n_phi={self.n_phi} cannot resolve k={K}")


@dataclass(eq=False)
class SphereFunction:
    grid: SphereGrid
    values: np.ndarray
    source: Optional[Callable] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ParameterError(
                f"values of shape {self.values.shape} do not match grid {self.grid.shape}"
            )

    def _like(self, values):
        return SphereFunction(self.grid, values)

    def __add__(self, other):
        return self._like(self.values + other.values)

    def __sub__(self, other):
        return self._like(self.values - other.values)

    def __mul__(self, c):
        return self._like(self.values * c)

    __rmul__ = __mul__

    def inner(self, other) -> float:
        return self.grid.inner(self.values, other.values)

    def norm(self) -> float:
        return math.sqrt(max(self.grid.inner(self.values, self.values), 0.0))


@dataclass
class SpectralCoefficients:
    N: int
    K: int
    coeffs: dict
    zonal: bool = False

    def __post_init__(self):
        for idx in self.coeffs:
            check_mode(ModeIndex(*idx), self.N, self.zonal)
            if idx[0] > self.K:
                raise ModeIndexError(f"mode {tuple(idx)} exceeds truncation K={self.K}")
        self.coeffs = {ModeIndex(*i): float(c) for i, c in self.coeffs.items()}

    @classmethod
    def _trusted(cls, N: int, K: int, coeffs: dict, zonal: bool = False) -> "SpectralCoefficients":
        """Skip per-entry validation for coefficients built from valid indices."""
        out = object.__new__(cls)
        out.N, out.K, out.coeffs, out.zonal = N, K, coeffs, zonal
        return out

    def energy(self) -> float:
        return float(sum(c * c for c in self.coeffs.values()))

    def energy_by_degree(self) -> dict:
        out = {}
        for idx, c in self.coeffs.items():
            out[idx.k] = out.get(idx.k, 0.0) + c * c
        return out

    def items(self):
        return self.coeffs.items()

    def channels(self):
        """Group coefficients by ``(l, j)``: ``{(l, j): {k: c}}``."""
        out = {}
        for idx, c in self.coeffs.items():
            out.setdefault((idx.l, idx.j), {})[idx.k] = c
        return out


_PROFILE_CACHE: dict = {}


def _cached(key, build):
    out = _PROFILE_CACHE.get(key)
    if out is None:
        if len(_PROFILE_CACHE) > 4096:
            _PROFILE_CACHE.clear()
        out = _PROFILE_CACHE[key] = build()
    return out


def _channel_values(grid: SphereGrid, l: int, K: int, rows=None) -> np.ndarray:
    """``sin^(l/2) p_n`` on all grid rows, shape (number of k, P)."""

    def build():
        x = np.concatenate([b.x for b in grid.blocks])
        s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
        return channel_profiles(grid.N, l, K, x) * s ** (l / 2.0)

    return _cached(("all", grid.N, grid.n_phi, grid.L, grid.layout, grid.zonal, l, K), build)


def _block_values(grid: SphereGrid, l: int, K: int) -> np.ndarray:
    """Profiles on the block used by channel l, premultiplied by its weights."""

    def build():
        b = grid.block_for(l)
        return channel_profiles(grid.N, l, K, b.x) * np.sqrt(1.0 - b.x * b.x) ** (l / 2.0) * b.weights

    return _cached(("block", grid.N, grid.n_phi, grid.L, grid.layout, grid.zonal, l, K), build)


def synthesize(coeffs: SpectralCoefficients, grid: SphereGrid) -> SphereFunction:
    grid.check_resolution(coeffs.K)
    R = np.zeros((grid.shape[0], len(grid.harmonics)))
    by_l = {}
    for idx, c in coeffs.coeffs.items():
        by_l.setdefault(idx.l, []).append((idx, c))
    for l, items in by_l.items():
        K = max(idx.k for idx, _ in items)
        prof = _channel_values(grid, l, K)
        cols = [grid.hcol[(l, idx.j)] for idx, _ in items]
        C = np.zeros((prof.shape[0], len(grid.harmonics)))
        for col, (idx, c) in zip(cols, items):
            C[(idx.k - l) // 2, col] += c
        used = np.unique(cols)
        R[:, used] += prof.T @ C[:, used]
    return SphereFunction(grid, R @ grid.Y)


def basis_closed_form(idx, N: int, zonal: bool = False) -> Callable:
    """``g_{k,l,j}(phi, omega)`` as a callable for ``SphereGrid.sample``."""
    k, l, j = check_mode(ModeIndex(*idx), N, zonal)
    n = (k - l) // 2

    def g(phi, omega):
        phi = np.asarray(phi, dtype=float)
        om = np.asarray(omega, dtype=float)
        Y = sphere_harmonic(N, l, j, om.reshape(-1, N), zonal=zonal).reshape(om.shape[:-1])
        if phi.ndim == 2 and np.all(phi == phi[:, :1]):
            phi = phi[:, :1]
        x = np.cos(phi)
        prof = channel_profiles(N, l, k, x.ravel())[n].reshape(x.shape)
        return prof * np.sin(phi) ** (l / 2.0) * Y

    return g


def basis_function(idx, grid: SphereGrid) -> SphereFunction:
    """``g_{k,l,j}`` on the grid, carrying its closed form as ``source``."""
    idx = check_mode(ModeIndex(*idx), grid.N, grid.zonal)
    f = synthesize(SpectralCoefficients(grid.N, idx.k, {idx: 1.0}, grid.zonal), grid)
    return SphereFunction(grid, f.values, source=basis_closed_form(idx, grid.N, grid.zonal))


def _expand(h: SphereFunction, K: int) -> SpectralCoefficients:
    grid = h.grid
    grid.check_resolution(K)
    F = grid.harmonic_transform(h.values)
    coeffs = {}
    for l, (cols, js) in grid.by_l.items():
        if l > K:
            continue
        b = grid.block_for(l)
        C = _block_values(grid, l, K) @ F[b.rows][:, cols]
        for i in range(C.shape[0]):
            for j, ci in zip(js, C[i].tolist()):
                coeffs[ModeIndex(l + 2 * i, l, j)] = ci
    return SpectralCoefficients._trusted(grid.N, K, coeffs, grid.zonal)


def parseval_decompose(h: SphereFunction, K: int = DEFAULT_TRUNCATION, tol: float = TAIL_TOLERANCE):
    """Coefficients of ``h`` in the eigenbasis up to degree K.

    Raises ``TruncationError`` when the energy beyond K exceeds ``tol`` of the total.
    """
    coeffs = _expand(h, K)
    total = h.norm() ** 2
    tail = total - coeffs.energy()
    rel = tail / total if total > 0 else 0.0
    if rel > tol:
        raise TruncationError(
            f"relative tail energy {rel:.3e} beyond K={K} exceeds {tol:.1e}", residual=rel
        )
    return coeffs


def project(h: SphereFunction, k: int) -> SphereFunction:
    """Orthogonal projection ``P_k h`` onto ``H_k``."""
    full = _expand(h, k)
    kept = {i: c for i, c in full.items() if i.k == k}
    return synthesize(SpectralCoefficients._trusted(h.grid.N, k, kept, h.grid.zonal), h.grid)


def projector_matrix(grid: SphereGrid, k: int) -> np.ndarray:
    """Matrix of ``P_k`` acting on grid values (rank equals dim H_k)."""
    P, M = grid.shape
    cols = []
    for i in range(P * M):
        e = np.zeros(P * M)
        e[i] = 1.0
        cols.append(project(SphereFunction(grid, e.reshape(P, M)), k).values.ravel())
    return np.array(cols).T


def random_band_limited(grid: SphereGrid, K: int, rng) -> SphereFunction:
    """Standard normal coefficients on every mode of degree <= K."""
    idx = mode_indices(grid.N, K, grid.zonal)
    c = rng.standard_normal(len(idx))
    return synthesize(SpectralCoefficients._trusted(grid.N, K, dict(zip(idx, c.tolist())), grid.zonal), grid)


@dataclass
class DirectSumReport:
    N: int
    K: int
    trials: int
    seed: int
    parseval: float
    idempotence: float
    orthogonality: float
    completeness: float

    @property
    def worst(self) -> float:
        return max(self.parseval, self.idempotence, self.orthogonality, self.completeness)

    def record(self) -> dict:
        d = dict(self.__dict__)
        d["worst"] = self.worst
        return d


def direct_sum_check(N: int, K: int = 8, trials: int = 50, seed: int = 0, grid: Optional[SphereGrid] = None):
    """Relative deviations from Parseval and from ``P_k`` being complementary orthogonal projectors.

    Every measure is normalized by ``||h||^2`` (or ``||h||``) of the random function.
    """
    grid = grid or SphereGrid(N, K // 2 + 2, K, zonal=N > 3)
    rng = np.random.default_rng(seed)
    dev = dict(parseval=0.0, idempotence=0.0, orthogonality=0.0, completeness=0.0)
    for _ in range(trials):
        h = random_band_limited(grid, K, rng)
        n2 = h.norm() ** 2
        dev["parseval"] = max(dev["parseval"], abs(_expand(h, K).energy() - n2) / n2)
        parts = [project(h, k) for k in range(K + 1)]
        total = parts[0]
        for k, P in enumerate(parts):
            if k:
                total = total + P
            dev["idempotence"] = max(dev["idempotence"], (project(P, k) - P).norm() / math.sqrt(n2))
            for k2 in range(k + 1, K + 1):
                dev["orthogonality"] = max(dev["orthogonality"], abs(P.inner(parts[k2])) / n2)
        dev["completeness"] = max(dev["completeness"], (total - h).norm() / math.sqrt(n2))
    return DirectSumReport(N, K, trials, seed, **dev)


def dim_H(N: int, k: int, zonal: bool = False) -> int:
    return len(mode_indices(N, k, zonal, k_min=k))


def apply_L_sigma(
    f: SphereFunction,
    method: str = "spectral",
    K: int = DEFAULT_TRUNCATION,
    tol: float = TAIL_TOLERANCE,
    n_fd: int = 256,
) -> SphereFunction:
    """Angular Grushin operator ``d2/dphi2 + (N/2) cot(phi) d/dphi + (2 sin phi)^-2 Lap_S``.

    ``spectral`` multiplies eigen-coefficients by ``-k(N+k)/4``.
    ``finite_difference`` works per spherical-harmonic channel on a uniform
    midpoint grid in ``phi``: after factoring ``sin^(l/2)`` the channel operator
    is ``q'' + (l + N/2) cot(phi) q' - l(l+N)/4 q``, discretized with
    fourth-order central differences and even reflection at both poles.  The
    result lives on a uniform grid with ``n_fd`` phi nodes.
    """
    if method == "spectral":
        K = min(K, f.grid.L)
        coeffs = parseval_decompose(f, K, tol)
        out = {i: eigenvalue(i.k, f.grid.N) * c for i, c in coeffs.items()}
        return synthesize(SpectralCoefficients._trusted(f.grid.N, K, out, f.grid.zonal), f.grid)
    if method != "finite_difference":
        raise ParameterError(f"unknown method {method!r}")
    if n_fd < 64:
        raise ParameterError("finite_difference requires at least 64 phi nodes")
    ugrid = _uniform_grid(f.grid.N, n_fd, f.grid.L, f.grid.zonal)
    if f.source is not None:
        u = ugrid.sample(f.source)
    else:
        Kf = min(K, f.grid.L, 2 * f.grid.n_phi - 2)
        u = synthesize(parseval_decompose(f, Kf, tol), ugrid)
    return _fd_apply(u)


@lru_cache(maxsize=32)
def _uniform_grid(N: int, n_fd: int, L: int, zonal: bool) -> SphereGrid:
    return SphereGrid(N, n_fd, L, layout="uniform", zonal=zonal)


@lru_cache(maxsize=32)
def _fd_factors(N: int, n_fd: int, L: int, zonal: bool):
    grid = _uniform_grid(N, n_fd, L, zonal)
    phi = grid.blocks[0].phi
    s = np.sin(phi)
    ls = np.array([l for l, _ in grid.harmonics], dtype=float)
    return np.cos(phi) / s, ls, s[:, None] ** (ls[None, :] / 2.0)


def _fd_apply(u: SphereFunction) -> SphereFunction:
    grid = u.grid
    N = grid.N
    h = math.pi / grid.n_phi
    cot, ls, sl = _fd_factors(grid.N, grid.n_phi, grid.L, grid.zonal)
    F = grid.harmonic_transform(u.values)
    q = F / sl
    qe = np.concatenate([q[1::-1], q, q[:-3:-1]], axis=0)
    d1 = (-qe[4:] + 8 * qe[3:-1] - 8 * qe[1:-3] + qe[:-4]) / (12 * h)
    d2 = (-qe[4:] + 16 * qe[3:-1] - 30 * qe[2:-2] + 16 * qe[1:-3] - qe[:-4]) / (12 * h * h)
    out = sl * (d2 + (ls + N / 2.0) * cot[:, None] * d1 - ls * (ls + N) / 4.0 * q)
    return SphereFunction(grid, out @ grid.Y)


@dataclass
class WeightedProjectionReport:
    N: int
    alpha: float
    k_max: int
    trials: int
    seed: int
    empirical: float
    exact_sup: float
    empirical_refined: float
    exact_sup_refined: float
    argmax_k: int
    argmax_l: int

    @property
    def relative_change(self) -> float:
        a = abs(self.exact_sup_refined - self.exact_sup) / self.exact_sup
        b = abs(self.empirical_refined - self.empirical) / self.empirical
        return max(a, b)

    def record(self) -> dict:
        d = dict(self.__dict__)
        d["relative_change"] = self.relative_change
        return d


def admissible_alpha(N: int, alpha: float) -> bool:
    upper = 0.5 if N % 2 == 0 else 0.375
    return 0.0 <= alpha < upper


def _weighted_channel_data(N, l, k_max, K_h, alpha, n_nodes):
    """Weighted norms of ``sin^-alpha g_{k,l}`` and the coupling ``<sin^-alpha g_k', g_k>``."""
    lam = channel_lambda(N, l)
    a2 = lam - 0.5 - alpha
    rule = gauss_jacobi(n_nodes, a2, a2)
    P = channel_profiles(N, l, k_max, rule.nodes)
    vnorm2 = np.sum(P * P * rule.weights, axis=1)
    a1 = lam - 0.5 - 0.5 * alpha
    rule = gauss_jacobi(n_nodes, a1, a1)
    Pk = channel_profiles(N, l, k_max, rule.nodes)
    Ph = channel_profiles(N, l, K_h, rule.nodes)
    M = (Pk * rule.weights) @ Ph.T
    return vnorm2, M


def _projection_constants(N, alpha, k_max, trials, seed, K_h, n_nodes):
    rng = np.random.default_rng(seed)
    zonal = N > 3
    chans = harmonic_indices(N, K_h, zonal)
    best_exact, arg = 0.0, (0, 0)
    data = {}
    for l in range(k_max + 1):
        vnorm2, M = _weighted_channel_data(N, l, k_max, K_h, alpha, n_nodes)
        data[l] = (vnorm2, M)
        const = vnorm2**2
        i = int(np.argmax(const))
        if const[i] > best_exact:
            best_exact, arg = float(const[i]), (l + 2 * i, l)
    best_emp = 0.0
    for _ in range(trials):
        num = np.zeros(k_max + 1)
        norm2 = 0.0
        for l, j in chans:
            nk = (K_h - l) // 2 + 1
            c = rng.standard_normal(nk)
            norm2 += float(c @ c)
            if l > k_max:
                continue
            vnorm2, M = data[l]
            proj = M @ c
            for i, val in enumerate(vnorm2 * proj * proj):
                num[l + 2 * i] += val
        best_emp = max(best_emp, float(num.max() / norm2))
    return best_emp, best_exact, arg


def weighted_projection_constant(
    N: int,
    alpha: float,
    k_max: int = 20,
    trials: int = 100,
    seed: int = 0,
    K_h: Optional[int] = None,
) -> WeightedProjectionReport:
    """Empirical constant in ``||sin^-a P_k(sin^-a h)||^2 <= C ||h||^2``, k <= k_max.

    ``P_k`` acts channel-wise as a rank-one map, so the sharp constant for each
    ``(k, l)`` is ``||sin^-a g_{k,l}||^4``; its maximum is reported as
    ``exact_sup``.  ``empirical`` is the largest ratio seen over ``trials``
    random band-limited ``h`` (degree ``K_h``).  Both are recomputed with twice
    as many Jacobi nodes to expose any resolution dependence.
    """
    if not admissible_alpha(N, alpha):
        raise ParameterError(
            f"alpha={alpha} outside the admissible range for N={N} "
            f"({'[0, 1/2)' if N % 2 == 0 else '[0, 3/8)'})"
        )
    K_h = k_max + 8 if K_h is None else K_h
    n1 = K_h // 2 + 4
    e1, x1, arg = _projection_constants(N, alpha, k_max, trials, seed, K_h, n1)
    e2, x2, _ = _projection_constants(N, alpha, k_max, trials, seed, K_h, 2 * n1)
    return WeightedProjectionReport(N, alpha, k_max, trials, seed, e1, x1, e2, x2, *arg)


def eigen_residual(idx, grid: SphereGrid, method: str = "spectral", n_fd: int = 256) -> float:
    """Relative residual ``||L_sigma g + k(N+k)/4 g|| / ||g||`` for a basis function."""
    idx = check_mode(ModeIndex(*idx), grid.N, grid.zonal)
    g = basis_function(idx, grid)
    if method == "finite_difference":
        if n_fd < 64:
            raise ParameterError("finite_difference requires at least 64 phi nodes")
        ref = _uniform_grid(grid.N, n_fd, grid.L, grid.zonal).sample(g.source)
        Lg = _fd_apply(ref)
    else:
        Lg = apply_L_sigma(g, method, K=min(grid.L, DEFAULT_TRUNCATION), n_fd=n_fd)
        ref = g
    return (Lg - ref * eigenvalue(idx.k, grid.N)).norm() / ref.norm()
