"""Numerics for the Baouendi-Grushin operator ``Delta_z + |z|^2 d_t^2`` on R^N x R.

Submodules:

    gauge        gauge norm, weight psi, gauge-polar coordinates, ball volumes
    special      Gegenbauer polynomials, spherical harmonics, Gauss-Jacobi rules
    spectral     angular eigenbasis, projections P_k, weighted projection bounds
    multiplier   Mellin symbol a_s, dyadic bands and kernel L1 norms
    carleman     weighted norms and Carleman ratio sweeps
    solver       annulus boundary value problems, masses, doubling, Caccioppoli
    vanishing    vanishing-order fits, psi-equivalence, Hölder step, Dini test
    heisenberg   sub-Laplacian on H^n and its torus-invariant reduction
    potentials   Hardy-type potential classes and integrability tests
    cli          command-line harness
"""
from .errors import (
    DegenerateFamilyError,
    DivergenceError,
    DomainError,
    GrushinError,
    IllConditionedError,
    ModeIndexError,
    ParameterError,
    TruncationError,
    ZeroTestFunctionError,
)


__all__ = [
    "DegenerateFamilyError",
    "DivergenceError",
    "DomainError",
    "GrushinError",
    "IllConditionedError",
    "ModeIndexError",
    "ParameterError",
    "TruncationError",
    "ZeroTestFunctionError",
]
__version__ = "0.1.0"
