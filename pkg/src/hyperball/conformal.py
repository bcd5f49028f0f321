"""Hyperbolic <-> Euclidean change of variables for functions and energies.

With q(x) = 2/(1-|x|^2), the substitution v = q^((N-2)/2) u turns the
hyperbolic equation into a Euclidean one with shifted spectral parameter
lambda~ = lam - N(N-2)/4, and the energies agree:

    I_lam(u) = 1/2 int (|grad_B u|_B^2 - lam u^2) dV_B - 1/(p+1) int |u|^(p+1) dV_B
             = 1/2 int (|grad v|^2 - lambda~ q^2 v^2) dx - 1/(p+1) int q^t |v|^(p+1) dx

where the weight power t = N - (N-2)(p+1)/2 vanishes exactly at the
critical exponent.  All radial formulas are evaluated through the stable
identities q = 1 + cosh(t), |x| = tanh(t/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _quad
from .energy import radial_edges
from .geometry import BOUNDARY_MARGIN, BoundaryError
from .params import Params

__all__ = [
    "ConformalWeight",
    "to_euclidean",
    "from_euclidean",
    "euclidean_profile",
    "energy_equivalence_check",
    "euclidean_residual",
]

# largest geodesic radius whose Euclidean image stays inside the boundary margin
T_EUCLIDEAN_CAP = 2.0 * math.atanh(1.0 - BOUNDARY_MARGIN)


@dataclass(frozen=True)
class ConformalWeight:
    """Derived exponents of the change of variables."""

    exponent_t: float
    lambda_tilde: float

    @classmethod
    def for_params(cls, params: Params) -> "ConformalWeight":
        t = params.N - (params.N - 2.0) * (params.p + 1.0) / 2.0
        return cls(exponent_t=t, lambda_tilde=params.lambda_tilde)


def _check_inside(x: np.ndarray):
    r2 = np.sum(x * x, axis=-1)
    if np.any(r2 >= (1.0 - BOUNDARY_MARGIN) ** 2):
        raise BoundaryError("evaluation outside |x| < 1 - margin rejected")


def to_euclidean(u, params: Params):
    """v(x) = (2/(1-|x|^2))^((N-2)/2) u(x), as a callable on ball points."""

    def v(x):
        x = np.asarray(x, dtype=float)
        _check_inside(x)
        q = 2.0 / (1.0 - np.sum(x * x, axis=-1))
        return q ** ((params.N - 2.0) / 2.0) * u(x)

    return v


def from_euclidean(v, params: Params):
    """Exact inverse of `to_euclidean`."""

    def u(x):
        x = np.asarray(x, dtype=float)
        _check_inside(x)
        q = 2.0 / (1.0 - np.sum(x * x, axis=-1))
        return q ** (-(params.N - 2.0) / 2.0) * v(x)

    return u


def euclidean_profile(profile, params: Params):
    """Radial Euclidean-side function (v, v') as callables of r = |x|.

    v(r) = q(r)^((N-2)/2) u(t(r)) with t = 2 artanh r; the derivative uses
    q' = r q^2 and dt/dr = q.
    """
    half = (params.N - 2.0) / 2.0

    def v(r):
        r = np.asarray(r, dtype=float)
        q = 2.0 / (1.0 - r * r)
        t = 2.0 * np.arctanh(r)
        u, _ = profile.evaluate(t)
        return q ** half * u

    def dv(r):
        r = np.asarray(r, dtype=float)
        q = 2.0 / (1.0 - r * r)
        t = 2.0 * np.arctanh(r)
        u, du = profile.evaluate(t)
        return q ** half * (half * r * q * u + q * du)

    return v, dv


def energy_equivalence_check(profile, params: Params, npts: int = 16) -> dict:
    """Compare the hyperbolic energy with its Euclidean form.

    The hyperbolic side integrates in geodesic radius; the Euclidean side
    integrates an independently assembled integrand in |x| over
    (0, tanh(T/2)), truncated at the boundary margin.  Both target the same
    number, so the relative gap measures quadrature plus truncation error.
    """
    from .energy import energy as hyperbolic_energy

    rep = hyperbolic_energy(profile, params, npts=npts)
    I_hyp = rep.I_lambda

    w = ConformalWeight.for_params(params)
    T_cut = min(profile.T, 19.0, T_EUCLIDEAN_CAP)
    r_cut = math.tanh(0.5 * T_cut)
    v, dv = euclidean_profile(profile, params)
    om = params.omega

    r_break = [math.tanh(0.5 * b) for b in profile.breakpoints if 0.0 < b < T_cut]
    edges = radial_edges(r_cut, t_min=1e-6, uniform=0.02, breakpoints=r_break)

    def integrand(r):
        q = 2.0 / (1.0 - r * r)
        vv = v(r)
        dvv = dv(r)
        quad_part = 0.5 * (dvv * dvv - w.lambda_tilde * q * q * vv * vv)
        nl_part = q ** w.exponent_t * np.abs(vv) ** (params.p + 1.0) / (params.p + 1.0)
        return (quad_part - nl_part) * om * r ** (params.N - 1.0)

    J_val, J_err = _quad.integrate_with_estimate(integrand, edges, npts)

    gap = abs(I_hyp - J_val) / (1.0 + abs(I_hyp))
    return {
        "I_lambda": I_hyp,
        "J_lambda": float(J_val),
        "relative_gap": float(gap),
        "lambda_tilde": w.lambda_tilde,
        "weight_exponent": w.exponent_t,
        "quadrature_error_estimate": float(max(rep.quadrature_error_estimate, J_err)),
    }


def euclidean_residual(profile, params: Params, radii, h: float = 1e-3) -> float:
    """Finite-difference residual of the Euclidean form of the equation.

    Checks -Lap v - lambda~ q^2 v = q^t |v|^(p-1) v at Cartesian sample
    points (first-axis placement; v is radial), using centered second-order
    stencils of step h.  Returns the max absolute residual.
    """
    w = ConformalWeight.for_params(params)
    v, _ = euclidean_profile(profile, params)
    N = params.N
    worst = 0.0
    for r0 in np.asarray(radii, dtype=float):
        if r0 + h >= 1.0 - BOUNDARY_MARGIN or r0 - h <= 0.0:
            raise ValueError("sample radius too close to 0 or the boundary")
        x = np.zeros(N)
        x[0] = r0
        lap = 0.0
        v0 = float(v(np.asarray([r0]))[0])
        for i in range(N):
            xp = x.copy(); xp[i] += h
            xm = x.copy(); xm[i] -= h
            rp = float(np.linalg.norm(xp))
            rm = float(np.linalg.norm(xm))
            lap += (float(v(np.asarray([rp]))[0]) - 2.0 * v0
                    + float(v(np.asarray([rm]))[0])) / (h * h)
        q = 2.0 / (1.0 - r0 * r0)
        res = (-lap - w.lambda_tilde * q * q * v0
               - q ** w.exponent_t * math.copysign(abs(v0) ** params.p, v0))
        worst = max(worst, abs(res))
    return worst
