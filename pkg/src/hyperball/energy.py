"""Quadrature of hyperbolic integrals, the energy functional, Nehari
machinery, best-constant estimation and cap masses.

Radial integrals carry the weight omega_(N-1) sinh(t)^(N-1) folded into the
integrand and are evaluated on graded Gauss-Legendre panels.  Off-center and
cap integrals use geodesic polar coordinates (t, theta) about the origin with
the polar angle measured from a fixed axis; distances to axis points come
from the hyperbolic law of cosines in a cancellation-free form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _quad
from .geometry import Cap
from .params import Params, omega_sphere

__all__ = [
    "EnergyReport",
    "SobolevEstimate",
    "NotProjectableError",
    "energy",
    "pnorm_integral",
    "nehari_project",
    "f_lambda",
    "estimate_sobolev_constant",
    "cap_mass",
    "offcenter_pnorm",
    "axis_distance",
    "polar_integral",
    "radial_edges",
]


class NotProjectableError(ValueError):
    """Nehari projection undefined: the quadratic form is not positive."""


def radial_edges(T: float, t_min: float = 1e-5, uniform: float = 0.5,
                 breakpoints=()) -> np.ndarray:
    """Panel edges on [0, T]: geometric growth from t_min, then uniform."""
    edges = _quad.graded_edges(0.0, T, t_min, uniform)
    if breakpoints:
        bp = [b for b in breakpoints if 0.0 < b < T]
        edges = np.unique(np.concatenate([edges, bp]))
    return edges


@dataclass(frozen=True)
class EnergyReport:
    """Integral terms of the energy functional for one profile.

    I_lambda and nehari_residual are exact arithmetic consequences of the
    stored integrals:
        I_lambda = (gradient - lam*mass)/2 - nonlinear/(p+1)
        nehari_residual = gradient - lam*mass - nonlinear
    """

    gradient_term: float
    mass_term: float
    nonlinear_term: float
    I_lambda: float
    nehari_residual: float
    quadrature_error_estimate: float
    params: Params

    @property
    def quadratic_term(self) -> float:
        return self.gradient_term - self.params.lam * self.mass_term

    def to_dict(self) -> dict:
        return {
            "gradient_term": self.gradient_term,
            "mass_term": self.mass_term,
            "nonlinear_term": self.nonlinear_term,
            "I_lambda": self.I_lambda,
            "nehari_residual": self.nehari_residual,
            "quadrature_error_estimate": self.quadrature_error_estimate,
        }


def _profile_edges(profile, params) -> np.ndarray:
    return radial_edges(profile.T, breakpoints=profile.breakpoints)


def energy(profile, params: Params, npts: int = 16) -> EnergyReport:
    """Gradient, mass and |u|^(p+1) integrals against omega sinh(t)^(N-1)."""
    omega = params.omega
    Nm1 = params.N - 1.0
    edges = _profile_edges(profile, params)

    def terms(t):
        u, du = profile.evaluate(t)
        w = omega * np.sinh(t) ** Nm1
        return np.vstack([du * du * w, u * u * w, np.abs(u) ** (params.p + 1.0) * w])

    nodes, weights = _quad.panel_nodes(edges, npts)
    vals = terms(nodes) @ weights
    nodes2, weights2 = _quad.panel_nodes(_quad._split_edges(edges), npts)
    vals2 = terms(nodes2) @ weights2
    err = float(np.max(np.abs(vals2 - vals)))
    grad, mass, nl = (float(v) for v in vals2)

    I = (grad - params.lam * mass) / 2.0 - nl / (params.p + 1.0)
    res = grad - params.lam * mass - nl
    return EnergyReport(grad, mass, nl, I, res, err, params)


def pnorm_integral(profile, q: float, params: Params, npts: int = 16) -> float:
    """Integral of |u|^q against the hyperbolic volume."""
    omega = params.omega
    Nm1 = params.N - 1.0
    edges = _profile_edges(profile, params)

    def f(t):
        u, _ = profile.evaluate(t)
        return np.abs(u) ** q * omega * np.sinh(t) ** Nm1

    val, _ = _quad.integrate_with_estimate(f, edges, npts)
    return float(val)


def nehari_project(profile, params: Params):
    """Scale the profile onto the Nehari manifold.

    The factor is (quadratic/nonlinear)^(1/(p-1)); both terms must be
    positive.
    """
    rep = energy(profile, params)
    Q = rep.quadratic_term
    NL = rep.nonlinear_term
    if not (Q > 0.0 and NL > 0.0):
        raise NotProjectableError(
            f"projection needs positive quadratic and nonlinear terms (Q={Q:g}, NL={NL:g})"
        )
    tstar = (Q / NL) ** (1.0 / (params.p - 1.0))
    return profile.scaled(tstar), tstar


def f_lambda(profile, params: Params) -> float:
    """Ratio of the critical-power mass to the quadratic form.

    Zero profile maps to 0 by convention; functions on the Nehari manifold
    at the critical power map to 1.
    """
    if profile.max_abs == 0.0:
        return 0.0
    rep = energy(profile, params)
    num = pnorm_integral(profile, params.two_star, params)
    if rep.quadratic_term == 0.0:
        raise ZeroDivisionError("quadratic form vanished")
    return num / rep.quadratic_term


# ---------------------------------------------------------------------------
# best-constant estimation
# ---------------------------------------------------------------------------

@dataclass
class SobolevEstimate:
    constant: float
    minimizer: object
    converged: bool
    shooting_value: float
    galerkin_value: float

    @property
    def oracle_gap(self) -> float:
        ref = max(abs(self.shooting_value), abs(self.galerkin_value), 1e-300)
        return abs(self.shooting_value - self.galerkin_value) / ref

    def to_dict(self) -> dict:
        return {
            "constant": self.constant,
            "converged": self.converged,
            "shooting_value": self.shooting_value,
            "galerkin_value": self.galerkin_value,
            "oracle_gap": self.oracle_gap,
        }


def rayleigh_quotient(profile, params: Params) -> float:
    """Q(u) / (int |u|^(p+1) dV)^(2/(p+1)), the quotient whose infimum is
    the best constant of the embedding at exponent p+1."""
    rep = energy(profile, params)
    nl = rep.nonlinear_term
    if nl <= 0.0:
        raise ValueError("profile has no nonlinear mass")
    return rep.quadratic_term / nl ** (2.0 / (params.p + 1.0))


def estimate_sobolev_constant(params: Params, galerkin_n: int = 1500,
                              T: float = None) -> SobolevEstimate:
    """Best constant of the embedding via two independent minimizations.

    Route one shoots the radial ground state and takes its Rayleigh
    quotient; route two minimizes the quotient over piecewise-linear radial
    functions directly.  The gap between the two is reported; no rigorous
    enclosure is claimed.
    """
    from . import galerkin, radial

    ground = radial.find_nodal_solution(0, params)
    s_shoot = rayleigh_quotient(ground.profile, params)

    if T is None:
        T = max(12.0, 30.0 / params.decay_rate)
    gal = galerkin.minimize_quotient(params, T=T, n=galerkin_n)
    s_gal = gal.quotient

    est = SobolevEstimate(
        constant=min(s_shoot, s_gal),
        minimizer=ground.profile,
        converged=gal.converged,
        shooting_value=s_shoot,
        galerkin_value=s_gal,
    )
    return est


# ---------------------------------------------------------------------------
# polar quadrature about the origin
# ---------------------------------------------------------------------------

def _theta_edges(n_layers: int = 14) -> np.ndarray:
    """Panel edges on [0, pi] graded geometrically toward both endpoints."""
    inner = np.geomspace(1e-6, math.pi / 2.0, n_layers)
    half = np.concatenate(([0.0], inner))
    return np.concatenate([half, (math.pi - half[::-1])[1:]])


def _axis_geometry(t, theta, beta: float):
    """Distance to the axis point at beta with well-conditioned partials.

    Law of cosines arranged so the small-distance regime is
    cancellation-free:
        cosh D - 1 = 2 sinh^2((t-beta)/2) + 2 sinh t sinh beta sin^2(theta/2).
    Returns (D, dD/dt, (dD/dtheta)/sinh t); the last entry is the quantity
    that enters hyperbolic gradient inner products and stays finite at the
    pole.
    """
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    sb = math.sinh(beta)
    s2 = np.sin(0.5 * theta) ** 2
    y = 2.0 * np.sinh(0.5 * (t - beta)) ** 2 + 2.0 * np.sinh(t) * sb * s2
    sinhD = np.sqrt(y * (y + 2.0))
    D = np.log1p(y + sinhD)
    safe = np.where(sinhD > 0.0, sinhD, 1.0)
    dDdt = (np.sinh(t - beta) + 2.0 * np.cosh(t) * sb * s2) / safe
    ratio = sb * np.sin(theta) / safe
    zero = sinhD == 0.0
    if np.any(zero):
        dDdt = np.where(zero, 0.0, dDdt)
        ratio = np.where(zero, 0.0, ratio)
    return D, dDdt, ratio


def axis_distance(t, theta, beta: float):
    """Distance from the polar point (t, theta) to the axis point at beta,
    with partials (D, dD/dt, dD/dtheta)."""
    D, dDdt, ratio = _axis_geometry(t, theta, beta)
    return D, dDdt, ratio * np.sinh(np.asarray(t, dtype=float))


def polar_integral(F, N: int, t_edges, n_t: int = 14, n_theta: int = 14,
                   theta_edges=None):
    """Integral of F(t, theta) over the ball in geodesic polar coordinates.

    F must be vectorized over meshgrid arrays and rotationally symmetric
    about the polar axis; the measure
    omega_(N-2) sinh(t)^(N-1) sin(theta)^(N-2) dtheta dt is supplied here.
    """
    if N < 3:
        raise ValueError("polar quadrature needs N >= 3")
    if theta_edges is None:
        theta_edges = _theta_edges()
    tn, tw = _quad.panel_nodes(np.asarray(t_edges, dtype=float), n_t)
    an, aw = _quad.panel_nodes(np.asarray(theta_edges, dtype=float), n_theta)
    T, A = np.meshgrid(tn, an, indexing="ij")
    vals = F(T, A)
    meas = (np.sinh(tn) ** (N - 1))[:, None] * (np.sin(an) ** (N - 2))[None, :]
    om = omega_sphere(N - 1)
    return om * float(tw @ (vals * meas) @ aw)


def offcenter_pnorm(profile, beta: float, q: float, params: Params,
                    n_t: int = 14, n_theta: int = 14) -> float:
    """Integral of |u(d(b, x))|^q dV computed about the origin, for the
    profile translated to the axis point at distance beta.

    Genuinely exercises the two-dimensional quadrature: the integrand is not
    radial about the integration center unless beta = 0.
    """
    T_int = profile.T + beta
    t_edges = radial_edges(T_int)
    # concentrate panels where the translated core crosses the radial grid
    extra = np.asarray([max(beta - 1.0, 1e-4), beta, beta + 1.0])
    t_edges = np.unique(np.concatenate([t_edges, extra[extra < T_int]]))

    def F(T, A):
        D, _, _ = axis_distance(T, A, beta)
        u, _ = profile.evaluate(np.ravel(D))
        return np.abs(u.reshape(D.shape)) ** q

    return polar_integral(F, params.N, t_edges, n_t, n_theta)


# ---------------------------------------------------------------------------
# cap masses
# ---------------------------------------------------------------------------

def cap_mass(func, cap: Cap, params: Params, q: float = None,
             n_t: int = 14, n_theta: int = 12, t_max: float = 30.0) -> float:
    """Integral of |func|^q over the cap A(a, r) with hyperbolic volume.

    `func` is a callable on Cartesian points (m, N) -> (m,) and must be
    rotationally symmetric about the cap apex axis (radial profiles wrapped
    with `profile_on_ball` qualify).  In polar coordinates about the origin
    with angle measured from the apex direction, cap membership is the
    closed-form condition cos(gamma) > (rho^2 + 1)/(2 rho |a|) at Euclidean
    radius rho, so the angular integral runs to an explicit limit and no
    boundary meshing or masking is needed.
    """
    if q is None:
        q = params.p + 1.0
    N = params.N
    na = float(np.linalg.norm(cap.a))
    ahat = cap.a / na
    rho_min = cap.axis_foot
    t_lo = 2.0 * math.atanh(min(rho_min, 1.0 - 1e-12))
    if t_lo >= t_max:
        return 0.0

    t_edges = radial_edges(t_max)
    t_edges = np.unique(np.concatenate([t_edges[t_edges > t_lo], [t_lo]]))
    tn, tw = _quad.panel_nodes(t_edges, n_t)
    rho = np.tanh(0.5 * tn)
    cmax = np.clip((rho * rho + 1.0) / (2.0 * rho * na), -1.0, 1.0)
    gamma_max = np.arccos(cmax)

    # per-radius Gauss nodes on [0, gamma_max(t)]
    x, w = np.polynomial.legendre.leggauss(n_theta)
    G = 0.5 * gamma_max[:, None] * (x[None, :] + 1.0)
    GW = 0.5 * gamma_max[:, None] * w[None, :]

    # Cartesian samples in the plane span(ahat, e_perp)
    e2 = np.zeros(N)
    e2[int(np.argmin(np.abs(ahat)))] = 1.0
    e2 = e2 - (e2 @ ahat) * ahat
    e2 /= np.linalg.norm(e2)
    pts = (rho[:, None, None] * (np.cos(G)[..., None] * ahat + np.sin(G)[..., None] * e2))
    vals = np.abs(func(pts.reshape(-1, N))).reshape(G.shape) ** q

    meas = (np.sinh(tn) ** (N - 1))[:, None] * np.sin(G) ** (N - 2)
    om = omega_sphere(N - 1)
    return om * float(tw @ np.sum(vals * meas * GW, axis=1))


def profile_on_ball(profile):
    """Wrap a radial profile as a callable on Cartesian ball points."""

    def f(x):
        x = np.asarray(x, dtype=float)
        r = np.sqrt(np.sum(x * x, axis=-1))
        t = 2.0 * np.arctanh(np.minimum(r, 1.0 - 1e-15))
        u, _ = profile.evaluate(np.ravel(t))
        return u.reshape(t.shape)

    return f
