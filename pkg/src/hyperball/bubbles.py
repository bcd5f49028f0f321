"""Cutoff Aubin-Talenti bubbles, their scaling laws, and Palais-Smale
sequence constructors with energy-quantization bookkeeping.

The flat-space extremal V1(x) = (N(N-2))^((N-2)/4) (1+|x|^2)^(-(N-2)/2)
solves -Lap V = |V|^(4/(N-2)) V with energy J(V1) = S^(N/2)/N.  Cutting off
the rescaled profile at a fixed Euclidean radius and weighting it with the
conformal factor produces concentrating functions on the ball whose energies
converge to J(V1); translating a finite-energy solution along a geodesic
produces sequences of constant energy.  Superposing well-separated pieces
realises, at desk scale, the additivity of energies over the profile
decomposition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad

from . import _quad
from .energy import (EnergyReport, _axis_geometry, energy as profile_energy,
                     polar_integral, radial_edges)
from .params import Params, omega_sphere
from .radial import RadialProfile

__all__ = [
    "Bubble",
    "PSSequenceSpec",
    "smooth_step",
    "bubble_eval",
    "standard_bubble_energy",
    "verify_bubble_estimates",
    "hyperbolic_bubble_profile",
    "make_translated_sequence",
    "make_concentrating_sequence",
    "make_superposition_sequence",
    "superposition_energy",
    "quantization_check",
]


# ---------------------------------------------------------------------------
# smooth cutoff
# ---------------------------------------------------------------------------

def _mollifier(s):
    out = np.zeros_like(s)
    pos = s > 0.0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def _mollifier_d(s):
    out = np.zeros_like(s)
    pos = s > 0.0
    out[pos] = np.exp(-1.0 / s[pos]) / s[pos] ** 2
    return out


def smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1, built from exp(-1/s)."""
    s = np.asarray(s, dtype=float)
    a = _mollifier(s)
    b = _mollifier(1.0 - s)
    return a / (a + b)


def _smooth_step_d(s):
    s = np.asarray(s, dtype=float)
    a = _mollifier(s)
    b = _mollifier(1.0 - s)
    da = _mollifier_d(s)
    db = _mollifier_d(1.0 - s)
    return (da * b + a * db) / (a + b) ** 2


@dataclass(frozen=True)
class Bubble:
    """Cutoff concentration profile phi(x) (eps/(eps^2+|x-x0|^2))^((N-2)/2).

    The cutoff is 1 inside |x - x0| < r_inner and 0 outside r_outer, built
    from the standard mollifier, so the profile is smooth and compactly
    supported in the ball.
    """

    epsilon: float
    center: Optional[np.ndarray] = None      # None means the origin
    r_inner: float = 0.25
    r_outer: float = 0.5
    normalized: bool = False                  # include (N(N-2))^((N-2)/4)

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if not 0.0 < self.r_inner < self.r_outer < 1.0:
            raise ValueError("need 0 < r_inner < r_outer < 1")

    @property
    def mu(self) -> float:
        """Square of the concentration scale."""
        return self.epsilon ** 2

    def cutoff(self, rho):
        """phi as a function of the Euclidean distance to the center."""
        rho = np.asarray(rho, dtype=float)
        return 1.0 - smooth_step((rho - self.r_inner) / (self.r_outer - self.r_inner))

    def cutoff_d(self, rho):
        rho = np.asarray(rho, dtype=float)
        return -_smooth_step_d((rho - self.r_inner) / (self.r_outer - self.r_inner)) / (
            self.r_outer - self.r_inner)

    def radial(self, rho, N: int):
        """Profile value at Euclidean distance rho from the center."""
        rho = np.asarray(rho, dtype=float)
        amp = _at_norm(N) if self.normalized else 1.0
        core = (self.epsilon / (self.epsilon ** 2 + rho * rho)) ** ((N - 2.0) / 2.0)
        return amp * self.cutoff(rho) * core

    def __call__(self, x, N: int = None):
        return bubble_eval(self, x, N)


def _at_norm(N: int) -> float:
    return (N * (N - 2.0)) ** ((N - 2.0) / 4.0)


def bubble_eval(b: Bubble, x, N: int = None):
    """Evaluate the cutoff bubble at Cartesian points."""
    x = np.asarray(x, dtype=float)
    if N is None:
        N = x.shape[-1]
    center = b.center if b.center is not None else np.zeros(N)
    rho = np.sqrt(np.sum((x - center) ** 2, axis=-1))
    return b.radial(rho, N)


def aubin_talenti(rho, N: int):
    """The flat extremal V1 at radius rho, with its derivative."""
    rho = np.asarray(rho, dtype=float)
    amp = _at_norm(N)
    base = (1.0 + rho * rho) ** (-(N - 2.0) / 2.0)
    val = amp * base
    dval = -amp * (N - 2.0) * rho * (1.0 + rho * rho) ** (-N / 2.0)
    return val, dval


# ---------------------------------------------------------------------------
# flat-space bubble energy
# ---------------------------------------------------------------------------

def standard_bubble_energy(N: int) -> dict:
    """Dirichlet energy, critical mass and Sobolev quotient of V1 on R^N.

    Returns the quotient estimate S, the critical level J = S^(N/2)/N, and
    the raw integrals; the identity J = S^(N/2)/N is checked internally and
    reported as `level_identity_gap`.
    """
    if N < 3:
        raise ValueError("needs N >= 3")
    om = omega_sphere(N)
    two_star = 2.0 * N / (N - 2.0)

    def grad_integrand(rho):
        _, dv = aubin_talenti(rho, N)
        return dv * dv * rho ** (N - 1)

    def mass_integrand(rho):
        v, _ = aubin_talenti(rho, N)
        return np.abs(v) ** two_star * rho ** (N - 1)

    grad = om * _infinite_radial_quad(grad_integrand)
    nl = om * _infinite_radial_quad(mass_integrand)
    S = grad / nl ** (2.0 / two_star)
    J = grad / 2.0 - nl / two_star
    return {
        "S": S,
        "J": J,
        "gradient": grad,
        "critical_mass": nl,
        "level_identity_gap": abs(J - S ** (N / 2.0) / N) / max(J, 1e-300),
    }


def _infinite_radial_quad(f, split: float = 1.0) -> float:
    a, _ = quad(lambda r: float(f(np.asarray([r]))[0]) if np.ndim(f(np.asarray([r]))) else float(f(r)),
                0.0, split, epsabs=1e-14, epsrel=1e-13, limit=200)
    b, _ = quad(lambda s: float(f(1.0 / s)) / s ** 2, 1e-12, 1.0 / split,
                epsabs=1e-14, epsrel=1e-13, limit=200)
    return a + b


# ---------------------------------------------------------------------------
# scaling-law verification
# ---------------------------------------------------------------------------

def _quad_breaks(f, a, b, points, **kw):
    val, _ = quad(f, a, b, points=[p for p in points if a < p < b],
                  limit=400, epsabs=1e-14, epsrel=1e-13, **kw)
    return val


@dataclass
class BubbleEstimateReport:
    N: int
    mu: np.ndarray
    quantities: dict
    slopes: dict
    predicted: dict
    fit_residual: dict

    def max_slope_error(self) -> float:
        return max(abs(self.slopes[k] - self.predicted[k]) for k in self.slopes)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "mu": self.mu.tolist(),
            "quantities": {k: np.asarray(v).tolist() for k, v in self.quantities.items()},
            "slopes": self.slopes,
            "predicted": self.predicted,
            "fit_residual": self.fit_residual,
        }


def verify_bubble_estimates(N: int, mu_grid, r_inner: float = 0.25,
                            r_outer: float = 0.5) -> BubbleEstimateReport:
    """Fit the concentration-scaling laws of the cutoff bubble.

    Five quantities are computed by radial quadrature on the unit ball for
    each mu = eps^2 and their leading powers of mu are fitted on a log-log
    grid:

      grad_dev : | |grad v|_2^2 - K1 |           ~ mu^((N-2)/2)
      weighted : | (2/(1-|x|^2)) v |_2^2         ~ mu
      crit_dev : | K2 - |v|_{2*}^{2*} |          ~ mu^(N/2)
      l1       : |v|_1                           ~ mu^((N-4)/4 + 1/2) = mu^((N-2)/4)
      l2s1     : |v|_{2*-1}^{2*-1}               ~ mu^((N-2)/4)

    K1, K2 are the full-space integrals of the unmodified profile, and the
    deviations are computed directly as tail integrals so no precision is
    lost to cancellation.  The grid must span at least two decades; the
    weighted-mass law needs N >= 5 (logarithmic corrections appear at
    N = 4).
    """
    mu = np.sort(np.asarray(mu_grid, dtype=float))
    if len(mu) < 4 or mu[-1] / mu[0] < 99.0:
        raise ValueError("mu grid must have >= 4 points spanning >= 2 decades")
    if N < 5:
        raise ValueError("scaling fits are asserted for N >= 5 only")
    om = omega_sphere(N)
    two_star = 2.0 * N / (N - 2.0)
    bubble0 = Bubble(1.0, r_inner=r_inner, r_outer=r_outer)

    rows = {"grad_dev": [], "weighted": [], "crit_dev": [], "l1": [], "l2s1": []}
    for m in mu:
        eps = math.sqrt(m)
        b = Bubble(eps, r_inner=r_inner, r_outer=r_outer)
        half = (N - 2.0) / 2.0

        def U(r):
            return (eps / (eps * eps + r * r)) ** half

        def dU(r):
            return -(N - 2.0) * r * eps ** half / (eps * eps + r * r) ** (N / 2.0)

        pts = (eps, 10 * eps, r_inner, r_outer)

        # gradient deviation: cutoff zone plus the amputated far tail
        def g_zone(r):
            phi = float(b.cutoff(np.asarray([r]))[0])
            dphi = float(b.cutoff_d(np.asarray([r]))[0])
            total = (dphi * U(r) + phi * dU(r)) ** 2 - dU(r) ** 2
            return total * r ** (N - 1)

        zone = _quad_breaks(g_zone, r_inner, r_outer, pts)
        far = quad(lambda r: dU(r) ** 2 * r ** (N - 1), r_outer, np.inf,
                   epsabs=1e-14, epsrel=1e-13, limit=200)[0]
        rows["grad_dev"].append(abs(om * (zone - far)))

        # weighted mass on the ball
        def w_mass(r):
            phi = float(b.cutoff(np.asarray([r]))[0])
            q = 2.0 / (1.0 - r * r)
            return (q * phi * U(r)) ** 2 * r ** (N - 1)

        rows["weighted"].append(om * _quad_breaks(w_mass, 0.0, r_outer, pts))

        # critical-mass deficit
        def c_zone(r):
            phi = float(b.cutoff(np.asarray([r]))[0])
            return (1.0 - phi ** two_star) * U(r) ** two_star * r ** (N - 1)

        zone = _quad_breaks(c_zone, r_inner, r_outer, pts)
        far = quad(lambda r: U(r) ** two_star * r ** (N - 1), r_outer, np.inf,
                   epsabs=1e-16, epsrel=1e-13, limit=200)[0]
        rows["crit_dev"].append(om * (zone + far))

        rows["l1"].append(om * _quad_breaks(
            lambda r: float(b.cutoff(np.asarray([r]))[0]) * U(r) * r ** (N - 1),
            0.0, r_outer, pts))
        rows["l2s1"].append(om * _quad_breaks(
            lambda r: (float(b.cutoff(np.asarray([r]))[0]) * U(r)) ** (two_star - 1.0)
            * r ** (N - 1),
            0.0, r_outer, pts))

    predicted = {
        "grad_dev": (N - 2.0) / 2.0,
        "weighted": 1.0,
        "crit_dev": N / 2.0,
        "l1": (N - 2.0) / 4.0,
        "l2s1": (N - 2.0) / 4.0,
    }
    slopes = {}
    resid = {}
    lx = np.log(mu)
    for key, vals in rows.items():
        ly = np.log(np.abs(np.asarray(vals)))
        coef, res, *_ = np.polyfit(lx, ly, 1, full=True)
        slopes[key] = float(coef[0])
        resid[key] = float(res[0]) if len(res) else 0.0
    return BubbleEstimateReport(N=N, mu=mu, quantities=rows, slopes=slopes,
                                predicted=predicted, fit_residual=resid)


# ---------------------------------------------------------------------------
# hyperbolic-side concentrating profiles
# ---------------------------------------------------------------------------

def hyperbolic_bubble_profile(bubble: Bubble, N: int, n_grid: int = 4001) -> RadialProfile:
    """Radial profile of the conformally weighted bubble centered at the origin:

        g(t) = ((1-r^2)/2)^((N-2)/2) phi(r) eps^(-(N-2)/2) V((r)/eps),
        r = tanh(t/2),

    where V is the flat extremal (normalized when bubble.normalized).
    """
    if bubble.center is not None and np.any(np.asarray(bubble.center) != 0.0):
        raise ValueError("radial form requires the bubble centered at the origin")
    eps = bubble.epsilon
    half = (N - 2.0) / 2.0
    amp = _at_norm(N) if bubble.normalized else 1.0

    def g(t):
        t = np.asarray(t, dtype=float)
        r = np.tanh(0.5 * t)
        conf = (1.0 / (1.0 + np.cosh(t))) ** half
        core = (1.0 + (r / eps) ** 2) ** -half
        return amp * eps ** -half * conf * bubble.cutoff(r) * core

    def dg(t):
        t = np.asarray(t, dtype=float)
        r = np.tanh(0.5 * t)
        drdt = 0.5 * (1.0 - r * r)
        conf = (1.0 / (1.0 + np.cosh(t))) ** half
        dconf = -half * conf * np.sinh(t) / (1.0 + np.cosh(t))
        core = (1.0 + (r / eps) ** 2) ** -half
        dcore = -half * core / (1.0 + (r / eps) ** 2) * 2.0 * r / eps ** 2
        phi = bubble.cutoff(r)
        dphi = bubble.cutoff_d(r)
        return amp * eps ** -half * (
            dconf * phi * core + conf * (dphi * core + phi * dcore) * drdt)

    T = 2.0 * math.atanh(bubble.r_outer) + 0.5
    t = np.linspace(0.0, T, n_grid)
    prof = RadialProfile.from_arrays(t, g(t), dg(t))
    from .radial import _CallableDense

    prof.dense = _CallableDense(g, dg, T)
    prof.breakpoints = (2.0 * math.atanh(bubble.r_inner), 2.0 * math.atanh(bubble.r_outer))
    return prof


# ---------------------------------------------------------------------------
# superpositions along an axis
# ---------------------------------------------------------------------------

def _cell_quadrature(cell_beta: float, lo_gap: float, hi_gap: float,
                     comps, params: Params, n_t: int, n_theta: int):
    """Integrals of (grad^2, f^2, |f|^(p+1)) over one Voronoi slab.

    The slab of the center at cell_beta, between the geodesic hyperplanes
    equidistant to the neighbours at axis gaps lo_gap (behind) and hi_gap
    (ahead); either gap may be infinite.  Polar coordinates (s, psi) about
    the cell center, psi measured from the +axis direction: membership is
    psi >= arccos(tanh(hi_gap/2) coth s) and
    psi <= arccos(-tanh(lo_gap/2) coth s), both limits closed-form.
    Inside its own slab every component core is either exactly radial or
    beyond the boundary, so graded radial panels and a modest angular order
    give spectral convergence.
    """
    N = params.N
    rel = [(float(b) - cell_beta, p) for b, p in comps]
    span = max(abs(rb) + p.T for rb, p in rel) + 1.0
    t_min = min([1e-5] + [5e-7 + 0.02 * p.breakpoints[0] if p.breakpoints else 1e-5
                          for rb, p in rel if rb == 0.0])
    s_edges = radial_edges(span, t_min=t_min, uniform=0.4)
    sn, sw = _quad.panel_nodes(s_edges, n_t)

    coth = 1.0 / np.tanh(sn)
    hi = np.arccos(np.clip(math.tanh(0.5 * hi_gap) * coth, -1.0, 1.0)) \
        if math.isfinite(hi_gap) else np.zeros_like(sn)
    lo = np.arccos(np.clip(-math.tanh(0.5 * lo_gap) * coth, -1.0, 1.0)) \
        if math.isfinite(lo_gap) else np.full_like(sn, math.pi)
    width = np.maximum(lo - hi, 0.0)

    x, w = np.polynomial.legendre.leggauss(n_theta)
    # three angular panels per radius, graded toward the +axis where the
    # ahead-neighbour tail varies fastest
    splits = np.asarray([0.0, 0.15, 0.5, 1.0])
    psi_nodes = []
    psi_weights = []
    for a, b in zip(splits[:-1], splits[1:]):
        seg = hi[:, None] + width[:, None] * (a + (b - a) * 0.5 * (x[None, :] + 1.0))
        segw = width[:, None] * (b - a) * 0.5 * w[None, :]
        psi_nodes.append(seg)
        psi_weights.append(segw)
    PSI = np.concatenate(psi_nodes, axis=1)
    PSIW = np.concatenate(psi_weights, axis=1)
    S = np.broadcast_to(sn[:, None], PSI.shape)

    f = np.zeros_like(PSI)
    dfs = np.zeros_like(PSI)
    dfpsi = np.zeros_like(PSI)
    for rb, prof in rel:
        if rb >= 0.0:
            D, dDds, ratio = _axis_geometry(S, PSI, rb)
        else:
            D, dDds, ratio = _axis_geometry(S, math.pi - PSI, -rb)
            ratio = -ratio
        u, du = prof.evaluate(np.ravel(D))
        u = u.reshape(D.shape)
        du = du.reshape(D.shape)
        f += u
        dfs += du * dDds
        dfpsi += du * ratio

    grad_sq = dfs * dfs + dfpsi * dfpsi
    meas = (np.sinh(sn) ** (N - 1))[:, None] * np.sin(PSI) ** (N - 2) * PSIW
    om = omega_sphere(N - 1)
    g2 = om * float(sw @ np.sum(grad_sq * meas, axis=1))
    m2 = om * float(sw @ np.sum(f * f * meas, axis=1))
    nl = om * float(sw @ np.sum(np.abs(f) ** (params.p + 1.0) * meas, axis=1))
    return g2, m2, nl


def superposition_energy(components, params: Params, n_t: int = 14,
                         n_theta: int = 14) -> EnergyReport:
    """Energy of a sum of radial pieces centered on a common axis.

    The ball is split into Voronoi slabs of the distinct centers; each slab
    is integrated in geodesic polar coordinates about its own center with
    the angular limits of the slab in closed form, and gradients come from
    the exact law-of-cosines partials of the distance functions.  The whole
    superposed profile is integrated, never a sum of per-component
    energies, so additivity gaps are measured rather than assumed.
    """
    comps = [(float(b), p) for b, p in components]
    centers = sorted({b for b, _ in comps})
    grad = mass = nl = 0.0
    for i, c in enumerate(centers):
        lo_gap = c - centers[i - 1] if i > 0 else math.inf
        hi_gap = centers[i + 1] - c if i + 1 < len(centers) else math.inf
        g2, m2, pw = _cell_quadrature(c, lo_gap, hi_gap, comps, params, n_t, n_theta)
        grad += g2
        mass += m2
        nl += pw
    I = 0.5 * (grad - params.lam * mass) - nl / (params.p + 1.0)
    return EnergyReport(grad, mass, nl, I, grad - params.lam * mass - nl,
                        math.nan, params)


# ---------------------------------------------------------------------------
# Palais-Smale sequence specifications
# ---------------------------------------------------------------------------

@dataclass
class PSSequenceSpec:
    """A family of superposed profiles indexed by the separation parameter.

    Entry n superposes the optional base solution at the origin, translated
    copies of `profile` at axis distances `translations[n]`, and the
    concentrating bubbles `bubbles[n]`.  `level` is the separation-limit
    energy: I(base) + sum of I(profile) over translates + J(V1) per bubble.
    """

    params: Params
    base_solution: Optional[RadialProfile] = None
    profile: Optional[RadialProfile] = None
    translations: list = field(default_factory=list)   # per-n tuple of beta
    bubbles: list = field(default_factory=list)        # per-n tuple of Bubble
    level: float = math.nan

    def __post_init__(self):
        n = max(len(self.translations), len(self.bubbles))
        self.translations = list(self.translations) + [()] * (n - len(self.translations))
        self.bubbles = list(self.bubbles) + [()] * (n - len(self.bubbles))
        if math.isnan(self.level):
            self.level = self._target_level()

    def __len__(self) -> int:
        return len(self.translations)

    def _target_level(self) -> float:
        lvl = 0.0
        if self.base_solution is not None:
            lvl += profile_energy(self.base_solution, self.params).I_lambda
        if self.profile is not None and self.translations:
            per = profile_energy(self.profile, self.params).I_lambda
            lvl += per * len(self.translations[0])
        if self.bubbles and self.bubbles[0]:
            J = standard_bubble_energy(self.params.N)["J"]
            lvl += J * len(self.bubbles[0])
        return lvl

    def components(self, n: int):
        comps = []
        if self.base_solution is not None:
            comps.append((0.0, self.base_solution))
        for beta in self.translations[n]:
            comps.append((float(beta), self.profile))
        for b in self.bubbles[n]:
            comps.append((0.0, hyperbolic_bubble_profile(b, self.params.N)))
        return comps

    def evaluator(self, n: int):
        """Pointwise evaluator of the n-th superposed profile on ball points."""
        comps = self.components(n)

        def f(x):
            x = np.asarray(x, dtype=float)
            r = np.sqrt(np.sum(x * x, axis=-1))
            t = 2.0 * np.arctanh(np.minimum(r, 1.0 - 1e-15))
            cosx = np.divide(x[..., 0], np.maximum(r, 1e-300))
            theta = np.arccos(np.clip(cosx, -1.0, 1.0))
            out = np.zeros_like(t)
            for beta, prof in comps:
                D, _, _ = _axis_geometry(t, theta, beta)
                u, _ = prof.evaluate(np.ravel(D))
                out += u.reshape(D.shape)
            return out

        return f


def _as_beta(center) -> float:
    """Axis position of a center given as a distance or an on-axis point."""
    if np.ndim(center) == 0:
        return float(center)
    c = np.asarray(center, dtype=float)
    r = float(np.linalg.norm(c))
    if r > 0.0 and abs(c[0]) / r < 1.0 - 1e-12:
        raise ValueError("sequence centers must lie on the first coordinate axis")
    return math.copysign(2.0 * math.atanh(r), c[0] if r > 0 else 1.0)


def make_translated_sequence(profile: RadialProfile, centers,
                             params: Params) -> PSSequenceSpec:
    """Sequence u_n = U composed with the translation carrying 0 to b_n.

    Centers are on-axis points or hyperbolic distances, strictly increasing;
    every term has the energy of U and its local mass near the origin decays
    as the centers escape.
    """
    betas = [_as_beta(c) for c in centers]
    if any(b2 <= b1 for b1, b2 in zip(betas[:-1], betas[1:])):
        raise ValueError("translation distances must be strictly increasing")
    return PSSequenceSpec(params=params, profile=profile,
                          translations=[(b,) for b in betas])


def make_concentrating_sequence(eps_list, params: Params, center=None,
                                normalized: bool = True) -> PSSequenceSpec:
    """Concentrating profiles with scales eps_n decreasing to 0.

    Profiles are the conformally weighted cutoff rescalings of the flat
    extremal; their energies converge to the flat critical level J(V1).
    """
    eps = [float(e) for e in eps_list]
    if any(e2 >= e1 for e1, e2 in zip(eps[:-1], eps[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    if center is not None and _as_beta(center) != 0.0:
        raise ValueError("energy bookkeeping requires the bubble at the origin")
    return PSSequenceSpec(params=params,
                          bubbles=[(Bubble(e, normalized=normalized),) for e in eps])


def make_superposition_sequence(profile: RadialProfile, beta_list, eps_list,
                                params: Params) -> PSSequenceSpec:
    """Translated solution plus an origin bubble, with growing separation."""
    n = max(len(beta_list), len(eps_list))
    betas = list(beta_list) + [beta_list[-1]] * (n - len(beta_list))
    epss = list(eps_list) + [eps_list[-1]] * (n - len(eps_list))
    return PSSequenceSpec(
        params=params, profile=profile,
        translations=[(float(b),) for b in betas],
        bubbles=[(Bubble(float(e), normalized=True),) for e in epss],
    )


@dataclass
class QuantizationRow:
    index: int
    separation: float
    energy: float
    level: float

    @property
    def gap(self) -> float:
        return abs(self.energy - self.level) / max(abs(self.level), 1e-300)


def quantization_check(spec: PSSequenceSpec, params: Params = None,
                       n_t: int = 14, n_theta: int = 14) -> list:
    """Energy-additivity gaps of a superposition family.

    For each index the superposed profile's energy is integrated as a whole
    (never assembled from per-component energies) and compared with the sum
    of the component levels; the gap is expected to shrink as separations
    grow.
    """
    params = params or spec.params
    rows = []
    for n in range(len(spec)):
        comps = spec.components(n)
        rep = superposition_energy(comps, params, n_t=n_t, n_theta=n_theta)
        sep = math.inf
        betas = [b for b, _ in comps]
        if len(betas) > 1:
            betas = sorted(betas)
            sep = min(b2 - b1 for b1, b2 in zip(betas[:-1], betas[1:]))
        if spec.bubbles[n]:
            eps = min(b.epsilon for b in spec.bubbles[n])
            sep = min(sep, 1.0 / eps)
        rows.append(QuantizationRow(n, sep, rep.I_lambda, spec.level))
    return rows
