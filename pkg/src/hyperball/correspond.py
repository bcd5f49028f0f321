"""Parameter maps and solution transport for the Hardy-Sobolev-Mazya and
critical Grushin equations.

Cylindrically symmetric solutions of

    -Lap u - eta u/|y|^2 = |u|^(p_t - 1) u / |y|^t   on R^n = R^k x R^(n-k)

correspond to radial solutions of the ball problem at
N = n-k+1, p = p_t = (n+2-2t)/(n-2), lam = eta + ((n-k)^2 - (k-2)^2)/4,
through w(r, z) = r^((n-2)/2) u~(r, z) and the ball <-> half-space map; the
critical Grushin equation

    Lap_y phi + (1+a)^2 |y|^(2a) Lap_z phi + |phi|^(4/(Q-2)) phi = 0

maps to N = h+1, lam = (h^2 - ((k-2)/(a+1))^2)/4, p = (Q+2)/(Q-2) with
Q = k + h(1+a) via Phi(r, z) = r^((Q-2)/(2(1+a))) phi(r^(1/(1+a)), z).

Parameter arithmetic is exact (fractions) whenever the inputs are rational.
The half-space coordinate (r; z) occupies slot 1 of the self-inverse map in
`geometry.halfspace_map`, which fixes the orientation of the correspondence;
the transported functions are exposed as evaluators only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .geometry import halfspace_map
from .params import Params, omega_sphere

__all__ = [
    "HSMParams",
    "GrushinParams",
    "BorderlineCaseError",
    "hsm_parameter_map",
    "grushin_parameter_map",
    "hsm_to_hyperbolic",
    "grushin_to_hyperbolic",
    "transport_to_hsm",
    "transport_to_grushin",
    "hsm_residual",
    "grushin_residual",
    "truncated_dirichlet_norm",
]


class BorderlineCaseError(ValueError):
    """Mapped spectral parameter hits ((N-1)/2)^2, outside this solver's space.

    The correspondence is still formally valid there, but the hyperbolic
    problem must be posed in the larger completion norm, which this package
    does not implement.
    """


def _rat(x):
    if isinstance(x, Rational):
        return Fraction(x)
    return None


def _exactable(*vals) -> bool:
    return all(_rat(v) is not None for v in vals)


@dataclass(frozen=True)
class HSMParams:
    """Data (n, k, eta, t) of the Hardy-Sobolev-Mazya equation."""

    n: int
    k: int
    eta: float
    t: float

    def __post_init__(self):
        if not (isinstance(self.k, int) and isinstance(self.n, int)):
            raise ValueError("n and k must be integers")
        if not 2 <= self.k < self.n:
            raise ValueError(f"need 2 <= k < n, got k={self.k}, n={self.n}")
        if not 0 <= self.t < 2:
            raise ValueError(f"need 0 <= t < 2, got t={self.t}")
        if self.k == 2:
            if self.eta != 0:
                raise ValueError("eta must vanish when k = 2")
        else:
            if not 0 <= self.eta < (self.k - 2) ** 2 / 4:
                raise ValueError(
                    f"need 0 <= eta < (k-2)^2/4 = {(self.k - 2) ** 2 / 4}, got {self.eta}"
                )

    @property
    def p_t(self):
        if _exactable(self.t):
            return Fraction(self.n + 2 - 2 * Fraction(self.t), self.n - 2)
        return (self.n + 2 - 2.0 * self.t) / (self.n - 2.0)


@dataclass(frozen=True)
class GrushinParams:
    """Data (alpha, k, h) of the critical Grushin equation."""

    alpha: float
    k: int
    h: int

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not (isinstance(self.k, int) and self.k >= 1):
            raise ValueError("k must be an integer >= 1")
        if not (isinstance(self.h, int) and self.h >= 1):
            raise ValueError("h must be an integer >= 1")

    @property
    def Q(self):
        if _exactable(self.alpha):
            return self.k + self.h * (1 + Fraction(self.alpha))
        return self.k + self.h * (1.0 + self.alpha)


def hsm_parameter_map(hp: HSMParams):
    """(N, p, lam) of the equivalent ball problem; exact if inputs are rational."""
    N = hp.n - hp.k + 1
    if _exactable(hp.eta, hp.t):
        lam = Fraction(hp.eta) + Fraction((hp.n - hp.k) ** 2 - (hp.k - 2) ** 2, 4)
    else:
        lam = hp.eta + ((hp.n - hp.k) ** 2 - (hp.k - 2) ** 2) / 4.0
    return N, hp.p_t, lam


def grushin_parameter_map(gp: GrushinParams):
    """(N, p, lam) of the equivalent ball problem; exact if alpha is rational."""
    N = gp.h + 1
    Q = gp.Q
    if _exactable(gp.alpha):
        lam = Fraction(gp.h ** 2 - Fraction(gp.k - 2, 1 + Fraction(gp.alpha)) ** 2, 1) / 4
        p = Fraction(Q + 2, 1) / (Q - 2)
    else:
        lam = (gp.h ** 2 - ((gp.k - 2) / (1.0 + gp.alpha)) ** 2) / 4.0
        p = (Q + 2.0) / (Q - 2.0)
    return N, p, lam


def _reject_borderline(N: int, lam, context: str):
    endpoint = Fraction(N - 1, 2) ** 2
    if _rat(lam) is not None:
        hit = Fraction(lam) == endpoint
    else:
        hit = abs(float(lam) - float(endpoint)) <= 1e-12 * float(endpoint)
    if hit:
        raise BorderlineCaseError(
            f"{context}: mapped lambda equals ((N-1)/2)^2 = {float(endpoint)}; "
            "the problem leaves H^1 there"
        )


def hsm_to_hyperbolic(hp: HSMParams) -> Params:
    """Ball-problem parameters equivalent to the HSM data.

    k = 2 with eta = 0 maps to the excluded endpoint lam = ((N-1)/2)^2 and
    is rejected.
    """
    N, p, lam = hsm_parameter_map(hp)
    _reject_borderline(N, lam, "hsm_to_hyperbolic")
    return Params(N, float(p), float(lam))


def grushin_to_hyperbolic(gp: GrushinParams) -> Params:
    """Ball-problem parameters equivalent to the Grushin data; k = 2 is the
    borderline case and is rejected."""
    N, p, lam = grushin_parameter_map(gp)
    _reject_borderline(N, lam, "grushin_to_hyperbolic")
    return Params(N, float(p), float(lam))


# ---------------------------------------------------------------------------
# solution transport
# ---------------------------------------------------------------------------

def _ball_value(profile, r, z):
    """Value of the radial ball solution at the half-space point (z, r)."""
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    vec = np.concatenate([r[..., None], z], axis=-1)
    w = halfspace_map(vec)
    rho = np.sqrt(np.sum(w * w, axis=-1))
    tt = 2.0 * np.arctanh(np.minimum(rho, 1.0 - 1e-15))
    u, _ = profile.evaluate(np.ravel(tt))
    return u.reshape(tt.shape)


@dataclass
class CylindricalFunction:
    """A function on R^n = R^k x R^(n-k) depending on y only through |y|."""

    k: int
    n: int
    _cyl: object

    def cyl(self, rho, z):
        """Evaluate at |y| = rho (positive) and z."""
        rho = np.asarray(rho, dtype=float)
        if np.any(rho <= 0.0):
            raise ValueError("evaluation requires |y| > 0")
        return self._cyl(rho, np.asarray(z, dtype=float))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        rho = np.sqrt(np.sum(x[..., : self.k] ** 2, axis=-1))
        return self.cyl(rho, x[..., self.k:])


def transport_to_hsm(profile, hp: HSMParams) -> CylindricalFunction:
    """Cylindrical HSM solution from a radial ball solution at the mapped
    parameters: u~(y, z) = |y|^(-(n-2)/2) u_ball(M(|y|, z))."""
    half = (hp.n - 2.0) / 2.0

    def f(rho, z):
        return rho ** -half * _ball_value(profile, rho, z)

    return CylindricalFunction(k=hp.k, n=hp.n, _cyl=f)


def transport_to_grushin(profile, gp: GrushinParams) -> CylindricalFunction:
    """Cylindrical Grushin solution from a radial ball solution at the mapped
    parameters:

        phi(y, z) = (1+alpha)^((Q-2)/2) s^(-(Q-2)/2) u_ball(M(s^(1+alpha), z)),

    with s = |y|.  The amplitude factor makes the nonlinearity come out with
    unit coefficient: substituting s^(-(Q-2)/2) Phi(s^(1+alpha), z) into the
    Grushin operator leaves a 1/(1+alpha)^2 in front of |phi|^(p-1) phi,
    which the rescaling absorbs (p - 1 = 4/(Q-2)).  Verified against the
    finite-difference residual oracle.
    """
    Q = float(gp.Q)
    n = gp.k + gp.h
    gamma = (1.0 + gp.alpha) ** ((Q - 2.0) / 2.0)

    def f(s, z):
        r = s ** (1.0 + gp.alpha)
        return gamma * s ** (-(Q - 2.0) / 2.0) * _ball_value(profile, r, z)

    return CylindricalFunction(k=gp.k, n=n, _cyl=f)


# ---------------------------------------------------------------------------
# finite-difference residual oracles
# ---------------------------------------------------------------------------

def _cyl_laplacian(f: CylindricalFunction, rho: float, z: np.ndarray,
                   h: float, k_dims: int):
    """(Lap_y + Lap_z) of a cylindrical function by centered differences."""
    v0 = float(f.cyl(np.asarray([rho]), z[None, :])[0])
    d2r = (float(f.cyl(np.asarray([rho + h]), z[None, :])[0]) - 2.0 * v0
           + float(f.cyl(np.asarray([rho - h]), z[None, :])[0])) / (h * h)
    d1r = (float(f.cyl(np.asarray([rho + h]), z[None, :])[0])
           - float(f.cyl(np.asarray([rho - h]), z[None, :])[0])) / (2.0 * h)
    lap_y = d2r + (k_dims - 1.0) / rho * d1r
    lap_z = 0.0
    for i in range(len(z)):
        zp = z.copy(); zp[i] += h
        zm = z.copy(); zm[i] -= h
        lap_z += (float(f.cyl(np.asarray([rho]), zp[None, :])[0]) - 2.0 * v0
                  + float(f.cyl(np.asarray([rho]), zm[None, :])[0])) / (h * h)
    return lap_y, lap_z, v0


def hsm_residual(f: CylindricalFunction, hp: HSMParams, points,
                 h: float = 1e-3) -> float:
    """Max |  -Lap u - eta u/|y|^2 - |u|^(p_t-1) u/|y|^t  | at the samples.

    Points are (rho, z) pairs with rho = |y| > h.
    """
    pt = float(hp.p_t)
    worst = 0.0
    for rho, z in points:
        z = np.asarray(z, dtype=float)
        lap_y, lap_z, v0 = _cyl_laplacian(f, float(rho), z, h, hp.k)
        res = (-(lap_y + lap_z) - hp.eta * v0 / rho ** 2
               - math.copysign(abs(v0) ** pt, v0) / rho ** hp.t)
        worst = max(worst, abs(res))
    return worst


def grushin_residual(f: CylindricalFunction, gp: GrushinParams, points,
                     h: float = 1e-3) -> float:
    """Max residual of the critical Grushin equation at the samples.

    The nonlinearity is taken in its odd form |phi|^(p-1) phi, the form
    solved by sign-changing solutions.
    """
    Q = float(gp.Q)
    p = (Q + 2.0) / (Q - 2.0)
    worst = 0.0
    for s, z in points:
        z = np.asarray(z, dtype=float)
        lap_y, lap_z, v0 = _cyl_laplacian(f, float(s), z, h, gp.k)
        res = lap_y + (1.0 + gp.alpha) ** 2 * s ** (2.0 * gp.alpha) * lap_z \
            + math.copysign(abs(v0) ** p, v0)
        worst = max(worst, abs(res))
    return worst


def truncated_dirichlet_norm(f: CylindricalFunction, rho_range=(0.3, 3.0),
                             zeta_max: float = 3.0, n_grid: int = 60,
                             h: float = 1e-5) -> float:
    """Dirichlet integral over the annulus a < |y| < A, |z| < Z.

    The transported functions are biradial (they depend on z through |z|
    only), so the integral reduces to two dimensions.  Used as the growth
    observable for solution families; the full-space integral is not
    attempted.
    """
    k, n = f.k, f.n
    m = n - k
    rho = np.linspace(rho_range[0], rho_range[1], n_grid)
    zeta = np.linspace(1e-3, zeta_max, n_grid)
    R, Z = np.meshgrid(rho, zeta, indexing="ij")

    def val(rr, zz):
        z = np.zeros(R.shape + (m,))
        z[..., 0] = zz
        return f.cyl(rr, z)

    dr = (val(R + h, Z) - val(R - h, Z)) / (2.0 * h)
    dz = (val(R, Z + h) - val(R, Z - h)) / (2.0 * h)
    meas = R ** (k - 1) * Z ** (m - 1)
    integrand = (dr * dr + dz * dz) * meas
    om = omega_sphere(k) * (omega_sphere(m) if m > 1 else 2.0)
    return om * float(np.trapezoid(np.trapezoid(integrand, zeta, axis=1), rho))
