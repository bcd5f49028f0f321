"""Direct variational minimization over radial piecewise-linear functions.

Serves as the second, shooting-independent route to ground-state levels,
nodal levels and the embedding best constant.  To keep the discrete problem
well conditioned the minimization runs in the Liouville variable

    w(t) = u(t) (omega sinh(t)^(N-1))^(1/2),

in which the quadratic form becomes

    Q(u) = int [ w'^2 + (W(t) - lam) w^2 ] dt,
    W(t) = ((N-1)/2)^2 + (N-1)(N-3)/4 / sinh(t)^2,

with w = 0 at both interval ends (the boundary terms of the transform vanish
for N >= 3) and W - lam > 0 throughout the admissible range, while the
nonlinear term carries the inverse weight rho^(-(p-1)/2), integrable at the
origin.  The Rayleigh quotient

    R(u) = Q(u) / (int |u|^(p+1) dV)^(2/(p+1))

is minimized by inverse iteration on the tridiagonal stiffness system,
w <- K^(-1) load(|w|^(p-1) w), renormalized each step, which converges to
the positive ground state of the interval; the constrained critical level is
the monotone image level = (p-1)/(2(p+1)) R^((p+1)/(p-1)).  Nodal levels sum
independent ground levels over annuli and minimize over the interface radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded
from scipy.optimize import minimize, minimize_scalar

from .params import Params

__all__ = ["GalerkinResult", "minimize_quotient", "ground_level", "nodal_level"]


@dataclass
class GalerkinResult:
    quotient: float
    level: float
    grid: np.ndarray
    values: np.ndarray     # u values at the grid nodes
    converged: bool
    iterations: int = 0


def _graded_grid(t_left: float, T: float, n: int, t_min: float) -> np.ndarray:
    """Geometric spacing near t_left, capped at the uniform width."""
    uniform = (T - t_left) / max(n, 16)
    pts = [t_left]
    width = max(t_min, uniform * 1e-6)
    while pts[-1] + width < T and len(pts) < 50 * n:
        pts.append(pts[-1] + width)
        width = min(width * 1.2, uniform)
    pts.append(T)
    return np.asarray(pts)


class _Discretization:
    """P1 elements for the Liouville-form quotient on a fixed grid."""

    def __init__(self, grid: np.ndarray, params: Params, ngauss: int = 8):
        self.grid = grid
        self.params = params
        x, w = np.polynomial.legendre.leggauss(ngauss)
        a = grid[:-1][:, None]
        b = grid[1:][:, None]
        half = 0.5 * (b - a)
        self.tn = 0.5 * (a + b) + half * x[None, :]
        self.xi = (self.tn - a) / (b - a)
        self.gw = half * w[None, :]
        N = params.N
        pot = ((N - 1.0) / 2.0) ** 2 + (N - 1.0) * (N - 3.0) / 4.0 / np.sinh(self.tn) ** 2
        self.pot = pot - params.lam
        rho = params.omega * np.sinh(self.tn) ** (N - 1.0)
        self.nlw = self.gw * rho ** (-(params.p - 1.0) / 2.0)
        self._assemble()

    def _assemble(self):
        grid, pot, gw, xi = self.grid, self.pot, self.gw, self.xi
        h = np.diff(grid)
        n = len(grid)
        diag = np.zeros(n)
        off = np.zeros(n - 1)
        # stiffness
        np.add.at(diag, np.arange(n - 1), 1.0 / h)
        np.add.at(diag, np.arange(1, n), 1.0 / h)
        off -= 1.0 / h
        # potential mass (positive definite since W - lam > 0)
        p00 = np.sum(pot * (1.0 - xi) ** 2 * gw, axis=1)
        p11 = np.sum(pot * xi ** 2 * gw, axis=1)
        p01 = np.sum(pot * xi * (1.0 - xi) * gw, axis=1)
        np.add.at(diag, np.arange(n - 1), p00)
        np.add.at(diag, np.arange(1, n), p11)
        off += p01
        # interior unknowns only (Dirichlet at both ends)
        self.banded = np.zeros((2, n - 2))
        self.banded[1] = diag[1:-1]
        self.banded[0, 1:] = off[1:-1]

    def quadratic(self, w: np.ndarray) -> float:
        h = np.diff(self.grid)
        dw = np.diff(w) / h
        wg = w[:-1, None] * (1.0 - self.xi) + w[1:, None] * self.xi
        return float(np.sum(dw * dw * np.sum(self.gw, axis=1))
                     + np.sum(self.pot * wg * wg * self.gw))

    def nonlinear(self, w: np.ndarray) -> float:
        wg = w[:-1, None] * (1.0 - self.xi) + w[1:, None] * self.xi
        return float(np.sum(np.abs(wg) ** (self.params.p + 1.0) * self.nlw))

    def load(self, w: np.ndarray) -> np.ndarray:
        wg = w[:-1, None] * (1.0 - self.xi) + w[1:, None] * self.xi
        dens = np.sign(wg) * np.abs(wg) ** self.params.p * self.nlw
        f = np.zeros(len(w))
        np.add.at(f, np.arange(len(w) - 1), np.sum(dens * (1.0 - self.xi), axis=1))
        np.add.at(f, np.arange(1, len(w)), np.sum(dens * self.xi, axis=1))
        return f

    def solve(self, rhs_interior: np.ndarray) -> np.ndarray:
        out = np.zeros(len(self.grid))
        out[1:-1] = solveh_banded(self.banded, rhs_interior)
        return out

    def quotient(self, w: np.ndarray) -> float:
        return self.quadratic(w) / self.nonlinear(w) ** (2.0 / (self.params.p + 1.0))


def minimize_quotient(params: Params, T: float, n: int = 2500,
                      t_left: float = 0.0, t_min: float = None,
                      max_iter: int = 3000, rtol: float = 1e-13) -> GalerkinResult:
    """Minimize the Rayleigh quotient on [t_left, T] by inverse iteration."""
    if t_min is None:
        t_min = (T - t_left) / n
    grid = _graded_grid(t_left, T, n, t_min)
    disc = _Discretization(grid, params)

    w = np.sin(math.pi * (grid - t_left) / (T - t_left)) ** 2
    w[0] = w[-1] = 0.0
    R_old = disc.quotient(w)
    its = 0
    converged = False
    for its in range(1, max_iter + 1):
        v = disc.solve(disc.load(w)[1:-1])
        nv = float(np.max(np.abs(v)))
        if nv == 0.0:
            break
        w = v / nv
        R = disc.quotient(w)
        if abs(R - R_old) <= rtol * abs(R):
            converged = True
            R_old = R
            break
        R_old = R

    cp = (params.p - 1.0) / (2.0 * (params.p + 1.0))
    level = cp * R_old ** ((params.p + 1.0) / (params.p - 1.0))
    rho_half = np.sqrt(params.omega) * np.sinh(np.maximum(grid, 1e-300)) ** ((params.N - 1.0) / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(grid > t_left, w / np.where(rho_half > 0, rho_half, 1.0), 0.0)
    return GalerkinResult(float(R_old), float(level), grid, u, converged, its)


def ground_level(params: Params, T: float = None, n: int = 2500,
                 t_min: float = None) -> float:
    """Least energy of a nontrivial radial critical point (constrained min)."""
    if T is None:
        T = max(12.0, 30.0 / params.decay_rate)
    return minimize_quotient(params, T=T, n=n, t_min=t_min).level


def nodal_level(params: Params, k: int, T: float = None, n: int = 700) -> float:
    """Least energy over radial functions with k prescribed sign changes.

    Decomposes [0, T] into k+1 annuli with Dirichlet interfaces, sums the
    per-annulus ground levels, and minimizes over the interface radii (a
    coarse landscape scan seeds the local polish).  Coarse by construction;
    intended as an independent oracle, not a solver.
    """
    if T is None:
        T = max(14.0, 30.0 / params.decay_rate) + 2.0 * k
    if k == 0:
        return ground_level(params, T=T, n=max(n, 1500))

    min_gap = 0.12

    def total(interfaces):
        pts = np.concatenate([[0.0], np.sort(np.atleast_1d(interfaces)), [T]])
        if np.any(np.diff(pts) < min_gap):
            return 1e9
        lv = 0.0
        for aa, bb in zip(pts[:-1], pts[1:]):
            lv += minimize_quotient(params, T=bb, t_left=aa, n=n).level
        return lv

    if k == 1:
        grid = np.geomspace(0.12, min(5.0, T - 1.0), 12)
        vals = [total([a]) for a in grid]
        i = int(np.argmin(vals))
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]
        res = minimize_scalar(lambda a: total([a]), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-3})
        return float(min(res.fun, vals[i]))

    best = None
    for a in np.geomspace(0.15, 1.5, 6):
        for d in np.geomspace(0.25, 2.0, 6):
            x = a + d * np.arange(k)
            v = total(x)
            if best is None or v < best[0]:
                best = (v, x)
    res = minimize(total, best[1], method="Nelder-Mead",
                   options={"xatol": 2e-3, "fatol": 1e-7, "maxiter": 80 * k})
    return float(min(res.fun, best[0]))