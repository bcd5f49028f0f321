"""Radial reduction and shooting solver.

In geodesic polar coordinates the equation -Lap_B u - lam*u = |u|^(p-1) u
reduces, for radial u, to

    u'' + (N-1) coth(t) u' + lam*u + |u|^(p-1) u = 0,   u'(0) = 0,

with t the hyperbolic distance to the origin.  Finite-energy solutions decay
like exp(-c t) with c = (N-1)/2 + sqrt(((N-1)/2)^2 - lam); the generic
trajectory sheds its amplitude only at the slow linearised rate, so shooting
selects solutions as sign transitions of the late-time tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .params import Params

__all__ = [
    "Params",
    "ShootConfig",
    "RadialProfile",
    "ShootingResult",
    "SolutionNotFoundError",
    "radial_ode_rhs",
    "series_start",
    "shoot",
    "find_nodal_solution",
    "nonexistence_scan",
    "decay_check",
    "ode_residual_max",
]


class SolutionNotFoundError(RuntimeError):
    """Shooting scan exhausted without the requested solution.

    Meaningful outcome in nonexistence regimes.
    """


@dataclass(frozen=True)
class ShootConfig:
    """Integrator and classification settings for the shooting solver."""

    t0_cap: float = 1e-3          # series-start handoff point (shrunk for large |s|)
    T_max: float = 25.0           # primary integration horizon
    T_extend: float = 60.0        # horizon cap when classification is ambiguous
    T_bisect: float = 40.0        # horizon for tail-sign bisection
    rtol: float = 1e-12
    atol: float = 1e-14
    grid_step: float = 1e-3       # storage grid spacing
    blowup_threshold: float = 1e8
    decay_eps: float = 1e-8       # |u(T)| / max(1,|u|_inf) bound for a solution
    slope_tol: float = 0.05       # relative tolerance on the fitted tail rate
    slow_factor: float = 0.80     # slope above -slow_factor*c counts as slow
    max_bisect: int = 80
    store_profile: bool = True

    @classmethod
    def fine(cls) -> "ShootConfig":
        return cls()

    @classmethod
    def scan(cls) -> "ShootConfig":
        """Cheap settings for classification scans over many s values."""
        return cls(rtol=1e-9, atol=1e-11, grid_step=0.05)


# ---------------------------------------------------------------------------
# ODE right-hand side and series start
# ---------------------------------------------------------------------------

def radial_ode_rhs(t: float, state, params: Params):
    """(u, u') -> (u', u'') for the radial equation; valid for t > 0."""
    u, v = state
    coth = 1.0 / math.tanh(t)
    f = params.lam * u + math.copysign(abs(u) ** params.p, u)
    return (v, -(params.N - 1.0) * coth * v - f)


def series_start(s: float, params: Params, t0: float):
    """Regular series solution at the pole, accurate to O(t0^6).

    u(t) = s + a t^2 + b t^4 with 2aN = -f(s) and
    4b(N+2) = -f'(s) a - 2a(N-1)/3, removing the coth singularity.
    """
    lam, p, N = params.lam, params.p, params.N
    f = lam * s + math.copysign(abs(s) ** p, s)
    fp = lam + p * abs(s) ** (p - 1.0)
    a = -f / (2.0 * N)
    b = -(fp * a + 2.0 * a * (N - 1.0) / 3.0) / (4.0 * (N + 2.0))
    u0 = s + a * t0 * t0 + b * t0 ** 4
    v0 = 2.0 * a * t0 + 4.0 * b * t0 ** 3
    return u0, v0


def _start_point(s: float, params: Params, config: ShootConfig) -> float:
    # shrink the handoff point when the local curvature scale is fast
    scale = abs(params.lam) + abs(s) ** (params.p - 1.0) + 1.0
    return min(config.t0_cap, 3e-2 / math.sqrt(scale))


def _series_eval(s: float, params: Params, t: np.ndarray):
    lam, p, N = params.lam, params.p, params.N
    f = lam * s + math.copysign(abs(s) ** p, s)
    fp = lam + p * abs(s) ** (p - 1.0)
    a = -f / (2.0 * N)
    b = -(fp * a + 2.0 * a * (N - 1.0) / 3.0) / (4.0 * (N + 2.0))
    return s + a * t * t + b * t ** 4, 2.0 * a * t + 4.0 * b * t ** 3


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

class _OdeDense:
    """Evaluator backed by the integrator's dense output plus the series start."""

    def __init__(self, s, params, t0, sol, t_end):
        self.s = s
        self.params = params
        self.t0 = t0
        self.sol = sol
        self.t_end = t_end

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        u = np.zeros_like(t)
        du = np.zeros_like(t)
        small = t < self.t0
        inside = (~small) & (t <= self.t_end)
        if np.any(small):
            u[small], du[small] = _series_eval(self.s, self.params, t[small])
        if np.any(inside):
            vals = self.sol(t[inside])
            u[inside] = vals[0]
            du[inside] = vals[1]
        return u, du


class _SplineDense:
    def __init__(self, t, u, du):
        self.spline = CubicHermiteSpline(t, u, du)
        self.dspline = self.spline.derivative()
        self.t_end = float(t[-1])
        self.t_start = float(t[0])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= self.t_start) & (t <= self.t_end)
        u = np.where(inside, self.spline(np.clip(t, self.t_start, self.t_end)), 0.0)
        du = np.where(inside, self.dspline(np.clip(t, self.t_start, self.t_end)), 0.0)
        return u, du


class _CallableDense:
    def __init__(self, f, df, t_end):
        self.f = f
        self.df = df
        self.t_end = t_end

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        inside = t <= self.t_end
        tc = np.where(inside, t, self.t_end)
        return np.where(inside, self.f(tc), 0.0), np.where(inside, self.df(tc), 0.0)


class _TailExtendedDense:
    """Trajectory up to t_cut, exact linearised decay u_cut e^(-c (t-t_cut))
    beyond it.

    The hyperbolic volume weight amplifies the integrator's noise floor
    exponentially, so quadrature must never see raw late-time samples of a
    converged solution; the analytic tail is accurate to the size of the
    nonlinearity at the junction amplitude.
    """

    def __init__(self, base, t_cut, u_cut, rate, t_end):
        self.base = base
        self.t_cut = t_cut
        self.u_cut = u_cut
        self.rate = rate
        self.t_end = t_end

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        u = np.zeros_like(t)
        du = np.zeros_like(t)
        head = t <= self.t_cut
        if np.any(head):
            u[head], du[head] = self.base(t[head])
        tail = ~head
        if np.any(tail):
            amp = self.u_cut * np.exp(-self.rate * (t[tail] - self.t_cut))
            u[tail] = amp
            du[tail] = -self.rate * amp
        return u, du


def _count_nodes(u: np.ndarray, floor: float) -> int:
    sig = u[np.abs(u) > floor]
    if len(sig) < 2:
        return 0
    return int(np.count_nonzero(np.diff(np.sign(sig)) != 0))


@dataclass
class RadialProfile:
    """A radial function on [0, T] sampled on a grid, with derivative data.

    `dense` (when present) evaluates (u, u') anywhere on [0, T] and is used
    by all quadratures; the arrays are the exported representation.
    """

    t: np.ndarray
    u: np.ndarray
    du: np.ndarray
    node_count: int = 0
    decay_rate: float = math.nan
    dense: Optional[Callable] = None
    breakpoints: tuple = ()
    exclusions: tuple = ()  # t-intervals where the evaluator switches representation

    @property
    def T(self) -> float:
        return float(self.t[-1])

    def __call__(self, tq):
        return self.evaluate(tq)[0]

    def evaluate(self, tq):
        tq = np.atleast_1d(np.asarray(tq, dtype=float))
        if self.dense is not None:
            return self.dense(tq)
        interp = _SplineDense(self.t, self.u, self.du)
        self.dense = interp
        return interp(tq)

    def derivative(self, tq):
        return self.evaluate(tq)[1]

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.u))) if len(self.u) else 0.0

    @classmethod
    def from_arrays(cls, t, u, du, node_floor_rel: float = 1e-8) -> "RadialProfile":
        t = np.asarray(t, dtype=float)
        u = np.asarray(u, dtype=float)
        du = np.asarray(du, dtype=float)
        umax = float(np.max(np.abs(u))) if len(u) else 0.0
        nodes = _count_nodes(u, node_floor_rel * umax) if umax > 0 else 0
        return cls(t=t, u=u, du=du, node_count=nodes)

    @classmethod
    def from_callable(cls, f, df, T: float, n: int = 2001) -> "RadialProfile":
        t = np.linspace(0.0, T, n)
        u = np.asarray(f(t), dtype=float)
        du = np.asarray(df(t), dtype=float)
        prof = cls.from_arrays(t, u, du)
        prof.dense = _CallableDense(f, df, T)
        return prof

    @classmethod
    def zero(cls, T: float = 1.0, n: int = 11) -> "RadialProfile":
        t = np.linspace(0.0, T, n)
        z = np.zeros_like(t)
        return cls(t=t, u=z, du=z, node_count=0, decay_rate=math.nan)

    def scaled(self, c: float) -> "RadialProfile":
        base = self.dense
        dense = None
        if base is not None:
            dense = lambda tq, _b=base, _c=c: tuple(_c * a for a in _b(tq))
        return RadialProfile(
            t=self.t, u=c * self.u, du=c * self.du,
            node_count=self.node_count, decay_rate=self.decay_rate,
            dense=dense, breakpoints=self.breakpoints,
        )

    def zeros(self) -> np.ndarray:
        """Accurate locations of the sign changes of u."""
        umax = self.max_abs
        if umax == 0.0:
            return np.asarray([])
        floor = 1e-8 * umax
        idx = np.where(np.abs(self.u) > floor)[0]
        out = []
        for a, b in zip(idx[:-1], idx[1:]):
            if np.sign(self.u[a]) != np.sign(self.u[b]):
                f = lambda x: float(self.evaluate(np.asarray([x]))[0][0])
                out.append(brentq(f, self.t[a], self.t[b], xtol=1e-12))
        return np.asarray(out)

    def positive_part(self) -> "RadialProfile":
        return self._clipped(+1.0)

    def negative_part(self) -> "RadialProfile":
        """Negative part as a nonnegative function: u^- = max(-u, 0)."""
        return self._clipped(-1.0)

    def _clipped(self, sign: float) -> "RadialProfile":
        zs = tuple(self.zeros())
        base = self.dense if self.dense is not None else _SplineDense(self.t, self.u, self.du)

        def dense(tq, _b=base, _s=sign):
            u, du = _b(tq)
            keep = (_s * u) > 0.0
            return np.where(keep, _s * u, 0.0), np.where(keep, _s * du, 0.0)

        u = np.where(sign * self.u > 0, sign * self.u, 0.0)
        du = np.where(sign * self.u > 0, sign * self.du, 0.0)
        return RadialProfile(t=self.t, u=u, du=du, node_count=0,
                             decay_rate=self.decay_rate, dense=dense, breakpoints=zs)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("t,u,u_prime\n")
            for ti, ui, dui in zip(self.t, self.u, self.du):
                fh.write(f"{format(ti, '.17g')},{format(ui, '.17g')},{format(dui, '.17g')}\n")

    @classmethod
    def from_csv(cls, path) -> "RadialProfile":
        data = np.genfromtxt(path, delimiter=",", skip_header=1)
        return cls.from_arrays(data[:, 0], data[:, 1], data[:, 2])


# ---------------------------------------------------------------------------
# trajectory analysis
# ---------------------------------------------------------------------------

CLASS_DECAYING = "decaying-solution"
CLASS_BLOWUP = "blow-up"
CLASS_SIGN_GROWTH = "sign-change-then-growth"
CLASS_SLOW = "slow-decay"
CLASS_UNDETERMINED = "undetermined"


@dataclass
class _TailInfo:
    nodes: int
    tail_sign: float
    slope: float
    t_sig: float
    tail_small: bool
    fit_ok: bool
    last_zero_t: float = 0.0
    m_tail: float = 0.0


def _noise_floor(t, umax: float, params: Params, config: ShootConfig,
                 coeff: float = 500.0):
    """Estimated contamination amplitude along the trajectory.

    Absolute-tolerance noise is flat; relative-tolerance errors injected at
    the amplitude peak ride the slowest linearised mode afterwards, as does
    the leftover slow component of a bisection-converged trajectory.  The
    default coefficient is sized so that leftovers of converged solutions
    stay below the floor while the genuinely tiny outer pieces of
    bubble-tower profiles stay far above it.
    """
    decay = np.exp(-params.slow_rate * np.asarray(t, dtype=float))
    return np.maximum(200.0 * config.atol, coeff * config.rtol * umax * decay)


def _linear_band_cap(params: Params) -> float:
    """Amplitude below which the nonlinearity perturbs the linearised tail
    by under a percent of the spectral scale."""
    scale = abs(params.lam) + params.decay_rate ** 2
    return (1e-2 * scale) ** (1.0 / (params.p - 1.0))


def _tail_analysis(t, u, params, config) -> _TailInfo:
    umax = float(np.max(np.abs(u)))
    if umax == 0.0:
        return _TailInfo(0, 0.0, math.nan, 0.0, True, False)
    scale = max(1.0, umax)
    floor = _noise_floor(t, umax, params, config)

    tiny = np.maximum(10.0 * config.atol, 0.2 * floor)
    sig_idx = np.where(np.abs(u) > tiny)[0]
    t_sig = float(t[sig_idx[-1]]) if len(sig_idx) else 0.0
    tail_sign = float(np.sign(u[sig_idx[-1]])) if len(sig_idx) else 0.0

    # sign changes counted only where the amplitude clears the noise floor
    strong = np.where(np.abs(u) > floor)[0]
    nodes = 0
    last_zero_t = 0.0
    if len(strong) >= 2:
        sgn = np.sign(u[strong])
        flips = np.where(np.diff(sgn) != 0)[0]
        nodes = int(len(flips))
        if len(flips):
            last_zero_t = float(t[strong[flips[-1] + 1]])
    after = t >= last_zero_t
    m_tail = float(np.max(np.abs(u[after]))) if np.any(after) else umax

    # rate fit on an amplitude band clear of the noise floor, the
    # nonlinear regime and the core of the post-last-zero piece
    a_hi = min(3e-2 * m_tail, _linear_band_cap(params))
    mask = (t > last_zero_t + 0.3) & (np.abs(u) >= 30.0 * floor) & (np.abs(u) <= a_hi)
    slope = math.nan
    fit_ok = False
    if np.count_nonzero(mask) >= 8 and t[mask][-1] - t[mask][0] > 1.2:
        tm = t[mask]
        ym = np.log(np.abs(u[mask]))
        A = np.vstack([np.ones_like(tm), tm]).T
        coef, *_ = np.linalg.lstsq(A, ym, rcond=None)
        slope = float(coef[1])
        fit_ok = True

    tail_small = abs(u[-1]) < config.decay_eps * scale
    return _TailInfo(nodes, tail_sign, slope, t_sig, tail_small, fit_ok,
                     last_zero_t, m_tail)

def _classify(info: _TailInfo, blew_up: bool, params: Params, config: ShootConfig) -> str:
    c = params.decay_rate
    if blew_up:
        return CLASS_BLOWUP
    if info.tail_small and info.fit_ok and abs(-info.slope - c) <= config.slope_tol * c:
        return CLASS_DECAYING
    if info.fit_ok and info.slope > -config.slow_factor * c:
        return CLASS_SIGN_GROWTH if info.nodes >= 1 else CLASS_SLOW
    if not info.fit_ok and not info.tail_small:
        # bounded, non-decaying tail without a usable fit window
        return CLASS_SIGN_GROWTH if info.nodes >= 1 else CLASS_SLOW
    return CLASS_UNDETERMINED


@dataclass
class ShootingResult:
    s: float
    profile: RadialProfile
    classification: str
    energy: float
    norm_lambda: float = math.nan
    nehari_residual: float = math.nan

    @property
    def node_count(self) -> int:
        return self.profile.node_count

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "classification": self.classification,
            "node_count": self.node_count,
            "energy": self.energy,
            "decay_rate": self.profile.decay_rate,
            "norm_lambda": self.norm_lambda,
            "nehari_residual": self.nehari_residual,
        }


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def _integrate(s: float, params: Params, config: ShootConfig, horizon: float,
               dense: bool):
    t0 = _start_point(s, params, config)
    u0, v0 = series_start(s, params, t0)
    # growth beyond the initial amplitude scale; an absolute threshold would
    # fire on the initial spike of large-s critical trajectories
    thr = config.blowup_threshold * max(1.0, abs(s))

    def rhs(t, y):
        return radial_ode_rhs(t, y, params)

    def blowup(t, y):
        return abs(y[0]) - thr

    blowup.terminal = True

    sol = solve_ivp(
        rhs, (t0, horizon), (u0, v0), method="DOP853",
        rtol=config.rtol, atol=config.atol,
        dense_output=dense, events=blowup,
    )
    blew_up = len(sol.t_events[0]) > 0
    return t0, sol, blew_up


def _step_samples(t0, sol, s, params):
    """Trajectory samples at the accepted solver steps, prefixed by t = 0."""
    t = np.concatenate(([0.0], sol.t))
    u = np.concatenate(([s], sol.y[0]))
    du = np.concatenate(([0.0], sol.y[1]))
    return t, u, du


def shoot(s: float, params: Params, config: ShootConfig = ShootConfig(),
          horizon: Optional[float] = None) -> ShootingResult:
    """Integrate from u(0) = s, classify the trajectory, report energy data.

    s = 0 returns the trivial profile without integration.
    """
    from . import energy as energy_mod

    if s == 0.0:
        return ShootingResult(0.0, RadialProfile.zero(), CLASS_DECAYING, 0.0, 0.0, 0.0)

    T = horizon if horizon is not None else config.T_max
    t0, sol, blew_up = _integrate(s, params, config, T, dense=True)
    t_end = float(sol.t[-1])
    grid = np.arange(0.0, t_end, config.grid_step)
    grid = np.append(grid, t_end)
    dense_eval = _OdeDense(s, params, t0, sol.sol, t_end)
    ug, dug = dense_eval(grid)

    info = _tail_analysis(grid, ug, params, config)
    label = _classify(info, blew_up, params, config)

    if label == CLASS_UNDETERMINED and horizon is None and T < config.T_extend and not blew_up:
        return shoot(s, params, config, horizon=config.T_extend)

    breakpoints = [t0]
    exclusions = [(t0 - 3 * config.grid_step, t0 + 3 * config.grid_step)]
    rate = -info.slope if info.fit_ok else math.nan

    if label == CLASS_DECAYING:
        # splice in the exact linearised tail before the trajectory reaches
        # the noise floor; sinh^(N-1) would amplify raw late-time samples
        umax = float(np.max(np.abs(ug)))
        floor = _noise_floor(grid, umax, params, config)
        clean = (grid > info.last_zero_t + 0.1) & (np.abs(ug) >= 100.0 * floor)
        a_cut = min(1e-3 * info.m_tail, max(1e-5 * info.m_tail, 1e3 * config.atol))
        cand = np.where(clean & (np.abs(ug) >= a_cut))[0]
        if len(cand):
            i_cut = cand[-1]
            t_cut = float(grid[i_cut])
            u_cut, du_cut = (float(v[0]) for v in dense_eval(np.asarray([t_cut])))
            c_loc = -du_cut / u_cut if u_cut != 0.0 else params.decay_rate
            if abs(c_loc - params.decay_rate) > 0.1 * params.decay_rate:
                c_loc = params.decay_rate
            span = 30.0 / max(2.0 * c_loc - (params.N - 1.0), 0.3)
            t_tail_end = t_cut + min(span, 80.0)
            dense_eval = _TailExtendedDense(dense_eval, t_cut, u_cut, c_loc, t_tail_end)
            grid = np.arange(0.0, t_tail_end, config.grid_step)
            grid = np.append(grid, t_tail_end)
            ug, dug = dense_eval(grid)
            breakpoints.append(t_cut)
            exclusions.append((t_cut - 3 * config.grid_step, t_cut + 3 * config.grid_step))

    profile = RadialProfile(
        t=grid, u=ug, du=dug,
        node_count=info.nodes, decay_rate=rate,
        dense=dense_eval, breakpoints=tuple(breakpoints),
        exclusions=tuple(exclusions),
    )
    rep = energy_mod.energy(profile, params)
    return ShootingResult(
        s=s, profile=profile, classification=label,
        energy=rep.I_lambda,
        norm_lambda=math.sqrt(max(rep.quadratic_term, 0.0)),
        nehari_residual=rep.nehari_residual,
    )


def _tail_sign(s: float, params: Params, config: ShootConfig,
               horizon: float) -> float:
    """Sign of the late tail, read at the last sample above the noise floor.

    The slow-mode amplitude of the trajectory crosses zero exactly at
    finite-energy solutions, flipping this sign; resolution is limited by
    the amplitude at which the fast-decaying part meets the integration
    noise, which in practice pins the shooting parameter to a relative
    accuracy of 1e-9 or better and leaves the converged trajectory on the
    fast branch over the whole quadrature-relevant range.
    """
    t0, sol, blew_up = _integrate(s, params, config, horizon, dense=False)
    if blew_up:
        return float(np.sign(sol.y[0][-1]))
    ts, us, _ = _step_samples(t0, sol, s, params)
    umax = float(np.max(np.abs(us)))
    floor = np.maximum(10.0 * config.atol,
                       _noise_floor(ts, umax, params, config, coeff=10.0))
    sig = np.where(np.abs(us) > floor)[0]
    if not len(sig):
        return float(np.sign(s))
    return float(np.sign(us[sig[-1]]))


_SCAN_SIGN_CFG = ShootConfig(rtol=1e-9, atol=1e-15, store_profile=False)
_BISECT_CFG = ShootConfig(rtol=1e-11, atol=1e-16, store_profile=False)


def solution_brackets(params: Params, s_min: float, s_max: float,
                      per_decade: int = 12, horizon: float = None) -> list:
    """Initial-value brackets containing shooting solutions.

    The sign of the late tail flips exactly where the slow-mode amplitude of
    the trajectory crosses zero, i.e. at decaying solutions; each returned
    (lo, hi) pair straddles one flip.
    """
    if horizon is None:
        horizon = ShootConfig().T_bisect
    n = max(int(per_decade * math.log10(s_max / s_min)) + 1, 8)
    grid = np.geomspace(s_min, s_max, n)
    signs = [_tail_sign(float(s), params, _SCAN_SIGN_CFG, horizon) for s in grid]
    return [(float(grid[i]), float(grid[i + 1]))
            for i in range(n - 1) if signs[i] != signs[i + 1]]


def _bisect_bracket(bracket, params: Params, config: ShootConfig) -> float:
    lo, hi = bracket
    sign_lo = _tail_sign(lo, params, _BISECT_CFG, config.T_bisect)
    for _ in range(config.max_bisect):
        if (hi - lo) < 5e-14 * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if _tail_sign(mid, params, _BISECT_CFG, config.T_bisect) == sign_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_nodal_solution(k: int, params: Params,
                        config: ShootConfig = ShootConfig(),
                        s_min: float = 1e-2, s_max: float = None,
                        per_decade: int = 12) -> ShootingResult:
    """Decaying radial solution with exactly k sign changes.

    Scans u(0) = s over a log grid for sign flips of the late tail, bisects
    the (k+1)-th flip (solutions are ordered by node count along s), and
    integrates the converged initial value at full accuracy.  Falls back to
    checking every bracket if the node count at the expected one disagrees.
    Raises SolutionNotFoundError when the scan exhausts the range; in the
    critical nonexistence regimes this is the expected outcome for k >= 1.
    """
    if k < 0:
        raise ValueError("k must be a nonnegative integer")

    # expand the scan range in chunks until enough brackets accumulate
    caps = [1e2, 1e4, 1e7, 1e10] if s_max is None else [s_max]
    brackets = []
    lo = s_min
    for cap in caps:
        if cap <= lo:
            continue
        brackets += solution_brackets(params, lo, cap, per_decade, config.T_bisect)
        lo = cap
        if len(brackets) > k:
            break
    if len(brackets) <= k:
        raise SolutionNotFoundError(
            f"only {len(brackets)} tail-sign flips for s in [{s_min}, {lo}]; "
            f"no candidate for k={k}"
        )

    order = [k] + [i for i in range(len(brackets)) if i != k]
    for idx in order:
        s_star = _bisect_bracket(brackets[idx], params, config)
        result = shoot(s_star, params, config)
        if result.classification == CLASS_DECAYING and result.node_count == k:
            return result
    raise SolutionNotFoundError(
        f"bisection of {len(brackets)} brackets produced no decaying solution "
        f"with {k} sign changes"
    )


# ---------------------------------------------------------------------------
# nonexistence scan
# ---------------------------------------------------------------------------

@dataclass
class ScanRow:
    s: float
    classification: str
    node_count: int
    energy: float


@dataclass
class ScanReport:
    params: Params
    rows: list = field(default_factory=list)

    @property
    def n_decaying_sign_changing(self) -> int:
        return sum(1 for r in self.rows
                   if r.classification == CLASS_DECAYING and r.node_count >= 1)

    @property
    def n_undetermined(self) -> int:
        return sum(1 for r in self.rows if r.classification == CLASS_UNDETERMINED)

    @property
    def certified(self) -> bool:
        """True when no s produced a decaying sign-changing trajectory and
        every classification is determinate."""
        return self.n_decaying_sign_changing == 0 and self.n_undetermined == 0

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "n_scanned": len(self.rows),
            "n_decaying_sign_changing": self.n_decaying_sign_changing,
            "n_undetermined": self.n_undetermined,
            "certified": self.certified,
            "classification_counts": self._counts(),
        }

    def _counts(self) -> dict:
        out: dict = {}
        for r in self.rows:
            out[r.classification] = out.get(r.classification, 0) + 1
        return out


def nonexistence_scan(params: Params, s_grid,
                      config: ShootConfig = ShootConfig.scan()) -> ScanReport:
    """Certify that no grid trajectory is a decaying sign-changing solution.

    Any trajectory that does classify as a decaying solution is re-shot at
    full accuracy with an extended horizon before it is counted, so near
    misses at scan tolerance do not produce false positives.
    """
    if not params.is_critical:
        raise ValueError("nonexistence scans are defined for the critical power")
    report = ScanReport(params=params)
    for s in np.asarray(s_grid, dtype=float):
        res = shoot(float(s), params, config)
        if res.classification == CLASS_DECAYING and res.node_count >= 1:
            confirm = shoot(float(s), params, ShootConfig(), horizon=ShootConfig().T_extend)
            res = confirm
        report.rows.append(ScanRow(float(s), res.classification, res.node_count, res.energy))
    return report


# ---------------------------------------------------------------------------
# a priori decay checks
# ---------------------------------------------------------------------------

def decay_check(profile: RadialProfile, params: Params, n_samples: int = 2000) -> dict:
    """Post-hoc decay diagnostics for a computed decaying solution.

    (a) sup-decay of |u| and of the metric gradient magnitude |u'| along the
        tail; (b) boundedness of u / ((1-|x|^2)/2)^((N-2)/2) with the sup
        reported as the empirical constant (meaningful for
        lam <= N(N-2)/4); (c) the radial embedding bound
        |u(x)| <= omega^(-1/2) ||u||_H1 ((1-|x|^2)/2)^((N-1)/2) |x|^(-N/2)
        at every grid point.
    """
    from . import energy as energy_mod

    rep = energy_mod.energy(profile, params)
    h1 = math.sqrt(max(rep.gradient_term + rep.mass_term, 0.0))

    t = np.linspace(profile.t[1], profile.T, n_samples)
    u, du = profile.evaluate(t)
    umax = max(profile.max_abs, 1e-300)

    # (1-|x|^2)/2 = 1/(1 + cosh t) when |x| = tanh(t/2)
    w = 1.0 / (1.0 + np.cosh(t))
    x_abs = np.tanh(0.5 * t)

    # (a): both |u| and |u'| small past the significant range
    tail = t > 0.9 * _significant_end(profile)
    sup_tail_u = float(np.max(np.abs(u[tail]))) if np.any(tail) else 0.0
    sup_tail_grad = float(np.max(np.abs(du[tail]))) if np.any(tail) else 0.0

    # (b): ratio to the conformal weight
    ratio = np.abs(u) / w ** ((params.N - 2.0) / 2.0)
    empirical_C = float(np.max(ratio))

    # (c): pointwise embedding bound
    bound = (params.omega ** -0.5) * h1 * w ** ((params.N - 1.0) / 2.0) / x_abs ** (params.N / 2.0)
    margin = bound - np.abs(u)
    min_margin = float(np.min(margin))

    return {
        "sup_tail_u": sup_tail_u,
        "sup_tail_grad": sup_tail_grad,
        "embedding_bound_holds": bool(min_margin > -1e-12 * umax),
        "embedding_min_margin": min_margin,
        "conformal_ratio_C": empirical_C,
        "low_lambda_regime": params.in_low_lambda_regime,
        "h1_norm": h1,
    }


def _significant_end(profile: RadialProfile) -> float:
    umax = profile.max_abs
    if umax == 0.0:
        return profile.T
    idx = np.where(np.abs(profile.u) > 1e-10 * umax)[0]
    return float(profile.t[idx[-1]]) if len(idx) else profile.T


# ---------------------------------------------------------------------------
# independent residual stencil
# ---------------------------------------------------------------------------

def ode_residual_max(profile: RadialProfile, params: Params,
                     h: float = 5e-4, exclude_near_zeros: bool = None) -> float:
    """Max normalized ODE residual at midpoints of a uniform grid.

    u'' at the midpoint comes from the four-point stencil on the stored
    derivative values; u and u' at the midpoint from four-point
    interpolation.  Entirely independent of the right-hand side evaluation
    used during integration.  The residual is normalized by the local
    magnitude of the equation's terms, max(1, |lam u| + |u|^p +
    (N-1)|coth t| |u'|); an absolute reading is not representable in double
    precision once the amplitude grows (u'' alone reaches 1e6 for the larger
    nodal solutions).  Midpoints near sign changes are excluded for p < 2,
    where the nonlinearity loses smoothness, and near the representation
    switches recorded by the profile.
    """
    if exclude_near_zeros is None:
        exclude_near_zeros = params.p < 2.0

    t_end = min(_significant_end(profile), profile.T)
    t_start = profile.t[1] if len(profile.t) > 1 else 0.0
    grid = np.arange(t_start + 2 * h, t_end - 2 * h, h)
    if len(grid) < 8:
        return 0.0
    u_m3, du_m3 = profile.evaluate(grid - 1.5 * h)
    u_m1, du_m1 = profile.evaluate(grid - 0.5 * h)
    u_p1, du_p1 = profile.evaluate(grid + 0.5 * h)
    u_p3, du_p3 = profile.evaluate(grid + 1.5 * h)

    upp = (-du_p3 + 27.0 * du_p1 - 27.0 * du_m1 + du_m3) / (24.0 * h)
    u_mid = (-u_p3 + 9.0 * u_p1 + 9.0 * u_m1 - u_m3) / 16.0
    du_mid = (-du_p3 + 9.0 * du_p1 + 9.0 * du_m1 - du_m3) / 16.0

    coth = 1.0 / np.tanh(grid)
    res = (upp + (params.N - 1.0) * coth * du_mid
           + params.lam * u_mid + np.sign(u_mid) * np.abs(u_mid) ** params.p)
    scale = np.maximum(1.0, np.abs(params.lam * u_mid) + np.abs(u_mid) ** params.p
                       + (params.N - 1.0) * np.abs(coth * du_mid))

    keep = np.ones_like(grid, dtype=bool)
    if exclude_near_zeros:
        for z in profile.zeros():
            keep &= np.abs(grid - z) > 5.0 * h
    for a, b in profile.exclusions:
        keep &= (grid < a - 2.0 * h) | (grid > b + 2.0 * h)
    return float(np.max(np.abs(res[keep] / scale[keep]))) if np.any(keep) else 0.0
